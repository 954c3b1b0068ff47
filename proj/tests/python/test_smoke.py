"""Smoke test for the Python bindings: solve a small lasso problem and
check the result against the ISTA oracle."""

import sys

import numpy as np

import bssn


def main() -> int:
    rng = np.random.default_rng(7)
    m, n = 60, 40
    k = rng.standard_normal((m, n)) / np.sqrt(m)
    k[:n] += 0.3 * np.eye(n)
    f = rng.standard_normal(m)

    obj = bssn.QuadraticObjective(k, f)
    problem = bssn.Problem(obj, 0.2 * np.ones(n), gamma=2.0)

    config = bssn.SolverConfig()
    config.gamma = 2.0
    config.variant = bssn.Variant.modbssn

    result = bssn.solve(problem, np.zeros(n), config)
    assert result.converged, "solver did not converge"
    assert result.records[0].j == 0
    assert result.records[-1].residual_norm < config.tol

    res = problem.residual(result.u_star)
    assert np.linalg.norm(res) < config.tol

    step = bssn.ista_default_step(problem, np.zeros(n))
    ref = bssn.ista_oracle(problem, np.zeros(n), step, 1e-12, 200000)
    assert np.max(np.abs(result.u_star - ref)) < 1e-6, "ISTA disagreement"

    # soft threshold sanity
    out = bssn.soft_threshold(np.array([3.0, -1.0, 0.5]), np.ones(3))
    assert np.allclose(out, [2.0, 0.0, 0.0])

    # deterministic image synthesis
    img = bssn.make_sparse_test_image(16, 0.1, 7)
    img2 = bssn.make_sparse_test_image(16, 0.1, 7)
    assert np.array_equal(img, img2)

    print("python smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
