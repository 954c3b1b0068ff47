#include <doctest.h>

#include "bssn/experiments.hpp"
#include "bssn/newton.hpp"
#include "test_util.hpp"

using namespace bssn;
using bssn::testing::make_random_lasso;
using bssn::testing::make_random_robust;
using bssn::testing::make_scalar_problem;

TEST_CASE("scalar Newton step hits the minimizer in one step") {
  // g(u) = (u-2)^2/2, w = 1: the minimizer is u* = 1. From u = 3 the
  // index is active, the LCP is empty and d = -M^{-1} F(u) = -2.
  auto p = make_scalar_problem(2.0, 1.0, 1.0);
  Vec u(1);
  u << 3.0;
  auto part = classify(p, u);
  REQUIRE(part.mod_a_plus == Indices{0});

  StepContext ctx = build_step(p, u, part, /*use_modified=*/true);
  CHECK(ctx.lcp.size() == 0);
  const auto lcp_sol = solve_lcp(ctx.lcp);
  const Vec d = direction_from_context(p, u, ctx, lcp_sol);
  CHECK(d(0) == doctest::Approx(-2.0));
  CHECK(ctx.sle_count == 1);  // empty LCP: only the direction solve
  CHECK(residual_map(p, u + d).norm() == doctest::Approx(0.0));
}

TEST_CASE("solver drivers on the scalar problem") {
  auto p = make_scalar_problem(2.0, 1.0, 1.0);
  SolverConfig conf;
  conf.gamma = p.gamma;
  for (auto variant : {Variant::bssn, Variant::modbssn, Variant::hybrid}) {
    conf.variant = variant;
    auto res = solve(p, Vec::Constant(1, 7.0), conf);
    CHECK(res.converged);
    CHECK(res.u_star(0) == doctest::Approx(1.0));
    CHECK(res.records.front().j == 0);
    CHECK(res.records.back().residual_norm <= conf.tol);
  }
}

TEST_CASE("descent certificate and Armijo acceptance on lasso") {
  auto p = make_random_lasso(30, 45, 0.3, 2.0, 5);
  Rng rng(77);
  SolverConfig conf;
  conf.gamma = p.gamma;
  for (int rep = 0; rep < 10; ++rep) {
    const Vec u = 2.0 * rng.normal_vector(30);
    if (residual_map(p, u).norm() < 1e-12) continue;
    auto part = classify(p, u);
    StepContext ctx = build_step(p, u, part, true);
    const auto lcp_sol = solve_lcp(ctx.lcp);
    const Vec d = direction_from_context(p, u, ctx, lcp_sol);
    const double theta = merit(p, u);
    // Theta'(u, d) <= -2 Theta(u)
    CHECK(dir_derivative_merit(p, u, d) <= -2.0 * theta + 1e-9 * (1 + theta));
    const auto [t, l] = armijo_search(p, u, d, conf);
    CHECK(t > 0.0);
    CHECK(merit(p, u + t * d) <=
          (1.0 - 2.0 * conf.armijo_sigma * t) * theta + 1e-14);
  }
}

TEST_CASE("generalized derivative solves G d = -F") {
  auto p = make_random_lasso(20, 32, 0.25, 1.5, 8);
  Rng rng(55);
  for (bool modified : {false, true}) {
    for (int rep = 0; rep < 8; ++rep) {
      const Vec u = rng.normal_vector(20);
      auto part = classify(p, u);
      auto lcp = assemble_reduced_lcp(p, u, part, modified);
      const auto lcp_sol = solve_lcp(lcp);
      const Vec d = newton_direction(p, u, part, lcp_sol, modified);
      const Mat g = generalized_derivative(p, u, part, lcp_sol, modified);
      const Vec f = residual_map(p, u);
      auto [b, c] = index_sets_bc(part, lcp_sol, modified);
      CHECK(b.size() + c.size() == 20);

      // rows in B carry the scaled Hessian: (G d)_k = -F_k there; rows
      // in C are the identity and prescribe d_k = -u_k (which equals
      // -F_k except on the sign-inconsistent indices the modified sets
      // move into C)
      const Vec gd = g * d;
      const double scale = 1.0 + f.lpNorm<Eigen::Infinity>();
      for (int k : b) CHECK(std::abs(gd(k) + f(k)) <= 1e-8 * scale);
      for (int k : c) CHECK(gd(k) == doctest::Approx(-u(k)).epsilon(1e-12));
      if (!modified) {
        CHECK((gd + f).lpNorm<Eigen::Infinity>() <= 1e-8 * scale);
      }
    }
  }
}

TEST_CASE("solver agrees with the ISTA oracle on lasso") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto p = make_random_lasso(40, 60, 0.2, 1.0, seed);
    SolverConfig conf;
    conf.gamma = p.gamma;
    conf.variant = Variant::modbssn;
    auto res = solve(p, Vec::Zero(40), conf);
    REQUIRE(res.converged);
    const double step = ista_default_step(p, Vec::Zero(40));
    const Vec ref = ista_oracle(p, Vec::Zero(40), step, 1e-12, 200000);
    CHECK((res.u_star - ref).lpNorm<Eigen::Infinity>() <= 1e-6);
  }
}

TEST_CASE("variants converge to the same minimizer") {
  auto p = make_random_lasso(25, 40, 0.3, 3.0, 12);
  SolverConfig conf;
  conf.gamma = p.gamma;
  conf.variant = Variant::bssn;
  auto r1 = solve(p, Vec::Zero(25), conf);
  conf.variant = Variant::modbssn;
  auto r2 = solve(p, Vec::Zero(25), conf);
  conf.variant = Variant::hybrid;
  auto r3 = solve(p, Vec::Zero(25), conf);
  REQUIRE(r1.converged);
  REQUIRE(r2.converged);
  REQUIRE(r3.converged);
  CHECK((r1.u_star - r2.u_star).lpNorm<Eigen::Infinity>() <= 1e-6);
  CHECK((r1.u_star - r3.u_star).lpNorm<Eigen::Infinity>() <= 1e-6);
}

TEST_CASE("hybrid without a trigger reproduces the plain variant") {
  auto p = make_random_lasso(20, 30, 0.25, 2.0, 21);
  SolverConfig conf;
  conf.gamma = p.gamma;
  conf.variant = Variant::bssn;
  auto plain = solve(p, Vec::Zero(20), conf);
  conf.variant = Variant::hybrid;
  conf.j_max = 100000;  // switch can never fire
  auto hybrid = solve(p, Vec::Zero(20), conf);
  REQUIRE(plain.converged);
  REQUIRE(hybrid.converged);
  CHECK(!hybrid.switch_step.has_value());
  REQUIRE(plain.records.size() == hybrid.records.size());
  for (size_t j = 0; j < plain.records.size(); ++j) {
    CHECK(plain.records[j].residual_norm == hybrid.records[j].residual_norm);
    CHECK(plain.records[j].step == hybrid.records[j].step);
  }
}

TEST_CASE("solver handles the robust objective") {
  auto p = make_random_robust(12, 400, 0.05, 5.0, 3);
  SolverConfig conf;
  conf.gamma = p.gamma;
  auto res = solve(p, Vec::Zero(12), conf);
  REQUIRE(res.converged);
  CHECK(residual_map(p, res.u_star).norm() <= conf.tol);
  // stationarity of the penalized objective along coordinates
  const Vec grad = p.objective->gradient(res.u_star);
  for (int k = 0; k < 12; ++k) {
    if (std::abs(res.u_star(k)) > 1e-9) {
      const double sgn = res.u_star(k) > 0 ? 1.0 : -1.0;
      CHECK(grad(k) + sgn * p.weights[k] == doctest::Approx(0.0).epsilon(1e-6));
    } else {
      CHECK(std::abs(grad(k)) <= p.weights[k] + 1e-7);
    }
  }
}

TEST_CASE("iteration records are coherent") {
  auto p = make_random_lasso(30, 45, 0.3, 2.0, 31);
  SolverConfig conf;
  conf.gamma = p.gamma;
  conf.store_iterates = true;
  auto res = solve(p, Vec::Zero(30), conf);
  REQUIRE(res.converged);
  REQUIRE(res.records.size() >= 2);
  CHECK(res.records.front().j == 0);
  CHECK(res.iterates.size() == res.records.size());
  for (size_t j = 1; j < res.records.size(); ++j) {
    const auto& r = res.records[j];
    CHECK(r.j == static_cast<int>(j));
    CHECK(r.step > 0.0);
    CHECK(r.step <= 1.0);
    CHECK(r.lcp_size >= 0);
    CHECK(r.lcp_size + r.sle_size <= 30);
    CHECK(r.sle_count >= 1);
    // merit is monotonically decreasing
    CHECK(r.residual_norm < res.records[j - 1].residual_norm * (1.0 + 1e-12));
  }
  // recompute the residual at each stored iterate
  for (size_t j = 0; j < res.iterates.size(); ++j) {
    CHECK(residual_map(p, res.iterates[j]).norm() ==
          doctest::Approx(res.records[j].residual_norm).epsilon(1e-12));
  }
}

TEST_CASE("quadratic rate diagnostic on a converging run") {
  auto p = make_random_lasso(30, 50, 0.3, 2.0, 44);
  SolverConfig conf;
  conf.gamma = p.gamma;
  conf.tol = 1e-12;
  conf.store_iterates = true;
  auto res = solve(p, Vec::Zero(30), conf);
  REQUIRE(res.converged);
  auto ratios = quadratic_rate_diagnostic(res.iterates, res.u_star);
  REQUIRE(!ratios.empty());
  // at least the last recorded ratio stays bounded (quadratic rate)
  CHECK(ratios.back() < 1e6);
}

TEST_CASE("config validation rejects bad settings") {
  SolverConfig conf;
  conf.gamma = -1.0;
  CHECK_THROWS_AS(conf.validate(), InvalidArgument);
  conf.gamma = 1.0;
  conf.armijo_sigma = 0.7;
  CHECK_THROWS_AS(conf.validate(), InvalidArgument);
  conf.armijo_sigma = 0.01;
  conf.tol = 0.0;
  CHECK_THROWS_AS(conf.validate(), InvalidArgument);
}
