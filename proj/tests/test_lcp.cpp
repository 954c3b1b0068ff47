#include <doctest.h>

#include "bssn/experiments.hpp"
#include "bssn/lcp.hpp"

using namespace bssn;

namespace {

LcpInstance make_instance(const Mat& n, const Vec& z) {
  LcpInstance inst;
  inst.n_mat = n;
  inst.z_vec = z;
  for (int k = 0; k < z.size(); ++k) {
    inst.back_map.push_back({k, LcpInstance::Sign::plus});
  }
  return inst;
}

LcpInstance random_spd_instance(int m, Rng& rng) {
  Mat a(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) a(i, j) = rng.normal();
  }
  const Mat n = a.transpose() * a + 0.1 * Mat::Identity(m, m);
  const Vec z = 2.0 * rng.normal_vector(m);
  return make_instance(n, z);
}

void check_solution(const LcpInstance& inst, const LcpSolution& sol) {
  REQUIRE(sol.x.size() == inst.size());
  if (inst.size() == 0) return;
  CHECK(sol.x.minCoeff() >= -1e-12);
  CHECK(sol.y.minCoeff() >= -1e-12);
  CHECK(std::abs(sol.x.dot(sol.y)) <=
        1e-10 * (1.0 + sol.x.norm() * sol.y.norm()));
  CHECK(lcp_min_map(inst, sol.x).lpNorm<Eigen::Infinity>() <=
        1e-10 * (1.0 + inst.z_vec.lpNorm<Eigen::Infinity>()));
}

}  // namespace

TEST_CASE("empty instance") {
  LcpInstance inst;
  inst.n_mat.resize(0, 0);
  inst.z_vec.resize(0);
  CHECK(solve_lcp(inst).solver_used == LcpSolver::empty);
  CHECK(brute_force_lcp(inst).x.size() == 0);
  CHECK(lemke(inst, 1e-10).x.size() == 0);
}

TEST_CASE("2x2 hand instance") {
  Mat n(2, 2);
  n << 2, 0, 0, 3;
  Vec z(2);
  z << -2, 3;
  auto inst = make_instance(n, z);
  for (const auto& sol :
       {solve_lcp(inst), lemke(inst, 1e-10), brute_force_lcp(inst)}) {
    CHECK(sol.x(0) == doctest::Approx(1.0));
    CHECK(sol.x(1) == doctest::Approx(0.0));
    CHECK(sol.y(0) == doctest::Approx(0.0));
    CHECK(sol.y(1) == doctest::Approx(3.0));
  }
}

TEST_CASE("damped Newton scalar and trivial cases") {
  Mat n(1, 1);
  n << 1;
  Vec z(1);
  z << -5;
  auto sol = damped_newton_lcp(make_instance(n, z), 1e-10);
  REQUIRE(sol.has_value());
  CHECK(sol->x(0) == doctest::Approx(5.0));

  // positive z: x = 0 accepted immediately
  Vec zp(1);
  zp << 4;
  auto sol2 = damped_newton_lcp(make_instance(n, zp), 1e-10);
  REQUIRE(sol2.has_value());
  CHECK(sol2->x(0) == 0.0);

  // zero entry in z violates the start condition
  Mat n2 = Mat::Identity(2, 2);
  Vec z0(2);
  z0 << 0.0, -1.0;
  CHECK(!damped_newton_lcp(make_instance(n2, z0), 1e-10).has_value());
  // but the full solver falls back to Lemke
  auto sol3 = solve_lcp(make_instance(n2, z0));
  CHECK(sol3.solver_used == LcpSolver::lemke);
  check_solution(make_instance(n2, z0), sol3);
}

TEST_CASE("brute force scalar") {
  Mat n(1, 1);
  n << 4;
  Vec z(1);
  z << -8;
  CHECK(brute_force_lcp(make_instance(n, z)).x(0) == doctest::Approx(2.0));
}

TEST_CASE("random SPD cross-solver agreement") {
  Rng rng(1234);
  for (int rep = 0; rep < 200; ++rep) {
    const int m = 1 + static_cast<int>(rng.uniform() * 10);
    auto inst = random_spd_instance(m, rng);
    const auto ref = brute_force_lcp(inst);
    const auto prod = solve_lcp(inst);
    const auto lk = lemke(inst, 1e-9);
    check_solution(inst, prod);
    CHECK((prod.x - ref.x).lpNorm<Eigen::Infinity>() <= 1e-8);
    CHECK((lk.x - ref.x).lpNorm<Eigen::Infinity>() <= 1e-8);
    auto dn = damped_newton_lcp(inst, 1e-10);
    if (dn) {
      CHECK((dn->x - ref.x).lpNorm<Eigen::Infinity>() <= 1e-7);
    }
  }
}
