#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "robreg/rotation.hpp"

using namespace robreg;

using namespace fixture;

TEST_CASE("horn recovers exact rotations") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    const Instance in = make_instance(rng, 6, 0.0, 0.0);
    std::vector<double> w(6, 1.0);
    const HornResult h = horn_weighted(in.p.a_bars, in.p.b_bars, w);
    CHECK_FALSE(h.degenerate);
    CHECK((h.rotation.matrix() - in.R).norm() < 1e-10);
  }
}

TEST_CASE("horn ignores zero-weight measurements") {
  std::mt19937_64 rng(12);
  Instance in = make_instance(rng, 8, 0.0, 0.005);
  in.p.b_bars[3] = Vec3(10, -4, 7);
  std::vector<double> w(8, 1.0);
  w[3] = 0.0;
  const Mat3 R1 = horn_weighted(in.p.a_bars, in.p.b_bars, w).rotation.matrix();
  auto a = in.p.a_bars, b = in.p.b_bars;
  a.erase(a.begin() + 3);
  b.erase(b.begin() + 3);
  const Mat3 R2 = horn_weighted(a, b, std::vector<double>(7, 1.0)).rotation.matrix();
  CHECK((R1 - R2).norm() < 1e-12);
}

TEST_CASE("horn agrees with svd and grid search oracles") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> wu(0.2, 2.0);
  for (int t = 0; t < 5; ++t) {
    const Instance in = make_instance(rng, 4, 0.0, 0.03);
    std::vector<double> w(4);
    for (auto& x : w) x = wu(rng);
    const Mat3 R = horn_weighted(in.p.a_bars, in.p.b_bars, w).rotation.matrix();
    const Mat3 Rk = oracle::kabsch(in.p.a_bars, in.p.b_bars, w);
    CHECK(geodesic_rotation_error(R, Rk) < 1e-9);
    const Mat3 Rg = oracle::so3_grid_search(in.p.a_bars, in.p.b_bars, w, 10.0 * M_PI / 180.0);
    CHECK(geodesic_rotation_error(R, Rg) < 2.0 * M_PI / 180.0);
    CHECK(oracle::weighted_rotation_cost(in.p.a_bars, in.p.b_bars, w, R) <=
          oracle::weighted_rotation_cost(in.p.a_bars, in.p.b_bars, w, Rg) + 1e-9);
  }
}

TEST_CASE("horn beats random rotations") {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 20; ++t) {
    const Instance in = make_instance(rng, 10, 0.3, 0.01);
    const std::vector<double> w(10, 1.0);
    const Mat3 R = horn_weighted(in.p.a_bars, in.p.b_bars, w).rotation.matrix();
    const double f = oracle::weighted_rotation_cost(in.p.a_bars, in.p.b_bars, w, R);
    for (int s = 0; s < 1000; ++s)
      REQUIRE(f <= oracle::weighted_rotation_cost(in.p.a_bars, in.p.b_bars, w, random_rotation(rng).matrix()) + 1e-12);
  }
}

TEST_CASE("horn flags collinear input") {
  std::vector<Vec3> a{{1, 0, 0}, {2, 0, 0}, {-1, 0, 0}}, b = a;
  CHECK(horn_weighted(a, b, {1, 1, 1}).degenerate);
}

TEST_CASE("gnc on outlier-free data") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 20; ++t) {
    const Instance in = make_instance(rng, 40, 0.0, 0.01);
    const RotationSolution s = solve_gnc_tls(in.p);
    CHECK(s.converged);
    CHECK(geodesic_rotation_error(s.rotation.matrix(), in.R) < M_PI / 180.0);
    CHECK(s.surrogate_increases == 0);
  }
}

TEST_CASE("gnc with 70 percent outliers") {
  std::mt19937_64 rng(22);
  int ok = 0;
  for (int t = 0; t < 100; ++t) {
    const Instance in = make_instance(rng, 40, 0.7, 0.01);
    const RotationSolution s = solve_gnc_tls(in.p);
    ok += geodesic_rotation_error(s.rotation.matrix(), in.R) < M_PI / 180.0;
    CHECK(s.surrogate_increases == 0);
  }
  MESSAGE("gnc successes at 70% outliers: " << ok << "/100");
  CHECK(ok >= 90);
}

TEST_CASE("gnc output contracts") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 30; ++t) {
    const Instance in = make_instance(rng, 15, 0.4, 0.02);
    const RotationSolution s = solve_gnc_tls(in.p);
    const Mat3 R = s.rotation.matrix();
    CHECK(std::abs(s.rotation.coeffs().norm() - 1.0) < 1e-12);
    CHECK((R.transpose() * R - Mat3::Identity()).norm() < 1e-10);
    CHECK(std::abs(R.determinant() - 1.0) < 1e-10);
    CHECK(s.theta == residual_theta(in.p, R));
    CHECK(s.cost == doctest::Approx(tls_rotation_cost(in.p, R)).epsilon(1e-12));
  }
}

TEST_CASE("gnc matches binary enumeration on small instances") {
  std::mt19937_64 rng(24);
  int equal = 0;
  for (int t = 0; t < 40; ++t) {
    const Instance in = make_instance(rng, 8, 0.3, 0.015);
    const RotationSolution s = solve_gnc_tls(in.p);
    const auto o = oracle::rotation_tls_bruteforce(in.p);
    // GNC is local, but it must never beat the global optimum
    CHECK(s.cost >= o.min_cost - 1e-6);
    equal += std::abs(s.cost - o.min_cost) <= 1e-6;
  }
  MESSAGE("gnc reached the enumerated optimum in " << equal << "/40");
  CHECK(equal >= 36);
}

TEST_CASE("rotation problem validation") {
  RotationProblem p;
  p.a_bars = {Vec3(1, 0, 0)};
  p.b_bars = {Vec3(1, 0, 0)};
  p.beta_bars = {1.0};
  CHECK_THROWS(solve_gnc_tls(p));
}

TEST_CASE("gnc with very small noise bounds") {
  // Normalized residuals reach ~1e10 at the identity start; every measurement
  // must still begin with a nonzero weight.
  std::mt19937_64 rng(77);
  for (int t = 0; t < 5; ++t) {
    auto in = fixture::make_instance(rng, 30, 0.5, 0.0);
    for (auto& b : in.p.beta_bars) b = 1e-5;
    const RotationSolution s = solve_gnc_tls(in.p);
    CHECK(geodesic_rotation_error(s.rotation.matrix(), in.R) < 1e-9);
  }
}
