#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "robreg/bench.hpp"
#include "robreg/pipeline.hpp"
#include "robreg/synthetic.hpp"

using namespace robreg;

namespace {

constexpr double kDeg = M_PI / 180.0;

SyntheticData make(int n, double rate, double sigma, bool known, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n_points = n;
  spec.outlier_rate = rate;
  spec.sigma = sigma;
  spec.known_scale = known;
  spec.seed = seed;
  return generate(spec);
}

RegisterOptions known_opts() {
  RegisterOptions o;
  o.known_scale = 1.0;
  return o;
}

}  // namespace

TEST_CASE("noiseless outlier-free registration is exact") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = make(40, 0.0, 0.0, false, seed);
    const auto r = register_clouds(d.correspondences);
    CHECK(std::abs(r.transform.scale - d.truth.scale) < 1e-9);
    CHECK(geodesic_rotation_error(r.transform.R(), d.truth.R()) < 1e-8);
    CHECK((r.transform.translation - d.truth.translation).norm() < 1e-8);
    CHECK(r.inlier_indices.size() == 40);
    CHECK(r.transform.valid());
  }
}

TEST_CASE("known scale, 90 percent outliers") {
  // Ten inliers with sigma = 0.01 leave about a degree of irreducible error, so
  // each run is compared with least squares on the true inliers and the median
  // with the 1 degree target.
  std::vector<double> errs;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto d = make(100, 0.9, 0.01, true, 100 + seed);
    const auto& c = d.correspondences;
    const auto r = register_clouds(c, {}, known_opts());
    std::vector<Vec3> a, b;
    Vec3 ca = Vec3::Zero(), cb = Vec3::Zero();
    for (std::size_t i = 0; i < c.size(); ++i)
      if (d.labels[i]) {
        a.push_back(c.source[i]);
        b.push_back(c.target[i]);
        ca += c.source[i];
        cb += c.target[i];
      }
    ca /= a.size();
    cb /= b.size();
    for (auto& v : a) v -= ca;
    for (auto& v : b) v -= cb;
    const Mat3 R_ls = oracle::kabsch(a, b, std::vector<double>(a.size(), 1.0));
    const double err = geodesic_rotation_error(r.transform.R(), d.truth.R());
    CHECK(geodesic_rotation_error(r.transform.R(), R_ls) < 0.25 * kDeg);
    CHECK(err < 3 * kDeg);
    CHECK((r.transform.translation - d.truth.translation).norm() < 5 * 0.0554);
    CHECK(r.scale_was_known);
    errs.push_back(err);
  }
  CHECK(quantiles(errs).median < 1 * kDeg);
}

TEST_CASE("result contracts") {
  const auto d = make(60, 0.5, 0.01, false, 7);
  RegisterOptions o;
  o.certify = true;
  const auto r = register_clouds(d.correspondences, {}, o);
  CHECK(r.transform.valid());
  CHECK(std::is_sorted(r.inlier_indices.begin(), r.inlier_indices.end()));
  for (int i : r.inlier_indices)
    CHECK(std::binary_search(r.clique_vertices.begin(), r.clique_vertices.end(), i));
  REQUIRE(r.certificate);
  CHECK(r.certificate->verdict == Verdict::certified);
  CHECK(r.stage_stats.clique_size == static_cast<int>(r.clique_vertices.size()));
  CHECK(r.stage_stats.n_tims == 60 * 59 / 2);
  CHECK(r.stage_timings.total_ms >= r.stage_timings.clique_ms);

  const auto again = register_clouds(d.correspondences, {}, o);
  CHECK(again.transform.rotation.coeffs() == r.transform.rotation.coeffs());
  CHECK(again.transform.translation == r.transform.translation);
  CHECK(again.transform.scale == r.transform.scale);
}

TEST_CASE("insufficient inliers") {
  // Every target is random: no three points agree on any transform.
  auto d = make(30, 0.0, 0.01, true, 9);
  SplitMix64 rng(9);
  for (auto& b : d.correspondences.target) b = rng.in_ball(100.0);
  CHECK_THROWS_AS(register_clouds(d.correspondences, {}, known_opts()), InsufficientInliers);
  try {
    register_clouds(d.correspondences, {}, known_opts());
  } catch (const InsufficientInliers& e) {
    CHECK(std::string(e.what()) == "insufficient inliers");
  }
  CorrespondenceSet two;
  two.source = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
  two.target = two.source;
  two.noise_bounds = {0.1, 0.1};
  CHECK_THROWS_AS(register_clouds(two), std::invalid_argument);
}

TEST_CASE("chain topology uses the largest component") {
  const auto d = make(50, 0.0, 0.01, true, 11);
  RegisterOptions o = known_opts();
  o.topology = TopologyKind::chain;
  const auto r = register_clouds(d.correspondences, {}, o);
  CHECK(r.clique_vertices.size() == 50);
  CHECK(geodesic_rotation_error(r.transform.R(), d.truth.R()) < 1 * kDeg);
}

TEST_CASE("translation estimate") {
  SUBCASE("exact without noise") {
    const auto d = make(20, 0.0, 0.0, false, 12);
    const auto te = estimate_translation(d.correspondences.source, d.correspondences.target, d.truth.scale,
                                         d.truth.R(), d.correspondences.noise_bounds, 1.0);
    CHECK((te.t - d.truth.translation).norm() < 1e-12);
  }
  SUBCASE("each axis matches the subset oracle") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto d = make(10, 0.4, 0.01, false, 300 + seed);
      const auto& c = d.correspondences;
      const auto te = estimate_translation(c.source, c.target, d.truth.scale, d.truth.R(), c.noise_bounds, 1.0);
      for (int l = 0; l < 3; ++l) {
        ScalarTlsProblem p;
        p.alphas = c.noise_bounds;
        for (std::size_t i = 0; i < c.size(); ++i)
          p.measurements.push_back((c.target[i] - d.truth.scale * (d.truth.R() * c.source[i]))[l]);
        const auto o = oracle::scalar_tls_bruteforce(p);
        CHECK(tls_objective(p, te.t[l]) == doctest::Approx(o.min_cost).epsilon(1e-9));
        CHECK(te.axis_masks[l] == consensus_mask(p, te.t[l]));
      }
    }
  }
  SUBCASE("80 percent outliers") {
    const auto d = make(100, 0.8, 0.001, false, 13);
    const auto& c = d.correspondences;
    const auto te = estimate_translation(c.source, c.target, d.truth.scale, d.truth.R(), c.noise_bounds, 1.0);
    CHECK((te.t - d.truth.translation).norm() < 0.00554);
  }
}

TEST_CASE("error bounds hold") {
  int runs_with_premises = 0, informative = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto d = make(40, 0.3, 0.01, false, 700 + seed);
    const auto& c = d.correspondences;
    const auto g = build_measurement_graph(c, GraphTopology::complete(40));
    const auto r = register_clouds(c, g, {}, {});
    // premises: every selected point is a true inlier
    bool pure = true;
    for (int v : r.clique_vertices) pure = pure && d.labels[v] == 1;
    if (!pure) continue;
    ++runs_with_premises;
    const double s_err = std::abs(r.transform.scale - d.truth.scale);
    const double err = geodesic_rotation_error(r.transform.R(), d.truth.R());
    const Mat3 dR = r.transform.scale * r.transform.R() - d.truth.scale * d.truth.R();
    const auto b = compute_bounds(r, c, g);
    CHECK(s_err <= b.eta_s);
    CHECK(dR.norm() <= b.eta_R_frobenius);
    CHECK((r.transform.translation - d.truth.translation).norm() <= b.eta_t);

    // worst case over 3-subsets, and over the whole selected set (valid here since it is all inliers)
    BoundOptions whole;
    whole.subset_cap = 0;
    for (const auto& bb : {b, compute_bounds(r, c, g, 1.0, whole)}) {
      REQUIRE(bb.tighter_bounds);
      const auto& tb = *bb.tighter_bounds;
      CHECK(s_err <= tb.scale);
      CHECK(d.truth.scale * (1 - std::cos(err)) <= tb.rotation_scaled);
      CHECK(err <= tb.rotation_angle);
      for (int l = 0; l < 3; ++l)
        CHECK(std::abs(r.transform.translation[l] - d.truth.translation[l]) <= tb.translation[l]);
      if (!tb.worst_case) informative += tb.rotation_angle < M_PI / 2;
    }
  }
  CHECK(runs_with_premises >= 80);
  CHECK(informative >= runs_with_premises * 9 / 10);
}

TEST_CASE("coarse bound special cases") {
  SUBCASE("coplanar inliers give an infinite rotation bound") {
    auto d = make(20, 0.0, 0.0, true, 14);
    auto& c = d.correspondences;
    for (std::size_t i = 0; i < c.size(); ++i) {
      c.source[i].z() = 0.0;
      c.target[i] = d.truth.apply(c.source[i]);
    }
    const auto g = build_measurement_graph(c, GraphTopology::complete(20));
    const auto r = register_clouds(c, g, {}, known_opts());
    const auto b = compute_bounds(r, c, g);
    CHECK(std::isinf(b.eta_R_frobenius));
    CHECK(!b.rotation_diagnosis.empty());
  }
  SUBCASE("translation bound for beta = 0.01") {
    auto d = make(30, 0.0, 0.0, true, 15);
    const auto g = build_measurement_graph(d.correspondences, GraphTopology::complete(30));
    const auto r = register_clouds(d.correspondences, g, {}, known_opts());
    const auto b = compute_bounds(r, d.correspondences, g);
    CHECK(b.eta_t == doctest::Approx((9 + 3 * std::sqrt(3.0)) * 0.01).epsilon(1e-12));
    CHECK(b.eta_t == doctest::Approx(0.142).epsilon(0.001));
    CHECK(b.eta_s == 0.0);
  }
}

TEST_CASE("capped certification") {
  std::mt19937_64 rng(16);
  const auto in = fixture::make_instance(rng, 300, 0.3, 0.01);
  const auto sol = solve_gnc_tls(in.p);
  REQUIRE(geodesic_rotation_error(sol.rotation.matrix(), in.R) < 1 * kDeg);
  const auto c = certify_rotation(in.p, sol.rotation, 60);
  CHECK(c.verdict == Verdict::certified);
  CHECK(c.note.find("60 of 300") != std::string::npos);
  const auto small = certify_rotation(in.p, sol.rotation, 400);
  CHECK(small.note.find(" of ") == std::string::npos);
}

TEST_CASE("bench quantiles and seeds") {
  const auto q = quantiles({4, 1, 3, 2, 5});
  CHECK(q.median == 3);
  CHECK(q.q25 == 2);
  CHECK(q.q75 == 4);
  CHECK(q.max == 5);
  const auto h = quantiles({1, 2});
  CHECK(h.median == 1.5);
  const auto inf = quantiles({1, 2, std::numeric_limits<double>::infinity()});
  CHECK(inf.median == 2);
  CHECK(std::isinf(inf.max));

  BenchConfig cfg;
  cfg.seed = 10;
  CHECK(trial_seed(cfg, 0, 3) == 13);
  CHECK(trial_seed(cfg, 2, 3) == 2013);
  CHECK(worker_count(3) >= 1);
  CHECK(worker_count(3) <= 3);
}

TEST_CASE("bench run") {
  BenchConfig cfg;
  cfg.rates = {0.0, 0.5};
  cfg.trials = 4;
  cfg.n_points = 40;
  cfg.known_scale = true;
  cfg.ransac = true;
  cfg.threads = 2;
  const auto rep = run_bench(cfg);
  REQUIRE(rep.records.size() == 8);
  REQUIRE(rep.aggregates.size() == 2);
  for (const auto& a : rep.aggregates) {
    CHECK(a.runs == 4);
    CHECK(a.successes == 4);
    CHECK(a.ransac_successes);
  }
  for (const auto& r : rep.records) {
    CHECK(r.rotation_error_rad >= 0);
    CHECK(r.translation_error >= 0);
    CHECK(r.scale_error == 0);
  }
  // a single worker yields the same records
  cfg.threads = 1;
  const auto rep1 = run_bench(cfg);
  for (std::size_t i = 0; i < rep.records.size(); ++i) {
    CHECK(rep.records[i].seed == rep1.records[i].seed);
    CHECK(rep.records[i].rotation_error_rad == rep1.records[i].rotation_error_rad);
  }
  const std::string js = to_json(rep);
  CHECK(js.find("\"schema_version\": \"1.0\"") != std::string::npos);
  CHECK(js.find("\"rotation_error_rad\"") != std::string::npos);
}

TEST_CASE("noiseless data with outliers: scale refit on the clique is exact") {
  int exact_refit = 0, exact_plain = 0;
  RegisterOptions plain;
  plain.refine_scale = false;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto d = make(20, 0.5, 0.0, false, 3000 + seed);
    const auto r = register_clouds(d.correspondences);
    exact_refit += std::abs(r.transform.scale - d.truth.scale) < 1e-10;
    exact_plain += std::abs(register_clouds(d.correspondences, {}, plain).transform.scale - d.truth.scale) < 1e-10;
  }
  CHECK(exact_refit == 30);
  // outlier TRIMs within alpha of the true scale pull the all-TRIM estimate
  CHECK(exact_plain < 30);
}
