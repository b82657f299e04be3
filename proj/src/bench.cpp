#include "robreg/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "robreg/ransac.hpp"

namespace robreg {

using nlohmann::json;

std::uint64_t trial_seed(const BenchConfig& cfg, std::size_t rate_index, int trial) {
  return cfg.seed + 1000ULL * rate_index + static_cast<std::uint64_t>(trial);
}

int worker_count(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("REG_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return n;
}

BenchRecord run_trial(const BenchConfig& cfg, double rate, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n_points = cfg.n_points;
  spec.sigma = cfg.sigma;
  spec.outlier_rate = rate;
  spec.known_scale = cfg.known_scale;
  spec.seed = seed;
  spec.source = cfg.source;
  const SyntheticData d = generate(spec);

  BenchRecord rec;
  rec.seed = seed;
  rec.outlier_rate = rate;
  RegisterOptions opts;
  if (cfg.known_scale) opts.known_scale = 1.0;
  opts.certify = cfg.certify;
  try {
    const RegistrationResult r = register_clouds(d.correspondences, TlsConfig{}, opts);
    rec.rotation_error_rad = geodesic_rotation_error(r.transform.R(), d.truth.R());
    rec.translation_error = (r.transform.translation - d.truth.translation).norm();
    rec.scale_error = std::abs(r.transform.scale - d.truth.scale);
    rec.certified = r.certificate && r.certificate->verdict == Verdict::certified;
    rec.timings = r.stage_timings;
    rec.clique_size = static_cast<int>(r.clique_vertices.size());
    int bad = 0;
    for (int v : r.clique_vertices) bad += d.labels[v] == 0;
    rec.clique_outlier_fraction = rec.clique_size ? static_cast<double>(bad) / rec.clique_size : 0.0;
  } catch (const InsufficientInliers&) {
    rec.failed = true;
    rec.rotation_error_rad = rec.translation_error = rec.scale_error = std::numeric_limits<double>::infinity();
  }
  if (cfg.ransac) {
    RansacOptions ro;
    ro.max_iters = cfg.ransac_iters;
    ro.estimate_scale = !cfg.known_scale;
    ro.inlier_threshold = spec.beta();
    ro.seed = seed ^ 0xa5a5a5a5ULL;
    const RansacResult rr = ransac_baseline(d.correspondences, ro);
    rec.ransac_rotation_error_rad = geodesic_rotation_error(rr.transform.R(), d.truth.R());
    rec.ransac_translation_error = (rr.transform.translation - d.truth.translation).norm();
    rec.ransac_scale_error = std::abs(rr.transform.scale - d.truth.scale);
  }
  return rec;
}

Quantiles quantiles(std::vector<double> v) {
  Quantiles q;
  if (v.empty()) return q;
  std::sort(v.begin(), v.end());
  auto at = [&](double p) {
    const double pos = p * (v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double f = pos - lo;
    if (f == 0.0 || v[lo] == v[hi]) return v[lo];
    return v[lo] + f * (v[hi] - v[lo]);
  };
  q.q25 = at(0.25);
  q.median = at(0.5);
  q.q75 = at(0.75);
  q.max = v.back();
  return q;
}

BenchReport run_bench(const BenchConfig& cfg) {
  BenchReport rep;
  rep.config = cfg;
  struct Job {
    std::size_t rate_index;
    int trial;
  };
  std::vector<Job> jobs;
  for (std::size_t r = 0; r < cfg.rates.size(); ++r)
    for (int t = 0; t < cfg.trials; ++t) jobs.push_back({r, t});
  rep.records.resize(jobs.size());

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
      const Job& job = jobs[j];
      rep.records[j] = run_trial(cfg, cfg.rates[job.rate_index], trial_seed(cfg, job.rate_index, job.trial));
    }
  };
  const int nw = std::min<int>(worker_count(cfg.threads), std::max<std::size_t>(1, jobs.size()));
  std::vector<std::thread> pool;
  for (int w = 1; w < nw; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  const double success_rad = cfg.success_rotation_deg * M_PI / 180.0;
  for (std::size_t r = 0; r < cfg.rates.size(); ++r) {
    BenchAggregate a;
    a.outlier_rate = cfg.rates[r];
    std::vector<double> re, te, se, ms, rre;
    int rsucc = 0;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].rate_index != r) continue;
      const BenchRecord& rec = rep.records[j];
      ++a.runs;
      a.failures += rec.failed;
      a.successes += !rec.failed && rec.rotation_error_rad < success_rad;
      a.certified += rec.certified;
      re.push_back(rec.rotation_error_rad);
      te.push_back(rec.translation_error);
      se.push_back(rec.scale_error);
      ms.push_back(rec.timings.total_ms);
      if (rec.ransac_rotation_error_rad) {
        rre.push_back(*rec.ransac_rotation_error_rad);
        rsucc += *rec.ransac_rotation_error_rad < success_rad;
      }
    }
    a.rotation_error_rad = quantiles(re);
    a.translation_error = quantiles(te);
    a.scale_error = quantiles(se);
    a.total_ms = quantiles(ms);
    if (!rre.empty()) {
      a.ransac_rotation_error_rad = quantiles(rre);
      a.ransac_successes = rsucc;
    }
    rep.aggregates.push_back(a);
  }
  return rep;
}

namespace {

json quantiles_json(const Quantiles& q) {
  return {{"q25", q.q25}, {"median", q.median}, {"q75", q.q75}, {"max", q.max}};
}

json timings_json(const StageTimings& t) {
  return {{"scale_ms", t.scale_ms},         {"prune_ms", t.prune_ms},   {"clique_ms", t.clique_ms},
          {"rotation_ms", t.rotation_ms},   {"certify_ms", t.certify_ms}, {"translation_ms", t.translation_ms},
          {"total_ms", t.total_ms}};
}

}  // namespace

std::string to_json(const BenchReport& rep, int indent) {
  const BenchConfig& c = rep.config;
  json j;
  j["schema_version"] = kBenchSchemaVersion;
  j["config"] = {{"rates", c.rates},          {"n_points", c.n_points},   {"trials", c.trials},
                 {"sigma", c.sigma},          {"known_scale", c.known_scale}, {"certify", c.certify},
                 {"ransac", c.ransac},        {"ransac_iters", c.ransac_iters}, {"seed", c.seed},
                 {"source", c.source == SourceKind::reference ? "reference" : "unit_cube"},
                 {"success_rotation_deg", c.success_rotation_deg}};
  json runs = json::array();
  for (const BenchRecord& r : rep.records) {
    json x = {{"seed", r.seed},
              {"outlier_rate", r.outlier_rate},
              {"failed", r.failed},
              {"rotation_error_rad", r.rotation_error_rad},
              {"translation_error", r.translation_error},
              {"scale_error", r.scale_error},
              {"certified", r.certified},
              {"clique_size", r.clique_size},
              {"clique_outlier_fraction", r.clique_outlier_fraction},
              {"timings", timings_json(r.timings)}};
    if (r.ransac_rotation_error_rad) {
      x["ransac"] = {{"rotation_error_rad", *r.ransac_rotation_error_rad},
                     {"translation_error", *r.ransac_translation_error},
                     {"scale_error", *r.ransac_scale_error}};
    }
    runs.push_back(x);
  }
  j["runs"] = runs;
  json agg = json::array();
  for (const BenchAggregate& a : rep.aggregates) {
    json x = {{"outlier_rate", a.outlier_rate},
              {"runs", a.runs},
              {"failures", a.failures},
              {"successes", a.successes},
              {"certified", a.certified},
              {"rotation_error_rad", quantiles_json(a.rotation_error_rad)},
              {"translation_error", quantiles_json(a.translation_error)},
              {"scale_error", quantiles_json(a.scale_error)},
              {"total_ms", quantiles_json(a.total_ms)}};
    if (a.ransac_rotation_error_rad) {
      x["ransac"] = {{"rotation_error_rad", quantiles_json(*a.ransac_rotation_error_rad)},
                     {"successes", *a.ransac_successes}};
    }
    agg.push_back(x);
  }
  j["aggregate"] = agg;
  return j.dump(indent);
}

std::string format_table(const BenchReport& rep) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%6s %5s %5s %5s %12s %12s %12s %10s\n", "rate", "runs", "ok", "cert",
                "rot_med_deg", "t_med", "s_med", "ms_med");
  out << buf;
  for (const BenchAggregate& a : rep.aggregates) {
    std::snprintf(buf, sizeof buf, "%6.3f %5d %5d %5d %12.5f %12.6f %12.6f %10.2f\n", a.outlier_rate, a.runs,
                  a.successes, a.certified, a.rotation_error_rad.median * 180.0 / M_PI, a.translation_error.median,
                  a.scale_error.median, a.total_ms.median);
    out << buf;
  }
  return out.str();
}

}  // namespace robreg
