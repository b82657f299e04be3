#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "robreg/bench.hpp"
#include "robreg/certifier.hpp"
#include "robreg/pipeline.hpp"
#include "robreg/ply_io.hpp"
#include "robreg/synthetic.hpp"

using namespace robreg;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInsufficient = 2;
constexpr int kExitIo = 3;

json vec_json(const Vec3& v) { return {v[0], v[1], v[2]}; }

json transform_json(const RigidTransform& T) {
  const Vec4& q = T.rotation.coeffs();
  const Mat3 R = T.R();
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({R(r, 0), R(r, 1), R(r, 2)});
  return {{"scale", T.scale},
          {"quaternion_xyzw", {q[0], q[1], q[2], q[3]}},
          {"rotation", rows},
          {"translation", vec_json(T.translation)}};
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

void emit(const std::string& out_path, const json& j) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty() || out_path == "-") std::cout << text;
  else write_text(out_path, text);
}

json read_json(const std::string& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // byte offset -> line number
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + upto, '\n'));
    throw ParseError(path, line, "invalid JSON");
  }
}

std::vector<Vec3> vec3_list(const json& j, const std::string& path, const char* key) {
  std::vector<Vec3> out;
  if (!j.contains(key) || !j[key].is_array()) throw ParseError(path, 1, std::string("missing array '") + key + "'");
  for (const json& e : j[key]) {
    if (!e.is_array() || e.size() != 3) throw ParseError(path, 1, std::string("'") + key + "' entries must be 3-vectors");
    out.emplace_back(e[0].get<double>(), e[1].get<double>(), e[2].get<double>());
  }
  return out;
}

json problem_json(const RotationProblem& p) {
  json a = json::array(), b = json::array();
  for (const Vec3& v : p.a_bars) a.push_back(vec_json(v));
  for (const Vec3& v : p.b_bars) b.push_back(vec_json(v));
  return {{"cbar_sq", p.cbar_sq}, {"a_bars", a}, {"b_bars", b}, {"beta_bars", p.beta_bars}};
}

RotationProblem problem_from_json(const json& j, const std::string& path) {
  RotationProblem p;
  p.a_bars = vec3_list(j, path, "a_bars");
  p.b_bars = vec3_list(j, path, "b_bars");
  if (!j.contains("beta_bars")) throw ParseError(path, 1, "missing array 'beta_bars'");
  p.beta_bars = j["beta_bars"].get<std::vector<double>>();
  p.cbar_sq = j.value("cbar_sq", 1.0);
  return p;
}

json certificate_json(const Certificate& c) {
  return {{"verdict", to_string(c.verdict)},
          {"eta", c.eta},
          {"eta_normalized", c.eta_normalized},
          {"gap_bound", c.gap_bound},
          {"mu_hat", c.mu_hat},
          {"iterations", c.iterations_used},
          {"stationary", c.stationary},
          {"theta_consistent", c.theta_consistent},
          {"note", c.note}};
}

json bounds_json(const ErrorBounds& b) {
  json j = {{"eta_s", b.eta_s},
            {"eta_R_frobenius", b.eta_R_frobenius},
            {"eta_t", b.eta_t},
            {"sigma_min_U", b.sigma_min_U},
            {"sigma_min_sampled", b.sigma_min_sampled}};
  if (!b.rotation_diagnosis.empty()) j["rotation_diagnosis"] = b.rotation_diagnosis;
  if (b.tighter_bounds) {
    const TighterBounds& t = *b.tighter_bounds;
    j["tighter"] = {{"scale", t.scale},
                    {"rotation_scaled", t.rotation_scaled},
                    {"rotation_angle_rad", t.rotation_angle},
                    {"translation", vec_json(t.translation)},
                    {"worst_case", t.worst_case}};
  }
  return j;
}

// Rotation subproblem solved by the pipeline: clique TIMs with a scaled by s.
RotationProblem clique_problem(const MeasurementGraph& g, const RegistrationResult& r, double cbar_sq) {
  std::vector<char> in(g.n_vertices, 0), degenerate(g.tims.size(), 0);
  for (int v : r.clique_vertices) in[v] = 1;
  for (int k : g.degenerate_tims) degenerate[k] = 1;
  RotationProblem p;
  p.cbar_sq = cbar_sq;
  for (std::size_t k = 0; k < g.tims.size(); ++k) {
    const Tim& t = g.tims[k];
    if (!in[t.i] || !in[t.j] || degenerate[k]) continue;
    p.a_bars.push_back(r.transform.scale * t.a_bar);
    p.b_bars.push_back(t.b_bar);
    p.beta_bars.push_back(t.beta_bar);
  }
  return p;
}

std::vector<double> parse_rates(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size() || v < 0.0 || v >= 1.0) throw std::invalid_argument("bad rate: " + tok);
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("no rates given");
  return out;
}

SourceKind parse_source(const std::string& s) {
  if (s == "cube") return SourceKind::unit_cube;
  if (s == "reference") return SourceKind::reference;
  throw std::invalid_argument("unknown source: " + s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust scale, rotation and translation registration"};
  app.require_subcommand(1);

  // generate
  SyntheticSpec gspec;
  std::string g_out = ".", g_source = "cube";
  auto* gen = app.add_subcommand("generate", "Write a synthetic correspondence problem");
  gen->add_option("--n", gspec.n_points, "Number of points")->check(CLI::PositiveNumber);
  gen->add_option("--outlier-rate", gspec.outlier_rate, "Fraction of outliers")->check(CLI::Range(0.0, 0.999999));
  gen->add_option("--sigma", gspec.sigma, "Noise standard deviation")->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", gspec.seed, "RNG seed");
  gen->add_flag("--known-scale", gspec.known_scale, "Fix the scale to 1");
  gen->add_flag("--all-to-all", gspec.all_to_all, "All-pairs correspondences");
  gen->add_option("--overlap", gspec.overlap_fraction, "Kept fraction in all-to-all mode")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--source", g_source, "cube or reference")->check(CLI::IsMember({"cube", "reference"}));
  gen->add_option("--out-dir", g_out, "Output directory");

  // register
  std::string r_src, r_dst, r_out, r_problem;
  double r_beta = 0.0, r_sigma = 0.0, r_cbar2 = 1.0;
  std::optional<double> r_scale;
  bool r_certify = false, r_bounds = false;
  int r_cap = 100;
  auto* reg = app.add_subcommand("register", "Register two index-aligned PLY clouds");
  reg->add_option("--src", r_src, "Source PLY")->required();
  reg->add_option("--dst", r_dst, "Target PLY")->required();
  auto* o_beta = reg->add_option("--beta", r_beta, "Noise bound")->check(CLI::PositiveNumber);
  auto* o_sigma = reg->add_option("--sigma", r_sigma, "Noise std; bound is 5.54 sigma")->check(CLI::PositiveNumber);
  o_beta->excludes(o_sigma);
  reg->add_option("--known-scale", r_scale, "Skip scale estimation");
  reg->add_flag("--certify", r_certify, "Certify the rotation");
  reg->add_option("--certify-max-tims", r_cap, "Largest rotation problem certified directly")->check(CLI::PositiveNumber);
  reg->add_flag("--bounds", r_bounds, "Report a-posteriori error bounds");
  reg->add_option("--cbar2", r_cbar2, "Squared truncation threshold")->check(CLI::PositiveNumber);
  reg->add_option("--out", r_out, "Result JSON (default stdout)");
  reg->add_option("--save-problem", r_problem, "Write the rotation problem and candidate as JSON");

  // certify
  std::string c_problem, c_candidate, c_out;
  int c_iters = 200, c_cap = 100;
  auto* cert = app.add_subcommand("certify", "Certify a saved rotation problem and candidate");
  cert->add_option("--problem", c_problem, "Rotation problem JSON")->required();
  cert->add_option("--candidate", c_candidate, "Candidate JSON (default: the one stored with the problem)");
  cert->add_option("--max-iterations", c_iters, "DRS iteration budget")->check(CLI::PositiveNumber);
  cert->add_option("--max-tims", c_cap, "Larger problems are certified on an evenly spread subset")
      ->check(CLI::Range(2, 100000));
  cert->add_option("--out", c_out, "Result JSON (default stdout)");

  // bench
  BenchConfig bcfg;
  std::string b_rates = "0,0.5,0.9", b_out, b_source = "cube";
  auto* bench = app.add_subcommand("bench", "Outlier-rate sweep on synthetic data");
  bench->add_option("--rates", b_rates, "Comma-separated outlier rates");
  bench->add_option("--n", bcfg.n_points, "Points per problem")->check(CLI::PositiveNumber);
  bench->add_option("--trials", bcfg.trials, "Seeds per rate")->check(CLI::PositiveNumber);
  bench->add_option("--sigma", bcfg.sigma, "Noise std")->check(CLI::NonNegativeNumber);
  bench->add_option("--seed", bcfg.seed, "Base seed");
  bench->add_flag("--known-scale", bcfg.known_scale, "Scale fixed to 1 and given to the solver");
  bench->add_flag("--certify", bcfg.certify, "Certify rotations");
  bench->add_flag("--ransac", bcfg.ransac, "Also run the RANSAC baseline");
  bench->add_option("--ransac-iters", bcfg.ransac_iters, "RANSAC iterations")->check(CLI::PositiveNumber);
  bench->add_option("--source", b_source, "cube or reference")->check(CLI::IsMember({"cube", "reference"}));
  bench->add_option("--threads", bcfg.threads, "Worker threads (REG_THREADS caps this)");
  bench->add_option("--json", b_out, "Write the full report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) {
      gspec.source = parse_source(g_source);
      const SyntheticData d = generate(gspec);
      const std::filesystem::path dir(g_out);
      std::error_code ec;
      std::filesystem::create_directories(dir, ec);
      if (ec) throw IoError("cannot create " + dir.string());
      write_ply((dir / "src.ply").string(), d.correspondences.source);
      write_ply((dir / "dst.ply").string(), d.correspondences.target);
      write_labels((dir / "labels.txt").string(), d.labels);
      json truth = transform_json(d.truth);
      truth["beta"] = gspec.beta();
      truth["n_correspondences"] = d.correspondences.size();
      truth["seed"] = gspec.seed;
      write_text((dir / "truth.json").string(), truth.dump(2) + "\n");
      return kExitOk;
    }

    if (*reg) {
      CorrespondenceSet c;
      c.source = read_ply(r_src);
      c.target = read_ply(r_dst);
      if (c.source.size() != c.target.size())
        throw std::invalid_argument("clouds differ in size (" + std::to_string(c.source.size()) + " vs " +
                                    std::to_string(c.target.size()) + ")");
      const double beta = *o_sigma ? 5.54 * r_sigma : (*o_beta ? r_beta : 0.0);
      if (!(beta > 0.0)) throw std::invalid_argument("one of --beta or --sigma is required");
      c.noise_bounds.assign(c.size(), beta);
      TlsConfig cfg;
      cfg.cbar_sq = r_cbar2;
      RegisterOptions opts;
      opts.known_scale = r_scale;
      opts.certify = r_certify;
      opts.certify_max_tims = r_cap;
      c.validate();
      if (c.size() < 3) throw InsufficientInliers();
      const MeasurementGraph g = build_measurement_graph(c, GraphTopology::complete(static_cast<int>(c.size())));
      const RegistrationResult r = register_clouds(c, g, cfg, opts);

      json j;
      j["schema_version"] = kBenchSchemaVersion;
      j["transform"] = transform_json(r.transform);
      j["inlier_indices"] = r.inlier_indices;
      j["clique_vertices"] = r.clique_vertices;
      j["certificate"] = r.certificate ? certificate_json(*r.certificate) : json(nullptr);
      j["eta"] = r.certificate ? json(r.certificate->eta) : json(nullptr);
      const StageTimings& t = r.stage_timings;
      j["timings_ms"] = {{"scale", t.scale_ms},         {"prune", t.prune_ms},   {"clique", t.clique_ms},
                         {"rotation", t.rotation_ms},   {"certify", t.certify_ms}, {"translation", t.translation_ms},
                         {"total", t.total_ms}};
      const StageStats& s = r.stage_stats;
      j["stats"] = {{"tims", s.n_tims},
                    {"scale_inliers", s.scale_inliers},
                    {"edges_kept", s.edges_kept},
                    {"clique_size", s.clique_size},
                    {"clique_certified_maximum", s.clique_certified_maximum},
                    {"rotation_tims", s.rotation_tims},
                    {"rotation_inliers", s.rotation_inliers},
                    {"gnc_iterations", s.gnc_iterations},
                    {"rotation_degenerate", s.rotation_degenerate},
                    {"used_next_clique", s.used_next_clique},
                    {"translation_inliers", s.translation_inliers}};
      if (r_bounds) j["bounds"] = bounds_json(compute_bounds(r, c, g, r_cbar2));
      if (!r_problem.empty()) {
        const RotationProblem p = clique_problem(g, r, r_cbar2);
        json pj = problem_json(p);
        const Vec4& q = r.transform.rotation.coeffs();
        pj["candidate"] = {{"quaternion_xyzw", {q[0], q[1], q[2], q[3]}},
                           {"thetas", residual_theta(p, r.transform.R())}};
        write_text(r_problem, pj.dump(2) + "\n");
      }
      emit(r_out, j);
      return kExitOk;
    }

    if (*cert) {
      const json pj = read_json(c_problem);
      const RotationProblem p = problem_from_json(pj, c_problem);
      p.validate();
      const std::string cand_path = c_candidate.empty() ? c_problem : c_candidate;
      const json cj = c_candidate.empty() ? pj.value("candidate", json()) : read_json(c_candidate);
      if (!cj.is_object() || !cj.contains("quaternion_xyzw")) throw ParseError(cand_path, 1, "missing candidate quaternion_xyzw");
      const auto qv = cj["quaternion_xyzw"].get<std::vector<double>>();
      if (qv.size() != 4) throw ParseError(cand_path, 1, "quaternion_xyzw must have 4 entries");
      const UnitQuaternion q(qv[0], qv[1], qv[2], qv[3]);
      std::vector<int> thetas = cj.contains("thetas") ? cj["thetas"].get<std::vector<int>>() : residual_theta(p, q.matrix());
      if (thetas.size() != p.size()) throw ParseError(cand_path, 1, "thetas length does not match the problem");
      CertifyOptions co;
      co.max_iterations = c_iters;
      Certificate c;
      if (static_cast<int>(p.size()) <= c_cap) {
        const QcqpData d = build_Q(p);
        c = certify(d, make_candidate(d, q, thetas), co);
      } else {
        c = certify_rotation(p, q, c_cap, co);
      }
      json j = certificate_json(c);
      j["schema_version"] = kBenchSchemaVersion;
      j["K"] = p.size();
      emit(c_out, j);
      return kExitOk;
    }

    if (*bench) {
      bcfg.rates = parse_rates(b_rates);
      bcfg.source = parse_source(b_source);
      const BenchReport rep = run_bench(bcfg);
      std::cout << format_table(rep);
      if (!b_out.empty()) write_text(b_out, to_json(rep) + "\n");
      return kExitOk;
    }
  } catch (const InsufficientInliers& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInsufficient;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed JSON content: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
