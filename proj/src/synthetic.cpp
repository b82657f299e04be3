#include "robreg/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace robreg {

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitMix64::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double SplitMix64::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * M_PI * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * M_PI * u2);
}

std::uint64_t SplitMix64::below(std::uint64_t n) {
  // rejection keeps the draw unbiased
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  for (;;) {
    const std::uint64_t x = next();
    if (x < limit) return x % n;
  }
}

Vec3 SplitMix64::unit_vector() {
  for (;;) {
    const Vec3 v(normal(), normal(), normal());
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

Vec3 SplitMix64::in_ball(double radius) {
  for (;;) {
    const Vec3 v(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1));
    if (v.squaredNorm() <= 1.0) return radius * v;
  }
}

UnitQuaternion SplitMix64::rotation() {
  for (;;) {
    const Vec4 q(normal(), normal(), normal(), normal());
    if (q.norm() > 1e-12) return UnitQuaternion(q);
  }
}

Vec3 bounded_noise(SplitMix64& rng, double sigma, double bound) {
  if (sigma <= 0.0) return Vec3::Zero();
  for (;;) {
    const Vec3 e = sigma * Vec3(rng.normal(), rng.normal(), rng.normal());
    if (e.norm() <= bound) return e;
  }
}

void SyntheticSpec::validate() const {
  if (n_points < 1) throw std::invalid_argument("n_points must be positive");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be nonnegative");
  if (!(outlier_rate >= 0.0 && outlier_rate < 1.0)) throw std::invalid_argument("outlier_rate must be in [0, 1)");
  if (!(scale_min > 0.0 && scale_max >= scale_min)) throw std::invalid_argument("invalid scale range");
  if (!(translation_norm_max >= 0.0)) throw std::invalid_argument("translation_norm_max must be nonnegative");
  if (!(outlier_radius > 0.0)) throw std::invalid_argument("outlier_radius must be positive");
  if (!(overlap_fraction > 0.0 && overlap_fraction <= 1.0)) throw std::invalid_argument("overlap_fraction must be in (0, 1]");
  if (!(beta() > 0.0)) throw std::invalid_argument("noise bound must be positive");
  if (source == SourceKind::reference && n_points > static_cast<int>(reference_cloud().size()))
    throw std::invalid_argument("reference cloud has only 40 points");
}

namespace {

// First k entries of a seeded Fisher-Yates shuffle of 0..n-1.
std::vector<int> choose(SplitMix64& rng, int n, int k) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < k; ++i) std::swap(idx[i], idx[i + static_cast<int>(rng.below(n - i))]);
  idx.resize(k);
  return idx;
}

}  // namespace

SyntheticData generate(const SyntheticSpec& spec) {
  spec.validate();
  SplitMix64 rng(spec.seed);
  const int n = spec.n_points;
  const double beta = spec.beta();

  std::vector<Point3> src;
  if (spec.source == SourceKind::reference) {
    for (int i : choose(rng, static_cast<int>(reference_cloud().size()), n)) src.push_back(reference_cloud()[i]);
  } else {
    for (int i = 0; i < n; ++i) src.emplace_back(rng.uniform(), rng.uniform(), rng.uniform());
  }

  SyntheticData out;
  out.truth.scale = spec.known_scale ? 1.0 : rng.uniform(spec.scale_min, spec.scale_max);
  out.truth.rotation = rng.rotation();
  out.truth.translation = rng.in_ball(spec.translation_norm_max);

  std::vector<Point3> dst(n);
  for (int i = 0; i < n; ++i) dst[i] = out.truth.apply(src[i]) + bounded_noise(rng, spec.sigma, beta);

  CorrespondenceSet& c = out.correspondences;
  if (!spec.all_to_all) {
    c.source = src;
    c.target = dst;
    out.labels.assign(n, 1);
    const int n_out = static_cast<int>(std::lround(spec.outlier_rate * n));
    for (int i : choose(rng, n, n_out)) {
      c.target[i] = rng.in_ball(spec.outlier_radius);
      out.labels[i] = 0;
    }
  } else {
    // Drop a random part of the target cloud, then pair every source point with every kept target point.
    const int kept = std::max(1, static_cast<int>(std::lround(spec.overlap_fraction * n)));
    std::vector<int> keep = choose(rng, n, kept);
    std::sort(keep.begin(), keep.end());
    for (int i = 0; i < n; ++i)
      for (int j : keep) {
        c.source.push_back(src[i]);
        c.target.push_back(dst[j]);
        out.labels.push_back(i == j ? 1 : 0);
      }
  }
  c.noise_bounds.assign(c.source.size(), beta);
  return out;
}

}  // namespace robreg
