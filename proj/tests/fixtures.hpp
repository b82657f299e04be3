#pragma once

#include <random>

#include "robreg/core.hpp"
#include "robreg/rotation.hpp"

namespace fixture {

using namespace robreg;

inline Vec3 random_in_ball(std::mt19937_64& rng, double r) {
  std::uniform_real_distribution<double> u(-1, 1);
  for (;;) {
    const Vec3 v(u(rng), u(rng), u(rng));
    if (v.squaredNorm() <= 1.0) return r * v;
  }
}

inline UnitQuaternion random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return UnitQuaternion(Vec4(n(rng), n(rng), n(rng), n(rng)));
}

struct Instance {
  RotationProblem p;
  Mat3 R;
  std::vector<int> truth;
};

// Per-point noise is Gaussian with std sigma truncated at 5.54 sigma; a TIM
// carries the difference of two such draws and the bound beta_bar = 2 * 5.54 sigma.
inline Vec3 point_noise(std::mt19937_64& rng, double sigma) {
  std::normal_distribution<double> n(0.0, sigma);
  for (;;) {
    const Vec3 e(n(rng), n(rng), n(rng));
    if (e.norm() <= 5.54 * sigma) return e;
  }
}

inline Instance make_instance(std::mt19937_64& rng, int K, double outlier_rate, double sigma) {
  Instance in;
  // noiseless instances keep the bound of sigma = 0.01
  const double beta = 2 * 5.54 * (sigma > 0 ? sigma : 0.01);
  in.R = random_rotation(rng).matrix();
  std::uniform_real_distribution<double> u(-1, 1);
  std::bernoulli_distribution flip(outlier_rate);
  for (int k = 0; k < K; ++k) {
    const Vec3 a(u(rng), u(rng), u(rng));
    Vec3 b = in.R * a + (sigma > 0 ? Vec3(point_noise(rng, sigma) - point_noise(rng, sigma)) : Vec3::Zero());
    const bool out = flip(rng);
    if (out) b = random_in_ball(rng, 5.0);
    in.p.a_bars.push_back(a);
    in.p.b_bars.push_back(b);
    in.p.beta_bars.push_back(beta);
    in.truth.push_back(out ? -1 : 1);
  }
  return in;
}


}  // namespace fixture
