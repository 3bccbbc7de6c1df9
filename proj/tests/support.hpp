#pragma once
// Reference implementations and generators shared by the test programs.
// The oracles are written with plain scalars so that they share no code with
// the library they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fusetrack/appearance.hpp"
#include "fusetrack/kalman.hpp"
#include "fusetrack/rng.hpp"

namespace testing {

struct ScalarState {
  double x0, x1;
  double p00, p01, p11;
  double t;
};

inline ScalarState to_scalar(const fusetrack::kalman::StateEstimate& s) {
  return {s.x(0), s.x(1), s.P(0, 0), s.P(0, 1), s.P(1, 1), s.t};
}

inline ScalarState oracle_predict(const ScalarState& s, double dt, double q) {
  ScalarState o = s;
  o.x0 = s.x0 + dt * s.x1;
  o.p00 = s.p00 + 2.0 * dt * s.p01 + dt * dt * s.p11 + q * dt * dt * dt / 3.0;
  o.p01 = s.p01 + dt * s.p11 + q * dt * dt / 2.0;
  o.p11 = s.p11 + q * dt;
  o.t = s.t + dt;
  return o;
}

inline ScalarState oracle_update(const ScalarState& s, double z, double r) {
  const double sv = s.p11 + r;
  const double k0 = s.p01 / sv;
  const double k1 = s.p11 / sv;
  const double innov = z - s.x1;
  ScalarState o = s;
  o.x0 = s.x0 + k0 * innov;
  o.x1 = s.x1 + k1 * innov;
  o.p00 = s.p00 - k0 * s.p01;
  o.p01 = s.p01 - k0 * s.p11;
  o.p11 = s.p11 - k1 * s.p11;
  return o;
}

inline double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max(1.0, std::max(std::fabs(a), std::fabs(b)));
}

inline double max_rel_err(const ScalarState& a, const ScalarState& b) {
  return std::max({rel_err(a.x0, b.x0), rel_err(a.x1, b.x1), rel_err(a.p00, b.p00),
                   rel_err(a.p01, b.p01), rel_err(a.p11, b.p11), rel_err(a.t, b.t)});
}

inline std::vector<double> random_weights(fusetrack::Rng& rng, std::size_t n, double sparsity = 0.5) {
  std::vector<double> w(n, 0.0);
  double sum = 0.0;
  for (auto& v : w) {
    if (rng.uniform() >= sparsity) {
      v = rng.uniform();
      sum += v;
    }
  }
  if (sum == 0.0) {
    w[rng.below(n)] = 1.0;
    return w;
  }
  for (auto& v : w) v /= sum;
  return w;
}

inline fusetrack::appearance::AppearanceFeature random_feature(
    fusetrack::Rng& rng, const fusetrack::appearance::HistogramConfig& cfg, std::size_t shape_dim,
    int classes = 4) {
  using namespace fusetrack::appearance;
  AppearanceFeature f;
  f.vehicle_class = static_cast<VehicleClass>(rng.below(static_cast<std::uint64_t>(classes)));
  f.shape.resize(shape_dim);
  for (auto& v : f.shape) v = rng.normal();
  f.histogram = ColorHistogram::from_weights(cfg, random_weights(rng, cfg.size()));
  return f;
}

// Direct evaluation of the appearance distance from its definition.
inline double oracle_distance(const fusetrack::appearance::AppearanceFeature& a,
                              const fusetrack::appearance::AppearanceFeature& b, double w) {
  double inter = 0.0;
  for (std::size_t i = 0; i < a.histogram.size(); ++i) {
    inter += std::min(a.histogram.weights()[i], b.histogram.weights()[i]);
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < a.shape.size(); ++i) ss += (a.shape[i] - b.shape[i]) * (a.shape[i] - b.shape[i]);
  const double shape = a.shape.empty() ? 0.0 : std::min(1.0, std::sqrt(ss / static_cast<double>(a.shape.size())));
  return w * (1.0 - inter) + (1.0 - w) * shape;
}

}  // namespace testing
