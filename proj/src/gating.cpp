#include "fusetrack/gating.hpp"

#include <cmath>
#include <limits>

#include "fusetrack/error.hpp"

namespace fusetrack::gating {

CandidateMatrix CandidateMatrix::from_features(
    std::span<const appearance::AppearanceFeature> features, std::vector<CandidateMeta> meta) {
  if (features.size() != meta.size()) {
    throw InvalidArgument("candidate matrix: feature and meta counts differ");
  }
  CandidateMatrix out;
  const std::size_t m =
      features.empty() ? 0 : features.front().shape.size() + features.front().histogram.size();
  out.features.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(features.size()));
  for (std::size_t j = 0; j < features.size(); ++j) {
    const auto& f = features[j];
    if (f.shape.size() + f.histogram.size() != m) {
      throw InvalidArgument("candidate matrix: feature length differs at column " +
                            std::to_string(j));
    }
    Eigen::Index row = 0;
    for (double v : f.shape) out.features(row++, static_cast<Eigen::Index>(j)) = v;
    for (double v : f.histogram.weights()) out.features(row++, static_cast<Eigen::Index>(j)) = v;
  }
  out.meta = std::move(meta);
  return out;
}

void GateSettings::validate() const {
  if (!(tau > 0.0 && tau <= 1.0)) throw InvalidArgument("gate tau must lie in (0, 1]");
  if (!(v_min >= 0.0)) throw InvalidArgument("gate v_min must be >= 0");
  if (!(sigma2_floor >= 0.0)) throw InvalidArgument("gate sigma2_floor must be >= 0");
}

GateParams GateParams::pass_all(double t, double tau) {
  return GateParams{t, std::numeric_limits<double>::infinity(), tau, true};
}

GateParams predict_arrival(const kalman::StateEstimate& est, double distance,
                           const GateSettings& settings) {
  settings.validate();
  if (!(distance >= 0.0) || !std::isfinite(distance)) {
    throw InvalidArgument("predict_arrival: distance must be finite and >= 0");
  }
  const double speed = est.velocity();
  if (!std::isfinite(speed) || speed <= settings.v_min) {
    return GateParams::pass_all(est.t, settings.tau);
  }
  const double sigma_v = std::sqrt(std::max(0.0, est.velocity_variance()));
  const double sigma_t = distance / (speed * speed) * sigma_v;

  GateParams out;
  out.mu = est.t + distance / speed;
  out.sigma2 = sigma_t * sigma_t + settings.sigma2_floor;
  out.tau = settings.tau;
  return out;
}

GateFilter GateFilter::pass_all(std::size_t n) {
  return GateFilter{std::vector<double>(n, 1.0), n, true};
}

GateFilter build_filter(const GateParams& params, std::span<const double> candidate_times) {
  if (params.all_pass) return GateFilter::pass_all(candidate_times.size());
  if (!(params.tau > 0.0 && params.tau <= 1.0)) throw InvalidArgument("gate tau must lie in (0, 1]");
  if (!(params.sigma2 >= 0.0)) throw InvalidArgument("gate variance must be >= 0");

  GateFilter f;
  f.weights.resize(candidate_times.size(), 0.0);
  for (std::size_t j = 0; j < candidate_times.size(); ++j) {
    const double d = candidate_times[j] - params.mu;
    double w;
    if (params.sigma2 > 0.0) {
      w = std::exp(-d * d / (2.0 * params.sigma2));
    } else {
      w = d == 0.0 ? 1.0 : 0.0;  // zero-width gate
    }
    if (w >= params.tau) {
      f.weights[j] = w;
      ++f.nnz;
    }
  }
  return f;
}

FilteredCandidates apply_filter(const GateFilter& filter, const CandidateMatrix& candidates) {
  if (filter.size() != candidates.cols() || candidates.meta.size() != candidates.cols()) {
    throw InvalidArgument("apply_filter: filter length " + std::to_string(filter.size()) +
                          " does not match " + std::to_string(candidates.cols()) + " candidates");
  }
  FilteredCandidates out;
  out.matrix = candidates.features;
  out.meta = candidates.meta;
  for (std::size_t j = 0; j < filter.size(); ++j) {
    const double w = filter.weights[j];
    out.matrix.col(static_cast<Eigen::Index>(j)) *= w;
    if (w > 0.0) out.survivors.push_back(j);
  }
  return out;
}

GatedMatches gated_top_k(const appearance::AppearanceFeature& query,
                         const FilteredCandidates& filtered,
                         std::span<const appearance::AppearanceFeature> features, std::size_t k,
                         const appearance::MatchOptions& opts) {
  if (features.size() != filtered.meta.size()) {
    throw InvalidArgument("gated_top_k: feature list does not match candidate columns");
  }
  GatedMatches out;
  if (filtered.empty()) {
    out.no_candidates = true;
    return out;
  }
  out.comparisons = filtered.survivors.size();
  out.ranked = appearance::top_k_among(query, features, filtered.survivors, k, opts);
  return out;
}

}  // namespace fusetrack::gating
