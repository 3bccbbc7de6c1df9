#pragma once

// Velocity-derived temporal gate over candidate detections.
//
// A Kalman estimate is turned into a Gaussian over arrival time at a
// downstream camera. The Gaussian is peak-normalized and thresholded into a
// sparse weight vector F, which scales the columns of the candidate feature
// matrix T (C = F (.) T). Appearance comparison then runs on the surviving
// columns only.

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fusetrack/appearance.hpp"
#include "fusetrack/kalman.hpp"

namespace fusetrack::gating {

struct CandidateMeta {
  std::string camera;
  double t = 0.0;
  std::size_t ref = 0;  ///< index of the detection in the event log
};

/// m x n matrix whose column j is the feature vector of candidate j.
struct CandidateMatrix {
  Eigen::MatrixXd features;
  std::vector<CandidateMeta> meta;

  std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(features.cols()); }

  /// Column j = shape descriptor followed by histogram weights of
  /// features[j]. Throws if lengths differ between candidates or from meta.
  static CandidateMatrix from_features(std::span<const appearance::AppearanceFeature> features,
                                       std::vector<CandidateMeta> meta);
};

struct GateSettings {
  double tau = 0.05;           ///< relative density cutoff in (0, 1]
  double v_min = 1.0;          ///< below this speed the gate passes everything
  double sigma2_floor = 4.0;   ///< s^2 added to the propagated variance

  void validate() const;
};

struct GateParams {
  double mu = 0.0;      ///< predicted arrival time, s
  double sigma2 = 0.0;  ///< arrival-time variance, s^2
  double tau = 0.05;
  bool all_pass = false;  ///< arrival time unknown; keep every candidate

  static GateParams pass_all(double t, double tau);
};

/// Delta-method propagation of the velocity estimate over `distance` metres.
/// Returns an all-pass gate when the estimated speed is <= v_min.
GateParams predict_arrival(const kalman::StateEstimate& est, double distance,
                           const GateSettings& settings);

struct GateFilter {
  std::vector<double> weights;
  std::size_t nnz = 0;
  bool all_pass = false;

  std::size_t size() const { return weights.size(); }
  static GateFilter pass_all(std::size_t n);
};

/// weights[j] = exp(-(t_j - mu)^2 / (2 sigma^2)), zeroed below tau.
GateFilter build_filter(const GateParams& params, std::span<const double> candidate_times);

struct FilteredCandidates {
  Eigen::MatrixXd matrix;                ///< C, non-surviving columns zero
  std::vector<std::size_t> survivors;    ///< ascending column indices
  std::vector<CandidateMeta> meta;

  bool empty() const { return survivors.empty(); }
};

/// Column-broadcast product C = F (.) T. Throws on a length mismatch.
FilteredCandidates apply_filter(const GateFilter& filter, const CandidateMatrix& candidates);

struct GatedMatches {
  std::vector<appearance::RankedCandidate> ranked;  ///< indices are columns
  std::size_t comparisons = 0;
  bool no_candidates = false;
};

/// top_k over the surviving columns. `features[j]` must be the feature that
/// produced column j; weights only decide survival, never the score.
GatedMatches gated_top_k(const appearance::AppearanceFeature& query,
                         const FilteredCandidates& filtered,
                         std::span<const appearance::AppearanceFeature> features, std::size_t k,
                         const appearance::MatchOptions& opts = {});

}  // namespace fusetrack::gating
