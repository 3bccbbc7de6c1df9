#pragma once

// Constant-velocity Kalman filter over a scalar route coordinate.
//
// State x = (position [m], velocity [m/s]). Only velocity is observed, via
// B = [0 1]. Irregular observation gaps are handled by rebuilding the
// transition and process noise for every gap.

#include <Eigen/Core>
#include <span>
#include <vector>

namespace fusetrack::kalman {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Row2 = Eigen::RowVector2d;

struct StateEstimate {
  Vec2 x = Vec2::Zero();
  Mat2 P = Mat2::Identity();
  double t = 0.0;

  double position() const { return x(0); }
  double velocity() const { return x(1); }
  double velocity_variance() const { return P(1, 1); }
};

struct VelocityObservation {
  double t = 0.0;
  double z = 0.0;
};

/// One-gap transition: A = [[1, dt], [0, 1]] and process noise Q.
struct TransitionModel {
  double dt = 1.0;
  Mat2 A = Mat2::Identity();
  Mat2 Q = Mat2::Zero();

  /// Continuous white-noise acceleration discretization,
  /// Q = q * [[dt^3/3, dt^2/2], [dt^2/2, dt]].
  static TransitionModel constant_velocity(double dt, double q);
};

struct ObservationModel {
  Row2 B = Row2(0.0, 1.0);
  double R = 4.0;
};

/// Parameters of the motion model when the gap length is not yet known.
struct ProcessModel {
  double q = 0.1;  ///< acceleration spectral density, m^2/s^3

  TransitionModel over(double dt) const {
    return TransitionModel::constant_velocity(dt, q);
  }
};

/// Defaults used when nothing else is configured.
struct FilterDefaults {
  double p0_position = 100.0;  // m^2
  double p0_velocity = 25.0;   // (m/s)^2
  double q = 0.1;
  double r = 4.0;
  double v0 = 12.0;  // prior velocity mean, m/s

  StateEstimate initial(double t, double position = 0.0) const;
};

StateEstimate predict(const StateEstimate& prior, const TransitionModel& model);

StateEstimate update(const StateEstimate& prior, const VelocityObservation& z,
                     const ObservationModel& obs);

/// Runs predict/update over a strictly increasing observation sequence.
/// Returns the initial state followed by one posterior per observation. An
/// observation stamped exactly at the current time is applied without a
/// prediction step.
std::vector<StateEstimate> run_filter(const StateEstimate& init,
                                      std::span<const VelocityObservation> observations,
                                      const ProcessModel& process,
                                      const ObservationModel& obs);

/// Symmetrizes P and clamps eigenvalues in (-1e-10, 0) to zero. Throws
/// NumericalError below -1e-10.
Mat2 make_psd(const Mat2& P);

}  // namespace fusetrack::kalman
