#include "fusetrack/kalman.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "fusetrack/error.hpp"

namespace fusetrack::kalman {
namespace {

constexpr double kPsdTolerance = 1e-10;

bool finite(const StateEstimate& s) {
  return s.x.allFinite() && s.P.allFinite() && std::isfinite(s.t);
}

void check_model(const TransitionModel& m) {
  if (!(m.dt > 0.0) || !std::isfinite(m.dt)) {
    throw InvalidArgument("transition dt must be positive and finite");
  }
  if (!m.A.allFinite() || !m.Q.allFinite()) {
    throw InvalidArgument("transition model contains non-finite entries");
  }
}

}  // namespace

TransitionModel TransitionModel::constant_velocity(double dt, double q) {
  TransitionModel m;
  m.dt = dt;
  m.A << 1.0, dt, 0.0, 1.0;
  const double dt2 = dt * dt;
  m.Q << dt2 * dt / 3.0, dt2 / 2.0, dt2 / 2.0, dt;
  m.Q *= q;
  return m;
}

StateEstimate FilterDefaults::initial(double t, double position) const {
  StateEstimate s;
  s.x << position, v0;
  s.P << p0_position, 0.0, 0.0, p0_velocity;
  s.t = t;
  return s;
}

Mat2 make_psd(const Mat2& P) {
  Mat2 sym = 0.5 * (P + P.transpose());
  Eigen::SelfAdjointEigenSolver<Mat2> eig(sym);
  const Vec2 values = eig.eigenvalues();
  if (values.minCoeff() < -kPsdTolerance) {
    throw NumericalError("covariance lost positive semi-definiteness (min eigenvalue " +
                         std::to_string(values.minCoeff()) + ")");
  }
  if (values.minCoeff() < 0.0) {
    const Vec2 clamped = values.cwiseMax(0.0);
    sym = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
    sym = 0.5 * (sym + sym.transpose());
  }
  return sym;
}

StateEstimate predict(const StateEstimate& prior, const TransitionModel& model) {
  if (!finite(prior)) throw InvalidArgument("predict: non-finite prior state");
  check_model(model);

  StateEstimate out;
  out.x = model.A * prior.x;
  out.P = make_psd(model.A * prior.P * model.A.transpose() + model.Q);
  out.t = prior.t + model.dt;
  return out;
}

StateEstimate update(const StateEstimate& prior, const VelocityObservation& z,
                     const ObservationModel& obs) {
  if (!finite(prior)) throw InvalidArgument("update: non-finite prior state");
  if (!std::isfinite(z.z) || !std::isfinite(z.t)) {
    throw InvalidArgument("update: non-finite observation");
  }
  if (!(obs.R > 0.0)) throw InvalidArgument("update: measurement variance must be positive");

  // Scalar innovation variance, so the inverse is a division.
  const double innovation_var = (obs.B * prior.P * obs.B.transpose())(0, 0) + obs.R;
  if (!(innovation_var > 0.0)) {
    throw NumericalError("update: non-positive innovation variance");
  }
  const Vec2 K = prior.P * obs.B.transpose() / innovation_var;
  const double innovation = z.z - (obs.B * prior.x)(0, 0);

  StateEstimate out;
  out.x = prior.x + K * innovation;
  out.P = make_psd((Mat2::Identity() - K * obs.B) * prior.P);
  out.t = prior.t;
  return out;
}

std::vector<StateEstimate> run_filter(const StateEstimate& init,
                                      std::span<const VelocityObservation> observations,
                                      const ProcessModel& process,
                                      const ObservationModel& obs) {
  std::vector<StateEstimate> out;
  out.reserve(observations.size() + 1);
  out.push_back(init);

  StateEstimate current = init;
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const VelocityObservation& z = observations[i];
    const bool ordered = i == 0 ? z.t >= init.t : z.t > observations[i - 1].t;
    if (!ordered || !std::isfinite(z.t)) {
      throw InvalidArgument("run_filter: observation timestamps not strictly increasing at index " +
                            std::to_string(i));
    }
    const double gap = z.t - current.t;
    if (gap > 0.0) {
      current = predict(current, process.over(gap));
      current.t = z.t;  // avoid accumulating rounding in t
    }
    current = update(current, z, obs);
    out.push_back(current);
  }
  return out;
}

}  // namespace fusetrack::kalman
