#pragma once

#include "cvclone/rng.hpp"
#include "cvclone/symplectic.hpp"

#include <cmath>
#include <utility>

namespace cvclone {

// Imperfect homodyne detector: quantum efficiency plus electronic noise
// variance, both in shot-noise units. The recorded value for quadrature q is
// distributed as N(sqrt(eta) * <q>, eta * Var(q) + (1 - eta) + sigma_el^2).
struct DetectorModel {
  double efficiency = 1.0;
  double electronic_noise = 0.0;

  void validate() const {
    if (!(efficiency > 0.0 && efficiency <= 1.0)) {
      throw std::invalid_argument("detector efficiency must be in (0,1]");
    }
    if (!(electronic_noise >= 0.0)) {
      throw std::invalid_argument("electronic noise variance must be >= 0");
    }
  }
};

struct HomodyneOutcome {
  double value = 0.0;
  Quadrature quadrature = Quadrature::X;
  Eigen::Index mode = 0;
};

namespace detail {

// Gaussian conditioning on "quadrature index q read out value v through the
// detector": rank-one update of (mean, cov), then the mode is discarded.
// Degenerate marginals (variance below threshold relative to the largest
// entry) skip the update instead of dividing by ~0.
template <typename Scalar>
GaussianState<Scalar> condition_and_remove(const GaussianState<Scalar>& state,
                                           Eigen::Index mode, Quadrature quad,
                                           const DetectorModel& detector,
                                           Scalar value) {
  const Eigen::Index q =
      quad == Quadrature::X ? x_index(mode) : p_index(mode);
  const Scalar eta = Scalar(detector.efficiency);
  const Scalar sqrt_eta = std::sqrt(eta);
  const Scalar marginal = eta * state.cov()(q, q) + (Scalar(1) - eta) +
                          Scalar(detector.electronic_noise);
  const Scalar scale =
      std::max(state.cov().diagonal().cwiseAbs().maxCoeff(), Scalar(1));
  GaussianState<Scalar> out = state;
  if (marginal > Scalar(1e-12) * scale) {
    VectorX<Scalar> gain = sqrt_eta * state.cov().col(q) / marginal;
    out.mutable_mean() += gain * (value - sqrt_eta * state.mean()(q));
    out.mutable_cov() -=
        (gain * (sqrt_eta * state.cov().row(q))).eval();
    out.resymmetrize();
  }
  return partial_trace(out, ModeSelector({mode}));
}

}  // namespace detail

// Marginal variance seen by the detector for the given quadrature.
template <typename Scalar>
Scalar homodyne_variance(const GaussianState<Scalar>& state, Eigen::Index mode,
                         Quadrature quad, const DetectorModel& detector) {
  ModeSelector({mode}).check_range(state.n_modes());
  detector.validate();
  const Eigen::Index q = quad == Quadrature::X ? x_index(mode) : p_index(mode);
  const Scalar eta = Scalar(detector.efficiency);
  return eta * state.cov()(q, q) + (Scalar(1) - eta) +
         Scalar(detector.electronic_noise);
}

// Conditional state after observing `value`; the measured mode is removed.
template <typename Scalar>
GaussianState<Scalar> condition_on_homodyne(const GaussianState<Scalar>& state,
                                            Eigen::Index mode, Quadrature quad,
                                            const DetectorModel& detector,
                                            Scalar value) {
  ModeSelector({mode}).check_range(state.n_modes());
  detector.validate();
  if (state.n_modes() < 2) {
    throw std::invalid_argument("homodyne would consume the last mode");
  }
  return detail::condition_and_remove(state, mode, quad, detector, value);
}

// Sample a homodyne record and return (outcome, conditional state).
template <typename Scalar>
std::pair<HomodyneOutcome, GaussianState<Scalar>> homodyne(
    const GaussianState<Scalar>& state, Eigen::Index mode, Quadrature quad,
    const DetectorModel& detector, SeededRng& rng) {
  ModeSelector({mode}).check_range(state.n_modes());
  detector.validate();
  if (state.n_modes() < 2) {
    throw std::invalid_argument("homodyne would consume the last mode");
  }
  const Eigen::Index q = quad == Quadrature::X ? x_index(mode) : p_index(mode);
  const Scalar marginal = homodyne_variance(state, mode, quad, detector);
  if (!(marginal > Scalar(0))) {
    throw NumericalError("homodyne marginal variance is not positive");
  }
  const Scalar value = std::sqrt(Scalar(detector.efficiency)) *
                           state.mean()(q) +
                       std::sqrt(marginal) * Scalar(rng.normal());
  HomodyneOutcome outcome{static_cast<double>(value), quad, mode};
  return {outcome,
          detail::condition_and_remove(state, mode, quad, detector, value)};
}

struct JointOutcome {
  double x_sum = 0.0;   // (x_a + x_b) / sqrt(2)
  double p_diff = 0.0;  // (p_a - p_b) / sqrt(2)
};

// Joint measurement of the commuting pair {x_a + x_b, p_a - p_b}: interfere
// the two modes on a balanced splitter, then read x on the sum port and p on
// the difference port. Both measured modes are removed from the state.
template <typename Scalar>
std::pair<JointOutcome, GaussianState<Scalar>> joint_pc_measurement(
    const GaussianState<Scalar>& state, Eigen::Index mode_a,
    Eigen::Index mode_b, const DetectorModel& detector, SeededRng& rng) {
  ModeSelector({mode_a, mode_b}).check_range(state.n_modes());
  detector.validate();
  if (state.n_modes() < 3) {
    throw std::invalid_argument("joint measurement would consume every mode");
  }
  GaussianState<Scalar> mixed = state;
  // Sum port lands on mode_b's slot, difference port on mode_a's slot.
  apply_on(beam_splitter<Scalar>(Scalar(0.5)), mixed,
           ModeSelector({mode_b, mode_a}));
  const Eigen::Index hi = std::max(mode_a, mode_b);
  const Eigen::Index lo = std::min(mode_a, mode_b);
  const Quadrature quad_hi = hi == mode_b ? Quadrature::X : Quadrature::P;
  const Quadrature quad_lo = lo == mode_b ? Quadrature::X : Quadrature::P;
  auto [first, after_first] = homodyne(mixed, hi, quad_hi, detector, rng);
  auto [second, reduced] = homodyne(after_first, lo, quad_lo, detector, rng);
  JointOutcome joint;
  joint.x_sum = quad_hi == Quadrature::X ? first.value : second.value;
  joint.p_diff = quad_hi == Quadrature::P ? first.value : second.value;
  return {joint, reduced};
}

}  // namespace cvclone
