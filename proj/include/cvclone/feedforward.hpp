#pragma once

#include "cvclone/measurement.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace cvclone {

// Feedforward gain that exactly cancels the tap vacuum: the amplified output
// becomes (1/sqrt(T)) x_in + sqrt((1-T)/T) x_conj with no vacuum term.
inline double ideal_g1(double transmission) {
  if (!(transmission > 0.0 && transmission <= 1.0)) {
    throw std::invalid_argument("transmission must be in (0,1]");
  }
  return std::sqrt(2.0 * (1.0 - transmission) / transmission);
}

// Gain that pins the end-to-end mean gain of the n -> m machine to one at an
// arbitrary tap transmission (coincides with ideal_g1 at the optimal T when
// m >= n).
inline double unity_gain_g1(int n, int m, double transmission) {
  if (n < 1 || m < 1) throw std::invalid_argument("n and m must be >= 1");
  if (!(transmission > 0.0 && transmission <= 1.0)) {
    throw std::invalid_argument("transmission must be in (0,1]");
  }
  const double num = std::sqrt(double(m) / double(n)) - std::sqrt(transmission);
  return std::sqrt(2.0) * num / (1.0 + std::sqrt(1.0 - transmission));
}

// Gains that route the measured record onto the auxiliary (anticlone) branch
// with the right sign to cancel its excess noise.
inline double ideal_g2x(double transmission) {
  if (!(transmission > 0.0 && transmission <= 1.0)) {
    throw std::invalid_argument("transmission must be in (0,1]");
  }
  return std::sqrt(2.0 / transmission);
}

inline double ideal_g2p(double transmission) { return -ideal_g2x(transmission); }

// Optional overrides; unset members fall back to the ideal values.
struct FeedforwardGains {
  std::optional<double> g1;
  std::optional<double> g2x;
  std::optional<double> g2p;
};

// One feedforward destination: mode `mode` is displaced by
// (x_gain * x_sum_record, p_gain * p_diff_record).
struct FeedforwardTap {
  Eigen::Index mode = 0;
  double x_gain = 0.0;
  double p_gain = 0.0;
};

namespace detail {

template <typename Scalar>
void check_amplifier_args(const GaussianState<Scalar>& state,
                          Eigen::Index signal, Eigen::Index ancilla,
                          Eigen::Index conjugate,
                          const std::vector<FeedforwardTap>& taps,
                          double transmission) {
  ModeSelector({signal, ancilla, conjugate}).check_range(state.n_modes());
  if (!(transmission > 0.0 && transmission <= 1.0)) {
    throw std::invalid_argument("transmission must be in (0,1]");
  }
  for (const auto& tap : taps) {
    ModeSelector({tap.mode}).check_range(state.n_modes());
    if (tap.mode == ancilla || tap.mode == conjugate) {
      throw std::invalid_argument("tap cannot target a measured mode");
    }
  }
}

// Mode index after {ancilla, conjugate} have been removed.
inline Eigen::Index shifted_index(Eigen::Index mode, Eigen::Index ancilla,
                                  Eigen::Index conjugate) {
  Eigen::Index shift = 0;
  if (mode > ancilla) ++shift;
  if (mode > conjugate) ++shift;
  return mode - shift;
}

}  // namespace detail

// Phase-insensitive amplifier stage, Monte Carlo flavor. Splits the signal
// on a tap of the given transmission (reflected part lands on the ancilla
// slot), jointly measures {x_sum, p_diff} of reflected beam and conjugate
// mode, and displaces every tap by its gains times the two records. The
// ancilla and conjugate modes are consumed; surviving modes keep their order.
template <typename Scalar>
std::pair<JointOutcome, GaussianState<Scalar>> amplifier_sampled(
    const GaussianState<Scalar>& state, Eigen::Index signal,
    Eigen::Index ancilla, Eigen::Index conjugate, double transmission,
    const std::vector<FeedforwardTap>& taps, const DetectorModel& detector,
    SeededRng& rng) {
  detail::check_amplifier_args(state, signal, ancilla, conjugate, taps,
                               transmission);
  GaussianState<Scalar> work = state;
  apply_on(beam_splitter<Scalar>(Scalar(transmission)), work,
           ModeSelector({ancilla, signal}));
  auto [records, reduced] =
      joint_pc_measurement(work, ancilla, conjugate, detector, rng);
  for (const auto& tap : taps) {
    const Eigen::Index mode =
        detail::shifted_index(tap.mode, ancilla, conjugate);
    reduced = displace(reduced, mode, Scalar(tap.x_gain * records.x_sum),
                       Scalar(tap.p_gain * records.p_diff));
  }
  return {records, reduced};
}

// Same stage, exact flavor: the measure-and-displace step is replaced by QND
// couplings from the (lossy) measurement ports onto the taps, after which
// the ports are traced out. The reduced state equals the sampled flavor's
// shot average exactly, including detector efficiency and electronic noise.
template <typename Scalar>
GaussianState<Scalar> amplifier_exact(const GaussianState<Scalar>& state,
                                      Eigen::Index signal,
                                      Eigen::Index ancilla,
                                      Eigen::Index conjugate,
                                      double transmission,
                                      const std::vector<FeedforwardTap>& taps,
                                      const DetectorModel& detector) {
  detail::check_amplifier_args(state, signal, ancilla, conjugate, taps,
                               transmission);
  detector.validate();
  GaussianState<Scalar> work = state;
  apply_on(beam_splitter<Scalar>(Scalar(transmission)), work,
           ModeSelector({ancilla, signal}));
  // Balanced splitter of the joint measurement: sum port on the conjugate
  // slot, difference port on the ancilla slot.
  apply_on(beam_splitter<Scalar>(Scalar(0.5)), work,
           ModeSelector({conjugate, ancilla}));
  Eigen::Index sum_port = conjugate;
  Eigen::Index diff_port = ancilla;
  const Eigen::Index n = work.n_modes();
  std::vector<Eigen::Index> drop{ancilla, conjugate};
  const double eta = detector.efficiency;
  if (eta < 1.0) {
    work = tensor(work, vacuum<Scalar>(2));
    apply_on(beam_splitter<Scalar>(Scalar(eta)), work,
             ModeSelector({sum_port, n}));
    apply_on(beam_splitter<Scalar>(Scalar(eta)), work,
             ModeSelector({diff_port, n + 1}));
    drop.push_back(n);
    drop.push_back(n + 1);
  }
  for (const auto& tap : taps) {
    apply_on(quadrature_coupling<Scalar>(Quadrature::X, Scalar(tap.x_gain)),
             work, ModeSelector({sum_port, tap.mode}));
    apply_on(quadrature_coupling<Scalar>(Quadrature::P, Scalar(tap.p_gain)),
             work, ModeSelector({diff_port, tap.mode}));
  }
  GaussianState<Scalar> reduced =
      partial_trace(work, ModeSelector(std::move(drop)));
  // Electronic noise rides on the two records and lands on every tap fed
  // from them, correlated across taps.
  const Scalar sigma_el = Scalar(detector.electronic_noise);
  if (sigma_el > Scalar(0)) {
    auto& cov = reduced.mutable_cov();
    for (const auto& ti : taps) {
      const Eigen::Index mi =
          detail::shifted_index(ti.mode, ancilla, conjugate);
      for (const auto& tj : taps) {
        const Eigen::Index mj =
            detail::shifted_index(tj.mode, ancilla, conjugate);
        cov(x_index(mi), x_index(mj)) +=
            sigma_el * Scalar(ti.x_gain * tj.x_gain);
        cov(p_index(mi), p_index(mj)) +=
            sigma_el * Scalar(ti.p_gain * tj.p_gain);
      }
    }
    reduced.resymmetrize();
  }
  return reduced;
}

}  // namespace cvclone
