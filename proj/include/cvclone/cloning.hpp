#pragma once

#include "cvclone/feedforward.hpp"
#include "cvclone/networks.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

namespace cvclone {

// --- closed-form benchmarks ----------------------------------------------

// Tap transmission that minimizes the clone noise of the n + n -> m machine.
inline double optimal_transmission(int n, int m) {
  if (n < 1 || m < 1) throw std::invalid_argument("n and m must be >= 1");
  const double nn = n, mm = m;
  return 4.0 * mm * nn / ((mm + nn) * (mm + nn));
}

// Clone quadrature variance of the optimal machine (shot-noise units).
inline double clone_variance(int n, int m) {
  if (n < 1 || m < 1) throw std::invalid_argument("n and m must be >= 1");
  const double d = double(m) - double(n);
  return 1.0 + d * d / (2.0 * double(m) * double(m) * double(n));
}

// Optimal j -> m cloner of identical copies, for reference lines.
inline double conventional_clone_variance(int j, int m) {
  if (j < 1 || m < 1) throw std::invalid_argument("j and m must be >= 1");
  return 1.0 + 2.0 * double(m - j) / (double(j) * double(m));
}

inline double added_noise_db(double variance) {
  if (!(variance > 0.0)) {
    throw std::invalid_argument("variance must be positive");
  }
  return 10.0 * std::log10(variance);
}

// Overlap of a Gaussian clone with the coherent target, general means.
inline double coherent_clone_fidelity(double mean_x, double mean_p,
                                      double var_x, double var_p,
                                      double target_x, double target_p) {
  if (!(var_x > 0.0 && var_p > 0.0)) {
    throw std::invalid_argument("variances must be positive");
  }
  const double dx = mean_x - target_x;
  const double dp = mean_p - target_p;
  return 2.0 / std::sqrt((1.0 + var_x) * (1.0 + var_p)) *
         std::exp(-0.5 * (dx * dx / (1.0 + var_x) + dp * dp / (1.0 + var_p)));
}

// Unity-gain fidelity from the two clone variances alone.
inline double fidelity_from_variances(double var_x, double var_p) {
  return coherent_clone_fidelity(0.0, 0.0, var_x, var_p, 0.0, 0.0);
}

// Fidelity of the optimal n + n -> m phase-conjugate machine.
inline double pc_fidelity(int n, int m) {
  if (n < 1 || m < 1) throw std::invalid_argument("n and m must be >= 1");
  const double d = double(m) - double(n);
  const double s = 4.0 * double(m) * double(m) * double(n);
  return s / (s + d * d);
}

struct FidelityValue {
  double value = 1.0;
  bool clipped = false;  // true when the raw expression exceeded one
};

// Best conventional cloner fed the same resources (2n identical copies in
// place of n copies and n conjugates). Exceeds one for m < 2n, where fewer
// outputs than inputs make "cloning" trivial; the value is clipped and
// flagged.
inline FidelityValue conventional_fidelity_checked(int n, int m) {
  if (n < 1 || m < 1) throw std::invalid_argument("n and m must be >= 1");
  const double raw =
      2.0 * double(m) * double(n) /
      (2.0 * double(m) * double(n) + double(m) - 2.0 * double(n));
  if (raw > 1.0) return {1.0, true};
  return {raw, false};
}

inline double conventional_fidelity(int n, int m) {
  return conventional_fidelity_checked(n, m).value;
}

struct LimitsRow {
  int m = 1;
  double f_pc = 1.0;
  double f_conventional = 1.0;
  bool conventional_clipped = false;
  double gap = 0.0;
  double t_opt = 1.0;
  double variance = 1.0;
  double db = 0.0;
};

// Benchmark table for fixed n, m = 1..m_max: where does phase-conjugate
// input beat conventional input of the same total photon resources?
inline std::vector<LimitsRow> fidelity_gap_sweep(int n, int m_max) {
  if (n < 1 || m_max < 1) throw std::invalid_argument("n and m must be >= 1");
  std::vector<LimitsRow> rows;
  rows.reserve(static_cast<std::size_t>(m_max));
  for (int m = 1; m <= m_max; ++m) {
    LimitsRow row;
    row.m = m;
    row.f_pc = pc_fidelity(n, m);
    const FidelityValue fc = conventional_fidelity_checked(n, m);
    row.f_conventional = fc.value;
    row.conventional_clipped = fc.clipped;
    row.gap = row.f_pc - row.f_conventional;
    row.t_opt = optimal_transmission(n, m);
    row.variance = clone_variance(n, m);
    row.db = added_noise_db(row.variance);
    rows.push_back(row);
  }
  return rows;
}

// --- machine configuration -------------------------------------------------

struct CloningConfig {
  int n = 1;
  int m = 2;
  std::optional<double> transmission;  // default: optimal_transmission(n, m)
  FeedforwardGains gains;
  DetectorModel detector;              // feedforward detector
  std::optional<double> epr_r;         // set: run the unitary extension
  // Per-clone (gx, gp) overrides for emulating runs with measured gains;
  // empty means the machine's own gains stand.
  std::vector<std::pair<double, double>> gain_targets;
  std::complex<double> alpha{1.0, 1.0};

  double effective_transmission() const {
    return transmission.value_or(optimal_transmission(n, m));
  }

  double effective_g1() const {
    return gains.g1.value_or(ideal_g1(effective_transmission()));
  }

  void validate() const {
    if (n < 1 || m < 1) throw std::invalid_argument("n and m must be >= 1");
    const double t = effective_transmission();
    if (!(t > 0.0 && t <= 1.0)) {
      throw std::invalid_argument("transmission must be in (0,1]");
    }
    detector.validate();
    if (epr_r && !(*epr_r >= 0.0)) {
      throw std::invalid_argument("squeezing parameter must be >= 0");
    }
    if (!gain_targets.empty() &&
        gain_targets.size() != static_cast<std::size_t>(m)) {
      throw std::invalid_argument("gain_targets must have one entry per clone");
    }
  }
};

struct CloneStats {
  double gx = 1.0;
  double gp = 1.0;
  double var_x = 1.0;
  double var_p = 1.0;
  double db_x = 0.0;
  double db_p = 0.0;
  double fidelity = 1.0;

  friend bool operator==(const CloneStats&, const CloneStats&) = default;
};

struct CloneReport {
  int n = 1;
  int m = 1;
  double t = 1.0;
  double g1 = 0.0;
  std::vector<CloneStats> clones;
  std::vector<CloneStats> anticlones;  // unitary extension only

  friend bool operator==(const CloneReport&, const CloneReport&) = default;
};

struct MachineOutput {
  CloneReport report;
  std::vector<GaussianState<double>> clone_states;
  std::vector<GaussianState<double>> anticlone_states;
};

namespace detail {

struct MachineLayout {
  int n = 1;
  int m = 2;
  bool unitary = false;
  double t = 1.0;
  double g1 = 0.0;
  double g2x = 0.0;
  double g2p = 0.0;
  double epr_r = 0.0;
  Eigen::Index signal = 0;     // collected input mode
  Eigen::Index conjugate = 0;  // collected conjugate mode
  Eigen::Index ancilla = 0;    // tap ancilla (vacuum or entangled half)
  Eigen::Index epr_b = 0;      // anticlone carrier (unitary only)
};

inline MachineLayout machine_layout(const CloningConfig& config) {
  config.validate();
  MachineLayout lay;
  lay.n = config.n;
  lay.m = config.m;
  lay.unitary = config.epr_r.has_value();
  lay.t = config.effective_transmission();
  lay.g1 = config.effective_g1();
  lay.g2x = config.gains.g2x.value_or(ideal_g2x(lay.t));
  lay.g2p = config.gains.g2p.value_or(ideal_g2p(lay.t));
  lay.epr_r = config.epr_r.value_or(0.0);
  lay.signal = 0;
  lay.conjugate = config.n;
  lay.ancilla = 2 * config.n;
  lay.epr_b = 2 * config.n + 1;
  return lay;
}

// Input register with both collect cascades already applied: slot `signal`
// holds the symmetric input mode, slot `conjugate` the symmetric conjugate
// mode, `ancilla` the tap ancilla, and (unitary flavor) `epr_b` the
// anticlone carrier, phase-flipped so its x anticorrelates with the
// ancilla's.
inline GaussianState<double> machine_register(const MachineLayout& lay,
                                              std::complex<double> alpha) {
  const Eigen::Index n = lay.n;
  std::vector<std::complex<double>> amplitudes;
  amplitudes.reserve(static_cast<std::size_t>(2 * n));
  for (Eigen::Index i = 0; i < n; ++i) amplitudes.push_back(alpha);
  for (Eigen::Index i = 0; i < n; ++i) amplitudes.push_back(std::conj(alpha));
  GaussianState<double> state = coherent<double>(amplitudes);
  state = tensor(state, vacuum<double>(lay.unitary ? 2 : 1));
  if (lay.unitary) {
    apply_on(two_mode_squeeze<double>(lay.epr_r), state,
             ModeSelector({lay.ancilla, lay.epr_b}));
    apply_on(phase_shift<double>(std::numbers::pi), state,
             ModeSelector({lay.epr_b}));
  }
  if (n > 1) {
    std::vector<Eigen::Index> in_modes, conj_modes;
    for (Eigen::Index i = 0; i < n; ++i) {
      in_modes.push_back(i);
      conj_modes.push_back(n + i);
    }
    const SymplecticOp<double> op = collect_op<double>(n);
    apply_on(op, state, ModeSelector(std::move(in_modes)));
    apply_on(op, state, ModeSelector(std::move(conj_modes)));
  }
  return state;
}

inline std::vector<FeedforwardTap> machine_taps(const MachineLayout& lay) {
  std::vector<FeedforwardTap> taps{{lay.signal, lay.g1, lay.g1}};
  if (lay.unitary) taps.push_back({lay.epr_b, lay.g2x, lay.g2p});
  return taps;
}

// Mode that holds the anticlone carrier once the amplifier has consumed the
// ancilla and conjugate slots and the clone splitter has inserted m-1 modes.
inline Eigen::Index anticlone_slot(const MachineLayout& lay) {
  return 2 * Eigen::Index(lay.n) + Eigen::Index(lay.m) - 2;
}

}  // namespace detail

// Exact covariance-algebra run of the machine. Means, variances, and gains
// come out of one probe pass; the reported output states carry the config's
// amplitude. The reported fidelity is the unity-gain expression from the two
// variances (gain deviations are scored by the alphabet average instead).
inline MachineOutput run_machine_exact(const CloningConfig& config) {
  const detail::MachineLayout lay = detail::machine_layout(config);
  const std::complex<double> probe{1.0, 1.0};
  GaussianState<double> state = detail::machine_register(lay, probe);
  state = amplifier_exact(state, lay.signal, lay.ancilla, lay.conjugate, lay.t,
                          detail::machine_taps(lay), config.detector);
  state = m_splitter(state, lay.signal, lay.m);
  if (lay.unitary) {
    state = m_splitter(state, detail::anticlone_slot(lay), lay.m);
  }

  MachineOutput out;
  out.report.n = lay.n;
  out.report.m = lay.m;
  out.report.t = lay.t;
  out.report.g1 = lay.g1;

  const double in_x = 2.0 * probe.real();
  const double in_p = 2.0 * probe.imag();
  const double out_x = 2.0 * config.alpha.real();
  const double out_p = 2.0 * config.alpha.imag();
  for (Eigen::Index i = 0; i < lay.m; ++i) {
    GaussianState<double> clone = keep_modes(state, ModeSelector({i}));
    CloneStats stats;
    stats.gx = clone.mean_x(0) / in_x;
    stats.gp = clone.mean_p(0) / in_p;
    if (!config.gain_targets.empty()) {
      stats.gx = config.gain_targets[static_cast<std::size_t>(i)].first;
      stats.gp = config.gain_targets[static_cast<std::size_t>(i)].second;
    }
    stats.var_x = clone.var_x(0);
    stats.var_p = clone.var_p(0);
    stats.db_x = added_noise_db(stats.var_x);
    stats.db_p = added_noise_db(stats.var_p);
    stats.fidelity = fidelity_from_variances(stats.var_x, stats.var_p);
    clone.mutable_mean()(0) = stats.gx * out_x;
    clone.mutable_mean()(1) = stats.gp * out_p;
    out.report.clones.push_back(stats);
    out.clone_states.push_back(std::move(clone));
  }
  if (lay.unitary) {
    const Eigen::Index base = detail::anticlone_slot(lay);
    for (Eigen::Index i = 0; i < lay.m; ++i) {
      GaussianState<double> anticlone =
          keep_modes(state, ModeSelector({base + i}));
      CloneStats stats;
      // Gains are quoted against the conjugated target.
      stats.gx = anticlone.mean_x(0) / in_x;
      stats.gp = anticlone.mean_p(0) / (-in_p);
      stats.var_x = anticlone.var_x(0);
      stats.var_p = anticlone.var_p(0);
      stats.db_x = added_noise_db(stats.var_x);
      stats.db_p = added_noise_db(stats.var_p);
      stats.fidelity = fidelity_from_variances(stats.var_x, stats.var_p);
      anticlone.mutable_mean()(0) = stats.gx * out_x;
      anticlone.mutable_mean()(1) = stats.gp * (-out_p);
      out.report.anticlones.push_back(stats);
      out.anticlone_states.push_back(std::move(anticlone));
    }
  }
  return out;
}

// Unitary flavor: requires the entangled ancilla so every output, anticlones
// included, is carried by a mode of one global pure state.
inline MachineOutput run_machine_unitary(const CloningConfig& config) {
  if (!config.epr_r) {
    throw std::invalid_argument(
        "unitary machine needs the squeezing parameter set");
  }
  return run_machine_exact(config);
}

// Clone variance in the infinite-fanout limit: the amplified mode is spread
// over ever more outputs, so each clone's excess noise is exactly the error
// of the optimal joint estimate of the input formed from the two
// measurement records. Returns (limit variance in x, in p).
inline std::pair<double, double> infinite_fanout_variances(
    int n, double transmission, const DetectorModel& detector = {}) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (!(transmission > 0.0 && transmission <= 1.0)) {
    throw std::invalid_argument("transmission must be in (0,1]");
  }
  detector.validate();
  CloningConfig config;
  config.n = n;
  config.m = 1;
  const detail::MachineLayout lay = detail::machine_layout(config);
  GaussianState<double> state = detail::machine_register(lay, {1.0, 1.0});
  apply_on(beam_splitter<double>(transmission), state,
           ModeSelector({lay.ancilla, lay.signal}));
  apply_on(beam_splitter<double>(0.5), state,
           ModeSelector({lay.conjugate, lay.ancilla}));
  const Eigen::Index sum_port = lay.conjugate;
  const Eigen::Index diff_port = lay.ancilla;
  const double eta = detector.efficiency;
  const double gain_x = std::sqrt(eta) * state.mean_x(sum_port) / 2.0;
  const double gain_p = std::sqrt(eta) * state.mean_p(diff_port) / 2.0;
  const double record_x =
      homodyne_variance(state, sum_port, Quadrature::X, detector);
  const double record_p =
      homodyne_variance(state, diff_port, Quadrature::P, detector);
  if (!(std::abs(gain_x) > 0.0 && std::abs(gain_p) > 0.0)) {
    throw NumericalError("estimation gain vanished");
  }
  return {1.0 + record_x / (gain_x * gain_x),
          1.0 + record_p / (gain_p * gain_p)};
}

}  // namespace cvclone
