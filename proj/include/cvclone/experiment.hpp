#pragma once

#include "cvclone/alphabet.hpp"
#include "cvclone/cloning.hpp"
#include "cvclone/published_runs.hpp"

#include <cstdint>
#include <span>
#include <thread>

namespace cvclone {

// --- detection-efficiency bookkeeping --------------------------------------

// Variance seen through a lossy verification detector.
inline double apply_loss_variance(double variance, double efficiency) {
  if (!(efficiency > 0.0 && efficiency <= 1.0)) {
    throw std::invalid_argument("efficiency must be in (0,1]");
  }
  return efficiency * variance + (1.0 - efficiency);
}

// Invert the loss: infer the variance at the detector's input.
inline double efficiency_correct_variance(double raw, double efficiency) {
  if (!(efficiency > 0.0 && efficiency <= 1.0)) {
    throw std::invalid_argument("efficiency must be in (0,1]");
  }
  return 1.0 + (raw - 1.0) / efficiency;
}

inline double efficiency_correct_mean(double raw, double efficiency) {
  if (!(efficiency > 0.0 && efficiency <= 1.0)) {
    throw std::invalid_argument("efficiency must be in (0,1]");
  }
  return raw / std::sqrt(efficiency);
}

// --- plan and record --------------------------------------------------------

struct ExperimentPlan {
  CloningConfig config;
  long shots = 100000;
  std::uint64_t seed = 1;
  std::complex<double> calibration_amplitude{1.0, 1.0};
  // One verification detector efficiency per clone; empty = all ideal.
  std::vector<double> verification_efficiencies;
  unsigned threads = 0;  // 0 = pick from hardware

  void validate() const {
    config.validate();
    if (shots < 2) throw std::invalid_argument("need at least 2 shots");
    if (!verification_efficiencies.empty() &&
        verification_efficiencies.size() != static_cast<std::size_t>(config.m)) {
      throw std::invalid_argument(
          "verification efficiencies must have one entry per clone");
    }
    for (double eta : verification_efficiencies) {
      if (!(eta > 0.0 && eta <= 1.0)) {
        throw std::invalid_argument("efficiency must be in (0,1]");
      }
    }
  }

  std::vector<DetectorModel> verification_detectors() const {
    std::vector<DetectorModel> detectors(static_cast<std::size_t>(config.m));
    for (std::size_t i = 0; i < detectors.size(); ++i) {
      if (!verification_efficiencies.empty()) {
        detectors[i].efficiency = verification_efficiencies[i];
      }
    }
    return detectors;
  }
};

struct QuadratureEstimate {
  double mean = 0.0;
  double variance = 1.0;
  double corrected_mean = 0.0;
  double corrected_variance = 1.0;
  double db = 0.0;               // corrected variance re shot noise
  double variance_std_error = 0.0;  // of the corrected variance
  long samples = 0;
};

struct MonteCarloCloneStats {
  QuadratureEstimate x;
  QuadratureEstimate p;
  std::optional<double> gx;  // filled by calibration
  std::optional<double> gp;
  double fidelity = 1.0;  // from corrected variances
  double fidelity_sigma = 0.0;
};

struct RunRecord {
  std::uint64_t seed = 0;
  long shots = 0;
  int n = 1;
  int m = 1;
  double t = 1.0;
  double g1 = 0.0;
  double alpha_re = 0.0;
  double alpha_im = 0.0;
  std::vector<std::vector<double>> x_samples;  // [clone][shot]
  std::vector<std::vector<double>> p_samples;
  std::vector<MonteCarloCloneStats> clones;
};

// --- shot engine -------------------------------------------------------------

namespace detail {

// One sampled pass of the machine; returns the verification record of the
// requested quadrature for every clone. Measurements run from the last
// clone down so earlier indices stay put as modes are consumed; the joint
// distribution is unaffected by the order.
inline std::vector<double> sampled_clone_records(
    const MachineLayout& lay, std::complex<double> alpha,
    const DetectorModel& ff_detector, Quadrature quad,
    std::span<const DetectorModel> verification, SeededRng& rng) {
  GaussianState<double> state = machine_register(lay, alpha);
  auto [records, reduced] =
      amplifier_sampled(state, lay.signal, lay.ancilla, lay.conjugate, lay.t,
                        machine_taps(lay), ff_detector, rng);
  (void)records;
  reduced = m_splitter(reduced, lay.signal, lay.m);
  std::vector<double> values(static_cast<std::size_t>(lay.m), 0.0);
  GaussianState<double> work = std::move(reduced);
  for (Eigen::Index i = lay.m - 1; i >= 0; --i) {
    const DetectorModel& det = verification[static_cast<std::size_t>(i)];
    const Eigen::Index q = quad == Quadrature::X ? x_index(i) : p_index(i);
    const double marginal = homodyne_variance(work, i, quad, det);
    if (!(marginal > 0.0)) {
      throw NumericalError("verification marginal variance is not positive");
    }
    const double value = std::sqrt(det.efficiency) * work.mean()(q) +
                         std::sqrt(marginal) * rng.normal();
    values[static_cast<std::size_t>(i)] = value;
    if (work.n_modes() > 1) {
      work = condition_on_homodyne(work, i, quad, det, value);
    }
  }
  return values;
}

// Stream ids: (shot, quadrature, phase) -> substream index. Calibration and
// noise phases never share a stream, and results are independent of the
// thread count because every shot owns its stream.
inline std::uint64_t stream_index(long shot, Quadrature quad,
                                  bool calibration) {
  return 4u * static_cast<std::uint64_t>(shot) +
         (quad == Quadrature::P ? 1u : 0u) + (calibration ? 2u : 0u);
}

inline unsigned resolved_threads(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : std::min(hw, 8u);
}

// Fill x/p sample arrays for every clone; samples[clone][shot].
inline void run_campaign(const ExperimentPlan& plan,
                         std::complex<double> alpha, bool calibration,
                         std::vector<std::vector<double>>& x_samples,
                         std::vector<std::vector<double>>& p_samples) {
  const MachineLayout lay = machine_layout(plan.config);
  const std::vector<DetectorModel> verification =
      plan.verification_detectors();
  const std::size_t m = static_cast<std::size_t>(plan.config.m);
  x_samples.assign(m, std::vector<double>(plan.shots));
  p_samples.assign(m, std::vector<double>(plan.shots));
  const SeededRng master(plan.seed);
  const unsigned threads = resolved_threads(plan.threads);
  auto worker = [&](long begin, long end) {
    for (long shot = begin; shot < end; ++shot) {
      SeededRng rng_x =
          master.substream(stream_index(shot, Quadrature::X, calibration));
      SeededRng rng_p =
          master.substream(stream_index(shot, Quadrature::P, calibration));
      const std::vector<double> xs = sampled_clone_records(
          lay, alpha, plan.config.detector, Quadrature::X, verification,
          rng_x);
      const std::vector<double> ps = sampled_clone_records(
          lay, alpha, plan.config.detector, Quadrature::P, verification,
          rng_p);
      for (std::size_t c = 0; c < m; ++c) {
        x_samples[c][static_cast<std::size_t>(shot)] = xs[c];
        p_samples[c][static_cast<std::size_t>(shot)] = ps[c];
      }
    }
  };
  if (threads <= 1) {
    worker(0, plan.shots);
    return;
  }
  std::vector<std::thread> pool;
  const long nthreads = static_cast<long>(threads);
  const long chunk = (plan.shots + nthreads - 1) / nthreads;
  for (long t = 0; t < nthreads; ++t) {
    const long begin = t * chunk;
    const long end = std::min<long>(plan.shots, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(worker, begin, end);
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

// Sample mean/variance with the verification loss inverted.
inline QuadratureEstimate estimate_quadrature(std::span<const double> samples,
                                              double efficiency) {
  if (samples.size() < 2) {
    throw std::invalid_argument("need at least 2 samples");
  }
  QuadratureEstimate est;
  est.samples = static_cast<long>(samples.size());
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(samples.size());
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  est.mean = mean;
  est.variance = ss / static_cast<double>(samples.size() - 1);
  est.corrected_mean = efficiency_correct_mean(mean, efficiency);
  est.corrected_variance =
      efficiency_correct_variance(est.variance, efficiency);
  est.db = added_noise_db(est.corrected_variance);
  est.variance_std_error =
      est.variance *
      std::sqrt(2.0 / static_cast<double>(samples.size() - 1)) / efficiency;
  return est;
}

namespace detail {

inline RunRecord make_record(const ExperimentPlan& plan,
                             std::complex<double> alpha, bool calibration) {
  plan.validate();
  RunRecord record;
  const MachineLayout lay = machine_layout(plan.config);
  record.seed = plan.seed;
  record.shots = plan.shots;
  record.n = plan.config.n;
  record.m = plan.config.m;
  record.t = lay.t;
  record.g1 = lay.g1;
  record.alpha_re = alpha.real();
  record.alpha_im = alpha.imag();
  run_campaign(plan, alpha, calibration, record.x_samples, record.p_samples);
  const std::vector<DetectorModel> verification =
      plan.verification_detectors();
  for (std::size_t c = 0; c < record.x_samples.size(); ++c) {
    MonteCarloCloneStats stats;
    stats.x = estimate_quadrature(record.x_samples[c],
                                  verification[c].efficiency);
    stats.p = estimate_quadrature(record.p_samples[c],
                                  verification[c].efficiency);
    stats.fidelity = fidelity_from_variances(stats.x.corrected_variance,
                                             stats.p.corrected_variance);
    const double dfx = stats.fidelity / (2.0 * (1.0 + stats.x.corrected_variance));
    const double dfp = stats.fidelity / (2.0 * (1.0 + stats.p.corrected_variance));
    stats.fidelity_sigma =
        std::sqrt(dfx * dfx * stats.x.variance_std_error *
                      stats.x.variance_std_error +
                  dfp * dfp * stats.p.variance_std_error *
                      stats.p.variance_std_error);
    record.clones.push_back(stats);
  }
  return record;
}

}  // namespace detail

// Noise campaign: vacuum-amplitude inputs, so the sample variances estimate
// the clone noise directly.
inline RunRecord measure_cloning_noise(const ExperimentPlan& plan) {
  return detail::make_record(plan, {0.0, 0.0}, /*calibration=*/false);
}

struct CalibrationResult {
  std::vector<std::pair<double, double>> gains;  // (gx, gp) per clone
  RunRecord record;
};

// Calibration campaign: modulated inputs; gains are the loss-corrected mean
// records over the input quadrature means.
inline CalibrationResult calibrate_gains(const ExperimentPlan& plan) {
  plan.validate();
  const std::complex<double> amp = plan.calibration_amplitude;
  if (amp.real() == 0.0 || amp.imag() == 0.0) {
    throw std::invalid_argument(
        "calibration amplitude must drive both quadratures");
  }
  CalibrationResult result;
  result.record = detail::make_record(plan, amp, /*calibration=*/true);
  for (auto& stats : result.record.clones) {
    const double gx = stats.x.corrected_mean / (2.0 * amp.real());
    const double gp = stats.p.corrected_mean / (2.0 * amp.imag());
    stats.gx = gx;
    stats.gp = gp;
    result.gains.emplace_back(gx, gp);
  }
  return result;
}

struct ExperimentResult {
  CloneReport report;  // calibrated gains + corrected noise variances
  RunRecord record;    // the noise campaign, gains filled in
};

// The full two-phase emulation: calibrate gains on modulated inputs, then
// measure clone noise on vacuum inputs, mirroring how the bench data was
// taken.
inline ExperimentResult run_full_experiment(const ExperimentPlan& plan) {
  const CalibrationResult calibration = calibrate_gains(plan);
  RunRecord record = measure_cloning_noise(plan);
  ExperimentResult out;
  const detail::MachineLayout lay = detail::machine_layout(plan.config);
  out.report.n = plan.config.n;
  out.report.m = plan.config.m;
  out.report.t = lay.t;
  out.report.g1 = lay.g1;
  for (std::size_t c = 0; c < record.clones.size(); ++c) {
    record.clones[c].gx = calibration.gains[c].first;
    record.clones[c].gp = calibration.gains[c].second;
    CloneStats stats;
    stats.gx = calibration.gains[c].first;
    stats.gp = calibration.gains[c].second;
    stats.var_x = record.clones[c].x.corrected_variance;
    stats.var_p = record.clones[c].p.corrected_variance;
    stats.db_x = record.clones[c].x.db;
    stats.db_p = record.clones[c].p.db;
    stats.fidelity = record.clones[c].fidelity;
    out.report.clones.push_back(stats);
  }
  out.record = std::move(record);
  return out;
}

// --- published-run reproduction ---------------------------------------------

struct PublishedRunReport {
  PublishedRunData data;
  CloneReport report;  // measured gains/variances, fidelity recomputed
  std::vector<double> alphabet_fidelities;
};

inline PublishedRunReport reproduce_published_run(const std::string& id) {
  PublishedRunReport out;
  out.data = published_run(id);
  out.report.n = out.data.n;
  out.report.m = out.data.m;
  out.report.t = optimal_transmission(out.data.n, out.data.m);
  out.report.g1 = ideal_g1(out.report.t);
  for (const PublishedCloneData& clone : out.data.clones) {
    CloneStats stats;
    stats.gx = clone.gx;
    stats.gp = clone.gp;
    stats.var_x = clone.var_x;
    stats.var_p = clone.var_p;
    stats.db_x = added_noise_db(clone.var_x);
    stats.db_p = added_noise_db(clone.var_p);
    stats.fidelity = fidelity_from_variances(clone.var_x, clone.var_p);
    out.report.clones.push_back(stats);
  }
  out.alphabet_fidelities = alphabet_average_fidelities(
      out.report, out.data.alphabet_variance,
      AlphabetConvention::AmplitudeVariance);
  return out;
}

}  // namespace cvclone
