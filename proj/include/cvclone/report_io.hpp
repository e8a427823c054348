#pragma once

#include "cvclone/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>

namespace cvclone {

using ordered_json = nlohmann::ordered_json;

// --- clone reports ----------------------------------------------------------

inline ordered_json clone_stats_to_json(const CloneStats& stats) {
  return ordered_json{{"gx", stats.gx},       {"gp", stats.gp},
                      {"var_x", stats.var_x}, {"var_p", stats.var_p},
                      {"db_x", stats.db_x},   {"db_p", stats.db_p},
                      {"fidelity", stats.fidelity}};
}

inline CloneStats clone_stats_from_json(const nlohmann::json& j) {
  CloneStats stats;
  stats.gx = j.at("gx").get<double>();
  stats.gp = j.at("gp").get<double>();
  stats.var_x = j.at("var_x").get<double>();
  stats.var_p = j.at("var_p").get<double>();
  stats.db_x = j.at("db_x").get<double>();
  stats.db_p = j.at("db_p").get<double>();
  stats.fidelity = j.at("fidelity").get<double>();
  return stats;
}

inline ordered_json report_to_json(const CloneReport& report) {
  ordered_json j{{"n", report.n}, {"m", report.m}, {"t", report.t},
                 {"g1", report.g1}};
  j["clones"] = ordered_json::array();
  for (const CloneStats& c : report.clones) {
    j["clones"].push_back(clone_stats_to_json(c));
  }
  if (!report.anticlones.empty()) {
    j["anticlones"] = ordered_json::array();
    for (const CloneStats& c : report.anticlones) {
      j["anticlones"].push_back(clone_stats_to_json(c));
    }
  }
  return j;
}

inline CloneReport report_from_json(const nlohmann::json& j) {
  CloneReport report;
  report.n = j.at("n").get<int>();
  report.m = j.at("m").get<int>();
  report.t = j.at("t").get<double>();
  report.g1 = j.at("g1").get<double>();
  for (const auto& c : j.at("clones")) {
    report.clones.push_back(clone_stats_from_json(c));
  }
  if (j.contains("anticlones")) {
    for (const auto& c : j.at("anticlones")) {
      report.anticlones.push_back(clone_stats_from_json(c));
    }
  }
  return report;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string format_fixed(double v, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace detail

inline constexpr const char* kCloneCsvHeader =
    "clone_id,gx,gp,var_x,var_p,db_x,db_p,fidelity";

inline std::string report_to_csv(const CloneReport& report) {
  std::ostringstream out;
  out << kCloneCsvHeader << '\n';
  for (std::size_t i = 0; i < report.clones.size(); ++i) {
    const CloneStats& c = report.clones[i];
    out << i << ',' << detail::format_double(c.gx) << ','
        << detail::format_double(c.gp) << ',' << detail::format_double(c.var_x)
        << ',' << detail::format_double(c.var_p) << ','
        << detail::format_double(c.db_x) << ','
        << detail::format_double(c.db_p) << ','
        << detail::format_double(c.fidelity) << '\n';
  }
  return out.str();
}

inline std::string report_to_table(const CloneReport& report) {
  std::ostringstream out;
  out << "machine n=" << report.n << " m=" << report.m
      << " t=" << detail::format_fixed(report.t, 4)
      << " g1=" << detail::format_fixed(report.g1, 4) << '\n';
  out << "  id     gx     gp  var_x  var_p  db_x  db_p  fidelity\n";
  auto row = [&out](const std::string& id, const CloneStats& c) {
    out << "  " << id << "  " << detail::format_fixed(c.gx, 3) << "  "
        << detail::format_fixed(c.gp, 3) << "  "
        << detail::format_fixed(c.var_x, 3) << "  "
        << detail::format_fixed(c.var_p, 3) << "  "
        << detail::format_fixed(c.db_x, 2) << "  "
        << detail::format_fixed(c.db_p, 2) << "     "
        << detail::format_fixed(c.fidelity, 3) << '\n';
  };
  for (std::size_t i = 0; i < report.clones.size(); ++i) {
    row(std::to_string(i), report.clones[i]);
  }
  for (std::size_t i = 0; i < report.anticlones.size(); ++i) {
    row("a" + std::to_string(i), report.anticlones[i]);
  }
  return out.str();
}

// --- state dumps -------------------------------------------------------------

inline ordered_json state_to_json(const GaussianState<double>& state) {
  ordered_json j;
  j["n_modes"] = state.n_modes();
  j["mean"] = ordered_json::array();
  for (Eigen::Index i = 0; i < state.mean().size(); ++i) {
    j["mean"].push_back(state.mean()(i));
  }
  j["cov"] = ordered_json::array();  // row-major
  for (Eigen::Index r = 0; r < state.cov().rows(); ++r) {
    for (Eigen::Index c = 0; c < state.cov().cols(); ++c) {
      j["cov"].push_back(state.cov()(r, c));
    }
  }
  return j;
}

inline GaussianState<double> state_from_json(const nlohmann::json& j) {
  const Eigen::Index n = j.at("n_modes").get<Eigen::Index>();
  const auto& mean_j = j.at("mean");
  const auto& cov_j = j.at("cov");
  if (static_cast<Eigen::Index>(mean_j.size()) != 2 * n ||
      static_cast<Eigen::Index>(cov_j.size()) != 4 * n * n) {
    throw std::invalid_argument("state dump has inconsistent sizes");
  }
  VectorX<double> mean(2 * n);
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    mean(i) = mean_j.at(static_cast<std::size_t>(i)).get<double>();
  }
  MatrixX<double> cov(2 * n, 2 * n);
  for (Eigen::Index r = 0; r < 2 * n; ++r) {
    for (Eigen::Index c = 0; c < 2 * n; ++c) {
      cov(r, c) =
          cov_j.at(static_cast<std::size_t>(r * 2 * n + c)).get<double>();
    }
  }
  return GaussianState<double>(std::move(mean), std::move(cov));
}

// --- run records --------------------------------------------------------------

inline ordered_json estimate_to_json(const QuadratureEstimate& est) {
  return ordered_json{{"mean", est.mean},
                      {"variance", est.variance},
                      {"corrected_mean", est.corrected_mean},
                      {"corrected_variance", est.corrected_variance},
                      {"db", est.db},
                      {"variance_std_error", est.variance_std_error},
                      {"samples", est.samples}};
}

inline ordered_json record_to_json(const RunRecord& record,
                                   bool include_samples = true) {
  ordered_json j{{"seed", record.seed}, {"shots", record.shots},
                 {"n", record.n},       {"m", record.m},
                 {"t", record.t},       {"g1", record.g1},
                 {"alpha", ordered_json::array({record.alpha_re,
                                                record.alpha_im})}};
  j["clones"] = ordered_json::array();
  for (const MonteCarloCloneStats& c : record.clones) {
    ordered_json cj;
    cj["gx"] = c.gx ? ordered_json(*c.gx) : ordered_json(nullptr);
    cj["gp"] = c.gp ? ordered_json(*c.gp) : ordered_json(nullptr);
    cj["x"] = estimate_to_json(c.x);
    cj["p"] = estimate_to_json(c.p);
    cj["fidelity"] = c.fidelity;
    cj["fidelity_sigma"] = c.fidelity_sigma;
    j["clones"].push_back(cj);
  }
  if (include_samples) {
    j["x_samples"] = record.x_samples;
    j["p_samples"] = record.p_samples;
  }
  return j;
}

// Corrected per-clone summary in the fixed clone CSV schema.
inline std::string record_to_csv(const RunRecord& record) {
  std::ostringstream out;
  out << kCloneCsvHeader << '\n';
  for (std::size_t i = 0; i < record.clones.size(); ++i) {
    const MonteCarloCloneStats& c = record.clones[i];
    out << i << ',' << detail::format_double(c.gx.value_or(
               std::numeric_limits<double>::quiet_NaN()))
        << ','
        << detail::format_double(
               c.gp.value_or(std::numeric_limits<double>::quiet_NaN()))
        << ',' << detail::format_double(c.x.corrected_variance) << ','
        << detail::format_double(c.p.corrected_variance) << ','
        << detail::format_double(c.x.db) << ','
        << detail::format_double(c.p.db) << ','
        << detail::format_double(c.fidelity) << '\n';
  }
  return out.str();
}

// --- benchmark tables ----------------------------------------------------------

inline ordered_json limits_to_json(const std::vector<LimitsRow>& rows, int n) {
  ordered_json j{{"n", n}};
  j["rows"] = ordered_json::array();
  for (const LimitsRow& row : rows) {
    j["rows"].push_back(ordered_json{{"m", row.m},
                                     {"f_pc", row.f_pc},
                                     {"f_conventional", row.f_conventional},
                                     {"conventional_clipped",
                                      row.conventional_clipped},
                                     {"gap", row.gap},
                                     {"t_opt", row.t_opt},
                                     {"variance", row.variance},
                                     {"db", row.db}});
  }
  return j;
}

inline std::string limits_to_csv(const std::vector<LimitsRow>& rows) {
  std::ostringstream out;
  out << "m,f_pc,f_conventional,conventional_clipped,gap,t_opt,variance,db\n";
  for (const LimitsRow& row : rows) {
    out << row.m << ',' << detail::format_double(row.f_pc) << ','
        << detail::format_double(row.f_conventional) << ','
        << (row.conventional_clipped ? 1 : 0) << ','
        << detail::format_double(row.gap) << ','
        << detail::format_double(row.t_opt) << ','
        << detail::format_double(row.variance) << ','
        << detail::format_double(row.db) << '\n';
  }
  return out.str();
}

inline std::string limits_to_table(const std::vector<LimitsRow>& rows, int n) {
  std::ostringstream out;
  out << "cloning limits, n=" << n << '\n';
  out << "   m    f_pc  f_conv     gap   t_opt  var    db\n";
  for (const LimitsRow& row : rows) {
    out << "  " << row.m << "   " << detail::format_fixed(row.f_pc, 3) << "   "
        << detail::format_fixed(row.f_conventional, 3)
        << (row.conventional_clipped ? "*" : " ") << "  "
        << detail::format_fixed(row.gap, 3) << "   "
        << detail::format_fixed(row.t_opt, 3) << "  "
        << detail::format_fixed(row.variance, 3) << "  "
        << detail::format_fixed(row.db, 2) << '\n';
  }
  if (std::any_of(rows.begin(), rows.end(),
                  [](const LimitsRow& r) { return r.conventional_clipped; })) {
    out << "  (* conventional bound clipped at 1)\n";
  }
  return out.str();
}

}  // namespace cvclone
