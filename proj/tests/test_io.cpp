#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cvclone/experiment.hpp"
#include "cvclone/report_io.hpp"

#include <algorithm>
#include <sstream>

using namespace cvclone;

namespace {

CloneReport sample_report() {
  CloningConfig config;
  config.n = 1;
  config.m = 2;
  return run_machine_exact(config).report;
}

}  // namespace

TEST_CASE("clone report survives a JSON round trip") {
  const CloneReport report = sample_report();
  const nlohmann::ordered_json j = report_to_json(report);
  CHECK(j.at("n") == 1);
  CHECK(j.at("m") == 2);
  CHECK(j.at("t").get<double>() == doctest::Approx(8.0 / 9.0));
  CHECK(j.at("g1").get<double>() > 0.0);
  REQUIRE(j.at("clones").size() == 2);
  const auto& c0 = j.at("clones").at(0);
  for (const char* key :
       {"gx", "gp", "var_x", "var_p", "db_x", "db_p", "fidelity"}) {
    CHECK(c0.contains(key));
  }
  CHECK_FALSE(j.contains("anticlones"));

  const CloneReport back = report_from_json(j);
  CHECK(back == report);
}

TEST_CASE("anticlone rows appear only when the extension ran") {
  CloningConfig config;
  config.n = 1;
  config.m = 2;
  config.epr_r = 1.0;
  const CloneReport report = run_machine_unitary(config).report;
  const nlohmann::ordered_json j = report_to_json(report);
  REQUIRE(j.contains("anticlones"));
  CHECK(j.at("anticlones").size() == 2);  // one per clone
  CHECK(report_from_json(j) == report);
}

TEST_CASE("clone CSV has the fixed header and one row per clone") {
  const CloneReport report = sample_report();
  const std::string csv = report_to_csv(report);
  std::istringstream lines(csv);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "clone_id,gx,gp,var_x,var_p,db_x,db_p,fidelity");
  int rows = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    CHECK(line.rfind(std::to_string(rows) + ",", 0) == 0);
    CHECK(std::count(line.begin(), line.end(), ',') == 7);
    ++rows;
  }
  CHECK(rows == 2);
}

TEST_CASE("report table mentions every clone") {
  const CloneReport report = sample_report();
  const std::string table = report_to_table(report);
  CHECK(table.find("machine n=1 m=2") != std::string::npos);
  CHECK(table.find("fidelity") != std::string::npos);
  CHECK(table.find("0.941") != std::string::npos);
}

TEST_CASE("state dump uses a row-major covariance") {
  GaussianState<> state =
      tensor(coherent(std::complex<double>(0.5, -0.25)), vacuum(1));
  apply_on(beam_splitter(0.7), state, ModeSelector{0, 1});

  const nlohmann::ordered_json j = state_to_json(state);
  CHECK(j.at("n_modes") == 2);
  REQUIRE(j.at("mean").size() == 4);
  REQUIRE(j.at("cov").size() == 16);
  for (Eigen::Index r = 0; r < 4; ++r) {
    for (Eigen::Index c = 0; c < 4; ++c) {
      CHECK(j.at("cov").at(4 * r + c).get<double>() ==
            doctest::Approx(state.cov()(r, c)).epsilon(1e-15));
    }
  }
  const GaussianState back = state_from_json(j);
  CHECK((back.mean() - state.mean()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.cov() - state.cov()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("state parsing rejects malformed payloads") {
  nlohmann::ordered_json j;
  j["n_modes"] = 2;
  j["mean"] = {0.0, 0.0, 0.0};  // wrong length
  j["cov"] = std::vector<double>(16, 0.0);
  CHECK_THROWS_AS(state_from_json(j), std::invalid_argument);
}

TEST_CASE("run records serialize estimates, gains and samples") {
  ExperimentPlan plan;
  plan.shots = 50;
  plan.seed = 5;
  const ExperimentResult result = run_full_experiment(plan);

  const nlohmann::ordered_json j = record_to_json(result.record);
  CHECK(j.at("n") == 1);
  CHECK(j.at("m") == 2);
  CHECK(j.at("shots") == 50);
  CHECK(j.at("seed") == 5);
  REQUIRE(j.at("clones").size() == 2);
  const auto& c0 = j.at("clones").at(0);
  CHECK(c0.at("gx").is_number());
  CHECK(c0.at("x").at("variance").is_number());
  CHECK(c0.at("x").at("corrected_variance").is_number());
  CHECK(c0.at("x").at("samples") == 50);
  REQUIRE(j.contains("x_samples"));
  CHECK(j.at("x_samples").at(0).size() == 50);

  const nlohmann::ordered_json lean = record_to_json(result.record, false);
  CHECK_FALSE(lean.contains("x_samples"));
  CHECK_FALSE(lean.contains("p_samples"));

  // Gains stay null when no calibration was merged in.
  const RunRecord noise = measure_cloning_noise(plan);
  const nlohmann::ordered_json nj = record_to_json(noise, false);
  CHECK(nj.at("clones").at(0).at("gx").is_null());
}

TEST_CASE("run record CSV carries corrected values") {
  ExperimentPlan plan;
  plan.shots = 50;
  plan.seed = 5;
  const ExperimentResult result = run_full_experiment(plan);
  const std::string csv = record_to_csv(result.record);
  std::istringstream lines(csv);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "clone_id,gx,gp,var_x,var_p,db_x,db_p,fidelity");
  int rows = 0;
  while (std::getline(lines, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 2);

  const RunRecord noise = measure_cloning_noise(plan);
  const std::string ncsv = record_to_csv(noise);
  CHECK(ncsv.find("nan") != std::string::npos);  // gains unknown
}

TEST_CASE("limit tables serialize in all three formats") {
  const std::vector<LimitsRow> rows = fidelity_gap_sweep(1, 4);
  REQUIRE(rows.size() == 4);
  const nlohmann::ordered_json j = limits_to_json(rows, 1);
  CHECK(j.at("n") == 1);
  REQUIRE(j.at("rows").size() == 4);
  CHECK(j.at("rows").at(1).at("m") == 2);
  CHECK(j.at("rows").at(1).at("f_pc").get<double>() ==
        doctest::Approx(pc_fidelity(1, 2)).epsilon(1e-12));
  CHECK(j.at("rows").at(0).at("conventional_clipped").get<bool>());  // m < 2n

  const std::string csv = limits_to_csv(rows);
  CHECK(csv.rfind("m,", 0) == 0);
  const std::string table = limits_to_table(rows, 1);
  CHECK(table.find("m") != std::string::npos);
  for (const LimitsRow& row : rows) {
    CHECK(row.f_pc <= 1.0 + 1e-12);
  }
}

TEST_CASE("serialized text re-parses to the identical report") {
  const nlohmann::ordered_json j = report_to_json(sample_report());
  const nlohmann::ordered_json back = nlohmann::ordered_json::parse(j.dump());
  CHECK(report_from_json(back) == report_from_json(j));
}
