#include "cvclone/published_runs.hpp"

#include <json.hpp>

#include <stdexcept>

#include "published_runs_json.hpp"

namespace cvclone {

namespace {

struct Loaded {
  int version = 0;
  std::vector<PublishedRunData> runs;
};

Loaded load() {
  const nlohmann::json doc = nlohmann::json::parse(detail::kPublishedRunsJson);
  Loaded out;
  out.version = doc.at("version").get<int>();
  for (const auto& run : doc.at("runs")) {
    PublishedRunData data;
    data.id = run.at("id").get<std::string>();
    data.n = run.at("n").get<int>();
    data.m = run.at("m").get<int>();
    data.ff_detector_efficiency =
        run.at("ff_detector_efficiency").get<double>();
    data.verification_efficiencies =
        run.at("verification_efficiencies").get<std::vector<double>>();
    for (const auto& clone : run.at("clones")) {
      PublishedCloneData c;
      c.gx = clone.at("gx").get<double>();
      c.gp = clone.at("gp").get<double>();
      c.var_x = clone.at("var_x").get<double>();
      c.var_p = clone.at("var_p").get<double>();
      data.clones.push_back(c);
    }
    data.quoted_fidelities =
        run.at("quoted_fidelities").get<std::vector<double>>();
    data.quoted_fidelity_uncertainty =
        run.at("quoted_fidelity_uncertainty").get<double>();
    data.alphabet_variance = run.at("alphabet_variance").get<double>();
    data.quoted_alphabet_fidelities =
        run.at("quoted_alphabet_fidelities").get<std::vector<double>>();
    if (data.clones.size() != static_cast<std::size_t>(data.m) ||
        data.quoted_fidelities.size() != data.clones.size() ||
        data.quoted_alphabet_fidelities.size() != data.clones.size() ||
        data.verification_efficiencies.size() != data.clones.size()) {
      throw std::runtime_error("benchmark resource is inconsistent: " +
                               data.id);
    }
    out.runs.push_back(std::move(data));
  }
  return out;
}

const Loaded& cached() {
  static const Loaded loaded = load();
  return loaded;
}

}  // namespace

int published_data_version() { return cached().version; }

const std::vector<PublishedRunData>& published_runs() { return cached().runs; }

const PublishedRunData& published_run(const std::string& id) {
  for (const auto& run : cached().runs) {
    if (run.id == id) return run;
  }
  throw std::invalid_argument("unknown benchmark run: " + id);
}

}  // namespace cvclone
