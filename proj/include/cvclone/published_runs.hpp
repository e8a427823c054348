#pragma once

#include <string>
#include <vector>

namespace cvclone {

// Published benchmark runs shipped with the library as a versioned resource.
// Gains and variances are the measured values; quoted fidelities are the
// published ones the simulator is validated against.

struct PublishedCloneData {
  double gx = 1.0;
  double gp = 1.0;
  double var_x = 1.0;
  double var_p = 1.0;
};

struct PublishedRunData {
  std::string id;
  int n = 1;
  int m = 2;
  double ff_detector_efficiency = 1.0;
  std::vector<double> verification_efficiencies;
  std::vector<PublishedCloneData> clones;
  std::vector<double> quoted_fidelities;
  double quoted_fidelity_uncertainty = 0.01;
  double alphabet_variance = 10.0;
  std::vector<double> quoted_alphabet_fidelities;
};

int published_data_version();
const std::vector<PublishedRunData>& published_runs();
const PublishedRunData& published_run(const std::string& id);

}  // namespace cvclone
