#pragma once

#include "cvclone/cloning.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace cvclone {

struct GaussHermiteRule {
  Eigen::VectorXd nodes;    // ascending
  Eigen::VectorXd weights;  // for weight exp(-t^2); sum to sqrt(pi)
};

// Golub-Welsch: nodes/weights from the symmetric tridiagonal Jacobi matrix
// of the Hermite recurrence (off-diagonal sqrt(k/2)).
inline GaussHermiteRule gauss_hermite(int order) {
  if (order < 1) throw std::invalid_argument("quadrature order must be >= 1");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = std::sqrt(double(k) / 2.0);
    jacobi(k - 1, k) = b;
    jacobi(k, k - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("quadrature rule eigensolve failed");
  }
  GaussHermiteRule rule;
  rule.nodes = solver.eigenvalues();
  rule.weights.resize(order);
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  for (int i = 0; i < order; ++i) {
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights(i) = sqrt_pi * v0 * v0;
  }
  return rule;
}

// How the alphabet width parameter translates into quadrature spread:
// AmplitudeVariance reads it as Var(Re a) = Var(Im a) = V/2 per complex
// amplitude, i.e. quadrature-mean variance 2V in these units (mean 2 Re a);
// QuadratureVariance reads it as the quadrature-mean variance directly.
enum class AlphabetConvention { AmplitudeVariance, QuadratureVariance };

inline double alphabet_quadrature_variance(double alphabet_variance,
                                           AlphabetConvention convention) {
  if (!(alphabet_variance >= 0.0)) {
    throw std::invalid_argument("alphabet variance must be >= 0");
  }
  return convention == AlphabetConvention::AmplitudeVariance
             ? 2.0 * alphabet_variance
             : alphabet_variance;
}

// Fidelity averaged over a Gaussian alphabet of coherent targets for a clone
// with the given gains and variances. Separable in the two quadratures, so
// two one-dimensional Gauss-Hermite sums suffice; at unity gains this
// reduces exactly to fidelity_from_variances.
inline double alphabet_average_fidelity(
    double gx, double gp, double var_x, double var_p, double alphabet_variance,
    AlphabetConvention convention = AlphabetConvention::AmplitudeVariance,
    int order = 64) {
  if (!(var_x > 0.0 && var_p > 0.0)) {
    throw std::invalid_argument("variances must be positive");
  }
  const double sigma2 =
      alphabet_quadrature_variance(alphabet_variance, convention);
  const GaussHermiteRule rule = gauss_hermite(order);
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  const double spread = std::sqrt(2.0 * sigma2);
  auto one_axis = [&](double gain, double var) {
    double acc = 0.0;
    for (int i = 0; i < rule.nodes.size(); ++i) {
      const double s = spread * rule.nodes(i);
      const double miss = (gain - 1.0) * s;
      acc += rule.weights(i) / sqrt_pi *
             std::exp(-0.5 * miss * miss / (1.0 + var));
    }
    return acc * std::sqrt(2.0 / (1.0 + var));
  };
  return one_axis(gx, var_x) * one_axis(gp, var_p);
}

// Per-clone alphabet averages for a whole report.
inline std::vector<double> alphabet_average_fidelities(
    const CloneReport& report, double alphabet_variance,
    AlphabetConvention convention = AlphabetConvention::AmplitudeVariance,
    int order = 64) {
  std::vector<double> values;
  values.reserve(report.clones.size());
  for (const CloneStats& clone : report.clones) {
    values.push_back(alphabet_average_fidelity(clone.gx, clone.gp, clone.var_x,
                                               clone.var_p, alphabet_variance,
                                               convention, order));
  }
  return values;
}

}  // namespace cvclone
