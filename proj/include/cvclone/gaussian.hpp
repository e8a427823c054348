#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cvclone {

// Conventions used throughout:
//   * quadratures interleaved as (x1, p1, x2, p2, ...)
//   * vacuum variance 1 in both quadratures ([x, p] = 2i)
//   * a coherent amplitude a displaces the mean to (2 Re a, 2 Im a)

inline constexpr double kSymmetryTol = 1e-10;

// Raised when a numerical routine cannot deliver a trustworthy result
// (non-physical covariance, singular conditioning, ...). CLI maps this to
// exit code 3; plain std::invalid_argument means caller error (exit 2).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

constexpr Eigen::Index x_index(Eigen::Index mode) { return 2 * mode; }
constexpr Eigen::Index p_index(Eigen::Index mode) { return 2 * mode + 1; }

// Ordered list of distinct mode indices; validated once at the boundary so
// the hot paths can index without checks.
class ModeSelector {
 public:
  ModeSelector(std::initializer_list<Eigen::Index> indices)
      : indices_(indices) {
    check_distinct();
  }
  explicit ModeSelector(std::vector<Eigen::Index> indices)
      : indices_(std::move(indices)) {
    check_distinct();
  }

  const std::vector<Eigen::Index>& indices() const { return indices_; }
  Eigen::Index size() const {
    return static_cast<Eigen::Index>(indices_.size());
  }

  void check_range(Eigen::Index n_modes) const {
    for (Eigen::Index m : indices_) {
      if (m < 0 || m >= n_modes) {
        throw std::invalid_argument("mode index " + std::to_string(m) +
                                    " out of range for " +
                                    std::to_string(n_modes) + " modes");
      }
    }
  }

  // Interleaved quadrature indices (x_m, p_m for each selected mode).
  std::vector<Eigen::Index> quadrature_indices() const {
    std::vector<Eigen::Index> q;
    q.reserve(indices_.size() * 2);
    for (Eigen::Index m : indices_) {
      q.push_back(x_index(m));
      q.push_back(p_index(m));
    }
    return q;
  }

 private:
  void check_distinct() const {
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      for (std::size_t j = i + 1; j < indices_.size(); ++j) {
        if (indices_[i] == indices_[j]) {
          throw std::invalid_argument("duplicate mode index " +
                                      std::to_string(indices_[i]));
        }
      }
    }
  }

  std::vector<Eigen::Index> indices_;
};

template <typename Scalar = double>
class GaussianState {
 public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  GaussianState(Vector mean, Matrix cov)
      : mean_(std::move(mean)), cov_(std::move(cov)) {
    if (mean_.size() % 2 != 0 || mean_.size() == 0) {
      throw std::invalid_argument("mean must have positive even length");
    }
    if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
      throw std::invalid_argument("covariance shape does not match mean");
    }
    const Scalar asym = (cov_ - cov_.transpose()).cwiseAbs().maxCoeff();
    if (!(asym <= Scalar(kSymmetryTol))) {
      throw std::invalid_argument("covariance is not symmetric");
    }
    resymmetrize();
  }

  Eigen::Index n_modes() const { return mean_.size() / 2; }

  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }
  Vector& mutable_mean() { return mean_; }
  Matrix& mutable_cov() { return cov_; }

  Scalar mean_x(Eigen::Index mode) const { return mean_(x_index(mode)); }
  Scalar mean_p(Eigen::Index mode) const { return mean_(p_index(mode)); }
  Scalar var_x(Eigen::Index mode) const {
    return cov_(x_index(mode), x_index(mode));
  }
  Scalar var_p(Eigen::Index mode) const {
    return cov_(p_index(mode), p_index(mode));
  }

  // Kill the skew that accumulates from repeated congruences.
  void resymmetrize() { cov_ = ((cov_ + cov_.transpose()) / Scalar(2)).eval(); }

  // Symplectic spectrum, descending. The eigenvalues of i*Omega*V come in
  // pairs +/-nu; physicality is nu_min >= 1 in these units.
  std::vector<Scalar> symplectic_eigenvalues() const {
    const Eigen::Index n = n_modes();
    Matrix omega_v(2 * n, 2 * n);
    for (Eigen::Index m = 0; m < n; ++m) {
      omega_v.row(x_index(m)) = cov_.row(p_index(m));
      omega_v.row(p_index(m)) = -cov_.row(x_index(m));
    }
    Eigen::EigenSolver<Matrix> solver(omega_v, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
      throw NumericalError("symplectic eigenvalue solve failed");
    }
    std::vector<Scalar> magnitudes;
    magnitudes.reserve(2 * n);
    for (Eigen::Index i = 0; i < 2 * n; ++i) {
      magnitudes.push_back(std::abs(solver.eigenvalues()(i)));
    }
    std::sort(magnitudes.begin(), magnitudes.end(), std::greater<Scalar>());
    std::vector<Scalar> nu(n);
    for (Eigen::Index m = 0; m < n; ++m) {
      nu[m] = (magnitudes[2 * m] + magnitudes[2 * m + 1]) / Scalar(2);
    }
    return nu;
  }

  bool is_physical(Scalar tol = Scalar(1e-9)) const {
    for (Scalar nu : symplectic_eigenvalues()) {
      if (nu < Scalar(1) - tol) return false;
    }
    return true;
  }

  Scalar purity() const {
    Scalar det = cov_.determinant();
    if (det <= Scalar(0)) {
      throw NumericalError("covariance has non-positive determinant");
    }
    return Scalar(1) / std::sqrt(det);
  }

 private:
  Vector mean_;
  Matrix cov_;
};

template <typename Scalar = double>
GaussianState<Scalar> vacuum(Eigen::Index n_modes) {
  if (n_modes < 1) throw std::invalid_argument("need at least one mode");
  return GaussianState<Scalar>(
      VectorX<Scalar>::Zero(2 * n_modes),
      MatrixX<Scalar>::Identity(2 * n_modes, 2 * n_modes));
}

template <typename Scalar = double>
GaussianState<Scalar> coherent(std::span<const std::complex<Scalar>> alphas) {
  const Eigen::Index n = static_cast<Eigen::Index>(alphas.size());
  GaussianState<Scalar> state = vacuum<Scalar>(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    state.mutable_mean()(x_index(m)) = Scalar(2) * alphas[m].real();
    state.mutable_mean()(p_index(m)) = Scalar(2) * alphas[m].imag();
  }
  return state;
}

template <typename Scalar = double>
GaussianState<Scalar> coherent(std::complex<Scalar> alpha) {
  return coherent<Scalar>(std::span<const std::complex<Scalar>>(&alpha, 1));
}

template <typename Scalar>
GaussianState<Scalar> displace(const GaussianState<Scalar>& state,
                               Eigen::Index mode, Scalar dx, Scalar dp) {
  ModeSelector({mode}).check_range(state.n_modes());
  GaussianState<Scalar> out = state;
  out.mutable_mean()(x_index(mode)) += dx;
  out.mutable_mean()(p_index(mode)) += dp;
  return out;
}

template <typename Scalar>
GaussianState<Scalar> tensor(const GaussianState<Scalar>& a,
                             const GaussianState<Scalar>& b) {
  const Eigen::Index da = 2 * a.n_modes();
  const Eigen::Index db = 2 * b.n_modes();
  VectorX<Scalar> mean(da + db);
  mean << a.mean(), b.mean();
  MatrixX<Scalar> cov = MatrixX<Scalar>::Zero(da + db, da + db);
  cov.topLeftCorner(da, da) = a.cov();
  cov.bottomRightCorner(db, db) = b.cov();
  return GaussianState<Scalar>(std::move(mean), std::move(cov));
}

// Restriction to the selected modes, in the order given (also serves as a
// mode permutation when handed all modes).
template <typename Scalar>
GaussianState<Scalar> keep_modes(const GaussianState<Scalar>& state,
                                 const ModeSelector& keep) {
  keep.check_range(state.n_modes());
  if (keep.size() == 0) {
    throw std::invalid_argument("cannot keep zero modes");
  }
  const std::vector<Eigen::Index> q = keep.quadrature_indices();
  VectorX<Scalar> mean(q.size());
  MatrixX<Scalar> cov(q.size(), q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    mean(static_cast<Eigen::Index>(i)) = state.mean()(q[i]);
    for (std::size_t j = 0; j < q.size(); ++j) {
      cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          state.cov()(q[i], q[j]);
    }
  }
  return GaussianState<Scalar>(std::move(mean), std::move(cov));
}

// Discard the selected modes (Gaussian partial trace = drop rows/columns).
template <typename Scalar>
GaussianState<Scalar> partial_trace(const GaussianState<Scalar>& state,
                                    const ModeSelector& traced_out) {
  traced_out.check_range(state.n_modes());
  std::vector<bool> drop(static_cast<std::size_t>(state.n_modes()), false);
  for (Eigen::Index m : traced_out.indices()) {
    drop[static_cast<std::size_t>(m)] = true;
  }
  std::vector<Eigen::Index> kept;
  for (Eigen::Index m = 0; m < state.n_modes(); ++m) {
    if (!drop[static_cast<std::size_t>(m)]) kept.push_back(m);
  }
  if (kept.empty()) {
    throw std::invalid_argument("partial trace would remove every mode");
  }
  return keep_modes(state, ModeSelector(std::move(kept)));
}

}  // namespace cvclone
