#pragma once

#include "cvclone/gaussian.hpp"

#include <cmath>
#include <utility>

namespace cvclone {

// Affine Gaussian map: mean -> S * mean + d, cov -> S * cov * S^T.
template <typename Scalar = double>
class SymplecticOp {
 public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  explicit SymplecticOp(Matrix matrix)
      : SymplecticOp(std::move(matrix), Vector()) {}

  SymplecticOp(Matrix matrix, Vector displacement)
      : matrix_(std::move(matrix)), displacement_(std::move(displacement)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() % 2 != 0 ||
        matrix_.rows() == 0) {
      throw std::invalid_argument("symplectic matrix must be even square");
    }
    if (displacement_.size() == 0) {
      displacement_ = Vector::Zero(matrix_.rows());
    } else if (displacement_.size() != matrix_.rows()) {
      throw std::invalid_argument("displacement size mismatch");
    }
  }

  Eigen::Index n_modes() const { return matrix_.rows() / 2; }
  const Matrix& matrix() const { return matrix_; }
  const Vector& displacement() const { return displacement_; }

  // Deviation from S J S^T = J in max norm.
  Scalar symplectic_defect() const {
    const Eigen::Index n = n_modes();
    Matrix j = Matrix::Zero(2 * n, 2 * n);
    for (Eigen::Index m = 0; m < n; ++m) {
      j(x_index(m), p_index(m)) = Scalar(1);
      j(p_index(m), x_index(m)) = Scalar(-1);
    }
    return (matrix_ * j * matrix_.transpose() - j).cwiseAbs().maxCoeff();
  }

  bool is_symplectic(Scalar tol = Scalar(1e-12)) const {
    return symplectic_defect() <= tol;
  }

  // Composition: (a * b) acts as b first, then a.
  friend SymplecticOp operator*(const SymplecticOp& a, const SymplecticOp& b) {
    if (a.n_modes() != b.n_modes()) {
      throw std::invalid_argument("composing ops of different mode counts");
    }
    return SymplecticOp(a.matrix_ * b.matrix_,
                        a.matrix_ * b.displacement_ + a.displacement_);
  }

  // Lift onto a register of n_total modes, acting on the selected modes.
  // Selector order maps op-local mode k to modes.indices()[k].
  SymplecticOp embed(Eigen::Index n_total, const ModeSelector& modes) const {
    modes.check_range(n_total);
    if (modes.size() != n_modes()) {
      throw std::invalid_argument("selector size must match op mode count");
    }
    Matrix full = Matrix::Identity(2 * n_total, 2 * n_total);
    Vector disp = Vector::Zero(2 * n_total);
    const std::vector<Eigen::Index> q = modes.quadrature_indices();
    for (std::size_t i = 0; i < q.size(); ++i) {
      disp(q[i]) = displacement_(static_cast<Eigen::Index>(i));
      for (std::size_t j = 0; j < q.size(); ++j) {
        full(q[i], q[j]) = matrix_(static_cast<Eigen::Index>(i),
                                   static_cast<Eigen::Index>(j));
      }
    }
    return SymplecticOp(std::move(full), std::move(disp));
  }

 private:
  Matrix matrix_;
  Vector displacement_;
};

template <typename Scalar = double>
SymplecticOp<Scalar> identity_op(Eigen::Index n_modes) {
  return SymplecticOp<Scalar>(
      MatrixX<Scalar>::Identity(2 * n_modes, 2 * n_modes));
}

// Beam splitter of transmission T on two modes (i, j):
//   x_i' =  sqrt(T) x_i + sqrt(1-T) x_j
//   x_j' = -sqrt(1-T) x_i + sqrt(T) x_j     (same for p)
// Mode i carries the transmitted port, mode j the reflected port.
template <typename Scalar = double>
SymplecticOp<Scalar> beam_splitter(Scalar transmission) {
  if (!(transmission >= Scalar(0) && transmission <= Scalar(1))) {
    throw std::invalid_argument("beam splitter transmission must be in [0,1]");
  }
  const Scalar t = std::sqrt(transmission);
  const Scalar r = std::sqrt(Scalar(1) - transmission);
  MatrixX<Scalar> s = MatrixX<Scalar>::Zero(4, 4);
  s.template block<2, 2>(0, 0) = t * MatrixX<Scalar>::Identity(2, 2);
  s.template block<2, 2>(0, 2) = r * MatrixX<Scalar>::Identity(2, 2);
  s.template block<2, 2>(2, 0) = -r * MatrixX<Scalar>::Identity(2, 2);
  s.template block<2, 2>(2, 2) = t * MatrixX<Scalar>::Identity(2, 2);
  return SymplecticOp<Scalar>(std::move(s));
}

// Rotation in phase space: x' = cos(t) x - sin(t) p, p' = sin(t) x + cos(t) p.
template <typename Scalar = double>
SymplecticOp<Scalar> phase_shift(Scalar theta) {
  MatrixX<Scalar> s(2, 2);
  s << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return SymplecticOp<Scalar>(std::move(s));
}

// Two-mode squeezer; r > 0 correlates x1 with x2 and anticorrelates p1 with
// p2, so on vacuum Var(x1 - x2) = Var(p1 + p2) = 2 exp(-2r).
template <typename Scalar = double>
SymplecticOp<Scalar> two_mode_squeeze(Scalar r) {
  const Scalar c = std::cosh(r);
  const Scalar s = std::sinh(r);
  MatrixX<Scalar> m = MatrixX<Scalar>::Zero(4, 4);
  m.template block<2, 2>(0, 0) = c * MatrixX<Scalar>::Identity(2, 2);
  m.template block<2, 2>(2, 2) = c * MatrixX<Scalar>::Identity(2, 2);
  MatrixX<Scalar> z(2, 2);
  z << Scalar(1), Scalar(0), Scalar(0), Scalar(-1);
  m.template block<2, 2>(0, 2) = s * z;
  m.template block<2, 2>(2, 0) = s * z;
  return SymplecticOp<Scalar>(std::move(m));
}

// QND-style quadrature coupling on two modes (source, target):
//   x coupling: x_t += g x_s, back-action p_s -= g p_t
//   p coupling: p_t += g p_s, back-action x_s -= g x_t
// This is the unitary stand-in for "measure quadrature q of the source and
// displace the target by g times the outcome": after tracing out the source
// the target statistics match the measure-and-displace average exactly.
enum class Quadrature { X, P };

template <typename Scalar = double>
SymplecticOp<Scalar> quadrature_coupling(Quadrature q, Scalar gain) {
  MatrixX<Scalar> s = MatrixX<Scalar>::Identity(4, 4);
  if (q == Quadrature::X) {
    s(2, 0) = gain;   // x_t += g x_s
    s(1, 3) = -gain;  // p_s -= g p_t
  } else {
    s(3, 1) = gain;   // p_t += g p_s
    s(0, 2) = -gain;  // x_s -= g x_t
  }
  return SymplecticOp<Scalar>(std::move(s));
}

template <typename Scalar>
GaussianState<Scalar> apply(const SymplecticOp<Scalar>& op,
                            const GaussianState<Scalar>& state) {
  if (op.n_modes() != state.n_modes()) {
    throw std::invalid_argument("op/state mode count mismatch");
  }
  GaussianState<Scalar> out(
      op.matrix() * state.mean() + op.displacement(),
      op.matrix() * state.cov() * op.matrix().transpose());
  out.resymmetrize();
  return out;
}

// In-place application of a small op to selected modes of a large register;
// O(k n^2) block update instead of an O(n^3) full congruence.
template <typename Scalar>
void apply_on(const SymplecticOp<Scalar>& op, GaussianState<Scalar>& state,
              const ModeSelector& modes) {
  modes.check_range(state.n_modes());
  if (op.n_modes() != modes.size()) {
    throw std::invalid_argument("selector size must match op mode count");
  }
  const std::vector<Eigen::Index> qv = modes.quadrature_indices();
  Eigen::VectorXi q(static_cast<Eigen::Index>(qv.size()));
  for (std::size_t i = 0; i < qv.size(); ++i) {
    q(static_cast<Eigen::Index>(i)) = static_cast<int>(qv[i]);
  }
  auto& mean = state.mutable_mean();
  auto& cov = state.mutable_cov();
  mean(q) = (op.matrix() * mean(q) + op.displacement()).eval();
  cov(q, Eigen::all) = (op.matrix() * cov(q, Eigen::all)).eval();
  cov(Eigen::all, q) = (cov(Eigen::all, q) * op.matrix().transpose()).eval();
  state.resymmetrize();
}

}  // namespace cvclone
