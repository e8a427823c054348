#pragma once

#include "cvclone/symplectic.hpp"

#include <iostream>
#include <span>

namespace cvclone {

// Cascade of n-1 beam splitters that concentrates n identical inputs into a
// single "symmetric" mode at slot 0 (mean scaled by sqrt(n)); slots 1..n-1
// come out in the orthogonal complement with vanishing mean.
template <typename Scalar = double>
SymplecticOp<Scalar> collect_op(Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("collect_op needs n >= 1");
  SymplecticOp<Scalar> op = identity_op<Scalar>(n);
  for (Eigen::Index k = 1; k < n; ++k) {
    const Scalar t = Scalar(k) / Scalar(k + 1);
    op = beam_splitter<Scalar>(t).embed(n, ModeSelector({Eigen::Index(0), k})) *
         op;
  }
  return op;
}

// Inverse cascade: fan one mode out into m balanced copies, each with mean
// reduced by 1/sqrt(m). Op acts on m modes; slot 0 is the input and carries
// the last copy afterwards, slots 1..m-1 start as vacua and receive the
// copies in split order.
template <typename Scalar = double>
SymplecticOp<Scalar> m_splitter_op(Eigen::Index m) {
  if (m < 1) throw std::invalid_argument("m_splitter_op needs m >= 1");
  SymplecticOp<Scalar> op = identity_op<Scalar>(m);
  for (Eigen::Index k = 1; k < m; ++k) {
    const Scalar t = Scalar(m - k) / Scalar(m - k + 1);
    op = beam_splitter<Scalar>(t).embed(m, ModeSelector({k, Eigen::Index(0)})) *
         op;
  }
  return op;
}

// Interfere n single-mode states on the collect cascade. Inputs are expected
// to be copies of one state; covariances must agree, and a mean mismatch is
// tolerated but reported once on stderr since the symmetric-mode
// interpretation degrades.
template <typename Scalar>
GaussianState<Scalar> collect(std::span<const GaussianState<Scalar>> inputs) {
  if (inputs.empty()) throw std::invalid_argument("collect of zero states");
  for (const auto& s : inputs) {
    if (s.n_modes() != 1) {
      throw std::invalid_argument("collect expects single-mode inputs");
    }
  }
  bool warned = false;
  GaussianState<Scalar> joint = inputs[0];
  for (std::size_t i = 1; i < inputs.size(); ++i) {
    const Scalar cov_gap =
        (inputs[i].cov() - inputs[0].cov()).cwiseAbs().maxCoeff();
    if (cov_gap > Scalar(1e-9)) {
      throw std::invalid_argument("collect inputs must share one covariance");
    }
    const Scalar mean_gap =
        (inputs[i].mean() - inputs[0].mean()).cwiseAbs().maxCoeff();
    if (mean_gap > Scalar(1e-9) && !warned) {
      std::cerr << "collect: input means differ; symmetric mode is only "
                   "approximate\n";
      warned = true;
    }
    joint = tensor(joint, inputs[i]);
  }
  const Eigen::Index n = static_cast<Eigen::Index>(inputs.size());
  return apply(collect_op<Scalar>(n), joint);
}

// Fan mode `mode` of `state` out into m copies. Appends m-1 vacuum modes and
// reorders so the copies sit contiguously at positions mode..mode+m-1 (split
// order, last copy last); modes after `mode` shift up by m-1.
template <typename Scalar>
GaussianState<Scalar> m_splitter(const GaussianState<Scalar>& state,
                                 Eigen::Index mode, Eigen::Index m) {
  ModeSelector({mode}).check_range(state.n_modes());
  if (m < 1) throw std::invalid_argument("m_splitter needs m >= 1");
  const Eigen::Index n = state.n_modes();
  if (m == 1) return state;
  GaussianState<Scalar> big = tensor(state, vacuum<Scalar>(m - 1));
  std::vector<Eigen::Index> slots;
  slots.push_back(mode);
  for (Eigen::Index k = 0; k < m - 1; ++k) slots.push_back(n + k);
  apply_on(m_splitter_op<Scalar>(m), big, ModeSelector(slots));
  std::vector<Eigen::Index> order;
  order.reserve(n + m - 1);
  for (Eigen::Index i = 0; i < mode; ++i) order.push_back(i);
  for (Eigen::Index k = 0; k < m - 1; ++k) order.push_back(n + k);
  order.push_back(mode);
  for (Eigen::Index i = mode + 1; i < n; ++i) order.push_back(i);
  return keep_modes(big, ModeSelector(std::move(order)));
}

}  // namespace cvclone
