#include "mrf/subspace.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace mrf {

double SubspaceBasis::energy_fraction() const {
  const double total = singular_values.squaredNorm();
  if (total <= 0.0) return 1.0;
  return singular_values.head(v.cols()).squaredNorm() / total;
}

GramAccumulator::GramAccumulator(std::size_t frames)
    : gram_(CMatrix::Zero(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(frames))) {
  require(frames >= 1, "gram accumulator needs at least one frame");
}

void GramAccumulator::add(const CMatrix& atoms_block) {
  require(atoms_block.rows() == gram_.rows(), "atom block has the wrong number of frames");
  gram_.selfadjointView<Eigen::Lower>().rankUpdate(atoms_block);
  atoms_ += static_cast<std::size_t>(atoms_block.cols());
}

double GramAccumulator::total_energy() const { return gram_.diagonal().real().sum(); }

SubspaceBasis GramAccumulator::basis(std::size_t rank) const {
  const auto frames = static_cast<std::size_t>(gram_.rows());
  const std::size_t full = std::min(frames, atoms_);
  require(rank >= 1 && rank <= full, "subspace rank must lie in [1, min(L, d)]");

  const CMatrix hermitian = gram_.selfadjointView<Eigen::Lower>();
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(hermitian);
  require(eig.info() == Eigen::Success, "eigendecomposition of the dictionary gram failed");

  // eigenvalues ascend; singular values are their square roots in reverse
  const Eigen::Index last = gram_.rows() - 1;
  SubspaceBasis out;
  out.singular_values.resize(static_cast<Eigen::Index>(full));
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(full); ++i) {
    out.singular_values[i] = std::sqrt(std::max(0.0, eig.eigenvalues()[last - i]));
  }
  out.v.resize(gram_.rows(), static_cast<Eigen::Index>(rank));
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(rank); ++j) {
    CVector col = eig.eigenvectors().col(last - j);
    Eigen::Index dominant = 0;
    col.cwiseAbs().maxCoeff(&dominant);
    const double phase = std::arg(col[dominant]);
    col *= std::polar(1.0, -phase);
    col[dominant] = std::abs(col[dominant]);
    out.v.col(j) = col;
  }
  return out;
}

SubspaceBasis learn_subspace(const CMatrix& atoms, std::size_t rank) {
  require(atoms.cols() >= 1, "dictionary is empty");
  GramAccumulator acc(static_cast<std::size_t>(atoms.rows()));
  acc.add(atoms);
  return acc.basis(rank);
}

SubspaceBasis learn_subspace(const Dictionary& dict, std::size_t rank) {
  return learn_subspace(dict.atoms, rank);
}

double projection_residual(const CMatrix& atoms, const SubspaceBasis& basis) {
  require(atoms.rows() == basis.v.rows(), "dictionary and basis disagree on frame count");
  const CMatrix coeffs = basis.v.adjoint() * atoms;
  return (atoms - basis.v * coeffs).squaredNorm();
}

CMatrix project(const CMatrix& series, const SubspaceBasis& basis) {
  require(series.cols() == basis.v.rows(), "series length does not match the basis");
  return series * basis.v;
}

CRowVector project(const CRowVector& series, const SubspaceBasis& basis) {
  require(series.size() == basis.v.rows(), "series length does not match the basis");
  return series * basis.v;
}

CMatrix expand(const CMatrix& coeffs, const SubspaceBasis& basis) {
  require(coeffs.cols() == basis.v.cols(), "coefficient width does not match the basis rank");
  return coeffs * basis.v.adjoint();
}

namespace {

template <typename Row>
void align_into(const Row& coeffs, Eigen::Ref<RVector> out) {
  out.setZero();
  Eigen::Index dominant = 0;
  double best = -1.0;
  for (Eigen::Index j = 0; j < coeffs.size(); ++j) {
    const double mag = std::abs(coeffs[j]);
    if (mag > best) {
      best = mag;
      dominant = j;
    }
  }
  if (best <= 0.0) return;
  const Complex rotation = std::conj(coeffs[dominant]) / best;
  for (Eigen::Index j = 0; j < coeffs.size(); ++j) out[j] = (coeffs[j] * rotation).real();
  out[dominant] = best;
}

}  // namespace

RVector phase_align(const CVector& coeffs) {
  if (!coeffs.allFinite()) throw NumericalError("phase_align requires finite coefficients");
  RVector out(coeffs.size());
  align_into(coeffs, out);
  return out;
}

RMatrix phase_align_rows(const CMatrix& coeffs) {
  if (!coeffs.allFinite()) throw NumericalError("phase_align requires finite coefficients");
  RMatrix out(coeffs.cols(), coeffs.rows());
  const auto rows = static_cast<std::ptrdiff_t>(coeffs.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const CVector row = coeffs.row(i).transpose();
    align_into(row, out.col(i));
  }
  return out.transpose();
}

}  // namespace mrf
