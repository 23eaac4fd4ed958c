#include "mrf/operator.hpp"

#include <random>
#include <vector>

#include "mrf/parallel.hpp"

namespace mrf {

KSpaceData KSpaceData::zeros(ImageShape shape, std::size_t frames, std::size_t coils) {
  KSpaceData d;
  d.shape = shape;
  d.frames = frames;
  d.coils = coils;
  d.y = CMatrix::Zero(static_cast<Eigen::Index>(shape.voxels()),
                      static_cast<Eigen::Index>(frames * coils));
  return d;
}

Complex inner(const KSpaceData& a, const KSpaceData& b) {
  require(a.y.rows() == b.y.rows() && a.y.cols() == b.y.cols(), "k-space shapes differ");
  Complex acc = 0.0;
  for (Eigen::Index j = 0; j < a.y.cols(); ++j) acc += a.y.col(j).dot(b.y.col(j));
  return acc;
}

AcquisitionOperator::AcquisitionOperator(const CoilMaps& coils, const SamplingPattern& pattern)
    : coils_(coils), pattern_(pattern), fft_(coils.shape) {
  require(coils.shape == pattern.shape, "coil maps and sampling pattern grids differ");
  require(coils.sens.rows() == static_cast<Eigen::Index>(coils.shape.voxels()) && coils.coils() >= 1,
          "coil maps are malformed");
  pattern_.validate();
  configure_threads();
}

void AcquisitionOperator::check_basis(const SubspaceBasis& basis) const {
  require(basis.frames() == frames(), "basis frame count does not match the sampling pattern");
}

void AcquisitionOperator::check_data(const KSpaceData& data) const {
  require(data.shape == shape() && data.frames == frames() && data.coils == coils(),
          "k-space dimensions do not match the operator");
  require(data.y.rows() == static_cast<Eigen::Index>(shape().voxels()) &&
              data.y.cols() == static_cast<Eigen::Index>(frames() * coils()),
          "k-space storage is malformed");
}

KSpaceData AcquisitionOperator::forward_series(const CMatrix& series) const {
  const auto n = static_cast<Eigen::Index>(shape().voxels());
  require(series.rows() == n && series.cols() == static_cast<Eigen::Index>(frames()),
          "series must be n x L");
  KSpaceData out = KSpaceData::zeros(shape(), frames(), coils());
  const auto pairs = static_cast<std::ptrdiff_t>(frames() * coils());
  const std::size_t nc = coils();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < pairs; ++p) {
    const std::size_t t = static_cast<std::size_t>(p) / nc;
    const std::size_t c = static_cast<std::size_t>(p) % nc;
    auto col = out.y.col(p);
    col = coils_.sens.col(static_cast<Eigen::Index>(c)).cwiseProduct(
        series.col(static_cast<Eigen::Index>(t)));
    fft_.forward(col.data());
    const std::uint8_t* mask = pattern_.frame_mask(t);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (mask[i] == 0) col[i] = 0.0;
    }
  }
  return out;
}

CMatrix AcquisitionOperator::adjoint_series(const KSpaceData& data) const {
  check_data(data);
  const auto n = static_cast<Eigen::Index>(shape().voxels());
  CMatrix series(n, static_cast<Eigen::Index>(frames()));
  const auto frame_count = static_cast<std::ptrdiff_t>(frames());
#pragma omp parallel
  {
    CVector buf(n);
#pragma omp for schedule(static)
    for (std::ptrdiff_t t = 0; t < frame_count; ++t) {
      auto acc = series.col(t);
      acc.setZero();
      const std::uint8_t* mask = pattern_.frame_mask(static_cast<std::size_t>(t));
      for (std::size_t c = 0; c < coils(); ++c) {
        const auto src = data.y.col(data.column(static_cast<std::size_t>(t), c));
        for (Eigen::Index i = 0; i < n; ++i) buf[i] = mask[i] != 0 ? src[i] : Complex(0.0);
        fft_.inverse(buf.data());
        acc += coils_.sens.col(static_cast<Eigen::Index>(c)).conjugate().cwiseProduct(buf);
      }
    }
  }
  return series;
}

KSpaceData AcquisitionOperator::forward(const CMatrix& coeffs, const SubspaceBasis& basis) const {
  check_basis(basis);
  require(coeffs.rows() == static_cast<Eigen::Index>(shape().voxels()) &&
              coeffs.cols() == basis.v.cols(),
          "subspace stack must be n x S");
  return forward_series(expand(coeffs, basis));
}

CMatrix AcquisitionOperator::adjoint(const KSpaceData& data, const SubspaceBasis& basis) const {
  check_basis(basis);
  return project(adjoint_series(data), basis);
}

CMatrix AcquisitionOperator::normal(const CMatrix& coeffs, const SubspaceBasis& basis) const {
  check_basis(basis);
  const auto n = static_cast<Eigen::Index>(shape().voxels());
  require(coeffs.rows() == n && coeffs.cols() == basis.v.cols(), "subspace stack must be n x S");
  const CMatrix series = expand(coeffs, basis);
  CMatrix back(n, static_cast<Eigen::Index>(frames()));
  const auto frame_count = static_cast<std::ptrdiff_t>(frames());
#pragma omp parallel
  {
    CVector buf(n);
#pragma omp for schedule(static)
    for (std::ptrdiff_t t = 0; t < frame_count; ++t) {
      auto acc = back.col(t);
      acc.setZero();
      const std::uint8_t* mask = pattern_.frame_mask(static_cast<std::size_t>(t));
      for (std::size_t c = 0; c < coils(); ++c) {
        const auto s = coils_.sens.col(static_cast<Eigen::Index>(c));
        buf = s.cwiseProduct(series.col(t));
        fft_.forward(buf.data());
        for (Eigen::Index i = 0; i < n; ++i) {
          if (mask[i] == 0) buf[i] = 0.0;
        }
        fft_.inverse(buf.data());
        acc += s.conjugate().cwiseProduct(buf);
      }
    }
  }
  return project(back, basis);
}

KSpaceData forward(const CMatrix& coeffs, const SubspaceBasis& basis, const CoilMaps& coils,
                   const SamplingPattern& pattern) {
  return AcquisitionOperator(coils, pattern).forward(coeffs, basis);
}

CMatrix adjoint(const KSpaceData& data, const SubspaceBasis& basis, const CoilMaps& coils,
                const SamplingPattern& pattern) {
  return AcquisitionOperator(coils, pattern).adjoint(data, basis);
}

double normal_operator_norm(const AcquisitionOperator& op, const SubspaceBasis& basis,
                            int iterations, std::uint64_t seed) {
  require(iterations >= 1, "power iteration needs at least one step");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  CMatrix x(static_cast<Eigen::Index>(op.shape().voxels()), basis.v.cols());
  for (Eigen::Index j = 0; j < x.size(); ++j) x.data()[j] = Complex(gauss(rng), gauss(rng));
  x /= x.norm();
  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const CMatrix y = op.normal(x, basis);
    estimate = std::real(x.cwiseProduct(y.conjugate()).sum());
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    x = y / norm;
  }
  return estimate;
}

}  // namespace mrf
