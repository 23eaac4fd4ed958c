#pragma once

#include <cstddef>
#include <cstdint>

#include "mrf/fft.hpp"
#include "mrf/sampling.hpp"
#include "mrf/subspace.hpp"
#include "mrf/types.hpp"

namespace mrf {

/// Masked multi-coil k-space on the dense grid. Column t * coils + c holds
/// frame t of coil c (n entries, unsampled positions zero).
struct KSpaceData {
  ImageShape shape;
  std::size_t frames = 0;
  std::size_t coils = 0;
  CMatrix y;

  static KSpaceData zeros(ImageShape shape, std::size_t frames, std::size_t coils);

  [[nodiscard]] Eigen::Index column(std::size_t t, std::size_t c) const {
    return static_cast<Eigen::Index>(t * coils + c);
  }
};

/// Standard complex inner product sum(conj(a) * b) over the k-space grid.
Complex inner(const KSpaceData& a, const KSpaceData& b);

/// The acquisition model A: per frame, coil weighting, unitary 2-D DFT and
/// masking. Works on full image series (n x L) or on subspace stacks (n x S)
/// through the temporal basis.
class AcquisitionOperator {
 public:
  AcquisitionOperator(const CoilMaps& coils, const SamplingPattern& pattern);

  /// series n x L -> k-space
  [[nodiscard]] KSpaceData forward_series(const CMatrix& series) const;
  /// k-space -> series n x L
  [[nodiscard]] CMatrix adjoint_series(const KSpaceData& data) const;

  /// y = A(X V^H)
  [[nodiscard]] KSpaceData forward(const CMatrix& coeffs, const SubspaceBasis& basis) const;
  /// A^H(Y) V
  [[nodiscard]] CMatrix adjoint(const KSpaceData& data, const SubspaceBasis& basis) const;
  /// A^H(A(X V^H)) V without materializing k-space.
  [[nodiscard]] CMatrix normal(const CMatrix& coeffs, const SubspaceBasis& basis) const;

  [[nodiscard]] ImageShape shape() const { return coils_.shape; }
  [[nodiscard]] std::size_t frames() const { return pattern_.frames; }
  [[nodiscard]] std::size_t coils() const { return coils_.coils(); }
  [[nodiscard]] const SamplingPattern& pattern() const { return pattern_; }
  [[nodiscard]] const CoilMaps& coil_maps() const { return coils_; }

  /// Acquired samples over all frames and coils.
  [[nodiscard]] std::size_t total_samples() const { return pattern_.total_samples(coils()); }

 private:
  void check_basis(const SubspaceBasis& basis) const;
  void check_data(const KSpaceData& data) const;

  CoilMaps coils_;
  SamplingPattern pattern_;
  Fft2 fft_;
};

/// Free-function forms of the operator pair.
KSpaceData forward(const CMatrix& coeffs, const SubspaceBasis& basis, const CoilMaps& coils,
                   const SamplingPattern& pattern);
CMatrix adjoint(const KSpaceData& data, const SubspaceBasis& basis, const CoilMaps& coils,
                const SamplingPattern& pattern);

/// Largest eigenvalue of A^H A restricted to the subspace, by power iteration.
double normal_operator_norm(const AcquisitionOperator& op, const SubspaceBasis& basis,
                            int iterations, std::uint64_t seed);

}  // namespace mrf
