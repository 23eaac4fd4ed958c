#pragma once

#include <cstddef>

#include "mrf/epg.hpp"
#include "mrf/types.hpp"

namespace mrf {

/// Temporal subspace spanned by the leading left singular vectors of a
/// dictionary. Time series are row vectors: coefficients are x * v and the
/// reconstruction is c * v^H.
struct SubspaceBasis {
  CMatrix v;                ///< L x S, orthonormal columns
  RVector singular_values;  ///< all min(L, d) singular values, descending

  [[nodiscard]] std::size_t rank() const { return static_cast<std::size_t>(v.cols()); }
  [[nodiscard]] std::size_t frames() const { return static_cast<std::size_t>(v.rows()); }

  /// Fraction of dictionary Frobenius energy inside the retained subspace.
  [[nodiscard]] double energy_fraction() const;
};

/// Accumulates D * D^H over dictionary blocks so that the basis of a
/// dictionary too large to hold in memory can still be learned exactly.
class GramAccumulator {
 public:
  explicit GramAccumulator(std::size_t frames);

  void add(const CMatrix& atoms_block);

  [[nodiscard]] std::size_t atom_count() const { return atoms_; }
  [[nodiscard]] double total_energy() const;

  /// Leading `rank` left singular vectors of everything added so far.
  [[nodiscard]] SubspaceBasis basis(std::size_t rank) const;

 private:
  CMatrix gram_;  // lower triangle is authoritative
  std::size_t atoms_ = 0;
};

SubspaceBasis learn_subspace(const CMatrix& atoms, std::size_t rank);
SubspaceBasis learn_subspace(const Dictionary& dict, std::size_t rank);

/// ||D - V V^H D||_F^2 evaluated directly.
double projection_residual(const CMatrix& atoms, const SubspaceBasis& basis);

/// Series (1 x L or n x L) to coefficients (1 x S or n x S).
CMatrix project(const CMatrix& series, const SubspaceBasis& basis);
CRowVector project(const CRowVector& series, const SubspaceBasis& basis);

/// Coefficients (n x S) to series (n x L).
CMatrix expand(const CMatrix& coeffs, const SubspaceBasis& basis);

/// Removes the phase of the dominant (largest-magnitude, lowest index on
/// ties) entry and keeps the real part. Zero maps to zero.
RVector phase_align(const CVector& coeffs);

/// Row-wise phase_align of an n x S coefficient stack.
RMatrix phase_align_rows(const CMatrix& coeffs);

}  // namespace mrf
