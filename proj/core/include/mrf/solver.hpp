#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mrf/operator.hpp"
#include "mrf/subspace.hpp"
#include "mrf/tvprox.hpp"

namespace mrf {

enum class ReconMode { bpi, lr, lrtv };

ReconMode parse_recon_mode(std::string_view name);
std::string to_string(ReconMode mode);

struct SolverConfig {
  ReconMode mode = ReconMode::lrtv;
  double lambda = 2e-5;
  std::optional<double> mu0;  ///< empty selects the compression factor
  int max_outer_iters = 50;
  double stop_rel_change = 1e-4;
  TvConfig tv;

  /// Defaults for `mode`; lambda is zero unless the mode is lrtv.
  static SolverConfig for_mode(ReconMode mode);
  void validate() const;
};

/// One accepted outer iteration. Record 0 describes the zero initial iterate.
struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;   ///< fidelity + tv_term at Z^k
  double fidelity = 0.0;    ///< ||Y - A(Z^k V^H)||^2
  double tv_term = 0.0;     ///< lambda * sum of channel TV at Z^k
  double mu = 0.0;          ///< step size that was accepted
  int halvings = 0;
  double rel_change = 0.0;  ///< ||X^{k+1} - X^k|| / ||X^k||
  double momentum = 0.0;    ///< (k - 1) / (k + 2)
  double majorizer = 0.0;   ///< right-hand side of the backtracking test
};

struct SolveTrace {
  std::vector<IterationRecord> records;

  /// Columns: iteration, objective, fidelity, tv_term, mu, halvings, rel_change.
  void write_csv(std::ostream& os) const;
};

struct SolveResult {
  CMatrix x;  ///< n x S subspace images
  SolveTrace trace;
  double initial_mu = 0.0;
  double final_objective = 0.0;  ///< objective of the returned x
};

/// The data and operators of one reconstruction problem.
class SubspaceProblem {
 public:
  SubspaceProblem(const AcquisitionOperator& op, const SubspaceBasis& basis, const KSpaceData& data);

  /// ||Y - A(X V^H)||^2
  [[nodiscard]] double fidelity(const CMatrix& x) const;
  /// A^H(A(X V^H)) V - A^H(Y) V; the second term is cached.
  [[nodiscard]] CMatrix gradient(const CMatrix& x) const;
  /// Both of the above from a single forward application.
  [[nodiscard]] std::pair<double, CMatrix> fidelity_and_gradient(const CMatrix& x) const;

  [[nodiscard]] const CMatrix& back_projection() const { return back_projection_; }
  [[nodiscard]] const AcquisitionOperator& op() const { return op_; }
  [[nodiscard]] const SubspaceBasis& basis() const { return basis_; }
  [[nodiscard]] const KSpaceData& data() const { return data_; }

 private:
  const AcquisitionOperator& op_;
  const SubspaceBasis& basis_;
  const KSpaceData& data_;
  CMatrix back_projection_;
};

/// Non-iterative back projection A^H(Y) V.
CMatrix bpi(const KSpaceData& data, const SubspaceBasis& basis, const AcquisitionOperator& op);

/// Subspace gradient of the data term (no factor 2).
CMatrix gradient(const CMatrix& x, const KSpaceData& data, const SubspaceBasis& basis,
                 const AcquisitionOperator& op);

/// Sides of the backtracking test: accept iff lhs <= rhs, where
/// lhs = f(Z) and rhs = f(X) + 2 Re<grad, Z - X> + ||Z - X||^2 / mu.
struct MajorizationCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  [[nodiscard]] bool accepted() const { return !(lhs > rhs); }
};

MajorizationCheck check_majorization(const SubspaceProblem& problem, const CMatrix& z,
                                     const CMatrix& x, const CMatrix& grad, double mu,
                                     double fidelity_x);

/// True when the step is accepted (the majorization inequality is not violated).
bool backtrack_ok(const SubspaceProblem& problem, const CMatrix& z, const CMatrix& x,
                  const CMatrix& grad, double mu);

/// Compression factor n * L / m_total: voxels per frame over acquired
/// samples per frame (all coils).
double compression_step(const AcquisitionOperator& op);

/// Accelerated proximal gradient with TV shrinkage, momentum (k-1)/(k+2)
/// and step halving on majorization failure. bpi mode returns A^H(Y) V.
SolveResult solve(const KSpaceData& data, const SubspaceBasis& basis,
                  const AcquisitionOperator& op, const SolverConfig& cfg);

SolveResult solve(const KSpaceData& data, const SubspaceBasis& basis, const CoilMaps& coils,
                  const SamplingPattern& pattern, const SolverConfig& cfg);

}  // namespace mrf
