#include "mrf/solver.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace mrf {

ReconMode parse_recon_mode(std::string_view name) {
  if (name == "bpi") return ReconMode::bpi;
  if (name == "lr") return ReconMode::lr;
  if (name == "lrtv") return ReconMode::lrtv;
  throw std::invalid_argument("unknown reconstruction mode '" + std::string(name) + "'");
}

std::string to_string(ReconMode mode) {
  switch (mode) {
    case ReconMode::bpi: return "bpi";
    case ReconMode::lr: return "lr";
    case ReconMode::lrtv: return "lrtv";
  }
  return "?";
}

SolverConfig SolverConfig::for_mode(ReconMode mode) {
  SolverConfig cfg;
  cfg.mode = mode;
  cfg.lambda = mode == ReconMode::lrtv ? 2e-5 : 0.0;
  return cfg;
}

void SolverConfig::validate() const {
  require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be non-negative");
  require(mode == ReconMode::lrtv || lambda == 0.0, "lambda must be zero unless mode is lrtv");
  require(!mu0 || (std::isfinite(*mu0) && *mu0 > 0.0), "initial step must be positive");
  require(max_outer_iters >= 1, "max_outer_iters must be at least 1");
  require(stop_rel_change >= 0.0, "stop_rel_change must be non-negative");
  tv.validate();
}

void SolveTrace::write_csv(std::ostream& os) const {
  os << "iteration,objective,fidelity,tv_term,mu,halvings,rel_change\n";
  os << std::setprecision(17);
  for (const auto& r : records) {
    os << r.iteration << ',' << r.objective << ',' << r.fidelity << ',' << r.tv_term << ',' << r.mu
       << ',' << r.halvings << ',' << r.rel_change << '\n';
  }
}

SubspaceProblem::SubspaceProblem(const AcquisitionOperator& op, const SubspaceBasis& basis,
                                 const KSpaceData& data)
    : op_(op), basis_(basis), data_(data), back_projection_(op.adjoint(data, basis)) {}

double SubspaceProblem::fidelity(const CMatrix& x) const {
  return (op_.forward(x, basis_).y - data_.y).squaredNorm();
}

CMatrix SubspaceProblem::gradient(const CMatrix& x) const {
  return op_.normal(x, basis_) - back_projection_;
}

std::pair<double, CMatrix> SubspaceProblem::fidelity_and_gradient(const CMatrix& x) const {
  const KSpaceData ax = op_.forward(x, basis_);
  const double fid = (ax.y - data_.y).squaredNorm();
  return {fid, op_.adjoint(ax, basis_) - back_projection_};
}

CMatrix bpi(const KSpaceData& data, const SubspaceBasis& basis, const AcquisitionOperator& op) {
  return op.adjoint(data, basis);
}

CMatrix gradient(const CMatrix& x, const KSpaceData& data, const SubspaceBasis& basis,
                 const AcquisitionOperator& op) {
  return SubspaceProblem(op, basis, data).gradient(x);
}

MajorizationCheck check_majorization(const SubspaceProblem& problem, const CMatrix& z,
                                     const CMatrix& x, const CMatrix& grad, double mu,
                                     double fidelity_x) {
  require(mu > 0.0, "step size must be positive");
  const CMatrix diff = z - x;
  MajorizationCheck check;
  check.lhs = problem.fidelity(z);
  check.rhs = fidelity_x + 2.0 * grad.cwiseProduct(diff.conjugate()).sum().real() +
              diff.squaredNorm() / mu;
  return check;
}

bool backtrack_ok(const SubspaceProblem& problem, const CMatrix& z, const CMatrix& x,
                  const CMatrix& grad, double mu) {
  return check_majorization(problem, z, x, grad, mu, problem.fidelity(x)).accepted();
}

double compression_step(const AcquisitionOperator& op) {
  const double voxels = static_cast<double>(op.shape().voxels());
  const double per_frame = static_cast<double>(op.total_samples()) / static_cast<double>(op.frames());
  return voxels / per_frame;
}

namespace {

void require_finite(const CMatrix& m, int iteration) {
  if (!m.allFinite()) {
    throw NumericalError("non-finite iterate at iteration " + std::to_string(iteration));
  }
}

}  // namespace

SolveResult solve(const KSpaceData& data, const SubspaceBasis& basis,
                  const AcquisitionOperator& op, const SolverConfig& cfg) {
  cfg.validate();
  const SubspaceProblem problem(op, basis, data);
  const ImageShape shape = op.shape();
  const bool use_tv = cfg.mode == ReconMode::lrtv && cfg.lambda > 0.0;

  SolveResult result;
  result.initial_mu = cfg.mu0.value_or(compression_step(op));

  IterationRecord initial;
  initial.fidelity = data.y.squaredNorm();
  initial.objective = initial.fidelity;
  initial.mu = result.initial_mu;
  initial.rel_change = std::numeric_limits<double>::infinity();
  result.trace.records.push_back(initial);

  if (cfg.mode == ReconMode::bpi) {
    result.x = problem.back_projection();
    require_finite(result.x, 0);
    result.final_objective = problem.fidelity(result.x);
    return result;
  }

  const auto n = static_cast<Eigen::Index>(shape.voxels());
  CMatrix x = CMatrix::Zero(n, basis.v.cols());
  CMatrix z_prev = CMatrix::Zero(n, basis.v.cols());
  double mu = result.initial_mu;
  TvStackState tv_state;

  for (int k = 1; k <= cfg.max_outer_iters; ++k) {
    const auto [fid_x, grad] = problem.fidelity_and_gradient(x);
    require_finite(grad, k);

    CMatrix z;
    MajorizationCheck check;
    int halvings = 0;
    for (;;) {
      const CMatrix step = x - mu * grad;
      z = use_tv ? tv_prox_stack(step, shape, cfg.lambda * mu, cfg.tv, &tv_state) : step;
      require_finite(z, k);
      check = check_majorization(problem, z, x, grad, mu, fid_x);
      if (check.accepted()) break;
      mu /= 2.0;
      ++halvings;
      if (halvings > 200) {
        throw NumericalError("step size underflow at iteration " + std::to_string(k));
      }
    }

    const double momentum = static_cast<double>(k - 1) / static_cast<double>(k + 2);
    CMatrix x_next = z + momentum * (z - z_prev);
    const double x_norm = x.norm();
    const double rel = x_norm > 0.0 ? (x_next - x).norm() / x_norm
                                    : std::numeric_limits<double>::infinity();

    IterationRecord rec;
    rec.iteration = k;
    rec.fidelity = check.lhs;
    rec.tv_term = use_tv ? cfg.lambda * tv_norm_stack(z, shape, cfg.tv.variant) : 0.0;
    rec.objective = rec.fidelity + rec.tv_term;
    rec.mu = mu;
    rec.halvings = halvings;
    rec.rel_change = rel;
    rec.momentum = momentum;
    rec.majorizer = check.rhs;
    if (!std::isfinite(rec.objective)) {
      throw NumericalError("non-finite objective at iteration " + std::to_string(k));
    }
    result.trace.records.push_back(rec);

    z_prev = std::move(z);
    x = std::move(x_next);
    if (rel < cfg.stop_rel_change) break;
  }

  result.x = std::move(x);
  result.final_objective = problem.fidelity(result.x);
  if (use_tv) result.final_objective += cfg.lambda * tv_norm_stack(result.x, shape, cfg.tv.variant);
  return result;
}

SolveResult solve(const KSpaceData& data, const SubspaceBasis& basis, const CoilMaps& coils,
                  const SamplingPattern& pattern, const SolverConfig& cfg) {
  return solve(data, basis, AcquisitionOperator(coils, pattern), cfg);
}

}  // namespace mrf
