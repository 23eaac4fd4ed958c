#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "mrf/solver.hpp"
#include "oracles.hpp"

using namespace mrf;

namespace {

struct Fixture {
  ImageShape shape;
  SubspaceBasis basis;
  AcquisitionOperator op;
  KSpaceData data;

  Fixture(ImageShape s, std::size_t frames, std::size_t rank, std::size_t coils, double accel,
          std::uint64_t seed)
      : shape(s),
        op(make_coil_maps(s, coils, coils == 1 ? CoilKind::uniform : CoilKind::gaussian_ring),
           accel == 1.0 ? full_sampling(s, frames)
                        : make_vd_cartesian_masks(s, frames, {accel, 2.0, 0.0, 1}, seed)) {
    std::mt19937_64 rng(seed);
    basis = learn_subspace(oracle::random_complex(static_cast<Eigen::Index>(frames), 40, rng), rank);
    const CMatrix truth = oracle::random_complex(static_cast<Eigen::Index>(s.voxels()),
                                                 static_cast<Eigen::Index>(rank), rng);
    data = op.forward(truth, basis);
    CMatrix noise = oracle::random_complex(data.y.rows(), data.y.cols(), rng) * 0.05;
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t c = 0; c < coils; ++c) {
        for (std::size_t i = 0; i < s.voxels(); ++i) {
          if (op.pattern().frame_mask(t)[i]) {
            data.y(static_cast<Eigen::Index>(i), data.column(t, c)) += noise(static_cast<Eigen::Index>(i), data.column(t, c));
          }
        }
      }
    }
  }
};

SolverConfig config(ReconMode mode, double lambda, int iters) {
  SolverConfig c = SolverConfig::for_mode(mode);
  c.lambda = lambda;
  c.max_outer_iters = iters;
  c.stop_rel_change = 0.0;
  return c;
}

}  // namespace

TEST(Gradient, MatchesCentralDifferences) {
  Fixture f({8, 8}, 6, 3, 2, 2.0, 11);
  const SubspaceProblem p(f.op, f.basis, f.data);
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 3; ++trial) {
    const CMatrix x = oracle::random_complex(64, 3, rng);
    const CMatrix dir = oracle::random_complex(64, 3, rng);
    const double h = 1e-5;
    const double fd = (p.fidelity(x + h * dir) - p.fidelity(x - h * dir)) / (2.0 * h);
    // fidelity is ||.||^2 and the module's gradient omits the factor 2
    const double analytic = 2.0 * p.gradient(x).cwiseProduct(dir.conjugate()).sum().real();
    EXPECT_LT(oracle::rel_err(analytic, fd), 1e-6);
  }
}

TEST(Gradient, ClosedFormsAtSpecialPoints) {
  Fixture f({8, 8}, 6, 3, 2, 2.0, 13);
  const SubspaceProblem p(f.op, f.basis, f.data);
  const CMatrix g0 = p.gradient(CMatrix::Zero(64, 3));
  EXPECT_LT((g0 + f.op.adjoint(f.data, f.basis)).norm(), 1e-12 * g0.norm());
  EXPECT_EQ(p.back_projection(), bpi(f.data, f.basis, f.op));

  std::mt19937_64 rng(14);
  const CMatrix x = oracle::random_complex(64, 3, rng);
  const KSpaceData exact = f.op.forward(x, f.basis);
  EXPECT_LT(gradient(x, exact, f.basis, f.op).norm(), 1e-12 * x.norm());
  const auto [fid, grad] = p.fidelity_and_gradient(x);
  EXPECT_NEAR(fid, p.fidelity(x), 1e-10 * fid);
  EXPECT_LT((grad - p.gradient(x)).norm(), 1e-12 * grad.norm());
}

TEST(Majorization, KnownCases) {
  Fixture f({8, 8}, 6, 3, 1, 1.0, 15);
  const SubspaceProblem p(f.op, f.basis, f.data);
  std::mt19937_64 rng(16);
  const CMatrix x = oracle::random_complex(64, 3, rng);
  const CMatrix g = p.gradient(x);
  EXPECT_TRUE(backtrack_ok(p, x, x, g, 0.1));
  // full sampling with one unit coil makes A^H A the identity on the subspace
  EXPECT_TRUE(backtrack_ok(p, x - 0.9 * g, x, g, 0.9));
  EXPECT_FALSE(backtrack_ok(p, x - 1e6 * g, x, g, 1e6));
  const auto check = check_majorization(p, x - 1.0 * g, x, g, 1.0, p.fidelity(x));
  EXPECT_NEAR(check.lhs, check.rhs, 1e-9 * check.rhs);
}

TEST(Solver, LrMatchesLrtvWithoutRegularization) {
  Fixture f({8, 8}, 6, 3, 2, 2.0, 17);
  const auto lr = solve(f.data, f.basis, f.op, config(ReconMode::lr, 0.0, 8));
  SolverConfig c = config(ReconMode::lrtv, 0.0, 8);
  const auto lrtv = solve(f.data, f.basis, f.op, c);
  EXPECT_EQ(lr.x, lrtv.x);
}

TEST(Solver, FirstIterateIsScaledBackProjection) {
  Fixture f({16, 16}, 8, 3, 4, 4.0, 19);
  const auto b = solve(f.data, f.basis, f.op, config(ReconMode::bpi, 0.0, 1));
  const auto one = solve(f.data, f.basis, f.op, config(ReconMode::lr, 0.0, 1));
  const double mu1 = one.trace.records.at(1).mu;
  EXPECT_LT((one.x - mu1 * b.x).norm() / one.x.norm(), 1e-12);
  EXPECT_EQ(b.trace.records.size(), 1u);
}

TEST(Solver, UnitaryProblemConvergesToBackProjection) {
  // A^H A = I on the subspace, so the least-squares solution is A^H(Y) V
  Fixture f({8, 8}, 6, 3, 1, 1.0, 21);
  EXPECT_DOUBLE_EQ(compression_step(f.op), 1.0);
  SolverConfig c = config(ReconMode::lr, 0.0, 200);
  c.mu0 = 0.9;
  const auto r = solve(f.data, f.basis, f.op, c);
  EXPECT_EQ(r.trace.records.at(1).halvings, 0);
  EXPECT_LT((r.x - bpi(f.data, f.basis, f.op)).norm(), 1e-6 * r.x.norm());
}

TEST(Solver, AcceptedStepsSatisfyMajorization) {
  for (auto mode : {ReconMode::lr, ReconMode::lrtv}) {
    Fixture f({16, 16}, 10, 4, 4, 6.0, 23);
    SolverConfig c = config(mode, mode == ReconMode::lrtv ? 0.05 : 0.0, 30);
    c.mu0 = 50.0;  // large enough to force halvings
    const auto r = solve(f.data, f.basis, f.op, c);
    int halvings = 0;
    double prev_mu = r.initial_mu;
    for (std::size_t k = 1; k < r.trace.records.size(); ++k) {
      const auto& rec = r.trace.records[k];
      EXPECT_LE(rec.fidelity, rec.majorizer) << k;
      EXPECT_LE(rec.mu, prev_mu);
      prev_mu = rec.mu;
      halvings += rec.halvings;
    }
    EXPECT_GT(halvings, 0);
    EXPECT_LE(r.final_objective, f.data.y.squaredNorm());
  }
}

TEST(Solver, ObjectiveDecreasesOverall) {
  Fixture f({16, 16}, 10, 4, 4, 4.0, 25);
  const auto r = solve(f.data, f.basis, f.op, config(ReconMode::lrtv, 0.01, 40));
  EXPECT_LT(r.trace.records.back().objective, 0.5 * r.trace.records.front().objective);
  EXPECT_LT(r.final_objective, r.trace.records[1].objective);
}

TEST(Solver, StopsOnRelativeChange) {
  Fixture f({8, 8}, 6, 3, 2, 2.0, 27);
  SolverConfig c = config(ReconMode::lr, 0.0, 500);
  c.stop_rel_change = 1e-3;
  const auto r = solve(f.data, f.basis, f.op, c);
  EXPECT_LT(r.trace.records.size(), 501u);
  EXPECT_LT(r.trace.records.back().rel_change, 1e-3);
}

TEST(Solver, TraceCsv) {
  Fixture f({8, 8}, 6, 3, 2, 2.0, 29);
  const auto r = solve(f.data, f.basis, f.op, config(ReconMode::lrtv, 0.01, 3));
  std::ostringstream os;
  r.trace.write_csv(os);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "iteration,objective,fidelity,tv_term,mu,halvings,rel_change");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 4);
}

TEST(Solver, Validation) {
  EXPECT_EQ(parse_recon_mode("lrtv"), ReconMode::lrtv);
  EXPECT_THROW(parse_recon_mode("cg"), std::invalid_argument);
  EXPECT_EQ(SolverConfig::for_mode(ReconMode::lr).lambda, 0.0);
  SolverConfig c;
  c.mu0 = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = SolverConfig{};
  c.max_outer_iters = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}
