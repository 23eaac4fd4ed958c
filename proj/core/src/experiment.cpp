#include "mrf/experiment.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "mrf/pgm.hpp"

namespace mrf {

namespace {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

void say(std::ostream* log, const std::string& what, double seconds) {
  if (log) *log << std::fixed << std::setprecision(2) << "[" << seconds << " s] " << what << '\n' << std::flush;
}

std::ofstream open_text(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw BundleError(BundleErrc::io, "cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

Acquisition simulate_acquisition(const GroundTruth& gt, const SequenceSchedule& schedule,
                                 std::size_t k_max, const AcquisitionParams& params) {
  require(params.kspace_noise >= 0.0, "k-space noise must be non-negative");
  Acquisition acq;
  acq.coil_kind = params.coil_kind;
  acq.kspace_noise = params.kspace_noise;
  acq.pattern = make_vd_cartesian_masks(gt.shape, schedule.frames(), params.density, params.seed);
  acq.coils = make_coil_maps(gt.shape, params.coils, params.coil_kind);
  const AcquisitionOperator op(acq.coils, acq.pattern);
  acq.data = op.forward_series(synthesize_timeseries(gt, schedule, k_max));

  if (params.kspace_noise > 0.0) {
    std::seed_seq seq{static_cast<std::uint32_t>(params.seed), static_cast<std::uint32_t>(params.seed >> 32),
                      0x6e6f6973u};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, params.kspace_noise);
    const auto n = gt.shape.voxels();
    for (std::size_t t = 0; t < acq.data.frames; ++t) {
      const auto* mask = acq.pattern.frame_mask(t);
      for (std::size_t c = 0; c < acq.data.coils; ++c) {
        auto col = acq.data.y.col(acq.data.column(t, c));
        for (std::size_t i = 0; i < n; ++i) {
          if (!mask[i]) continue;
          const double re = normal(rng);
          const double im = normal(rng);
          col[static_cast<Eigen::Index>(i)] += Complex(re, im);
        }
      }
    }
  }
  return acq;
}

const MethodResult& ExperimentResult::method(ReconMode mode) const {
  for (const auto& m : methods) {
    if (m.mode == mode) return m;
  }
  throw std::out_of_range("experiment has no result for " + to_string(mode));
}

void write_metrics_csv(std::ostream& os, const std::vector<std::pair<std::string, MapScores>>& rows) {
  os << "method,parameter,metric,value\n";
  std::ostringstream line;
  line << std::setprecision(10);
  for (const auto& [method, s] : rows) {
    for (const auto& [param, score] : {std::pair{"T1", s.t1}, std::pair{"T2", s.t2}}) {
      line << method << ',' << param << ",RMSE," << score.rmse << '\n';
      line << method << ',' << param << ",MAE," << score.mae << '\n';
      line << method << ',' << param << ",NRMSE," << score.nrmse << '\n';
    }
  }
  os << line.str();
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                std::ostream* log) {
  const bool write = !out_dir.empty();
  if (write) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw BundleError(BundleErrc::io, "cannot create '" + out_dir.string() + "': " + ec.message());
  }
  Stopwatch clock;
  ExperimentResult result;

  const SequenceSchedule schedule = cfg.schedule();
  const std::size_t k_max = cfg.effective_k_max();
  const Dictionary dict = build_dictionary(cfg.grid, schedule, k_max);
  say(log, "dictionary: " + std::to_string(dict.size()) + " atoms x " + std::to_string(dict.frames()) + " frames",
      clock.lap());

  result.basis = learn_subspace(dict, cfg.rank);
  say(log, "subspace: rank " + std::to_string(cfg.rank), clock.lap());

  result.gt = make_phantom(cfg.image, cfg.phantom);
  AcquisitionParams ap;
  ap.density = cfg.density;
  ap.coils = cfg.coils;
  ap.coil_kind = cfg.coil_kind;
  ap.kspace_noise = cfg.kspace_noise;
  ap.seed = cfg.seed;
  const Acquisition acq = simulate_acquisition(result.gt, schedule, k_max, ap);
  const AcquisitionOperator op(acq.coils, acq.pattern);
  say(log, "acquisition: " + std::to_string(acq.pattern.total_samples(acq.coils.coils())) + " samples", clock.lap());

  MrfNet net = make_net(cfg.rank, cfg.net, TargetRanges::from_grid(cfg.grid), cfg.train.seed);
  const TrainingSet training = make_training_set(dict, result.basis, cfg.train);
  net = train(std::move(net), training, cfg.train, &result.train_report);
  say(log, "network: loss " + std::to_string(result.train_report.initial_loss) + " -> " +
               std::to_string(result.train_report.final_loss),
      clock.lap());

  const MatchTemplates templates = MatchTemplates::build(dict, result.basis);
  const std::vector<bool> mask = result.gt.foreground();

  for (ReconMode mode : {ReconMode::bpi, ReconMode::lr, ReconMode::lrtv}) {
    MethodResult m;
    m.mode = mode;
    m.solve = solve(acq.data, result.basis, op, cfg.solver_for(mode));
    const RMatrix aligned = phase_align_rows(m.solve.x);
    m.net_maps = infer(net, aligned);
    m.match = dictionary_match(aligned, templates);
    m.net_scores = score_maps(m.net_maps.t1_t2.col(0), m.net_maps.t1_t2.col(1), result.gt, mask);
    m.match_scores = score_maps(m.match.maps.t1_t2.col(0), m.match.maps.t1_t2.col(1), result.gt, mask);
    std::ostringstream msg;
    msg << to_string(mode) << ": " << m.solve.trace.records.size() - 1 << " iterations, T1 RMSE "
        << m.net_scores.t1.rmse << ", T2 RMSE " << m.net_scores.t2.rmse;
    say(log, msg.str(), clock.lap());
    result.methods.push_back(std::move(m));
  }

  if (!write) return result;

  {
    auto out = open_text(out_dir / "config.resolved.json");
    out << to_json(cfg).dump(2) << '\n';
  }
  std::vector<std::pair<std::string, MapScores>> net_rows, match_rows;
  for (const auto& m : result.methods) {
    net_rows.emplace_back(to_string(m.mode), m.net_scores);
    match_rows.emplace_back(to_string(m.mode), m.match_scores);
  }
  {
    auto out = open_text(out_dir / "metrics.csv");
    write_metrics_csv(out, net_rows);
  }
  {
    auto out = open_text(out_dir / "metrics_match.csv");
    write_metrics_csv(out, match_rows);
  }
  {
    auto out = open_text(out_dir / "training.csv");
    out << "epoch,loss,learning_rate\n" << std::setprecision(10);
    const auto& r = result.train_report;
    for (std::size_t e = 0; e < r.epoch_losses.size(); ++e) {
      out << e + 1 << ',' << r.epoch_losses[e] << ',' << r.epoch_learning_rates[e] << '\n';
    }
  }

  write_bundle(out_dir / "basis.mrfb", basis_to_bundle(result.basis));
  write_bundle(out_dir / "gt.mrfb", ground_truth_to_bundle(result.gt));
  write_bundle(out_dir / "kspace.mrfb", acquisition_to_bundle(acq));
  write_bundle(out_dir / "net.mrfb", net_to_bundle(net));

  const ImageShape shape = result.gt.shape;
  const double t1_hi = cfg.grid.t1.value(cfg.grid.t1.count() - 1);
  const double t2_hi = cfg.grid.t2.value(cfg.grid.t2.count() - 1);
  write_pgm16(out_dir / "gt_t1.pgm", result.gt.t1, shape, 0.0, t1_hi);
  write_pgm16(out_dir / "gt_t2.pgm", result.gt.t2, shape, 0.0, t2_hi);
  for (const auto& m : result.methods) {
    const std::string name = to_string(m.mode);
    if (m.mode != ReconMode::bpi) {
      auto out = open_text(out_dir / ("trace_" + name + ".csv"));
      m.solve.trace.write_csv(out);
    }
    nlohmann::json meta = {{"mode", name}};
    if (m.mode != ReconMode::bpi) {
      meta["lambda"] = cfg.solver_for(m.mode).lambda;
      meta["iterations"] = m.solve.trace.records.size() - 1;
    }
    write_bundle(out_dir / ("x_" + name + ".mrfb"), subspace_images_to_bundle(m.solve.x, shape, meta));
    write_bundle(out_dir / ("maps_" + name + ".mrfb"),
                 maps_to_bundle(m.net_maps.t1_t2.col(0), m.net_maps.t1_t2.col(1), RVector(), shape, "net"));
    write_bundle(out_dir / ("maps_" + name + "_match.mrfb"),
                 maps_to_bundle(m.match.maps.t1_t2.col(0), m.match.maps.t1_t2.col(1),
                                m.match.maps.proton_density, shape, "match"));
    write_pgm16(out_dir / (name + "_t1.pgm"), m.net_maps.t1_t2.col(0), shape, 0.0, t1_hi);
    write_pgm16(out_dir / (name + "_t2.pgm"), m.net_maps.t1_t2.col(1), shape, 0.0, t2_hi);
  }
  say(log, "outputs written to " + out_dir.string(), clock.lap());
  return result;
}

}  // namespace mrf
