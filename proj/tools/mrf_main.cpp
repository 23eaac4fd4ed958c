// mrf: command-line front end. Each subcommand runs one pipeline stage and
// exchanges artifacts as .mrfb array bundles.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mrf/artifacts.hpp"
#include "mrf/config.hpp"
#include "mrf/experiment.hpp"
#include "mrf/parallel.hpp"
#include "mrf/pgm.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kIo = 2, kNumerical = 3 };

void report(const std::string& kind, int code, const std::string& message) {
  const nlohmann::json line = {{"error", kind}, {"exit_code", code}, {"message", message}};
  std::cerr << line.dump() << std::endl;
}

std::string errc_name(mrf::BundleErrc code) {
  switch (code) {
    case mrf::BundleErrc::io: return "io";
    case mrf::BundleErrc::corrupt_header: return "corrupt_header";
    case mrf::BundleErrc::truncated: return "truncated";
    case mrf::BundleErrc::dtype_mismatch: return "dtype_mismatch";
    case mrf::BundleErrc::invalid_name: return "invalid_name";
    case mrf::BundleErrc::missing_entry: return "missing_entry";
    case mrf::BundleErrc::shape_mismatch: return "shape_mismatch";
  }
  return "io";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw mrf::BundleError(mrf::BundleErrc::io, "cannot open '" + path + "' for writing");
  return out;
}

struct ScheduleFlags {
  std::size_t frames = 200;
  double max_flip = 70.0;
  double period = 250.0;
  double tr = 10.0;
  double te = 1.908;
  double tinv = 18.0;
  bool no_inversion = false;
  std::size_t k_max = 0;

  void attach(CLI::App* app) {
    app->add_option("--frames", frames, "number of frames L")->check(CLI::PositiveNumber);
    app->add_option("--max-flip", max_flip, "peak flip angle (deg)");
    app->add_option("--period", period, "flip-angle sinusoid period (frames)");
    app->add_option("--tr", tr, "repetition time (ms)");
    app->add_option("--te", te, "echo time (ms)");
    app->add_option("--tinv", tinv, "inversion delay (ms)");
    app->add_flag("--no-inversion", no_inversion, "skip the inversion pulse");
    app->add_option("--k-max", k_max, "retained EPG orders (0 = min(L, 100))");
  }
  [[nodiscard]] mrf::SequenceSchedule schedule() const {
    auto s = mrf::default_schedule(frames, {max_flip, period});
    s.tr_ms = tr;
    s.te_ms = te;
    s.tinv_ms = tinv;
    s.inversion = !no_inversion;
    s.validate();
    return s;
  }
  [[nodiscard]] std::size_t orders() const { return k_max > 0 ? k_max : mrf::default_k_max(frames); }
};

void write_maps(const std::string& path, const mrf::ParameterMaps& maps, mrf::ImageShape shape,
                const std::string& method, const std::string& pgm_prefix, double t1_hi, double t2_hi) {
  mrf::write_bundle(path, mrf::maps_to_bundle(maps.t1_t2.col(0), maps.t1_t2.col(1), maps.proton_density,
                                              shape, method));
  if (!pgm_prefix.empty()) {
    mrf::write_pgm16(pgm_prefix + "_t1.pgm", maps.t1_t2.col(0), shape, 0.0, t1_hi);
    mrf::write_pgm16(pgm_prefix + "_t2.pgm", maps.t1_t2.col(1), shape, 0.0, t2_hi);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subspace MRF reconstruction toolkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // simulate-dict
  auto* sim = app.add_subcommand("simulate-dict", "simulate an EPG fingerprint dictionary");
  std::string t1_grid = "100:50:4000", t2_grid = "20:10:600", sim_out;
  ScheduleFlags sim_sched;
  sim->add_option("--t1", t1_grid, "T1 grid a:step:b (ms)");
  sim->add_option("--t2", t2_grid, "T2 grid a:step:b (ms)");
  sim_sched.attach(sim);
  sim->add_option("--out", sim_out, "output dictionary bundle")->required();

  // learn-subspace
  auto* learn = app.add_subcommand("learn-subspace", "learn the temporal subspace of a dictionary");
  std::string learn_dict, learn_out;
  std::size_t rank = 10;
  learn->add_option("--dict", learn_dict)->required();
  learn->add_option("--rank", rank, "subspace rank S")->check(CLI::PositiveNumber);
  learn->add_option("--out", learn_out)->required();

  // make-phantom
  auto* phantom = app.add_subcommand("make-phantom", "rasterize a ground-truth phantom");
  std::vector<std::size_t> size{64, 64};
  std::string spec_path, preset = "head", phantom_out;
  std::vector<double> white, gray, fluid;
  phantom->add_option("--size", size, "H W")->expected(2);
  phantom->add_option("--spec", spec_path, "phantom JSON (regions or preset/tissues)");
  phantom->add_option("--preset", preset)->check(CLI::IsMember({"head", "head-offgrid"}));
  phantom->add_option("--white", white, "T1 T2 PD")->expected(3);
  phantom->add_option("--gray", gray, "T1 T2 PD")->expected(3);
  phantom->add_option("--fluid", fluid, "T1 T2 PD")->expected(3);
  phantom->add_option("--out", phantom_out)->required();

  // acquire
  auto* acquire = app.add_subcommand("acquire", "simulate undersampled multi-coil k-space");
  std::string acq_gt, acq_out, coil_kind = "gaussian-ring";
  mrf::AcquisitionParams acq_params;
  ScheduleFlags acq_sched;
  acquire->add_option("--gt", acq_gt)->required();
  acquire->add_option("--accel", acq_params.density.accel)->check(CLI::Range(1.0, 1e6));
  acquire->add_option("--coils", acq_params.coils)->check(CLI::PositiveNumber);
  acquire->add_option("--coil-kind", coil_kind)->check(CLI::IsMember({"uniform", "gaussian-ring"}));
  acquire->add_option("--gamma", acq_params.density.gamma);
  acquire->add_option("--k0", acq_params.density.k0, "density knee (0 = min(H, W) / 8)");
  acquire->add_option("--center-radius", acq_params.density.center_radius);
  acquire->add_option("--seed", acq_params.seed);
  acquire->add_option("--kspace-noise", acq_params.kspace_noise, "noise std per component");
  acq_sched.attach(acquire);
  acquire->add_option("--out", acq_out)->required();

  // reconstruct
  auto* recon = app.add_subcommand("reconstruct", "reconstruct subspace images");
  std::string mode_name = "lrtv", recon_in, recon_basis, recon_out, trace_path, tv_variant = "isotropic";
  std::optional<double> lambda, mu0;
  mrf::SolverConfig recon_cfg;
  recon->add_option("--mode", mode_name)->check(CLI::IsMember({"bpi", "lr", "lrtv"}));
  recon->add_option("--lambda", lambda, "TV weight (lrtv only)");
  recon->add_option("--iters", recon_cfg.max_outer_iters, "maximum outer iterations");
  recon->add_option("--stop", recon_cfg.stop_rel_change, "relative-change stopping threshold");
  recon->add_option("--mu0", mu0, "initial step size (default: compression factor)");
  recon->add_option("--tv-variant", tv_variant)->check(CLI::IsMember({"isotropic", "anisotropic"}));
  recon->add_option("--tv-iters", recon_cfg.tv.max_iters);
  recon->add_option("--tv-tol", recon_cfg.tv.dual_gap_tol);
  recon->add_option("--in", recon_in)->required();
  recon->add_option("--basis", recon_basis)->required();
  recon->add_option("--out", recon_out)->required();
  recon->add_option("--trace", trace_path, "per-iteration CSV");

  // train-net
  auto* trainc = app.add_subcommand("train-net", "train the parameter-regression network");
  std::string train_dict, train_basis, train_out, train_report;
  mrf::TrainConfig train_cfg;
  mrf::NetShape net_shape;
  trainc->add_option("--dict", train_dict)->required();
  trainc->add_option("--basis", train_basis)->required();
  trainc->add_option("--sigma", train_cfg.noise_sigma, "rms norm of the augmentation noise");
  trainc->add_option("--augment", train_cfg.augment_factor, "noisy copies per atom");
  trainc->add_option("--epochs", train_cfg.epochs);
  trainc->add_option("--batch-size", train_cfg.batch_size);
  trainc->add_option("--lr", train_cfg.learning_rate);
  trainc->add_option("--momentum", train_cfg.momentum);
  trainc->add_option("--seed", train_cfg.seed);
  trainc->add_option("--hidden1", net_shape.hidden1);
  trainc->add_option("--hidden2", net_shape.hidden2);
  trainc->add_flag("--output-relu", net_shape.output_relu, "ReLU on the output layer");
  trainc->add_option("--report", train_report, "per-epoch loss CSV");
  trainc->add_option("--out", train_out)->required();

  // infer
  auto* inferc = app.add_subcommand("infer", "estimate maps with the network");
  std::string infer_net, infer_in, infer_out, infer_pgm;
  inferc->add_option("--net", infer_net)->required();
  inferc->add_option("--in", infer_in)->required();
  inferc->add_option("--out", infer_out)->required();
  inferc->add_option("--pgm", infer_pgm, "prefix for 16-bit PGM previews");

  // match
  auto* matchc = app.add_subcommand("match", "estimate maps by exhaustive dictionary matching");
  std::string match_dict, match_basis, match_in, match_out, match_pgm;
  matchc->add_option("--dict", match_dict)->required();
  matchc->add_option("--basis", match_basis)->required();
  matchc->add_option("--in", match_in)->required();
  matchc->add_option("--out", match_out)->required();
  matchc->add_option("--pgm", match_pgm, "prefix for 16-bit PGM previews");

  // score
  auto* scorec = app.add_subcommand("score", "score maps against ground truth");
  std::string score_est, score_gt, score_out, score_label = "est";
  scorec->add_option("--est", score_est)->required();
  scorec->add_option("--gt", score_gt)->required();
  scorec->add_option("--out", score_out)->required();
  scorec->add_option("--label", score_label, "method column value");

  // run-experiment
  auto* exp = app.add_subcommand("run-experiment", "run the bpi / lr / lrtv comparison");
  std::string exp_config, exp_dir;
  bool quiet = false;
  exp->add_option("--config", exp_config)->required();
  exp->add_option("--out-dir", exp_dir, "output directory (overrides output_dir)");
  exp->add_flag("--quiet", quiet);

  auto* schema = app.add_subcommand("print-schema", "print the experiment configuration schema");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    report("usage", kUsage, e.what());
    return kUsage;
  }

  mrf::configure_threads();
  try {
    if (*sim) {
      const mrf::DictionaryGrid grid{mrf::GridRange::parse(t1_grid), mrf::GridRange::parse(t2_grid)};
      grid.t1.validate();
      grid.t2.validate();
      const auto dict = mrf::build_dictionary(grid, sim_sched.schedule(), sim_sched.orders());
      mrf::write_bundle(sim_out, mrf::dictionary_to_bundle(dict, sim_sched.orders()));
    } else if (*learn) {
      const auto dict = mrf::dictionary_from_bundle(mrf::read_bundle(learn_dict));
      mrf::require(rank <= dict.frames(), "rank exceeds the number of frames");
      const auto basis = mrf::learn_subspace(dict, rank);
      mrf::write_bundle(learn_out, mrf::basis_to_bundle(basis));
      std::cout << "energy_fraction " << basis.energy_fraction() << '\n';
    } else if (*phantom) {
      mrf::PhantomSpec spec;
      if (!spec_path.empty()) {
        spec = mrf::parse_phantom_spec(mrf::load_json_file(spec_path));
      } else {
        nlohmann::json doc = {{"preset", preset}};
        auto put = [&](const char* name, const std::vector<double>& v) {
          if (!v.empty()) doc["tissues"][name] = v;
        };
        put("white", white);
        put("gray", gray);
        put("fluid", fluid);
        spec = mrf::parse_phantom_spec(doc);
      }
      const auto gt = mrf::make_phantom({size[0], size[1]}, spec);
      mrf::write_bundle(phantom_out, mrf::ground_truth_to_bundle(gt));
    } else if (*acquire) {
      const auto gt = mrf::ground_truth_from_bundle(mrf::read_bundle(acq_gt));
      acq_params.coil_kind = mrf::parse_coil_kind(coil_kind);
      const auto schedule = acq_sched.schedule();
      const auto acq = mrf::simulate_acquisition(gt, schedule, acq_sched.orders(), acq_params);
      auto bundle = mrf::acquisition_to_bundle(acq);
      bundle.meta["schedule"] = mrf::schedule_to_json(schedule);
      mrf::write_bundle(acq_out, bundle);
    } else if (*recon) {
      mrf::SolverConfig cfg = mrf::SolverConfig::for_mode(mrf::parse_recon_mode(mode_name));
      cfg.max_outer_iters = recon_cfg.max_outer_iters;
      cfg.stop_rel_change = recon_cfg.stop_rel_change;
      cfg.tv = recon_cfg.tv;
      cfg.tv.variant = mrf::parse_tv_variant(tv_variant);
      if (lambda) cfg.lambda = *lambda;
      cfg.mu0 = mu0;
      cfg.validate();
      const auto acq = mrf::acquisition_from_bundle(mrf::read_bundle(recon_in));
      const auto basis = mrf::basis_from_bundle(mrf::read_bundle(recon_basis));
      const auto result = mrf::solve(acq.data, basis, acq.coils, acq.pattern, cfg);
      nlohmann::json meta = {{"mode", mode_name}, {"lambda", cfg.lambda},
                             {"iterations", result.trace.records.empty() ? 0 : result.trace.records.size() - 1}};
      mrf::write_bundle(recon_out, mrf::subspace_images_to_bundle(result.x, acq.data.shape, meta));
      if (!trace_path.empty()) {
        auto out = open_out(trace_path);
        result.trace.write_csv(out);
      }
    } else if (*trainc) {
      const auto dict = mrf::dictionary_from_bundle(mrf::read_bundle(train_dict));
      const auto basis = mrf::basis_from_bundle(mrf::read_bundle(train_basis));
      auto net = mrf::make_net(basis.rank(), net_shape, mrf::TargetRanges::from_grid(dict.grid), train_cfg.seed);
      mrf::TrainReport rep;
      net = mrf::train(std::move(net), mrf::make_training_set(dict, basis, train_cfg), train_cfg, &rep);
      mrf::write_bundle(train_out, mrf::net_to_bundle(net));
      if (!train_report.empty()) {
        auto out = open_out(train_report);
        out << "epoch,loss,learning_rate\n";
        for (std::size_t e = 0; e < rep.epoch_losses.size(); ++e) {
          out << e + 1 << ',' << rep.epoch_losses[e] << ',' << rep.epoch_learning_rates[e] << '\n';
        }
      }
    } else if (*inferc) {
      const auto net = mrf::net_from_bundle(mrf::read_bundle(infer_net));
      mrf::ImageShape shape;
      const auto x = mrf::subspace_images_from_bundle(mrf::read_bundle(infer_in), &shape);
      const auto maps = mrf::infer(net, mrf::phase_align_rows(x));
      write_maps(infer_out, maps, shape, "net", infer_pgm, net.ranges.t1_max, net.ranges.t2_max);
    } else if (*matchc) {
      const auto dict = mrf::dictionary_from_bundle(mrf::read_bundle(match_dict));
      const auto basis = mrf::basis_from_bundle(mrf::read_bundle(match_basis));
      mrf::ImageShape shape;
      const auto x = mrf::subspace_images_from_bundle(mrf::read_bundle(match_in), &shape);
      const auto result = mrf::dictionary_match(mrf::phase_align_rows(x), dict, basis);
      const auto ranges = mrf::TargetRanges::from_grid(dict.grid);
      write_maps(match_out, result.maps, shape, "match", match_pgm, ranges.t1_max, ranges.t2_max);
    } else if (*scorec) {
      const auto est = mrf::maps_from_bundle(mrf::read_bundle(score_est));
      const auto gt = mrf::ground_truth_from_bundle(mrf::read_bundle(score_gt));
      mrf::require(est.shape == gt.shape, "maps and ground truth have different grids");
      const auto scores = mrf::score_maps(est.t1, est.t2, gt, gt.foreground());
      auto out = open_out(score_out);
      mrf::write_metrics_csv(out, {{score_label, scores}});
    } else if (*exp) {
      auto cfg = mrf::load_experiment_config(exp_config);
      const std::string dir = !exp_dir.empty() ? exp_dir : cfg.output_dir;
      mrf::require(!dir.empty(), "no output directory: pass --out-dir or set output_dir");
      mrf::run_experiment(cfg, dir, quiet ? nullptr : &std::cout);
    } else if (*schema) {
      std::cout << mrf::experiment_schema().dump(2) << '\n';
    }
  } catch (const mrf::ConfigError& e) {
    report("config", kUsage, e.what());
    return kUsage;
  } catch (const mrf::BundleError& e) {
    report(errc_name(e.code()), kIo, e.what());
    return kIo;
  } catch (const mrf::NumericalError& e) {
    report("numerical", kNumerical, e.what());
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    report("usage", kUsage, e.what());
    return kUsage;
  } catch (const std::exception& e) {
    report("numerical", kNumerical, e.what());
    return kNumerical;
  }
  return kOk;
}
