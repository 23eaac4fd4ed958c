#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "mrf/epg.hpp"
#include "mrf/inference.hpp"
#include "mrf/phantom.hpp"
#include "mrf/sampling.hpp"
#include "mrf/solver.hpp"

namespace mrf {

/// Invalid configuration document. `path` is a JSON pointer to the offending value.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::invalid_argument(path + ": " + message), path_(std::move(path)) {}
  [[nodiscard]] const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// The experiment schema shipped in schemas/experiment.schema.json.
const nlohmann::json& experiment_schema();

/// Validates `doc` against a JSON schema. Supports the keywords used by the
/// shipped schema: type, enum, properties, required, additionalProperties
/// (false only), items, minItems, maxItems, minimum, maximum,
/// exclusiveMinimum, exclusiveMaximum and local "#/$defs/..." references.
void validate_json(const nlohmann::json& doc, const nlohmann::json& schema,
                   const nlohmann::json& root_schema);

struct ExperimentConfig {
  std::uint64_t seed = 7;
  std::string output_dir;

  ImageShape image{64, 64};

  std::size_t frames = 200;
  SinusoidConfig sinusoid;
  double tr_ms = 10.0;
  double te_ms = 1.908;
  double tinv_ms = 18.0;
  bool inversion = true;

  DictionaryGrid grid{{100.0, 50.0, 4000.0}, {20.0, 10.0, 600.0}};
  std::optional<std::size_t> k_max;

  std::size_t rank = 5;

  PhantomSpec phantom = default_head_spec();

  DensityParams density;
  std::size_t coils = 4;
  CoilKind coil_kind = CoilKind::gaussian_ring;
  double kspace_noise = 0.0;

  /// lambda, iteration limits, mu0 and TV settings shared by lr and lrtv.
  SolverConfig solver;

  NetShape net;
  TrainConfig train;

  [[nodiscard]] SequenceSchedule schedule() const;
  [[nodiscard]] std::size_t effective_k_max() const { return k_max.value_or(default_k_max(frames)); }
  /// Solver settings for one method; lambda is forced to 0 outside lrtv.
  [[nodiscard]] SolverConfig solver_for(ReconMode mode) const;
};

/// Schema-validates and converts; absent keys keep their defaults.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
/// Fully resolved document (every key present).
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Phantom description: {"preset": ..., "tissues": {...}, "regions": [...]}.
/// Explicit regions take precedence over the preset.
PhantomSpec parse_phantom_spec(const nlohmann::json& doc);
nlohmann::json phantom_spec_to_json(const PhantomSpec& spec);

nlohmann::json load_json_file(const std::filesystem::path& path);

}  // namespace mrf
