#include "mrf/config.hpp"

#include <fstream>

#include "mrf/bundle.hpp"
#include "schema_text.hpp"

namespace mrf {

namespace {

using json = nlohmann::json;

bool has_type(const json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "integer") return v.is_number_integer();
  if (type == "number") return v.is_number();
  if (type == "null") return v.is_null();
  return false;
}

const json& resolve(const json& schema, const json& root, const std::string& path) {
  if (!schema.contains("$ref")) return schema;
  const auto ref = schema["$ref"].get<std::string>();
  const std::string prefix = "#/$defs/";
  if (ref.rfind(prefix, 0) != 0 || !root.contains("$defs") || !root["$defs"].contains(ref.substr(prefix.size()))) {
    throw ConfigError(path, "unresolvable schema reference " + ref);
  }
  return root["$defs"][ref.substr(prefix.size())];
}

void check(const json& doc, const json& schema_in, const json& root, const std::string& path) {
  const json& schema = resolve(schema_in, root, path);
  const std::string where = path.empty() ? "/" : path;

  if (schema.contains("type")) {
    const auto& t = schema["type"];
    bool ok = false;
    if (t.is_string()) {
      ok = has_type(doc, t.get<std::string>());
    } else {
      for (const auto& alt : t) ok = ok || has_type(doc, alt.get<std::string>());
    }
    if (!ok) throw ConfigError(where, "expected type " + t.dump());
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& e : schema["enum"]) ok = ok || e == doc;
    if (!ok) throw ConfigError(where, "value " + doc.dump() + " is not one of " + schema["enum"].dump());
  }
  if (doc.is_number()) {
    const double v = doc.get<double>();
    if (schema.contains("minimum") && v < schema["minimum"].get<double>()) {
      throw ConfigError(where, "must be >= " + schema["minimum"].dump());
    }
    if (schema.contains("maximum") && v > schema["maximum"].get<double>()) {
      throw ConfigError(where, "must be <= " + schema["maximum"].dump());
    }
    if (schema.contains("exclusiveMinimum") && v <= schema["exclusiveMinimum"].get<double>()) {
      throw ConfigError(where, "must be > " + schema["exclusiveMinimum"].dump());
    }
    if (schema.contains("exclusiveMaximum") && v >= schema["exclusiveMaximum"].get<double>()) {
      throw ConfigError(where, "must be < " + schema["exclusiveMaximum"].dump());
    }
  }
  if (doc.is_object()) {
    const json empty = json::object();
    const json& props = schema.contains("properties") ? schema["properties"] : empty;
    if (schema.contains("required")) {
      for (const auto& key : schema["required"]) {
        if (!doc.contains(key.get<std::string>())) {
          throw ConfigError(where, "missing required key '" + key.get<std::string>() + "'");
        }
      }
    }
    const bool closed = schema.contains("additionalProperties") && schema["additionalProperties"] == false;
    for (const auto& [key, value] : doc.items()) {
      if (props.contains(key)) {
        check(value, props[key], root, path + "/" + key);
      } else if (closed) {
        throw ConfigError(path + "/" + key, "unknown key '" + key + "'");
      }
    }
  }
  if (doc.is_array()) {
    if (schema.contains("minItems") && doc.size() < schema["minItems"].get<std::size_t>()) {
      throw ConfigError(where, "needs at least " + schema["minItems"].dump() + " items");
    }
    if (schema.contains("maxItems") && doc.size() > schema["maxItems"].get<std::size_t>()) {
      throw ConfigError(where, "allows at most " + schema["maxItems"].dump() + " items");
    }
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < doc.size(); ++i) {
        check(doc[i], schema["items"], root, path + "/" + std::to_string(i));
      }
    }
  }
}

template <typename T>
void take(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj[key].get<T>();
}

TissueClass tissue(const json& j) { return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()}; }

GridRange grid_range(const json& obj, const char* key, const GridRange& fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  try {
    GridRange g = GridRange::parse(obj[key].get<std::string>());
    g.validate();
    return g;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + "/" + key, e.what());
  }
}

PhantomSpec phantom_from(const json& p) {
  if (p.contains("regions")) {
    PhantomSpec spec;
    for (const auto& r : p["regions"]) {
      PhantomRegion region;
      region.kind = parse_shape_kind(r["shape"].get<std::string>());
      region.center_x = r["center_x"].get<double>();
      region.center_y = r["center_y"].get<double>();
      region.radius_x = r["radius_x"].get<double>();
      region.radius_y = r["radius_y"].get<double>();
      take(r, "angle_deg", region.angle_deg);
      region.t1_ms = r["t1_ms"].get<double>();
      region.t2_ms = r["t2_ms"].get<double>();
      region.pd = r["pd"].get<double>();
      spec.push_back(region);
    }
    return spec;
  }
  const std::string preset = p.value("preset", std::string("head"));
  if (preset == "head-offgrid" && !p.contains("tissues")) return offgrid_head_spec();
  HeadTissues t;
  if (preset == "head-offgrid") t = {{830.0, 83.0, 0.8}, {1270.0, 107.0, 0.9}, {3420.0, 455.0, 1.0}};
  if (p.contains("tissues")) {
    const auto& tj = p["tissues"];
    if (tj.contains("white")) t.white = tissue(tj["white"]);
    if (tj.contains("gray")) t.gray = tissue(tj["gray"]);
    if (tj.contains("fluid")) t.fluid = tissue(tj["fluid"]);
  }
  return default_head_spec(t);
}

}  // namespace

const nlohmann::json& experiment_schema() {
  static const json schema = json::parse(detail::kExperimentSchema);
  return schema;
}

void validate_json(const nlohmann::json& doc, const nlohmann::json& schema,
                   const nlohmann::json& root_schema) {
  check(doc, schema, root_schema, "");
}

SequenceSchedule ExperimentConfig::schedule() const {
  SequenceSchedule s = default_schedule(frames, sinusoid);
  s.tr_ms = tr_ms;
  s.te_ms = te_ms;
  s.tinv_ms = tinv_ms;
  s.inversion = inversion;
  return s;
}

SolverConfig ExperimentConfig::solver_for(ReconMode mode) const {
  SolverConfig c = solver;
  c.mode = mode;
  if (mode != ReconMode::lrtv) c.lambda = 0.0;
  return c;
}

ExperimentConfig parse_experiment_config(const nlohmann::json& doc) {
  const json& schema = experiment_schema();
  validate_json(doc, schema, schema);

  ExperimentConfig c;
  take(doc, "seed", c.seed);
  take(doc, "output_dir", c.output_dir);
  if (doc.contains("image")) {
    take(doc["image"], "height", c.image.height);
    take(doc["image"], "width", c.image.width);
  }
  if (doc.contains("sequence")) {
    const auto& s = doc["sequence"];
    take(s, "frames", c.frames);
    take(s, "max_flip_deg", c.sinusoid.max_flip_deg);
    take(s, "period_frames", c.sinusoid.period_frames);
    take(s, "tr_ms", c.tr_ms);
    take(s, "te_ms", c.te_ms);
    take(s, "tinv_ms", c.tinv_ms);
    take(s, "inversion", c.inversion);
  }
  if (doc.contains("dictionary")) {
    const auto& d = doc["dictionary"];
    c.grid.t1 = grid_range(d, "t1", c.grid.t1, "/dictionary");
    c.grid.t2 = grid_range(d, "t2", c.grid.t2, "/dictionary");
    if (d.contains("k_max")) c.k_max = d["k_max"].get<std::size_t>();
  }
  if (doc.contains("subspace")) take(doc["subspace"], "rank", c.rank);
  if (doc.contains("phantom")) c.phantom = phantom_from(doc["phantom"]);
  if (doc.contains("acquisition")) {
    const auto& a = doc["acquisition"];
    take(a, "accel", c.density.accel);
    take(a, "coils", c.coils);
    if (a.contains("coil_kind")) c.coil_kind = parse_coil_kind(a["coil_kind"].get<std::string>());
    take(a, "gamma", c.density.gamma);
    take(a, "k0", c.density.k0);
    take(a, "center_radius", c.density.center_radius);
    take(a, "kspace_noise", c.kspace_noise);
  }
  if (doc.contains("solver")) {
    const auto& s = doc["solver"];
    take(s, "lambda", c.solver.lambda);
    take(s, "max_iters", c.solver.max_outer_iters);
    take(s, "stop_rel_change", c.solver.stop_rel_change);
    if (s.contains("mu0")) c.solver.mu0 = s["mu0"].get<double>();
    if (s.contains("tv_variant")) c.solver.tv.variant = parse_tv_variant(s["tv_variant"].get<std::string>());
    take(s, "tv_iters", c.solver.tv.max_iters);
    take(s, "tv_tol", c.solver.tv.dual_gap_tol);
  }
  if (doc.contains("network")) {
    const auto& n = doc["network"];
    take(n, "hidden1", c.net.hidden1);
    take(n, "hidden2", c.net.hidden2);
    take(n, "output_relu", c.net.output_relu);
    take(n, "sigma", c.train.noise_sigma);
    take(n, "augment", c.train.augment_factor);
    take(n, "epochs", c.train.epochs);
    take(n, "batch_size", c.train.batch_size);
    take(n, "learning_rate", c.train.learning_rate);
    take(n, "momentum", c.train.momentum);
    take(n, "plateau_patience", c.train.plateau_patience);
    take(n, "seed", c.train.seed);
  }

  try {
    c.schedule().validate();
    c.solver_for(ReconMode::lrtv).validate();
    c.train.validate();
    require(c.rank <= c.frames, "subspace rank exceeds the number of frames");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("/", e.what());
  }
  return c;
}

nlohmann::json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw BundleError(BundleErrc::io, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(load_json_file(path));
}

nlohmann::json phantom_spec_to_json(const PhantomSpec& spec) {
  json regions = json::array();
  for (const auto& r : spec) {
    regions.push_back({{"shape", to_string(r.kind)},
                       {"center_x", r.center_x},
                       {"center_y", r.center_y},
                       {"radius_x", r.radius_x},
                       {"radius_y", r.radius_y},
                       {"angle_deg", r.angle_deg},
                       {"t1_ms", r.t1_ms},
                       {"t2_ms", r.t2_ms},
                       {"pd", r.pd}});
  }
  return {{"regions", regions}};
}

PhantomSpec parse_phantom_spec(const nlohmann::json& doc) {
  const json& schema = experiment_schema();
  validate_json(doc, schema["$defs"]["phantom"], schema);
  return phantom_from(doc);
}

nlohmann::json to_json(const ExperimentConfig& c) {
  json solver = {{"lambda", c.solver.lambda},
                 {"max_iters", c.solver.max_outer_iters},
                 {"stop_rel_change", c.solver.stop_rel_change},
                 {"tv_variant", to_string(c.solver.tv.variant)},
                 {"tv_iters", c.solver.tv.max_iters},
                 {"tv_tol", c.solver.tv.dual_gap_tol}};
  if (c.solver.mu0) solver["mu0"] = *c.solver.mu0;
  json dictionary = {{"t1", c.grid.t1.to_string()}, {"t2", c.grid.t2.to_string()}};
  if (c.k_max) dictionary["k_max"] = *c.k_max;
  return {{"seed", c.seed},
          {"output_dir", c.output_dir},
          {"image", {{"height", c.image.height}, {"width", c.image.width}}},
          {"sequence",
           {{"frames", c.frames},
            {"max_flip_deg", c.sinusoid.max_flip_deg},
            {"period_frames", c.sinusoid.period_frames},
            {"tr_ms", c.tr_ms},
            {"te_ms", c.te_ms},
            {"tinv_ms", c.tinv_ms},
            {"inversion", c.inversion}}},
          {"dictionary", dictionary},
          {"subspace", {{"rank", c.rank}}},
          {"phantom", phantom_spec_to_json(c.phantom)},
          {"acquisition",
           {{"accel", c.density.accel},
            {"coils", c.coils},
            {"coil_kind", to_string(c.coil_kind)},
            {"gamma", c.density.gamma},
            {"k0", c.density.k0},
            {"center_radius", c.density.center_radius},
            {"kspace_noise", c.kspace_noise}}},
          {"solver", solver},
          {"network",
           {{"hidden1", c.net.hidden1},
            {"hidden2", c.net.hidden2},
            {"output_relu", c.net.output_relu},
            {"sigma", c.train.noise_sigma},
            {"augment", c.train.augment_factor},
            {"epochs", c.train.epochs},
            {"batch_size", c.train.batch_size},
            {"learning_rate", c.train.learning_rate},
            {"momentum", c.train.momentum},
            {"plateau_patience", c.train.plateau_patience},
            {"seed", c.train.seed}}}};
}

}  // namespace mrf
