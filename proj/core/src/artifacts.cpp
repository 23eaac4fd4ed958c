#include "mrf/artifacts.hpp"

#include <utility>

namespace mrf {

namespace {

using Shape = std::vector<std::int64_t>;

std::int64_t dim(std::size_t v) { return static_cast<std::int64_t>(v); }

template <typename Derived>
NdArray complex_array(Shape shape, const Eigen::DenseBase<Derived>& m) {
  // Eigen storage is column-major; callers pass the matrix whose column-major
  // order equals the row-major order of `shape`.
  std::vector<std::complex<float>> values(static_cast<std::size_t>(m.size()));
  const auto& d = m.derived();
  std::size_t k = 0;
  for (Eigen::Index c = 0; c < d.cols(); ++c) {
    for (Eigen::Index r = 0; r < d.rows(); ++r) values[k++] = std::complex<float>(d(r, c));
  }
  return NdArray::complex64(std::move(shape), values);
}

NdArray real_array(Shape shape, const RVector& v) {
  std::vector<float> values(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) values[static_cast<std::size_t>(i)] = static_cast<float>(v[i]);
  return NdArray::float32(std::move(shape), values);
}

CMatrix complex_matrix(const NdArray& a, Eigen::Index rows, Eigen::Index cols) {
  const auto values = a.as_complex64();
  if (values.size() != static_cast<std::size_t>(rows * cols)) {
    throw BundleError(BundleErrc::shape_mismatch, "array size does not match its header");
  }
  CMatrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = Complex(values[k++]);
  }
  return m;
}

RVector real_vector(const NdArray& a) {
  const auto values = a.as_float32();
  RVector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
  return v;
}

const nlohmann::json& field(const Bundle& b, const char* key) {
  if (!b.meta.contains(key)) {
    throw BundleError(BundleErrc::corrupt_header, std::string("bundle header lacks '") + key + "'");
  }
  return b.meta.at(key);
}

template <typename T>
T get(const Bundle& b, const char* key) {
  try {
    return field(b, key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw BundleError(BundleErrc::corrupt_header, std::string("bad header field '") + key + "'");
  }
}

void expect_kind(const Bundle& b, const std::string& kind) {
  const auto found = b.meta.value("kind", std::string{});
  if (found != kind) {
    throw BundleError(BundleErrc::corrupt_header,
                      "expected a " + kind + " bundle, found '" + found + "'");
  }
}

ImageShape image_shape(const Bundle& b) {
  return {get<std::size_t>(b, "height"), get<std::size_t>(b, "width")};
}

}  // namespace

nlohmann::json schedule_to_json(const SequenceSchedule& s) {
  return {{"flip_angles_deg", s.flip_angles_deg},
          {"tr_ms", s.tr_ms},
          {"te_ms", s.te_ms},
          {"tinv_ms", s.tinv_ms},
          {"inversion", s.inversion}};
}

SequenceSchedule schedule_from_json(const nlohmann::json& j) {
  SequenceSchedule s;
  try {
    s.flip_angles_deg = j.at("flip_angles_deg").get<std::vector<double>>();
    s.tr_ms = j.at("tr_ms").get<double>();
    s.te_ms = j.at("te_ms").get<double>();
    s.tinv_ms = j.at("tinv_ms").get<double>();
    s.inversion = j.at("inversion").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw BundleError(BundleErrc::corrupt_header, std::string("bad schedule: ") + e.what());
  }
  return s;
}

Bundle dictionary_to_bundle(const Dictionary& dict, std::size_t k_max) {
  Bundle b;
  b.meta = {{"kind", "dictionary"},
            {"schedule", schedule_to_json(dict.schedule)},
            {"k_max", k_max},
            {"t1_grid", dict.grid.t1.to_string()},
            {"t2_grid", dict.grid.t2.to_string()}};
  const auto L = dim(dict.frames()), d = dim(dict.size());
  // row-major (L, d) is column-major atoms^T
  b.add("atoms", complex_array({L, d}, dict.atoms.transpose()));
  RVector t1(d), t2(d);
  for (std::size_t j = 0; j < dict.size(); ++j) {
    t1[dim(j)] = dict.labels[j].t1_ms;
    t2[dim(j)] = dict.labels[j].t2_ms;
  }
  b.add("t1", real_array({d}, t1));
  b.add("t2", real_array({d}, t2));
  return b;
}

Dictionary dictionary_from_bundle(const Bundle& b) {
  expect_kind(b, "dictionary");
  Dictionary dict;
  dict.schedule = schedule_from_json(field(b, "schedule"));
  dict.grid.t1 = GridRange::parse(get<std::string>(b, "t1_grid"));
  dict.grid.t2 = GridRange::parse(get<std::string>(b, "t2_grid"));
  const auto& atoms = b.at("atoms");
  if (atoms.shape().size() != 2) throw BundleError(BundleErrc::shape_mismatch, "atoms must be 2-D");
  const auto L = atoms.shape()[0], d = atoms.shape()[1];
  if (static_cast<std::size_t>(L) != dict.schedule.frames()) {
    throw BundleError(BundleErrc::shape_mismatch, "atom length does not match the schedule");
  }
  b.at("t1").expect_shape({d}, "t1");
  b.at("t2").expect_shape({d}, "t2");
  dict.atoms = complex_matrix(atoms, d, L).transpose();
  const RVector t1 = real_vector(b.at("t1")), t2 = real_vector(b.at("t2"));
  dict.labels.resize(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) dict.labels[static_cast<std::size_t>(j)] = {t1[j], t2[j]};
  return dict;
}

Bundle basis_to_bundle(const SubspaceBasis& basis) {
  Bundle b;
  b.meta = {{"kind", "basis"}, {"rank", basis.rank()}, {"frames", basis.frames()}};
  b.add("v", complex_array({dim(basis.frames()), dim(basis.rank())}, basis.v.transpose()));
  b.add("singular_values", real_array({dim(static_cast<std::size_t>(basis.singular_values.size()))},
                                      basis.singular_values));
  return b;
}

SubspaceBasis basis_from_bundle(const Bundle& b) {
  expect_kind(b, "basis");
  const auto& v = b.at("v");
  if (v.shape().size() != 2) throw BundleError(BundleErrc::shape_mismatch, "v must be 2-D");
  SubspaceBasis basis;
  basis.v = complex_matrix(v, v.shape()[1], v.shape()[0]).transpose();
  basis.singular_values = real_vector(b.at("singular_values"));
  return basis;
}

Bundle ground_truth_to_bundle(const GroundTruth& gt) {
  Bundle b;
  b.meta = {{"kind", "ground_truth"}, {"height", gt.shape.height}, {"width", gt.shape.width}};
  const Shape s{dim(gt.shape.height), dim(gt.shape.width)};
  b.add("t1", real_array(s, gt.t1));
  b.add("t2", real_array(s, gt.t2));
  b.add("pd", real_array(s, gt.pd));
  b.add("labels", NdArray::int32(s, gt.labels));
  return b;
}

GroundTruth ground_truth_from_bundle(const Bundle& b) {
  expect_kind(b, "ground_truth");
  GroundTruth gt;
  gt.shape = image_shape(b);
  const Shape s{dim(gt.shape.height), dim(gt.shape.width)};
  for (const char* name : {"t1", "t2", "pd", "labels"}) b.at(name).expect_shape(s, name);
  gt.t1 = real_vector(b.at("t1"));
  gt.t2 = real_vector(b.at("t2"));
  gt.pd = real_vector(b.at("pd"));
  gt.labels = b.at("labels").as_int32();
  return gt;
}

Bundle acquisition_to_bundle(const Acquisition& acq) {
  const auto& p = acq.pattern;
  Bundle b;
  b.meta = {{"kind", "kspace"},
            {"height", p.shape.height},
            {"width", p.shape.width},
            {"frames", p.frames},
            {"coils", acq.coils.coils()},
            {"seed", p.seed},
            {"accel", p.density.accel},
            {"gamma", p.density.gamma},
            {"k0", p.density.k0},
            {"center_radius", p.density.center_radius},
            {"coil_kind", to_string(acq.coil_kind)},
            {"kspace_noise", acq.kspace_noise}};
  const auto H = dim(p.shape.height), W = dim(p.shape.width);
  const auto L = dim(p.frames), C = dim(acq.coils.coils());
  b.add("kspace", complex_array({L, C, H, W}, acq.data.y));
  b.add("masks", NdArray::uint8({L, H, W}, p.masks));
  b.add("sens", complex_array({C, H, W}, acq.coils.sens));
  return b;
}

Acquisition acquisition_from_bundle(const Bundle& b) {
  expect_kind(b, "kspace");
  Acquisition acq;
  const ImageShape shape = image_shape(b);
  const auto frames = get<std::size_t>(b, "frames"), coils = get<std::size_t>(b, "coils");
  const auto H = dim(shape.height), W = dim(shape.width), L = dim(frames), C = dim(coils);
  b.at("kspace").expect_shape({L, C, H, W}, "kspace");
  b.at("masks").expect_shape({L, H, W}, "masks");
  b.at("sens").expect_shape({C, H, W}, "sens");
  const auto n = dim(shape.voxels());

  auto& p = acq.pattern;
  p.shape = shape;
  p.frames = frames;
  p.seed = get<std::uint64_t>(b, "seed");
  p.density.accel = get<double>(b, "accel");
  p.density.gamma = get<double>(b, "gamma");
  p.density.k0 = get<double>(b, "k0");
  p.density.center_radius = get<int>(b, "center_radius");
  p.masks = b.at("masks").as_uint8();
  try {
    p.refresh_counts();
  } catch (const std::invalid_argument& e) {
    throw BundleError(BundleErrc::corrupt_header, std::string("bad sampling masks: ") + e.what());
  }

  acq.coils.shape = shape;
  acq.coils.sens = complex_matrix(b.at("sens"), n, C);
  acq.coil_kind = parse_coil_kind(get<std::string>(b, "coil_kind"));
  acq.kspace_noise = get<double>(b, "kspace_noise");

  acq.data.shape = shape;
  acq.data.frames = frames;
  acq.data.coils = coils;
  acq.data.y = complex_matrix(b.at("kspace"), n, L * C);
  return acq;
}

Bundle subspace_images_to_bundle(const CMatrix& x, ImageShape shape, nlohmann::json meta) {
  require(x.rows() == dim(shape.voxels()), "subspace images do not match the grid");
  Bundle b;
  b.meta = meta.is_object() ? std::move(meta) : nlohmann::json::object();
  b.meta["kind"] = "subspace_images";
  b.meta["height"] = shape.height;
  b.meta["width"] = shape.width;
  b.meta["rank"] = x.cols();
  b.add("x_subspace", complex_array({x.cols(), dim(shape.height), dim(shape.width)}, x));
  return b;
}

CMatrix subspace_images_from_bundle(const Bundle& b, ImageShape* shape) {
  expect_kind(b, "subspace_images");
  const ImageShape s = image_shape(b);
  const auto& a = b.at("x_subspace");
  if (a.shape().size() != 3 || a.shape()[1] != dim(s.height) || a.shape()[2] != dim(s.width)) {
    throw BundleError(BundleErrc::shape_mismatch, "x_subspace does not match the header grid");
  }
  if (shape) *shape = s;
  return complex_matrix(a, dim(s.voxels()), a.shape()[0]);
}

Bundle maps_to_bundle(const RVector& t1, const RVector& t2, const RVector& pd, ImageShape shape,
                      const std::string& method) {
  const auto n = dim(shape.voxels());
  require(t1.size() == n && t2.size() == n && (pd.size() == 0 || pd.size() == n),
          "maps do not match the grid");
  Bundle b;
  b.meta = {{"kind", "maps"}, {"height", shape.height}, {"width", shape.width}, {"method", method}};
  const Shape s{dim(shape.height), dim(shape.width)};
  b.add("t1", real_array(s, t1));
  b.add("t2", real_array(s, t2));
  if (pd.size() > 0) b.add("pd", real_array(s, pd));
  return b;
}

MapsArtifact maps_from_bundle(const Bundle& b) {
  expect_kind(b, "maps");
  MapsArtifact m;
  m.shape = image_shape(b);
  m.method = b.meta.value("method", std::string{});
  const Shape s{dim(m.shape.height), dim(m.shape.width)};
  b.at("t1").expect_shape(s, "t1");
  b.at("t2").expect_shape(s, "t2");
  m.t1 = real_vector(b.at("t1"));
  m.t2 = real_vector(b.at("t2"));
  if (b.contains("pd")) {
    b.at("pd").expect_shape(s, "pd");
    m.pd = real_vector(b.at("pd"));
  }
  return m;
}

Bundle net_to_bundle(const MrfNet& net) {
  const auto& layers = net.mlp.layers();
  const auto& tc = net.train_config;
  std::vector<int> widths{net.mlp.input_width()};
  for (const auto& l : layers) widths.push_back(static_cast<int>(l.weight.rows()));
  Bundle b;
  b.meta = {{"kind", "net"},
            {"widths", widths},
            {"output_relu", net.mlp.output_relu()},
            {"ranges",
             {{"t1_min", net.ranges.t1_min},
              {"t1_max", net.ranges.t1_max},
              {"t2_min", net.ranges.t2_min},
              {"t2_max", net.ranges.t2_max}}},
            {"train",
             {{"noise_sigma", tc.noise_sigma},
              {"augment_factor", tc.augment_factor},
              {"epochs", tc.epochs},
              {"batch_size", tc.batch_size},
              {"learning_rate", tc.learning_rate},
              {"momentum", tc.momentum},
              {"plateau_patience", tc.plateau_patience},
              {"seed", tc.seed}}}};
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    // row-major (out, in) is column-major W^T
    const RMatrix wt = l.weight.transpose();
    b.add("w" + std::to_string(k + 1),
          real_array({l.weight.rows(), l.weight.cols()}, Eigen::Map<const RVector>(wt.data(), wt.size())));
    b.add("b" + std::to_string(k + 1), real_array({l.bias.size()}, l.bias));
  }
  return b;
}

MrfNet net_from_bundle(const Bundle& b) {
  expect_kind(b, "net");
  const auto widths = get<std::vector<int>>(b, "widths");
  if (widths.size() < 2) throw BundleError(BundleErrc::corrupt_header, "net needs at least one layer");
  std::vector<DenseLayer> layers;
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    const auto& w = b.at("w" + std::to_string(k + 1));
    const auto& bias = b.at("b" + std::to_string(k + 1));
    w.expect_shape({widths[k + 1], widths[k]}, "w" + std::to_string(k + 1));
    bias.expect_shape({widths[k + 1]}, "b" + std::to_string(k + 1));
    const RVector flat = real_vector(w);
    DenseLayer layer;
    layer.weight = Eigen::Map<const RMatrix>(flat.data(), widths[k], widths[k + 1]).transpose();
    layer.bias = real_vector(bias);
    layers.push_back(std::move(layer));
  }
  MrfNet net;
  net.mlp = Mlp(std::move(layers), get<bool>(b, "output_relu"));
  try {
    const auto& r = field(b, "ranges");
    net.ranges = {r.at("t1_min").get<double>(), r.at("t1_max").get<double>(),
                  r.at("t2_min").get<double>(), r.at("t2_max").get<double>()};
    const auto& t = field(b, "train");
    auto& tc = net.train_config;
    tc.noise_sigma = t.at("noise_sigma").get<double>();
    tc.augment_factor = t.at("augment_factor").get<std::size_t>();
    tc.epochs = t.at("epochs").get<int>();
    tc.batch_size = t.at("batch_size").get<std::size_t>();
    tc.learning_rate = t.at("learning_rate").get<double>();
    tc.momentum = t.at("momentum").get<double>();
    tc.plateau_patience = t.at("plateau_patience").get<int>();
    tc.seed = t.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw BundleError(BundleErrc::corrupt_header, std::string("bad net header: ") + e.what());
  }
  return net;
}

}  // namespace mrf
