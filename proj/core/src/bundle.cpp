#include "mrf/bundle.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>

namespace mrf {

static_assert(std::endian::native == std::endian::little, "bundle I/O assumes a little-endian host");

std::string to_string(DType dtype) {
  switch (dtype) {
    case DType::float32: return "float32";
    case DType::complex64: return "complex64";
    case DType::uint8: return "uint8";
    case DType::int32: return "int32";
  }
  return "?";
}

std::size_t item_size(DType dtype) {
  switch (dtype) {
    case DType::float32: return 4;
    case DType::complex64: return 8;
    case DType::uint8: return 1;
    case DType::int32: return 4;
  }
  return 0;
}

namespace {

DType parse_dtype(const std::string& name) {
  if (name == "float32") return DType::float32;
  if (name == "complex64") return DType::complex64;
  if (name == "uint8") return DType::uint8;
  if (name == "int32") return DType::int32;
  throw BundleError(BundleErrc::corrupt_header, "unknown dtype '" + name + "'");
}

std::size_t count_of(const std::vector<std::int64_t>& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

template <typename T>
NdArray make_array(DType dtype, std::vector<std::int64_t> shape, std::span<const T> values) {
  for (auto d : shape) {
    if (d < 0) throw BundleError(BundleErrc::shape_mismatch, "negative dimension");
  }
  if (count_of(shape) != values.size()) {
    throw BundleError(BundleErrc::shape_mismatch, "array shape does not match element count");
  }
  std::vector<std::byte> bytes(values.size_bytes());
  if (!bytes.empty()) std::memcpy(bytes.data(), values.data(), bytes.size());
  return NdArray::raw(dtype, std::move(shape), std::move(bytes));
}

template <typename T>
std::vector<T> copy_out(const std::vector<std::byte>& bytes) {
  std::vector<T> out(bytes.size() / sizeof(T));
  if (!out.empty()) std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

std::size_t align_up(std::size_t v) {
  return (v + kBundleAlignment - 1) / kBundleAlignment * kBundleAlignment;
}

}  // namespace

NdArray NdArray::float32(std::vector<std::int64_t> shape, std::span<const float> values) {
  return make_array(DType::float32, std::move(shape), values);
}
NdArray NdArray::complex64(std::vector<std::int64_t> shape, std::span<const std::complex<float>> values) {
  return make_array(DType::complex64, std::move(shape), values);
}
NdArray NdArray::uint8(std::vector<std::int64_t> shape, std::span<const std::uint8_t> values) {
  return make_array(DType::uint8, std::move(shape), values);
}
NdArray NdArray::int32(std::vector<std::int64_t> shape, std::span<const std::int32_t> values) {
  return make_array(DType::int32, std::move(shape), values);
}

NdArray NdArray::raw(DType dtype, std::vector<std::int64_t> shape, std::vector<std::byte> bytes) {
  if (count_of(shape) * item_size(dtype) != bytes.size()) {
    throw BundleError(BundleErrc::shape_mismatch, "payload size does not match shape");
  }
  NdArray a;
  a.dtype_ = dtype;
  a.shape_ = std::move(shape);
  a.bytes_ = std::move(bytes);
  return a;
}

std::size_t NdArray::element_count() const { return count_of(shape_); }

void NdArray::expect(DType dtype) const {
  if (dtype_ != dtype) {
    throw BundleError(BundleErrc::dtype_mismatch,
                      "expected " + to_string(dtype) + " but array holds " + to_string(dtype_));
  }
}

std::vector<float> NdArray::as_float32() const {
  expect(DType::float32);
  return copy_out<float>(bytes_);
}
std::vector<std::complex<float>> NdArray::as_complex64() const {
  expect(DType::complex64);
  return copy_out<std::complex<float>>(bytes_);
}
std::vector<std::uint8_t> NdArray::as_uint8() const {
  expect(DType::uint8);
  return copy_out<std::uint8_t>(bytes_);
}
std::vector<std::int32_t> NdArray::as_int32() const {
  expect(DType::int32);
  return copy_out<std::int32_t>(bytes_);
}

void NdArray::expect_shape(const std::vector<std::int64_t>& expected, const std::string& name) const {
  if (shape_ != expected) {
    throw BundleError(BundleErrc::shape_mismatch, "array '" + name + "' has an unexpected shape");
  }
}

void Bundle::add(const std::string& name, NdArray array) {
  if (name.empty()) throw BundleError(BundleErrc::invalid_name, "array names must be non-empty");
  if (!arrays.emplace(name, std::move(array)).second) {
    throw BundleError(BundleErrc::invalid_name, "duplicate array name '" + name + "'");
  }
}

const NdArray& Bundle::at(const std::string& name) const {
  const auto it = arrays.find(name);
  if (it == arrays.end()) throw BundleError(BundleErrc::missing_entry, "bundle has no array '" + name + "'");
  return it->second;
}

std::vector<std::byte> encode_bundle(const Bundle& bundle) {
  nlohmann::json entries = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& [name, array] : bundle.arrays) {
    if (name.empty()) throw BundleError(BundleErrc::invalid_name, "array names must be non-empty");
    entries.push_back({{"name", name},
                       {"dtype", to_string(array.dtype())},
                       {"shape", array.shape()},
                       {"offset", offset},
                       {"nbytes", array.bytes().size()}});
    offset = align_up(offset + array.bytes().size());
  }
  const nlohmann::json header = {{"magic", kBundleMagic}, {"meta", bundle.meta}, {"entries", entries}};
  const std::string text = header.dump();

  const std::size_t payload_start = align_up(8 + text.size());
  std::vector<std::byte> out(payload_start + offset, std::byte{0});
  const std::uint64_t length = text.size();
  std::memcpy(out.data(), &length, 8);
  std::memcpy(out.data() + 8, text.data(), text.size());
  std::size_t i = 0;
  for (const auto& [name, array] : bundle.arrays) {
    const auto at = payload_start + entries[i]["offset"].get<std::size_t>();
    if (!array.bytes().empty()) std::memcpy(out.data() + at, array.bytes().data(), array.bytes().size());
    ++i;
  }
  return out;
}

Bundle decode_bundle(std::span<const std::byte> file) {
  if (file.size() < 8) throw BundleError(BundleErrc::truncated, "file too short for a bundle header");
  std::uint64_t length = 0;
  std::memcpy(&length, file.data(), 8);
  if (length > file.size() - 8) throw BundleError(BundleErrc::truncated, "header extends past end of file");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(reinterpret_cast<const char*>(file.data() + 8),
                                   reinterpret_cast<const char*>(file.data() + 8 + length));
  } catch (const nlohmann::json::exception& e) {
    throw BundleError(BundleErrc::corrupt_header, std::string("header is not valid JSON: ") + e.what());
  }
  if (!header.is_object() || header.value("magic", std::string{}) != kBundleMagic) {
    throw BundleError(BundleErrc::corrupt_header, "bad bundle magic");
  }
  if (!header.contains("entries") || !header["entries"].is_array()) {
    throw BundleError(BundleErrc::corrupt_header, "bundle header lacks an entry list");
  }

  Bundle bundle;
  bundle.meta = header.value("meta", nlohmann::json::object());
  const std::size_t payload_start = align_up(8 + length);

  struct Span {
    std::size_t begin, end;
  };
  std::vector<Span> used;
  try {
    for (const auto& e : header["entries"]) {
      const std::string name = e.at("name").get<std::string>();
      const DType dtype = parse_dtype(e.at("dtype").get<std::string>());
      const auto shape = e.at("shape").get<std::vector<std::int64_t>>();
      const auto offset = e.at("offset").get<std::uint64_t>();
      const auto nbytes = e.at("nbytes").get<std::uint64_t>();
      for (auto d : shape) {
        if (d < 0) throw BundleError(BundleErrc::corrupt_header, "negative dimension in '" + name + "'");
      }
      if (count_of(shape) * item_size(dtype) != nbytes) {
        throw BundleError(BundleErrc::corrupt_header, "shape and byte count disagree for '" + name + "'");
      }
      if (offset % kBundleAlignment != 0) {
        throw BundleError(BundleErrc::corrupt_header, "misaligned payload offset for '" + name + "'");
      }
      if (payload_start > file.size() || offset > file.size() - payload_start ||
          nbytes > file.size() - payload_start - offset) {
        throw BundleError(BundleErrc::truncated, "payload of '" + name + "' extends past end of file");
      }
      used.push_back({offset, offset + nbytes});
      const auto* begin = file.data() + payload_start + offset;
      std::vector<std::byte> bytes(begin, begin + nbytes);
      if (name.empty() || bundle.contains(name)) {
        throw BundleError(BundleErrc::corrupt_header, "empty or duplicate array name in header");
      }
      bundle.arrays.emplace(name, NdArray::raw(dtype, shape, std::move(bytes)));
    }
  } catch (const nlohmann::json::exception& e) {
    throw BundleError(BundleErrc::corrupt_header, std::string("malformed entry: ") + e.what());
  }

  std::sort(used.begin(), used.end(), [](const Span& a, const Span& b) { return a.begin < b.begin; });
  for (std::size_t i = 1; i < used.size(); ++i) {
    if (used[i].begin < used[i - 1].end) {
      throw BundleError(BundleErrc::corrupt_header, "array payloads overlap");
    }
  }
  return bundle;
}

void write_bundle(const std::filesystem::path& path, const Bundle& bundle) {
  const std::vector<std::byte> bytes = encode_bundle(bundle);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw BundleError(BundleErrc::io, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw BundleError(BundleErrc::io, "failed writing '" + path.string() + "'");
}

Bundle read_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BundleError(BundleErrc::io, "cannot open '" + path.string() + "'");
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw BundleError(BundleErrc::io, "failed reading '" + path.string() + "'");
  return decode_bundle(std::as_bytes(std::span<const char>(raw)));
}

}  // namespace mrf
