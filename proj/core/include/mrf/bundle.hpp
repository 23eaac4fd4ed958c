#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mrf {

// Array bundle (.mrfb) layout, all integers little-endian:
//
//   u64 header_length
//   header_length bytes of UTF-8 JSON:
//     {"magic":"MRFB1","meta":{...},
//      "entries":[{"name","dtype","shape","offset","nbytes"}, ...]}
//   zero padding up to the next multiple of 64
//   payload: row-major arrays, each starting at a multiple of 64
//
// Entry offsets are relative to the start of the payload.

inline constexpr const char* kBundleMagic = "MRFB1";
inline constexpr std::size_t kBundleAlignment = 64;

enum class DType { float32, complex64, uint8, int32 };

std::string to_string(DType dtype);
std::size_t item_size(DType dtype);

enum class BundleErrc {
  io = 1,
  corrupt_header,
  truncated,
  dtype_mismatch,
  invalid_name,
  missing_entry,
  shape_mismatch,
};

class BundleError : public std::runtime_error {
 public:
  BundleError(BundleErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  [[nodiscard]] BundleErrc code() const { return code_; }

 private:
  BundleErrc code_;
};

class NdArray {
 public:
  NdArray() = default;

  static NdArray float32(std::vector<std::int64_t> shape, std::span<const float> values);
  static NdArray complex64(std::vector<std::int64_t> shape, std::span<const std::complex<float>> values);
  static NdArray uint8(std::vector<std::int64_t> shape, std::span<const std::uint8_t> values);
  static NdArray int32(std::vector<std::int64_t> shape, std::span<const std::int32_t> values);
  static NdArray raw(DType dtype, std::vector<std::int64_t> shape, std::vector<std::byte> bytes);

  [[nodiscard]] DType dtype() const { return dtype_; }
  [[nodiscard]] const std::vector<std::int64_t>& shape() const { return shape_; }
  [[nodiscard]] std::size_t element_count() const;
  [[nodiscard]] const std::vector<std::byte>& bytes() const { return bytes_; }

  /// Typed copies; throw BundleError(dtype_mismatch) on the wrong type.
  [[nodiscard]] std::vector<float> as_float32() const;
  [[nodiscard]] std::vector<std::complex<float>> as_complex64() const;
  [[nodiscard]] std::vector<std::uint8_t> as_uint8() const;
  [[nodiscard]] std::vector<std::int32_t> as_int32() const;

  /// Throws BundleError(shape_mismatch) unless the shape equals `expected`.
  void expect_shape(const std::vector<std::int64_t>& expected, const std::string& name) const;

  friend bool operator==(const NdArray&, const NdArray&) = default;

 private:
  void expect(DType dtype) const;

  DType dtype_ = DType::float32;
  std::vector<std::int64_t> shape_;
  std::vector<std::byte> bytes_;
};

struct Bundle {
  nlohmann::json meta = nlohmann::json::object();
  std::map<std::string, NdArray> arrays;

  /// Adds a new array; throws invalid_name on empty or duplicate names.
  void add(const std::string& name, NdArray array);
  [[nodiscard]] const NdArray& at(const std::string& name) const;
  [[nodiscard]] bool contains(const std::string& name) const { return arrays.count(name) != 0; }
};

std::vector<std::byte> encode_bundle(const Bundle& bundle);
Bundle decode_bundle(std::span<const std::byte> file);

void write_bundle(const std::filesystem::path& path, const Bundle& bundle);
Bundle read_bundle(const std::filesystem::path& path);

}  // namespace mrf
