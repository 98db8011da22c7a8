#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "riskgraph/common.hpp"

// Little-endian binary file helpers. Every on-disk artifact is written
// through BinWriter and ends in a 64-bit FNV-1a checksum of the payload,
// so truncation and corruption are detectable on load.

namespace riskgraph::binio {

static_assert(std::endian::native == std::endian::little,
              "on-disk formats assume a little-endian host");

constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr uint64_t kFnvPrime = 0x100000001b3ull;

inline uint64_t fnv1a(std::span<const uint8_t> bytes, uint64_t h = kFnvOffset) {
  for (uint8_t b : bytes) {
    h ^= b;
    h *= kFnvPrime;
  }
  return h;
}

uint64_t fnv1a_file(const std::string& path);

class BinWriter {
public:
  template <typename T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    size_t off = buf_.size();
    buf_.resize(off + sizeof(T));
    std::memcpy(buf_.data() + off, &v, sizeof(T));
  }

  template <typename T>
  void put_span(std::span<const T> v) {
    static_assert(std::is_trivially_copyable_v<T>);
    size_t off = buf_.size();
    buf_.resize(off + v.size_bytes());
    if (!v.empty()) std::memcpy(buf_.data() + off, v.data(), v.size_bytes());
  }

  void put_string(const std::string& s) {
    put<uint32_t>(static_cast<uint32_t>(s.size()));
    put_span(std::span<const char>(s.data(), s.size()));
  }

  size_t size() const { return buf_.size(); }
  const std::vector<uint8_t>& bytes() const { return buf_; }

  // Appends the FNV-1a checksum of everything written so far, then writes
  // the whole buffer to `path`.
  void write_file(const std::string& path);

private:
  std::vector<uint8_t> buf_;
};

class BinReader {
public:
  // Loads the file, verifies the trailing checksum, and exposes the payload.
  explicit BinReader(const std::string& path);

  // In-memory payload view (no checksum verification); used by tests.
  explicit BinReader(std::vector<uint8_t> payload)
      : buf_(std::move(payload)), end_(buf_.size()) {}

  template <typename T>
  T get() {
    static_assert(std::is_trivially_copyable_v<T>);
    need(sizeof(T));
    T v;
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  template <typename T>
  std::vector<T> get_vec(size_t count) {
    static_assert(std::is_trivially_copyable_v<T>);
    need(count * sizeof(T));
    std::vector<T> v(count);
    if (count > 0) std::memcpy(v.data(), buf_.data() + pos_, count * sizeof(T));
    pos_ += count * sizeof(T);
    return v;
  }

  std::string get_string() {
    uint32_t n = get<uint32_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  size_t remaining() const { return end_ - pos_; }
  bool at_end() const { return pos_ == end_; }

private:
  void need(size_t n) const {
    if (pos_ + n > end_) throw IoError("binary payload truncated");
  }

  std::vector<uint8_t> buf_;
  size_t pos_ = 0;
  size_t end_ = 0;
};

} // namespace riskgraph::binio
