#include "riskgraph/binio.hpp"

#include <cstdio>
#include <memory>

namespace riskgraph::binio {

namespace {

std::vector<uint8_t> read_all(const std::string& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> f(std::fopen(path.c_str(), "rb"), &std::fclose);
  if (!f) throw IoError("cannot open file: " + path);
  std::fseek(f.get(), 0, SEEK_END);
  long sz = std::ftell(f.get());
  if (sz < 0) throw IoError("cannot stat file: " + path);
  std::fseek(f.get(), 0, SEEK_SET);
  std::vector<uint8_t> buf(static_cast<size_t>(sz));
  if (sz > 0 && std::fread(buf.data(), 1, buf.size(), f.get()) != buf.size())
    throw IoError("short read: " + path);
  return buf;
}

} // namespace

uint64_t fnv1a_file(const std::string& path) {
  auto buf = read_all(path);
  return fnv1a(buf);
}

void BinWriter::write_file(const std::string& path) {
  uint64_t sum = fnv1a(buf_);
  put<uint64_t>(sum);
  std::unique_ptr<FILE, int (*)(FILE*)> f(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!f) throw IoError("cannot open file for write: " + path);
  if (std::fwrite(buf_.data(), 1, buf_.size(), f.get()) != buf_.size())
    throw IoError("short write: " + path);
  if (std::fflush(f.get()) != 0) throw IoError("flush failed: " + path);
  // Keep the writer reusable for checksum queries but drop the trailer so
  // repeated write_file calls stay consistent.
  buf_.resize(buf_.size() - sizeof(uint64_t));
}

BinReader::BinReader(const std::string& path) {
  buf_ = read_all(path);
  if (buf_.size() < sizeof(uint64_t)) throw IoError("file truncated: " + path);
  end_ = buf_.size() - sizeof(uint64_t);
  uint64_t stored;
  std::memcpy(&stored, buf_.data() + end_, sizeof(uint64_t));
  uint64_t actual = fnv1a(std::span<const uint8_t>(buf_.data(), end_));
  if (stored != actual) throw IoError("checksum mismatch (corrupt file): " + path);
}

} // namespace riskgraph::binio
