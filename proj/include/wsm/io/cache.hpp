#pragma once

//! On-disk eigenstate cache. One file per key, named by the key's SHA-256:
//!
//!   "WSMSTATE" | u32 version | u64 payload bytes | 32-byte payload SHA-256 | payload
//!
//! The payload repeats the key, so a hash collision reads as corruption rather
//! than as the wrong states. Native byte order; caches are not portable
//! across architectures. Files are written once under a temporary name and
//! renamed into place.

#include "wsm/errors.hpp"
#include "wsm/io/hash.hpp"
#include "wsm/lattice.hpp"

#include <atomic>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace wsm::io {

namespace detail {

constexpr char kMagic[8] = {'W', 'S', 'M', 'S', 'T', 'A', 'T', 'E'};
constexpr std::uint32_t kVersion = 1;

template <class T> void put(std::string &b, const T &v) {
  b.append(reinterpret_cast<const char *>(&v), sizeof v);
}

class Reader {
public:
  Reader(const std::string &b, std::string path) : b_(b), path_(std::move(path)) {}
  template <class T> T get() {
    T v;
    need(sizeof v);
    std::memcpy(&v, b_.data() + pos_, sizeof v);
    pos_ += sizeof v;
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  [[nodiscard]] bool done() const { return pos_ == b_.size(); }

private:
  void need(std::size_t n) const {
    if (pos_ + n > b_.size())
      throw CacheError("cache file '" + path_ + "' is truncated");
  }
  const std::string &b_;
  std::string path_;
  std::size_t pos_ = 0;
};

inline std::string encode(const std::string &key, const std::vector<EigenState> &states) {
  std::string p;
  put<std::uint64_t>(p, key.size());
  p += key;
  put<std::uint64_t>(p, states.size());
  for (const auto &s : states) {
    put(p, s.energy);
    put(p, s.spacing);
    put(p, s.centroid);
    put(p, s.spread);
    put<std::int32_t>(p, s.well_index);
    put<std::int32_t>(p, s.band_index);
    put<std::uint8_t>(p, s.clustered);
    put<std::uint8_t>(p, s.boundary_warning);
    put<std::uint64_t>(p, s.wavefunction.size());
    p.append(reinterpret_cast<const char *>(s.wavefunction.data()),
             s.wavefunction.size() * sizeof(double));
  }
  return p;
}

inline std::vector<EigenState> decode(const std::string &payload, const std::string &key,
                                      const std::string &path) {
  Reader r(payload, path);
  const auto klen = r.get<std::uint64_t>();
  if (r.bytes(klen) != key)
    throw CacheError("cache file '" + path + "' holds a different key");
  const auto n = r.get<std::uint64_t>();
  std::vector<EigenState> out(n);
  for (auto &s : out) {
    s.energy = r.get<double>();
    s.spacing = r.get<double>();
    s.centroid = r.get<double>();
    s.spread = r.get<double>();
    s.well_index = r.get<std::int32_t>();
    s.band_index = r.get<std::int32_t>();
    s.clustered = r.get<std::uint8_t>() != 0;
    s.boundary_warning = r.get<std::uint8_t>() != 0;
    const auto m = r.get<std::uint64_t>();
    const std::string raw = r.bytes(m * sizeof(double));
    s.wavefunction.resize(m);
    std::memcpy(s.wavefunction.data(), raw.data(), raw.size());
  }
  if (!r.done())
    throw CacheError("cache file '" + path + "' has trailing bytes");
  return out;
}

} // namespace detail

class FileStateStore final : public StateStore {
public:
  explicit FileStateStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  [[nodiscard]] std::filesystem::path path_for(const std::string &key) const {
    return dir_ / (sha256_hex(key) + ".bin");
  }

  [[nodiscard]] std::optional<std::vector<EigenState>>
  load(const std::string &key) const override {
    const auto path = path_for(key);
    std::ifstream in(path, std::ios::binary);
    if (!in)
      return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string file = buf.str();
    const std::string where = path.string();
    detail::Reader r(file, where);
    if (r.bytes(sizeof detail::kMagic) != std::string(detail::kMagic, sizeof detail::kMagic))
      throw CacheError("cache file '" + where + "' has a bad magic number");
    if (r.get<std::uint32_t>() != detail::kVersion)
      throw CacheError("cache file '" + where + "' has an unsupported version");
    const auto len = r.get<std::uint64_t>();
    const std::string digest = r.bytes(32);
    const std::string payload = r.bytes(len);
    if (!r.done())
      throw CacheError("cache file '" + where + "' has trailing bytes");
    const Digest d = sha256(payload);
    if (std::memcmp(d.data(), digest.data(), d.size()) != 0)
      throw CacheError("cache file '" + where + "' fails its checksum");
    ++hits_;
    return detail::decode(payload, key, where);
  }

  void store(const std::string &key, const std::vector<EigenState> &states) const override {
    const std::string payload = detail::encode(key, states);
    std::string file(detail::kMagic, sizeof detail::kMagic);
    detail::put(file, detail::kVersion);
    detail::put<std::uint64_t>(file, payload.size());
    const Digest d = sha256(payload);
    file.append(reinterpret_cast<const char *>(d.data()), d.size());
    file += payload;

    const auto path = path_for(key);
    std::random_device rd;
    const auto tmp = dir_ / (path.filename().string() + ".tmp." + std::to_string(::getpid()) +
                             "." + std::to_string(rd()));
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out.write(file.data(), static_cast<std::streamsize>(file.size()));
      if (!out)
        throw CacheError("cannot write cache file '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
    ++writes_;
  }

  [[nodiscard]] std::size_t hits() const { return hits_; }
  [[nodiscard]] std::size_t writes() const { return writes_; }

private:
  std::filesystem::path dir_;
  mutable std::atomic<std::size_t> hits_{0}, writes_{0};
};

} // namespace wsm::io
