#pragma once

#include <cstdio>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include "ddan/autograd.hpp"
#include "ddan/rng.hpp"

namespace ddan {

// Zero-mean normal with variance 2/fan_in. Deterministic per (seed, stream).
template <typename S>
Arr4<S> kaiming_init(const Dims4& dims, i64 fan_in, std::mt19937_64& rng) {
  if (fan_in <= 0) throw std::invalid_argument("kaiming_init: fan_in must be positive");
  Arr4<S> out(dims);
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  for (S& v : out.data) v = static_cast<S>(dist(rng));
  return out;
}

template <typename S>
struct Param {
  std::string name;
  Tensor4<S> value;
  bool trainable = true;
};

template <typename S>
class ParamSet {
 public:
  Param<S>& add(const std::string& name, Arr4<S> value, bool trainable = true) {
    if (index_.count(name)) throw std::invalid_argument("duplicate param name: " + name);
    index_[name] = params_.size();
    params_.push_back(Param<S>{name, Tensor4<S>::leaf(std::move(value), trainable), trainable});
    return params_.back();
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  Param<S>& get(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::runtime_error("unknown param: " + name);
    return params_[it->second];
  }
  const Param<S>& get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::runtime_error("unknown param: " + name);
    return params_[it->second];
  }

  // Shorthand used throughout the model forward.
  const Tensor4<S>& operator[](const std::string& name) const { return get(name).value; }

  std::vector<Param<S>>& all() { return params_; }
  const std::vector<Param<S>>& all() const { return params_; }
  size_t size() const { return params_.size(); }

  void zero_grad() {
    for (auto& p : params_) p.value.zero_grad();
  }

  i64 total_scalars() const {
    i64 n = 0;
    for (const auto& p : params_)
      if (p.trainable) n += p.value.value().numel();
    return n;
  }

 private:
  std::vector<Param<S>> params_;
  std::unordered_map<std::string, size_t> index_;
};

// ---- checkpoint container ----
// magic "DDANCKPT", version u16, count u32, then per entry:
// name length u16 + UTF-8 name, 4 x u32 dims, raw little-endian f32 payload.

struct CkptEntry {
  std::string name;
  Dims4 dims;
  std::vector<float> data;
};

namespace detail {
inline void put_u16(std::ofstream& f, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>(v >> 8)};
  f.write(reinterpret_cast<const char*>(b), 2);
}
inline void put_u32(std::ofstream& f, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  f.write(reinterpret_cast<const char*>(b), 4);
}
inline std::uint16_t get_u16(std::ifstream& f, const char* what) {
  unsigned char b[2];
  if (!f.read(reinterpret_cast<char*>(b), 2))
    throw std::runtime_error(std::string("checkpoint truncated while reading ") + what);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}
inline std::uint32_t get_u32(std::ifstream& f, const char* what) {
  unsigned char b[4];
  if (!f.read(reinterpret_cast<char*>(b), 4))
    throw std::runtime_error(std::string("checkpoint truncated while reading ") + what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}
}  // namespace detail

inline void write_checkpoint(const std::string& path, const std::vector<CkptEntry>& entries) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  f.write("DDANCKPT", 8);
  detail::put_u16(f, 1);
  detail::put_u32(f, static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    if (e.name.size() > 0xffff) throw std::runtime_error("checkpoint name too long: " + e.name);
    detail::put_u16(f, static_cast<std::uint16_t>(e.name.size()));
    f.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    i64 n = 1;
    for (int i = 0; i < 4; ++i) {
      detail::put_u32(f, static_cast<std::uint32_t>(e.dims[i]));
      n *= e.dims[i];
    }
    if (n != static_cast<i64>(e.data.size()))
      throw std::runtime_error("checkpoint entry size mismatch: " + e.name);
    static_assert(sizeof(float) == 4);
    f.write(reinterpret_cast<const char*>(e.data.data()),
            static_cast<std::streamsize>(e.data.size() * 4));
  }
  if (!f) throw std::runtime_error("checkpoint write failed: " + path);
}

inline std::vector<CkptEntry> read_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  if (!f.read(magic, 8) || std::memcmp(magic, "DDANCKPT", 8) != 0)
    throw std::runtime_error("bad checkpoint magic in " + path);
  const std::uint16_t version = detail::get_u16(f, "version");
  if (version != 1)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  const std::uint32_t count = detail::get_u32(f, "entry count");
  std::vector<CkptEntry> entries;
  entries.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    CkptEntry e;
    const std::uint16_t len = detail::get_u16(f, "name length");
    e.name.resize(len);
    if (!f.read(e.name.data(), len)) throw std::runtime_error("checkpoint truncated in name");
    i64 n = 1;
    for (int i = 0; i < 4; ++i) {
      e.dims[i] = detail::get_u32(f, "dims");
      n *= e.dims[i];
    }
    e.data.resize(static_cast<size_t>(n));
    if (!f.read(reinterpret_cast<char*>(e.data.data()), n * 4))
      throw std::runtime_error("checkpoint truncated in payload of " + e.name);
    entries.push_back(std::move(e));
  }
  return entries;
}

template <typename S>
std::vector<CkptEntry> params_to_entries(const ParamSet<S>& ps) {
  std::vector<CkptEntry> out;
  out.reserve(ps.size());
  for (const auto& p : ps.all()) {
    CkptEntry e;
    e.name = p.name;
    e.dims = p.value.dims();
    const auto& v = p.value.value();
    e.data.resize(static_cast<size_t>(v.numel()));
    for (i64 i = 0; i < v.numel(); ++i) e.data[i] = static_cast<float>(v.data[i]);
    out.push_back(std::move(e));
  }
  return out;
}

// Loads matching entries into an existing ParamSet. Every param must be
// present with matching dims; extra entries are tolerated only when reserved
// (name starts with "__") or explicitly allowed.
template <typename S>
void load_params_from_entries(ParamSet<S>& ps, const std::vector<CkptEntry>& entries,
                              bool allow_extra = false) {
  std::unordered_map<std::string, const CkptEntry*> by_name;
  for (const auto& e : entries) by_name[e.name] = &e;
  for (auto& p : ps.all()) {
    auto it = by_name.find(p.name);
    if (it == by_name.end())
      throw std::runtime_error("config/checkpoint mismatch: missing param " + p.name);
    const CkptEntry& e = *it->second;
    if (e.dims != p.value.dims())
      throw std::runtime_error("config/checkpoint mismatch: param " + p.name + " has dims " +
                               dims_str(e.dims) + ", expected " + dims_str(p.value.dims()));
    auto& v = p.value.value_mut();
    for (i64 i = 0; i < v.numel(); ++i) v.data[i] = static_cast<S>(e.data[i]);
    by_name.erase(it);
  }
  if (!allow_extra)
    for (const auto& [name, e] : by_name)
      if (name.rfind("__", 0) != 0)
        throw std::runtime_error("config/checkpoint mismatch: unexpected entry " + name);
}

}  // namespace ddan
