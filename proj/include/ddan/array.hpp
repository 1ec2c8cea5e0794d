#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddan {

using i64 = std::int64_t;
using Dims4 = std::array<i64, 4>;

inline std::string dims_str(const Dims4& d) {
  std::ostringstream os;
  os << "(" << d[0] << "," << d[1] << "," << d[2] << "," << d[3] << ")";
  return os.str();
}

// Plain rank-4 array, row-major in (d0,d1,d2,d3) order. Value semantics.
template <typename S>
struct Arr4 {
  Dims4 dims{0, 0, 0, 0};
  std::vector<S> data;

  Arr4() = default;
  Arr4(i64 d0, i64 d1, i64 d2, i64 d3, S fill = S(0)) : dims{d0, d1, d2, d3} {
    if (d0 < 0 || d1 < 0 || d2 < 0 || d3 < 0)
      throw std::invalid_argument("Arr4: negative extent " + dims_str(dims));
    data.assign(static_cast<size_t>(d0) * d1 * d2 * d3, fill);
  }
  explicit Arr4(const Dims4& d, S fill = S(0)) : Arr4(d[0], d[1], d[2], d[3], fill) {}

  static Arr4 zeros_like(const Arr4& o) { return Arr4(o.dims); }

  i64 numel() const { return static_cast<i64>(data.size()); }
  bool empty() const { return data.empty() && dims == Dims4{0, 0, 0, 0}; }
  bool same_dims(const Arr4& o) const { return dims == o.dims; }

  i64 offset(i64 a, i64 b, i64 c, i64 d) const {
    return ((a * dims[1] + b) * dims[2] + c) * dims[3] + d;
  }
  S& at(i64 a, i64 b, i64 c, i64 d) { return data[offset(a, b, c, d)]; }
  S at(i64 a, i64 b, i64 c, i64 d) const { return data[offset(a, b, c, d)]; }

  // Pointer to the contiguous (d2 x d3) plane at indices (a, b).
  S* plane(i64 a, i64 b) { return data.data() + offset(a, b, 0, 0); }
  const S* plane(i64 a, i64 b) const { return data.data() + offset(a, b, 0, 0); }

  Arr4& operator+=(const Arr4& o) {
    if (!same_dims(o))
      throw std::invalid_argument("Arr4 +=: dims " + dims_str(dims) + " vs " + dims_str(o.dims));
    for (size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
    return *this;
  }

  void fill(S v) { std::fill(data.begin(), data.end(), v); }

  template <typename T>
  Arr4<T> cast() const {
    Arr4<T> r(dims);
    for (size_t i = 0; i < data.size(); ++i) r.data[i] = static_cast<T>(data[i]);
    return r;
  }
};

template <typename S>
bool all_finite(const Arr4<S>& a) {
  for (S v : a.data)
    if (!std::isfinite(v)) return false;
  return true;
}

// Single 2-D plane (the unit of bicubic resampling and the IQA metrics).
template <typename S>
struct Image {
  i64 h = 0, w = 0;
  std::vector<S> data;

  Image() = default;
  Image(i64 h_, i64 w_, S fill = S(0)) : h(h_), w(w_) {
    if (h_ < 0 || w_ < 0) throw std::invalid_argument("Image: negative extent");
    data.assign(static_cast<size_t>(h_) * w_, fill);
  }
  S& at(i64 y, i64 x) { return data[y * w + x]; }
  S at(i64 y, i64 x) const { return data[y * w + x]; }
  i64 numel() const { return h * w; }

  template <typename T>
  Image<T> cast() const {
    Image<T> r(h, w);
    for (size_t i = 0; i < data.size(); ++i) r.data[i] = static_cast<T>(data[i]);
    return r;
  }
};

}  // namespace ddan
