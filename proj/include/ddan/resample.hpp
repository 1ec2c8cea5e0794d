#pragma once

#include <algorithm>

#include "ddan/array.hpp"

namespace ddan {

// Rational resampling factor; the pipeline uses {1/2, 1/4, 2, 4}.
struct Scale {
  int num = 1;
  int den = 1;
  double ratio() const { return static_cast<double>(num) / den; }
  Scale inverse() const { return Scale{den, num}; }
};

inline Scale scale_down(int a) { return Scale{1, a}; }
inline Scale scale_up(int a) { return Scale{a, 1}; }

// Keys cubic convolution kernel, a = -0.5.
template <typename S>
S keys_weight(S x) {
  const S a = S(-0.5);
  x = std::abs(x);
  if (x <= S(1)) return ((a + S(2)) * x - (a + S(3))) * x * x + S(1);
  if (x < S(2)) return (((x - S(5)) * x + S(8)) * x - S(4)) * a;
  return S(0);
}

namespace detail {
template <typename S>
struct TapRow {
  i64 idx[4];
  S w[4];
};

// Half-pixel-center mapping: src = (dst + 0.5)/scale - 0.5, edge replication.
template <typename S>
std::vector<TapRow<S>> make_taps(i64 n_dst, i64 n_src, double ratio) {
  std::vector<TapRow<S>> taps(static_cast<size_t>(n_dst));
  for (i64 d = 0; d < n_dst; ++d) {
    const double src = (static_cast<double>(d) + 0.5) / ratio - 0.5;
    const i64 base = static_cast<i64>(std::floor(src));
    TapRow<S>& t = taps[static_cast<size_t>(d)];
    for (int k = 0; k < 4; ++k) {
      const i64 j = base - 1 + k;
      t.idx[k] = std::clamp<i64>(j, 0, n_src - 1);
      t.w[k] = keys_weight(static_cast<S>(src - static_cast<double>(j)));
    }
  }
  return taps;
}
}  // namespace detail

// Separable Keys bicubic. Requires >= 4 samples along each axis.
template <typename S>
Image<S> bicubic_resample(const Image<S>& img, Scale scale) {
  if (img.h < 4 || img.w < 4)
    throw std::invalid_argument("bicubic_resample: extents must be >= 4, got " +
                                std::to_string(img.h) + "x" + std::to_string(img.w));
  if (scale.num < 1 || scale.den < 1)
    throw std::invalid_argument("bicubic_resample: invalid scale");
  const double r = scale.ratio();
  const i64 ho = std::max<i64>(1, static_cast<i64>(std::llround(img.h * r)));
  const i64 wo = std::max<i64>(1, static_cast<i64>(std::llround(img.w * r)));

  const auto tx = detail::make_taps<S>(wo, img.w, r);
  const auto ty = detail::make_taps<S>(ho, img.h, r);

  // horizontal pass, then vertical
  Image<S> tmp(img.h, wo);
  for (i64 y = 0; y < img.h; ++y) {
    const S* row = img.data.data() + y * img.w;
    S* dst = tmp.data.data() + y * wo;
    for (i64 x = 0; x < wo; ++x) {
      const auto& t = tx[static_cast<size_t>(x)];
      dst[x] = t.w[0] * row[t.idx[0]] + t.w[1] * row[t.idx[1]] + t.w[2] * row[t.idx[2]] +
               t.w[3] * row[t.idx[3]];
    }
  }
  Image<S> out(ho, wo);
  for (i64 y = 0; y < ho; ++y) {
    const auto& t = ty[static_cast<size_t>(y)];
    const S* r0 = tmp.data.data() + t.idx[0] * wo;
    const S* r1 = tmp.data.data() + t.idx[1] * wo;
    const S* r2 = tmp.data.data() + t.idx[2] * wo;
    const S* r3 = tmp.data.data() + t.idx[3] * wo;
    S* dst = out.data.data() + y * wo;
    for (i64 x = 0; x < wo; ++x)
      dst[x] = t.w[0] * r0[x] + t.w[1] * r1[x] + t.w[2] * r2[x] + t.w[3] * r3[x];
  }
  return out;
}

// Per-plane resampling over the leading two dims of an Arr4 (B,C,H,W).
template <typename S>
Arr4<S> bicubic_resample_bc(const Arr4<S>& x, Scale scale) {
  const Dims4 d = x.dims;
  Image<S> probe(d[2], d[3]);
  // establish output size once
  std::copy(x.plane(0, 0), x.plane(0, 0) + d[2] * d[3], probe.data.begin());
  Image<S> first = bicubic_resample(probe, scale);
  Arr4<S> out(d[0], d[1], first.h, first.w);
  for (i64 b = 0; b < d[0]; ++b)
    for (i64 c = 0; c < d[1]; ++c) {
      if (b == 0 && c == 0) {
        std::copy(first.data.begin(), first.data.end(), out.plane(0, 0));
        continue;
      }
      Image<S> p(d[2], d[3]);
      std::copy(x.plane(b, c), x.plane(b, c) + d[2] * d[3], p.data.begin());
      Image<S> r = bicubic_resample(p, scale);
      std::copy(r.data.begin(), r.data.end(), out.plane(b, c));
    }
  return out;
}

}  // namespace ddan
