#pragma once

#include <cstdint>

#include "ddan/array.hpp"
#include "ddan/resample.hpp"

namespace ddan {

enum class LfDtype : std::uint8_t { U8 = 0, F32 = 1 };
enum class ColorTag : std::uint8_t { Y = 0, RGB = 1, YCbCr = 2 };

// 4-D light field L(u,v,x,y), planar storage in (u,v,channel,y,x) order.
// 8-bit data lives in [0,255], real data in [0,1].
struct LightField {
  i64 U = 0, V = 0, H = 0, W = 0;
  int channels = 1;
  LfDtype dtype = LfDtype::F32;
  ColorTag color = ColorTag::Y;
  std::vector<std::uint8_t> data8;
  std::vector<float> dataf;

  LightField() = default;
  LightField(i64 u, i64 v, i64 h, i64 w, int ch, LfDtype dt, ColorTag tag);

  i64 views() const { return U * V; }
  i64 plane_size() const { return H * W; }
  size_t expected_size() const {
    return static_cast<size_t>(U) * V * channels * H * W;
  }

  i64 offset(i64 u, i64 v, i64 c, i64 y, i64 x) const {
    return ((((u * V + v) * channels + c) * H) + y) * W + x;
  }
  float& atf(i64 u, i64 v, i64 c, i64 y, i64 x) { return dataf[offset(u, v, c, y, x)]; }
  float atf(i64 u, i64 v, i64 c, i64 y, i64 x) const { return dataf[offset(u, v, c, y, x)]; }
  std::uint8_t& at8(i64 u, i64 v, i64 c, i64 y, i64 x) { return data8[offset(u, v, c, y, x)]; }
  std::uint8_t at8(i64 u, i64 v, i64 c, i64 y, i64 x) const { return data8[offset(u, v, c, y, x)]; }

  void validate() const;
  LightField to_f32() const;  // u8 -> real/255; f32 passes through
};

// Full-range BT.601.
LightField rgb_to_ycbcr(const LightField& lf);
LightField ycbcr_to_rgb(const LightField& lf);
LightField extract_y(const LightField& lf);  // RGB or YCbCr (or Y) -> 1-channel Y

// Container I/O: magic "LFSR", version u16=1, U,V,H,W u32, channels u8,
// dtype u8, color u8, then raw planar payload. Bit-exact round trip.
void save_lf(const LightField& lf, const std::string& path);
LightField load_lf_file(const std::string& path);
// Directory of binary PGM (P5) / PPM (P6) views named view_{u}_{v}.(pgm|ppm).
LightField load_lf_dir(const std::string& path);
// Dispatches on whether path is a directory.
LightField load_lf(const std::string& path);

template <typename S>
S clamp01(S v) {
  return std::max(S(0), std::min(S(1), v));
}

// One SAI channel as a plane, at the requested precision.
template <typename S>
Image<S> lf_plane(const LightField& lf, i64 u, i64 v, i64 c) {
  Image<S> img(lf.H, lf.W);
  if (lf.dtype == LfDtype::F32) {
    const float* src = lf.dataf.data() + lf.offset(u, v, c, 0, 0);
    for (i64 i = 0; i < lf.plane_size(); ++i) img.data[i] = static_cast<S>(src[i]);
  } else {
    const std::uint8_t* src = lf.data8.data() + lf.offset(u, v, c, 0, 0);
    for (i64 i = 0; i < lf.plane_size(); ++i) img.data[i] = static_cast<S>(src[i]) / S(255);
  }
  return img;
}

// Per-SAI, per-channel Keys bicubic at precision S; result is a clamped f32
// real-valued field.
template <typename S>
LightField lf_bicubic(const LightField& lf, Scale scale) {
  const LightField src = lf.to_f32();
  LightField out;
  bool first = true;
  for (i64 u = 0; u < src.U; ++u)
    for (i64 v = 0; v < src.V; ++v)
      for (i64 c = 0; c < src.channels; ++c) {
        Image<S> plane = lf_plane<S>(src, u, v, c);
        Image<S> r = bicubic_resample(plane, scale);
        if (first) {
          out = LightField(src.U, src.V, r.h, r.w, src.channels, LfDtype::F32, src.color);
          first = false;
        }
        float* dst = out.dataf.data() + out.offset(u, v, c, 0, 0);
        for (i64 i = 0; i < r.numel(); ++i)
          dst[i] = static_cast<float>(clamp01(r.data[i]));
      }
  return out;
}

// Y-channel views as a stacked (N,1,H,W) tensor payload.
template <typename S>
Arr4<S> lf_to_views(const LightField& lf) {
  if (lf.channels != 1)
    throw std::invalid_argument("lf_to_views: expected a single-channel light field");
  const LightField f = lf.to_f32();
  Arr4<S> out(f.U * f.V, 1, f.H, f.W);
  for (i64 u = 0; u < f.U; ++u)
    for (i64 v = 0; v < f.V; ++v) {
      const float* src = f.dataf.data() + f.offset(u, v, 0, 0, 0);
      S* dst = out.plane(u * f.V + v, 0);
      for (i64 i = 0; i < f.plane_size(); ++i) dst[i] = static_cast<S>(src[i]);
    }
  return out;
}

template <typename S>
LightField views_to_lf(const Arr4<S>& views, i64 U, i64 V, bool clamp = true) {
  if (views.dims[0] != U * V || views.dims[1] != 1)
    throw std::invalid_argument("views_to_lf: dims " + dims_str(views.dims) +
                                " incompatible with " + std::to_string(U) + "x" +
                                std::to_string(V) + " views");
  LightField lf(U, V, views.dims[2], views.dims[3], 1, LfDtype::F32, ColorTag::Y);
  for (i64 u = 0; u < U; ++u)
    for (i64 v = 0; v < V; ++v) {
      const S* src = views.plane(u * V + v, 0);
      float* dst = lf.dataf.data() + lf.offset(u, v, 0, 0, 0);
      for (i64 i = 0; i < lf.plane_size(); ++i) {
        const S val = clamp ? clamp01(src[i]) : src[i];
        dst[i] = static_cast<float>(val);
      }
    }
  return lf;
}

}  // namespace ddan
