#pragma once

#include "ddan/lightfield.hpp"
#include "ddan/rng.hpp"

namespace ddan {

// ---- joint angular-spatial augmentation ----
// The angular axes pair with the spatial ones: u with x, v with y, so a flip
// or rotation acts on a light field the way it would act on the scene.

inline LightField lf_hflip(const LightField& in) {
  LightField out(in.U, in.V, in.H, in.W, in.channels, in.dtype, in.color);
  for (i64 u = 0; u < in.U; ++u)
    for (i64 v = 0; v < in.V; ++v)
      for (i64 c = 0; c < in.channels; ++c)
        for (i64 y = 0; y < in.H; ++y)
          for (i64 x = 0; x < in.W; ++x) {
            const i64 src = in.offset(in.U - 1 - u, v, c, y, in.W - 1 - x);
            const i64 dst = out.offset(u, v, c, y, x);
            if (in.dtype == LfDtype::U8)
              out.data8[dst] = in.data8[src];
            else
              out.dataf[dst] = in.dataf[src];
          }
  return out;
}

inline LightField lf_vflip(const LightField& in) {
  LightField out(in.U, in.V, in.H, in.W, in.channels, in.dtype, in.color);
  for (i64 u = 0; u < in.U; ++u)
    for (i64 v = 0; v < in.V; ++v)
      for (i64 c = 0; c < in.channels; ++c)
        for (i64 y = 0; y < in.H; ++y)
          for (i64 x = 0; x < in.W; ++x) {
            const i64 src = in.offset(u, in.V - 1 - v, c, in.H - 1 - y, x);
            const i64 dst = out.offset(u, v, c, y, x);
            if (in.dtype == LfDtype::U8)
              out.data8[dst] = in.data8[src];
            else
              out.dataf[dst] = in.dataf[src];
          }
  return out;
}

// 90-degree clockwise rotation of the spatial grid, with the angular grid
// rotated the same way. out(u,v,y,x) = in(u=v', v=V-1-u', y=H-1-x', x=y').
inline LightField lf_rot90(const LightField& in) {
  if (in.U != in.V)
    throw std::invalid_argument("rot90: angular grid must be square, got " +
                                std::to_string(in.U) + "x" + std::to_string(in.V));
  LightField out(in.V, in.U, in.W, in.H, in.channels, in.dtype, in.color);
  for (i64 u = 0; u < out.U; ++u)
    for (i64 v = 0; v < out.V; ++v)
      for (i64 c = 0; c < in.channels; ++c)
        for (i64 y = 0; y < out.H; ++y)
          for (i64 x = 0; x < out.W; ++x) {
            const i64 src = in.offset(v, in.V - 1 - u, c, in.H - 1 - x, y);
            const i64 dst = out.offset(u, v, c, y, x);
            if (in.dtype == LfDtype::U8)
              out.data8[dst] = in.data8[src];
            else
              out.dataf[dst] = in.dataf[src];
          }
  return out;
}

enum class AugmentOp { hflip, vflip, rot90 };

inline LightField augment(const LightField& lf, AugmentOp op) {
  switch (op) {
    case AugmentOp::hflip: return lf_hflip(lf);
    case AugmentOp::vflip: return lf_vflip(lf);
    case AugmentOp::rot90: return lf_rot90(lf);
  }
  throw std::invalid_argument("augment: unknown op");
}

struct AugmentDraw {
  bool hflip = false, vflip = false, rot90 = false;
};

// Each transform independently with probability 1/2, fixed application order.
inline AugmentDraw draw_augment(std::mt19937_64& rng) {
  AugmentDraw d;
  d.hflip = (rng() & 1) != 0;
  d.vflip = (rng() & 1) != 0;
  d.rot90 = (rng() & 1) != 0;
  return d;
}

inline LightField apply_augment(const LightField& lf, const AugmentDraw& d) {
  LightField out = lf;
  if (d.hflip) out = lf_hflip(out);
  if (d.vflip) out = lf_vflip(out);
  if (d.rot90) out = lf_rot90(out);
  return out;
}

// ---- patch extraction ----

struct PatchPair {
  i64 y0 = 0, x0 = 0;  // HR top-left spatial coordinates
  LightField hr, lr;
};

struct PatchSet {
  i64 parent_h = 0, parent_w = 0;
  int p = 0, s = 0, a = 0;
  std::vector<PatchPair> pairs;
};

inline i64 patch_count_1d(i64 dim, i64 p, i64 s) { return (dim - p) / s + 1; }

inline LightField lf_crop(const LightField& in, i64 y0, i64 x0, i64 ph, i64 pw) {
  LightField out(in.U, in.V, ph, pw, in.channels, in.dtype, in.color);
  for (i64 u = 0; u < in.U; ++u)
    for (i64 v = 0; v < in.V; ++v)
      for (i64 c = 0; c < in.channels; ++c)
        for (i64 y = 0; y < ph; ++y) {
          const i64 src = in.offset(u, v, c, y0 + y, x0);
          const i64 dst = out.offset(u, v, c, y, 0);
          if (in.dtype == LfDtype::U8)
            std::copy(in.data8.begin() + src, in.data8.begin() + src + pw,
                      out.data8.begin() + dst);
          else
            std::copy(in.dataf.begin() + src, in.dataf.begin() + src + pw,
                      out.dataf.begin() + dst);
        }
  return out;
}

// Angularly complete HR/LR patch pairs on the (i*s, j*s) grid; the LR side is
// the 1/a bicubic downsample of the HR patch.
inline PatchSet extract_patches(const LightField& hr, int a, int p, int s) {
  if (p > hr.H || p > hr.W)
    throw std::invalid_argument("extract_patches: patch size " + std::to_string(p) +
                                " exceeds parent " + std::to_string(hr.H) + "x" +
                                std::to_string(hr.W));
  if (p <= 0 || s <= 0 || a <= 0) throw std::invalid_argument("extract_patches: bad geometry");
  if (p % a != 0 || s % a != 0)
    throw std::invalid_argument("extract_patches: p and s must be divisible by the scale");
  PatchSet set;
  set.parent_h = hr.H;
  set.parent_w = hr.W;
  set.p = p;
  set.s = s;
  set.a = a;
  const i64 ny = patch_count_1d(hr.H, p, s);
  const i64 nx = patch_count_1d(hr.W, p, s);
  for (i64 i = 0; i < ny; ++i)
    for (i64 j = 0; j < nx; ++j) {
      PatchPair pp;
      pp.y0 = i * s;
      pp.x0 = j * s;
      pp.hr = lf_crop(hr, pp.y0, pp.x0, p, p);
      pp.lr = a == 1 ? pp.hr.to_f32() : lf_bicubic<float>(pp.hr, scale_down(a));
      set.pairs.push_back(std::move(pp));
    }
  return set;
}

// ---- per-view Gaussian noise ----
// noise = sqrt(variance) * N(0,1); the unit draw depends on (seed, view) only,
// so probing several variances at one seed rescales a common field.
inline LightField add_gaussian_noise(const LightField& lf, i64 u, i64 v, double variance,
                                     std::uint64_t seed) {
  if (lf.dtype != LfDtype::F32)
    throw std::invalid_argument("add_gaussian_noise: expects real-valued data");
  if (variance < 0) throw std::invalid_argument("add_gaussian_noise: variance must be >= 0");
  if (u < 0 || u >= lf.U || v < 0 || v >= lf.V)
    throw std::invalid_argument("add_gaussian_noise: view (" + std::to_string(u) + "," +
                                std::to_string(v) + ") out of range");
  LightField out = lf;
  const double sigma = std::sqrt(variance);
  auto rng = make_rng(seed, "gaussian-noise", static_cast<std::uint64_t>(u),
                      static_cast<std::uint64_t>(v));
  std::normal_distribution<double> dist(0.0, 1.0);
  for (i64 c = 0; c < lf.channels; ++c) {
    float* p = out.dataf.data() + out.offset(u, v, c, 0, 0);
    for (i64 i = 0; i < lf.plane_size(); ++i)
      p[i] = clamp01(p[i] + static_cast<float>(sigma * dist(rng)));
  }
  return out;
}

}  // namespace ddan
