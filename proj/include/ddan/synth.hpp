#pragma once

#include "ddan/lightfield.hpp"
#include "ddan/rng.hpp"

namespace ddan {

// Procedurally textured light fields for desk-scale experiments: a background
// plus a few elliptical foreground layers at distinct disparities. Textures
// are analytic sinusoid mixtures, so every view samples the continuous scene
// exactly and the parallax/occlusion structure is genuine.
namespace synth {

struct TextureParams {
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::vector<Wave> waves;
  double base[3];   // per-channel offset
  double tint[3];   // per-channel texture gain
  double gx, gy;    // linear shading gradient

  double luminance(double x, double y) const {
    double v = 0.0;
    for (const auto& w : waves) v += w.amp * std::sin(w.fx * x + w.fy * y + w.phase);
    return v + gx * x + gy * y;
  }
};

struct Layer {
  double disparity;  // pixels per angular step
  bool full;         // background covers everything
  double cx, cy, rx, ry, rot;
  TextureParams tex;

  bool covers(double x, double y) const {
    if (full) return true;
    const double dx = x - cx, dy = y - cy;
    const double c = std::cos(rot), s = std::sin(rot);
    const double ex = (c * dx + s * dy) / rx;
    const double ey = (-s * dx + c * dy) / ry;
    return ex * ex + ey * ey <= 1.0;
  }
};

inline TextureParams random_texture(std::mt19937_64& rng, double w, double h) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  TextureParams t;
  const int n_waves = 3 + static_cast<int>(rng() % 4);
  for (int i = 0; i < n_waves; ++i) {
    TextureParams::Wave wv;
    // cycles across the image from gentle to near the x2-downsample limit
    const double cycles = 0.5 + uni(rng) * (w / 5.0);
    const double theta = uni(rng) * 2.0 * M_PI;
    wv.fx = 2.0 * M_PI * cycles * std::cos(theta) / w;
    wv.fy = 2.0 * M_PI * cycles * std::sin(theta) / h;
    wv.phase = uni(rng) * 2.0 * M_PI;
    wv.amp = 0.05 + 0.25 * uni(rng) / std::sqrt(static_cast<double>(n_waves));
    t.waves.push_back(wv);
  }
  for (int c = 0; c < 3; ++c) {
    t.base[c] = 0.25 + 0.5 * uni(rng);
    t.tint[c] = 0.6 + 0.4 * uni(rng);
  }
  t.gx = (uni(rng) - 0.5) * 0.4 / w;
  t.gy = (uni(rng) - 0.5) * 0.4 / h;
  return t;
}

inline LightField make_scene(std::uint64_t seed, i64 U, i64 V, i64 H, i64 W) {
  auto rng = make_rng(seed, "synth-scene");
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  std::vector<Layer> layers;  // front to back
  const int n_fg = 2 + static_cast<int>(rng() % 3);
  double disp = 1.0 + 0.5 * uni(rng);  // nearest layer moves most
  for (int i = 0; i < n_fg; ++i) {
    Layer l;
    l.full = false;
    l.disparity = disp;
    disp *= 0.4 + 0.3 * uni(rng);
    l.cx = W * (0.2 + 0.6 * uni(rng));
    l.cy = H * (0.2 + 0.6 * uni(rng));
    l.rx = W * (0.08 + 0.22 * uni(rng));
    l.ry = H * (0.08 + 0.22 * uni(rng));
    l.rot = uni(rng) * M_PI;
    l.tex = random_texture(rng, static_cast<double>(W), static_cast<double>(H));
    layers.push_back(l);
  }
  Layer bg;
  bg.full = true;
  bg.disparity = -0.2 - 0.3 * uni(rng);  // behind the focal plane
  bg.cx = bg.cy = bg.rx = bg.ry = bg.rot = 0;
  bg.tex = random_texture(rng, static_cast<double>(W), static_cast<double>(H));
  layers.push_back(bg);

  LightField lf(U, V, H, W, 3, LfDtype::F32, ColorTag::RGB);
  const double uc = (U - 1) / 2.0, vc = (V - 1) / 2.0;
  for (i64 u = 0; u < U; ++u)
    for (i64 v = 0; v < V; ++v) {
      const double du = static_cast<double>(u) - uc;
      const double dv = static_cast<double>(v) - vc;
      for (i64 y = 0; y < H; ++y)
        for (i64 x = 0; x < W; ++x) {
          for (const Layer& l : layers) {
            const double xs = x + l.disparity * du;
            const double ys = y + l.disparity * dv;
            if (!l.covers(xs, ys)) continue;
            const double lum = l.tex.luminance(xs, ys);
            for (int c = 0; c < 3; ++c)
              lf.atf(u, v, c, y, x) = static_cast<float>(
                  clamp01(l.tex.base[c] + l.tex.tint[c] * lum));
            break;
          }
        }
    }
  return lf;
}

inline std::vector<std::pair<std::string, LightField>> make_dataset(std::uint64_t seed,
                                                                    int n_scenes, i64 U, i64 V,
                                                                    i64 H, i64 W) {
  std::vector<std::pair<std::string, LightField>> out;
  for (int i = 0; i < n_scenes; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%03d", i);
    out.emplace_back(name, make_scene(mix64(seed + 0x9e37u) + static_cast<std::uint64_t>(i) * 7919u,
                                      U, V, H, W));
  }
  return out;
}

}  // namespace synth
}  // namespace ddan
