#pragma once

#include "ddan/array.hpp"

namespace ddan {

inline constexpr double kPsnrCap = 100.0;

// 10*log10(peak^2/MSE), capped at 100 dB (identical planes report the cap).
template <typename S>
double psnr(const Image<S>& x, const Image<S>& y, double peak) {
  if (x.h != y.h || x.w != y.w)
    throw std::invalid_argument("psnr: plane dims mismatch");
  if (x.numel() == 0) throw std::invalid_argument("psnr: empty planes");
  double mse = 0.0;
  for (i64 i = 0; i < x.numel(); ++i) {
    const double d = static_cast<double>(x.data[i]) - static_cast<double>(y.data[i]);
    mse += d * d;
  }
  mse /= static_cast<double>(x.numel());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

namespace detail {
inline const std::array<double, 11>& ssim_window() {
  static const std::array<double, 11> w = [] {
    std::array<double, 11> g{};
    const double sigma = 1.5;
    double sum = 0.0;
    for (int i = 0; i < 11; ++i) {
      const double d = i - 5;
      g[i] = std::exp(-d * d / (2.0 * sigma * sigma));
      sum += g[i];
    }
    for (double& v : g) v /= sum;
    return g;
  }();
  return w;
}

// Separable 11-tap weighted filtering at valid positions only.
inline Image<double> ssim_filter(const Image<double>& x) {
  const auto& w = ssim_window();
  Image<double> tmp(x.h, x.w - 10);
  for (i64 y = 0; y < x.h; ++y)
    for (i64 c = 0; c < tmp.w; ++c) {
      double acc = 0.0;
      for (int k = 0; k < 11; ++k) acc += w[k] * x.at(y, c + k);
      tmp.at(y, c) = acc;
    }
  Image<double> out(x.h - 10, x.w - 10);
  for (i64 y = 0; y < out.h; ++y)
    for (i64 c = 0; c < out.w; ++c) {
      double acc = 0.0;
      for (int k = 0; k < 11; ++k) acc += w[k] * tmp.at(y + k, c);
      out.at(y, c) = acc;
    }
  return out;
}
}  // namespace detail

// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03,
// mean over valid window positions.
template <typename S>
double ssim(const Image<S>& x, const Image<S>& y, double peak) {
  if (x.h != y.h || x.w != y.w)
    throw std::invalid_argument("ssim: plane dims mismatch");
  if (x.h < 11 || x.w < 11)
    throw std::invalid_argument("ssim: plane smaller than the 11x11 window");
  Image<double> xd = x.template cast<double>();
  Image<double> yd = y.template cast<double>();
  Image<double> xx(x.h, x.w), yy(x.h, x.w), xy(x.h, x.w);
  for (i64 i = 0; i < x.numel(); ++i) {
    xx.data[i] = xd.data[i] * xd.data[i];
    yy.data[i] = yd.data[i] * yd.data[i];
    xy.data[i] = xd.data[i] * yd.data[i];
  }
  const Image<double> mx = detail::ssim_filter(xd);
  const Image<double> my = detail::ssim_filter(yd);
  const Image<double> mxx = detail::ssim_filter(xx);
  const Image<double> myy = detail::ssim_filter(yy);
  const Image<double> mxy = detail::ssim_filter(xy);
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);
  double acc = 0.0;
  for (i64 i = 0; i < mx.numel(); ++i) {
    const double mux = mx.data[i], muy = my.data[i];
    const double vx = mxx.data[i] - mux * mux;
    const double vy = myy.data[i] - muy * muy;
    const double cov = mxy.data[i] - mux * muy;
    acc += ((2.0 * mux * muy + c1) * (2.0 * cov + c2)) /
           ((mux * mux + muy * muy + c1) * (vx + vy + c2));
  }
  return acc / static_cast<double>(mx.numel());
}

}  // namespace ddan
