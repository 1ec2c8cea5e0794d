#pragma once

#include <Eigen/Core>

#include "ddan/array.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ddan {

struct ConvGeom {
  i64 batch, cin, h, w, cout, kh, kw;
  i64 stride, dilation, pad;
  i64 hout, wout;

  i64 k_vol() const { return cin * kh * kw; }
  i64 out_pix() const { return hout * wout; }
};

inline ConvGeom conv_geometry(const Dims4& xd, const Dims4& wd, i64 stride, i64 dilation,
                              i64 pad) {
  if (stride < 1) throw std::invalid_argument("conv2d: stride must be >= 1");
  if (dilation < 1) throw std::invalid_argument("conv2d: dilation must be >= 1");
  if (pad < 0) throw std::invalid_argument("conv2d: pad must be >= 0");
  if (xd[1] != wd[1])
    throw std::invalid_argument("conv2d: input channels (" + std::to_string(xd[1]) +
                                ") do not match kernel channels (" + std::to_string(wd[1]) + ")");
  ConvGeom g;
  g.batch = xd[0];
  g.cin = xd[1];
  g.h = xd[2];
  g.w = xd[3];
  g.cout = wd[0];
  g.kh = wd[2];
  g.kw = wd[3];
  g.stride = stride;
  g.dilation = dilation;
  g.pad = pad;
  g.hout = (g.h + 2 * pad - dilation * (g.kh - 1) - 1) / stride + 1;
  g.wout = (g.w + 2 * pad - dilation * (g.kw - 1) - 1) / stride + 1;
  if (g.h + 2 * pad < dilation * (g.kh - 1) + 1 || g.w + 2 * pad < dilation * (g.kw - 1) + 1 ||
      g.hout < 1 || g.wout < 1)
    throw std::invalid_argument("conv2d: non-positive output extent for input " + dims_str(xd) +
                                ", kernel " + dims_str(wd));
  return g;
}

namespace detail {

template <typename S>
using MatRM = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using MapRM = Eigen::Map<MatRM<S>>;
template <typename S>
using CMapRM = Eigen::Map<const MatRM<S>>;

// Fill a (cin*kh*kw) x (hout*wout) row-major patch matrix for one image.
template <typename S>
void im2col(const S* x, const ConvGeom& g, S* col) {
  i64 row = 0;
  for (i64 c = 0; c < g.cin; ++c) {
    const S* xc = x + c * g.h * g.w;
    for (i64 ki = 0; ki < g.kh; ++ki) {
      for (i64 kj = 0; kj < g.kw; ++kj, ++row) {
        S* dst = col + row * g.out_pix();
        const i64 dy = ki * g.dilation - g.pad;
        const i64 dx = kj * g.dilation - g.pad;
        for (i64 oy = 0; oy < g.hout; ++oy) {
          const i64 iy = oy * g.stride + dy;
          if (iy < 0 || iy >= g.h) {
            std::fill(dst, dst + g.wout, S(0));
            dst += g.wout;
            continue;
          }
          const S* src = xc + iy * g.w;
          for (i64 ox = 0; ox < g.wout; ++ox) {
            const i64 ix = ox * g.stride + dx;
            *dst++ = (ix >= 0 && ix < g.w) ? src[ix] : S(0);
          }
        }
      }
    }
  }
}

// Scatter-add the patch-matrix gradient back onto one input image.
template <typename S>
void col2im_add(const S* col, const ConvGeom& g, S* x) {
  i64 row = 0;
  for (i64 c = 0; c < g.cin; ++c) {
    S* xc = x + c * g.h * g.w;
    for (i64 ki = 0; ki < g.kh; ++ki) {
      for (i64 kj = 0; kj < g.kw; ++kj, ++row) {
        const S* src = col + row * g.out_pix();
        const i64 dy = ki * g.dilation - g.pad;
        const i64 dx = kj * g.dilation - g.pad;
        for (i64 oy = 0; oy < g.hout; ++oy) {
          const i64 iy = oy * g.stride + dy;
          if (iy < 0 || iy >= g.h) {
            src += g.wout;
            continue;
          }
          S* dst = xc + iy * g.w;
          for (i64 ox = 0; ox < g.wout; ++ox) {
            const i64 ix = ox * g.stride + dx;
            if (ix >= 0 && ix < g.w) dst[ix] += src[ox];
          }
          src += g.wout;
        }
      }
    }
  }
}

inline bool conv_is_1x1(const ConvGeom& g) {
  return g.kh == 1 && g.kw == 1 && g.stride == 1 && g.pad == 0;
}

}  // namespace detail

template <typename S>
Arr4<S> conv2d_forward(const Arr4<S>& x, const Arr4<S>& w, const Arr4<S>* bias,
                       const ConvGeom& g) {
  using namespace detail;
  Arr4<S> out(g.batch, g.cout, g.hout, g.wout);
  CMapRM<S> wm(w.data.data(), g.cout, g.k_vol());
  const bool direct = conv_is_1x1(g);
  const i64 pix = g.out_pix();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (i64 b = 0; b < g.batch; ++b) {
    thread_local std::vector<S> colbuf;
    const S* colp;
    if (direct) {
      colp = x.plane(b, 0);
    } else {
      colbuf.resize(static_cast<size_t>(g.k_vol()) * pix);
      im2col(x.plane(b, 0), g, colbuf.data());
      colp = colbuf.data();
    }
    CMapRM<S> cm(colp, g.k_vol(), pix);
    MapRM<S> om(out.plane(b, 0), g.cout, pix);
    om.noalias() = wm * cm;
    if (bias)
      for (i64 c = 0; c < g.cout; ++c) om.row(c).array() += bias->data[c];
  }
  return out;
}

template <typename S>
Arr4<S> conv2d_grad_input(const Arr4<S>& gout, const Arr4<S>& w, const ConvGeom& g) {
  using namespace detail;
  Arr4<S> gx(g.batch, g.cin, g.h, g.w);
  CMapRM<S> wm(w.data.data(), g.cout, g.k_vol());
  const bool direct = conv_is_1x1(g);
  const i64 pix = g.out_pix();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (i64 b = 0; b < g.batch; ++b) {
    CMapRM<S> gm(gout.plane(b, 0), g.cout, pix);
    if (direct) {
      MapRM<S> xm(gx.plane(b, 0), g.k_vol(), pix);
      xm.noalias() = wm.transpose() * gm;
    } else {
      thread_local std::vector<S> colbuf;
      colbuf.resize(static_cast<size_t>(g.k_vol()) * pix);
      MapRM<S> cm(colbuf.data(), g.k_vol(), pix);
      cm.noalias() = wm.transpose() * gm;
      col2im_add(colbuf.data(), g, gx.plane(b, 0));
    }
  }
  return gx;
}

// Weight gradient. Per-image partials are reduced in batch order so the
// result does not depend on the number of worker threads.
template <typename S>
Arr4<S> conv2d_grad_weight(const Arr4<S>& gout, const Arr4<S>& x, const ConvGeom& g) {
  using namespace detail;
  const i64 wn = g.cout * g.k_vol();
  const i64 pix = g.out_pix();
  std::vector<S> partial(static_cast<size_t>(g.batch) * wn);
  const bool direct = conv_is_1x1(g);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (i64 b = 0; b < g.batch; ++b) {
    const S* colp;
    thread_local std::vector<S> colbuf;
    if (direct) {
      colp = x.plane(b, 0);
    } else {
      colbuf.resize(static_cast<size_t>(g.k_vol()) * pix);
      im2col(x.plane(b, 0), g, colbuf.data());
      colp = colbuf.data();
    }
    CMapRM<S> cm(colp, g.k_vol(), pix);
    CMapRM<S> gm(gout.plane(b, 0), g.cout, pix);
    MapRM<S> pm(partial.data() + b * wn, g.cout, g.k_vol());
    pm.noalias() = gm * cm.transpose();
  }
  Arr4<S> gw(g.cout, g.cin, g.kh, g.kw);
  for (i64 b = 0; b < g.batch; ++b) {
    const S* p = partial.data() + b * wn;
    for (i64 i = 0; i < wn; ++i) gw.data[i] += p[i];
  }
  return gw;
}

template <typename S>
Arr4<S> conv2d_grad_bias(const Arr4<S>& gout, const ConvGeom& g) {
  Arr4<S> gb(1, g.cout, 1, 1);
  for (i64 b = 0; b < g.batch; ++b)
    for (i64 c = 0; c < g.cout; ++c) {
      const S* p = gout.plane(b, c);
      S acc = S(0);
      for (i64 i = 0; i < g.out_pix(); ++i) acc += p[i];
      gb.data[c] += acc;
    }
  return gb;
}

}  // namespace ddan
