#pragma once

#include <atomic>
#include <type_traits>
#include <functional>
#include <memory>
#include <unordered_map>
#include <unordered_set>

#include "ddan/array.hpp"
#include "ddan/conv_impl.hpp"

namespace ddan {

inline thread_local bool tl_grad_enabled = true;

struct NoGradGuard {
  bool prev;
  NoGradGuard() : prev(tl_grad_enabled) { tl_grad_enabled = false; }
  ~NoGradGuard() { tl_grad_enabled = prev; }
};

inline bool grad_enabled() { return tl_grad_enabled; }

// When set, every op asserts its output is free of NaN/Inf.
inline std::atomic<bool> g_check_finite{true};

// Reverse-mode rank-4 tensor. A Tensor4 is a cheap handle onto a graph node;
// ops record closures that route gradients to their inputs. Gradients persist
// (and accumulate across backward() calls) only on leaves.
template <typename S>
class Tensor4 {
 public:
  struct Node;
  using NodePtr = std::shared_ptr<Node>;
  using Flow = std::unordered_map<Node*, Arr4<S>>;
  using Backprop = std::function<void(const Arr4<S>&, Flow&)>;

  struct Node {
    Arr4<S> value;
    Arr4<S> grad;  // leaves only
    bool requires_grad = false;
    std::vector<NodePtr> parents;
    Backprop backprop;
    bool is_leaf() const { return !backprop; }
  };

  Tensor4() = default;

  static Tensor4 leaf(Arr4<S> value, bool requires_grad = false) {
    Tensor4 t;
    t.node_ = std::make_shared<Node>();
    t.node_->value = std::move(value);
    t.node_->requires_grad = requires_grad;
    return t;
  }

  static Tensor4 from_op(Arr4<S> value, std::vector<NodePtr> parents, Backprop fn) {
    if (g_check_finite.load(std::memory_order_relaxed) && !all_finite(value))
      throw std::runtime_error("tensor op produced a non-finite value");
    bool need = false;
    if (grad_enabled())
      for (const auto& p : parents) need = need || (p && p->requires_grad);
    Tensor4 t;
    t.node_ = std::make_shared<Node>();
    t.node_->value = std::move(value);
    if (need) {
      t.node_->requires_grad = true;
      t.node_->parents = std::move(parents);
      t.node_->backprop = std::move(fn);
    }
    return t;
  }

  bool defined() const { return node_ != nullptr; }
  const Dims4& dims() const { return node_->value.dims; }
  const Arr4<S>& value() const { return node_->value; }
  Arr4<S>& value_mut() { return node_->value; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool has_history() const { return node_ && !node_->is_leaf(); }

  bool has_grad() const { return node_ && !node_->grad.empty(); }
  const Arr4<S>& grad() const {
    if (!has_grad()) throw std::runtime_error("tensor has no gradient");
    return node_->grad;
  }
  void zero_grad() {
    if (node_) node_->grad = Arr4<S>();
  }

  NodePtr node() const { return node_; }

  // Reverse pass from a scalar. Interior gradients are transient; leaf
  // gradients accumulate until zero_grad().
  void backward() const {
    if (!node_) throw std::runtime_error("backward: undefined tensor");
    if (node_->value.dims != Dims4{1, 1, 1, 1})
      throw std::invalid_argument("backward: loss must have dims (1,1,1,1), got " +
                                  dims_str(node_->value.dims));
    if (node_->is_leaf())
      throw std::runtime_error("backward: tensor has no computation history");

    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, size_t>> stack;
    stack.emplace_back(node_.get(), 0);
    seen.insert(node_.get());
    while (!stack.empty()) {
      auto& [n, i] = stack.back();
      if (i < n->parents.size()) {
        Node* p = n->parents[i++].get();
        if (p && !seen.count(p)) {
          seen.insert(p);
          stack.emplace_back(p, 0);
        }
      } else {
        order.push_back(n);
        stack.pop_back();
      }
    }

    Flow flow;
    flow.emplace(node_.get(), Arr4<S>(1, 1, 1, 1, S(1)));
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      Node* n = *it;
      auto f = flow.find(n);
      if (f == flow.end()) continue;
      Arr4<S> g = std::move(f->second);
      flow.erase(f);
      if (n->backprop) {
        n->backprop(g, flow);
      } else if (n->requires_grad) {
        if (n->grad.empty()) n->grad = Arr4<S>(n->value.dims);
        n->grad += g;
      }
    }
  }

  static void send(Flow& flow, const NodePtr& p, Arr4<S>&& contrib) {
    if (!p || !p->requires_grad) return;
    auto it = flow.find(p.get());
    if (it == flow.end()) {
      if (p->is_leaf()) {
        if (p->grad.empty()) p->grad = Arr4<S>(p->value.dims);
        p->grad += contrib;
      } else {
        flow.emplace(p.get(), std::move(contrib));
      }
    } else {
      it->second += contrib;
    }
  }

 private:
  NodePtr node_;
};

// ---- operations ----

template <typename S>
Tensor4<S> conv2d(const Tensor4<S>& x, const Tensor4<S>& w,
                  const Tensor4<std::type_identity_t<S>>* bias, i64 stride = 1, i64 dilation = 1,
                  i64 pad = 0) {
  const ConvGeom g = conv_geometry(x.dims(), w.dims(), stride, dilation, pad);
  if (bias && bias->dims() != Dims4{1, g.cout, 1, 1})
    throw std::invalid_argument("conv2d: bias dims must be (1," + std::to_string(g.cout) +
                                ",1,1), got " + dims_str(bias->dims()));
  Arr4<S> out =
      conv2d_forward(x.value(), w.value(), bias ? &bias->value() : nullptr, g);
  auto xn = x.node(), wn = w.node();
  auto bn = bias ? bias->node() : nullptr;
  return Tensor4<S>::from_op(
      std::move(out), {xn, wn, bn},
      [xn, wn, bn, g](const Arr4<S>& gout, typename Tensor4<S>::Flow& flow) {
        if (xn->requires_grad)
          Tensor4<S>::send(flow, xn, conv2d_grad_input(gout, wn->value, g));
        if (wn->requires_grad)
          Tensor4<S>::send(flow, wn, conv2d_grad_weight(gout, xn->value, g));
        if (bn && bn->requires_grad) Tensor4<S>::send(flow, bn, conv2d_grad_bias(gout, g));
      });
}

template <typename S>
Tensor4<S> relu(const Tensor4<S>& x) {
  Arr4<S> out = x.value();
  for (S& v : out.data) v = v > S(0) ? v : S(0);
  auto xn = x.node();
  return Tensor4<S>::from_op(std::move(out), {xn},
                             [xn](const Arr4<S>& gout, typename Tensor4<S>::Flow& flow) {
                               Arr4<S> gx(gout.dims);
                               const auto& xv = xn->value;
                               for (i64 i = 0; i < gout.numel(); ++i)
                                 gx.data[i] = xv.data[i] > S(0) ? gout.data[i] : S(0);
                               Tensor4<S>::send(flow, xn, std::move(gx));
                             });
}

template <typename S>
Tensor4<S> sigmoid(const Tensor4<S>& x) {
  Arr4<S> out(x.dims());
  const auto& xv = x.value();
  for (i64 i = 0; i < xv.numel(); ++i) {
    const S v = xv.data[i];
    if (v >= S(0)) {
      out.data[i] = S(1) / (S(1) + std::exp(-v));
    } else {
      const S e = std::exp(v);
      out.data[i] = e / (S(1) + e);
    }
  }
  auto xn = x.node();
  Arr4<S> saved = out;  // gating tensors are small
  return Tensor4<S>::from_op(std::move(out), {xn},
                             [xn, saved](const Arr4<S>& gout, typename Tensor4<S>::Flow& flow) {
                               Arr4<S> gx(gout.dims);
                               for (i64 i = 0; i < gout.numel(); ++i) {
                                 const S s = saved.data[i];
                                 gx.data[i] = gout.data[i] * s * (S(1) - s);
                               }
                               Tensor4<S>::send(flow, xn, std::move(gx));
                             });
}

template <typename S>
Tensor4<S> global_avg_pool(const Tensor4<S>& x) {
  const Dims4 d = x.dims();
  const i64 hw = d[2] * d[3];
  if (hw == 0) throw std::invalid_argument("global_avg_pool: empty spatial extent");
  Arr4<S> out(d[0], d[1], 1, 1);
  for (i64 b = 0; b < d[0]; ++b)
    for (i64 c = 0; c < d[1]; ++c) {
      const S* p = x.value().plane(b, c);
      S acc = S(0);
      for (i64 i = 0; i < hw; ++i) acc += p[i];
      out.at(b, c, 0, 0) = acc / static_cast<S>(hw);
    }
  auto xn = x.node();
  return Tensor4<S>::from_op(std::move(out), {xn},
                             [xn, d, hw](const Arr4<S>& gout, typename Tensor4<S>::Flow& flow) {
                               Arr4<S> gx(d);
                               for (i64 b = 0; b < d[0]; ++b)
                                 for (i64 c = 0; c < d[1]; ++c) {
                                   const S gv = gout.at(b, c, 0, 0) / static_cast<S>(hw);
                                   S* p = gx.plane(b, c);
                                   for (i64 i = 0; i < hw; ++i) p[i] = gv;
                                 }
                               Tensor4<S>::send(flow, xn, std::move(gx));
                             });
}

namespace detail {
// out[b, c, a*i+p, a*j+q] = in[b, c*a*a + p*a + q, i, j]
template <typename S>
Arr4<S> shuffle_fwd(const Arr4<S>& in, i64 a) {
  const Dims4 d = in.dims;
  const i64 cout = d[1] / (a * a);
  Arr4<S> out(d[0], cout, d[2] * a, d[3] * a);
  for (i64 b = 0; b < d[0]; ++b)
    for (i64 c = 0; c < cout; ++c)
      for (i64 p = 0; p < a; ++p)
        for (i64 q = 0; q < a; ++q) {
          const S* src = in.plane(b, c * a * a + p * a + q);
          for (i64 i = 0; i < d[2]; ++i) {
            S* dst = out.plane(b, c) + (a * i + p) * out.dims[3] + q;
            for (i64 j = 0; j < d[3]; ++j) dst[j * a] = src[i * d[3] + j];
          }
        }
  return out;
}

template <typename S>
Arr4<S> shuffle_bwd(const Arr4<S>& gout, const Dims4& ind, i64 a) {
  Arr4<S> gx(ind);
  const i64 cout = ind[1] / (a * a);
  for (i64 b = 0; b < ind[0]; ++b)
    for (i64 c = 0; c < cout; ++c)
      for (i64 p = 0; p < a; ++p)
        for (i64 q = 0; q < a; ++q) {
          S* dst = gx.plane(b, c * a * a + p * a + q);
          for (i64 i = 0; i < ind[2]; ++i) {
            const S* src = gout.plane(b, c) + (a * i + p) * gout.dims[3] + q;
            for (i64 j = 0; j < ind[3]; ++j) dst[i * ind[3] + j] = src[j * a];
          }
        }
  return gx;
}
}  // namespace detail

template <typename S>
Tensor4<S> pixel_shuffle(const Tensor4<S>& x, i64 a) {
  if (a < 1) throw std::invalid_argument("pixel_shuffle: factor must be >= 1");
  const Dims4 d = x.dims();
  if (d[1] % (a * a) != 0)
    throw std::invalid_argument("pixel_shuffle: channel count " + std::to_string(d[1]) +
                                " not divisible by " + std::to_string(a * a));
  Arr4<S> out = detail::shuffle_fwd(x.value(), a);
  auto xn = x.node();
  return Tensor4<S>::from_op(std::move(out), {xn},
                             [xn, d, a](const Arr4<S>& gout, typename Tensor4<S>::Flow& flow) {
                               Tensor4<S>::send(flow, xn, detail::shuffle_bwd(gout, d, a));
                             });
}

template <typename S>
Tensor4<S> add(const Tensor4<S>& x, const Tensor4<S>& y) {
  if (x.dims() != y.dims())
    throw std::invalid_argument("add: dims " + dims_str(x.dims()) + " vs " + dims_str(y.dims()));
  Arr4<S> out = x.value();
  out += y.value();
  auto xn = x.node(), yn = y.node();
  return Tensor4<S>::from_op(std::move(out), {xn, yn},
                             [xn, yn](const Arr4<S>& gout, typename Tensor4<S>::Flow& flow) {
                               Tensor4<S>::send(flow, xn, Arr4<S>(gout));
                               Tensor4<S>::send(flow, yn, Arr4<S>(gout));
                             });
}

template <typename S>
Tensor4<S> scale(const Tensor4<S>& x, double c) {
  Arr4<S> out = x.value();
  for (S& v : out.data) v = static_cast<S>(v * c);
  auto xn = x.node();
  return Tensor4<S>::from_op(std::move(out), {xn},
                             [xn, c](const Arr4<S>& gout, typename Tensor4<S>::Flow& flow) {
                               Arr4<S> gx = gout;
                               for (S& v : gx.data) v = static_cast<S>(v * c);
                               Tensor4<S>::send(flow, xn, std::move(gx));
                             });
}

// Per-(b,c) scalar rescaling: x is (B,C,H,W), s is (B,C,1,1).
template <typename S>
Tensor4<S> scale_channels(const Tensor4<S>& x, const Tensor4<S>& s) {
  const Dims4 xd = x.dims(), sd = s.dims();
  if (sd != Dims4{xd[0], xd[1], 1, 1})
    throw std::invalid_argument("scale_channels: scale dims " + dims_str(sd) +
                                " incompatible with input " + dims_str(xd));
  const i64 hw = xd[2] * xd[3];
  Arr4<S> out(xd);
  for (i64 b = 0; b < xd[0]; ++b)
    for (i64 c = 0; c < xd[1]; ++c) {
      const S sv = s.value().at(b, c, 0, 0);
      const S* src = x.value().plane(b, c);
      S* dst = out.plane(b, c);
      for (i64 i = 0; i < hw; ++i) dst[i] = src[i] * sv;
    }
  auto xn = x.node(), sn = s.node();
  return Tensor4<S>::from_op(
      std::move(out), {xn, sn},
      [xn, sn, xd, hw](const Arr4<S>& gout, typename Tensor4<S>::Flow& flow) {
        if (xn->requires_grad) {
          Arr4<S> gx(xd);
          for (i64 b = 0; b < xd[0]; ++b)
            for (i64 c = 0; c < xd[1]; ++c) {
              const S sv = sn->value.at(b, c, 0, 0);
              const S* g = gout.plane(b, c);
              S* dst = gx.plane(b, c);
              for (i64 i = 0; i < hw; ++i) dst[i] = g[i] * sv;
            }
          Tensor4<S>::send(flow, xn, std::move(gx));
        }
        if (sn->requires_grad) {
          Arr4<S> gs(xd[0], xd[1], 1, 1);
          for (i64 b = 0; b < xd[0]; ++b)
            for (i64 c = 0; c < xd[1]; ++c) {
              const S* g = gout.plane(b, c);
              const S* xv = xn->value.plane(b, c);
              S acc = S(0);
              for (i64 i = 0; i < hw; ++i) acc += g[i] * xv[i];
              gs.at(b, c, 0, 0) = acc;
            }
          Tensor4<S>::send(flow, sn, std::move(gs));
        }
      });
}

template <typename S>
Tensor4<S> concat_channels(const std::vector<Tensor4<S>>& xs) {
  if (xs.empty()) throw std::invalid_argument("concat_channels: no inputs");
  const Dims4 d0 = xs[0].dims();
  i64 ctot = 0;
  for (const auto& x : xs) {
    const Dims4 d = x.dims();
    if (d[0] != d0[0] || d[2] != d0[2] || d[3] != d0[3])
      throw std::invalid_argument("concat_channels: incompatible dims " + dims_str(d));
    ctot += d[1];
  }
  Arr4<S> out(d0[0], ctot, d0[2], d0[3]);
  const i64 hw = d0[2] * d0[3];
  std::vector<typename Tensor4<S>::NodePtr> nodes;
  std::vector<i64> sizes;
  i64 coff = 0;
  for (const auto& x : xs) {
    const i64 c = x.dims()[1];
    for (i64 b = 0; b < d0[0]; ++b)
      std::copy(x.value().plane(b, 0), x.value().plane(b, 0) + c * hw, out.plane(b, coff));
    nodes.push_back(x.node());
    sizes.push_back(c);
    coff += c;
  }
  auto parents = nodes;
  return Tensor4<S>::from_op(
      std::move(out), std::move(parents),
      [nodes, sizes, d0, hw](const Arr4<S>& gout, typename Tensor4<S>::Flow& flow) {
        i64 off = 0;
        for (size_t k = 0; k < nodes.size(); ++k) {
          if (nodes[k]->requires_grad) {
            Arr4<S> gx(d0[0], sizes[k], d0[2], d0[3]);
            for (i64 b = 0; b < d0[0]; ++b)
              std::copy(gout.plane(b, off), gout.plane(b, off) + sizes[k] * hw, gx.plane(b, 0));
            Tensor4<S>::send(flow, nodes[k], std::move(gx));
          }
          off += sizes[k];
        }
      });
}

namespace detail {
template <typename S>
Arr4<S> transpose01_arr(const Arr4<S>& x) {
  Arr4<S> out(x.dims[1], x.dims[0], x.dims[2], x.dims[3]);
  const i64 hw = x.dims[2] * x.dims[3];
  for (i64 a = 0; a < x.dims[0]; ++a)
    for (i64 b = 0; b < x.dims[1]; ++b)
      std::copy(x.plane(a, b), x.plane(a, b) + hw, out.plane(b, a));
  return out;
}
}  // namespace detail

// Swap the leading two dims: (N,C,H,W) <-> (C,N,H,W).
template <typename S>
Tensor4<S> transpose01(const Tensor4<S>& x) {
  auto xn = x.node();
  return Tensor4<S>::from_op(detail::transpose01_arr(x.value()), {xn},
                             [xn](const Arr4<S>& gout, typename Tensor4<S>::Flow& flow) {
                               Tensor4<S>::send(flow, xn, detail::transpose01_arr(gout));
                             });
}

// Mean absolute difference over all elements, as a (1,1,1,1) tensor.
template <typename S>
Tensor4<S> l1_loss(const Tensor4<S>& pred, const Tensor4<S>& target) {
  if (pred.dims() != target.dims())
    throw std::invalid_argument("l1_loss: dims " + dims_str(pred.dims()) + " vs " +
                                dims_str(target.dims()));
  const i64 n = pred.value().numel();
  if (n == 0) throw std::invalid_argument("l1_loss: empty tensors");
  double acc = 0;
  for (i64 i = 0; i < n; ++i)
    acc += std::abs(static_cast<double>(pred.value().data[i]) -
                    static_cast<double>(target.value().data[i]));
  Arr4<S> out(1, 1, 1, 1);
  out.data[0] = static_cast<S>(acc / static_cast<double>(n));
  auto pn = pred.node(), tn = target.node();
  return Tensor4<S>::from_op(
      std::move(out), {pn, tn},
      [pn, tn, n](const Arr4<S>& gout, typename Tensor4<S>::Flow& flow) {
        const S g = gout.data[0] / static_cast<S>(n);
        auto signed_grad = [&](S sgn) {
          Arr4<S> gr(pn->value.dims);
          for (i64 i = 0; i < n; ++i) {
            const S d = pn->value.data[i] - tn->value.data[i];
            gr.data[i] = d > S(0) ? sgn * g : (d < S(0) ? -sgn * g : S(0));
          }
          return gr;
        };
        if (pn->requires_grad) Tensor4<S>::send(flow, pn, signed_grad(S(1)));
        if (tn->requires_grad) Tensor4<S>::send(flow, tn, signed_grad(S(-1)));
      });
}

// Fixed-projection reduction to a scalar; the gradient-check workhorse.
template <typename S>
Tensor4<S> weighted_sum(const Tensor4<S>& x, const Arr4<S>& w) {
  if (x.dims() != w.dims)
    throw std::invalid_argument("weighted_sum: dims " + dims_str(x.dims()) + " vs " +
                                dims_str(w.dims));
  double acc = 0;
  for (i64 i = 0; i < w.numel(); ++i)
    acc += static_cast<double>(x.value().data[i]) * static_cast<double>(w.data[i]);
  Arr4<S> out(1, 1, 1, 1);
  out.data[0] = static_cast<S>(acc);
  auto xn = x.node();
  return Tensor4<S>::from_op(std::move(out), {xn},
                             [xn, w](const Arr4<S>& gout, typename Tensor4<S>::Flow& flow) {
                               Arr4<S> gx = w;
                               for (S& v : gx.data) v *= gout.data[0];
                               Tensor4<S>::send(flow, xn, std::move(gx));
                             });
}

}  // namespace ddan
