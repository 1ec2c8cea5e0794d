#pragma once

#include "ddan/model.hpp"

namespace ddan {
namespace gradcheck {

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

inline Arr4<double> uniform(const Dims4& d, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
  Arr4<double> a(d);
  std::uniform_real_distribution<double> u(lo, hi);
  for (double& v : a.data) v = u(rng);
  return a;
}

// Uniform magnitude in [gap, gap+1), random sign; keeps kinks at distance.
inline Arr4<double> uniform_away_from_zero(const Dims4& d, std::mt19937_64& rng,
                                           double gap = 0.1) {
  Arr4<double> a(d);
  std::uniform_real_distribution<double> u(gap, gap + 1.0);
  for (double& v : a.data) v = (rng() & 1 ? 1.0 : -1.0) * u(rng);
  return a;
}

using BuildFn =
    std::function<Tensor4<double>(const std::vector<Tensor4<double>>&)>;

// Central-difference check of d<proj, f(x)>/dx for every element of every
// input, against one reverse pass. Returns the worst relative error.
inline double check_op(const BuildFn& f, std::vector<Arr4<double>> inputs, std::mt19937_64& rng,
                       double h = 1e-5) {
  std::vector<Tensor4<double>> leaves;
  leaves.reserve(inputs.size());
  for (auto& a : inputs) leaves.push_back(Tensor4<double>::leaf(a, true));
  Tensor4<double> out = f(leaves);
  const Arr4<double> proj = uniform(out.dims(), rng);
  weighted_sum(out, proj).backward();

  auto loss_at = [&]() {
    NoGradGuard ng;
    std::vector<Tensor4<double>> ls;
    ls.reserve(inputs.size());
    for (auto& a : inputs) ls.push_back(Tensor4<double>::leaf(a));
    const Tensor4<double> o = f(ls);
    double acc = 0.0;
    for (i64 i = 0; i < o.value().numel(); ++i) acc += o.value().data[i] * proj.data[i];
    return acc;
  };

  double worst = 0.0;
  for (size_t k = 0; k < inputs.size(); ++k) {
    const Arr4<double>* g = leaves[k].has_grad() ? &leaves[k].grad() : nullptr;
    for (i64 i = 0; i < inputs[k].numel(); ++i) {
      const double orig = inputs[k].data[i];
      inputs[k].data[i] = orig + h;
      const double lp = loss_at();
      inputs[k].data[i] = orig - h;
      const double lm = loss_at();
      inputs[k].data[i] = orig;
      const double fd = (lp - lm) / (2.0 * h);
      const double an = g ? g->data[i] : 0.0;
      worst = std::max(worst, rel_err(an, fd));
    }
  }
  return worst;
}

struct OpReport {
  std::string op;
  double max_rel_err = 0.0;
};

inline std::vector<OpReport> run_op_suite(int trials, std::uint64_t seed) {
  auto rng = make_rng(seed, "gradcheck");
  auto dim = [&](i64 lo, i64 hi) {
    return lo + static_cast<i64>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  std::vector<OpReport> reports;
  auto record = [&](const std::string& name, auto&& gen) {
    OpReport r{name, 0.0};
    for (int t = 0; t < trials; ++t) r.max_rel_err = std::max(r.max_rel_err, gen());
    reports.push_back(r);
  };

  record("conv2d", [&] {
    const i64 b = dim(1, 3), cin = dim(1, 3), cout = dim(1, 3);
    const i64 k = (rng() & 1) ? 3 : 1;
    const i64 dil = k == 3 ? dim(1, 2) : 1;
    const i64 pad = k == 3 ? dil : 0;
    const i64 stride = (k == 3 && (rng() % 4 == 0)) ? 2 : 1;
    const i64 hw = dim(4, 6);
    return check_op(
        [=](const std::vector<Tensor4<double>>& in) {
          return conv2d(in[0], in[1], &in[2], stride, dil, pad);
        },
        {uniform({b, cin, hw, hw}, rng), uniform({cout, cin, k, k}, rng),
         uniform({1, cout, 1, 1}, rng)},
        rng);
  });

  record("relu", [&] {
    const i64 b = dim(1, 2), c = dim(1, 3), hw = dim(2, 5);
    return check_op([](const std::vector<Tensor4<double>>& in) { return relu(in[0]); },
                    {uniform_away_from_zero({b, c, hw, hw}, rng)}, rng);
  });

  record("sigmoid", [&] {
    const i64 b = dim(1, 2), c = dim(1, 3), hw = dim(2, 5);
    return check_op([](const std::vector<Tensor4<double>>& in) { return sigmoid(in[0]); },
                    {uniform({b, c, hw, hw}, rng, -3.0, 3.0)}, rng);
  });

  record("global_avg_pool", [&] {
    const i64 b = dim(1, 3), c = dim(1, 3), hw = dim(1, 6);
    return check_op(
        [](const std::vector<Tensor4<double>>& in) { return global_avg_pool(in[0]); },
        {uniform({b, c, hw, hw}, rng)}, rng);
  });

  record("pixel_shuffle", [&] {
    const i64 b = dim(1, 2), c = dim(1, 2), a = dim(1, 2), hw = dim(2, 4);
    return check_op(
        [=](const std::vector<Tensor4<double>>& in) { return pixel_shuffle(in[0], a); },
        {uniform({b, c * a * a, hw, hw}, rng)}, rng);
  });

  record("add", [&] {
    const Dims4 d{dim(1, 2), dim(1, 3), dim(2, 4), dim(2, 4)};
    return check_op(
        [](const std::vector<Tensor4<double>>& in) { return add(in[0], in[1]); },
        {uniform(d, rng), uniform(d, rng)}, rng);
  });

  record("scale_channels", [&] {
    const i64 b = dim(1, 3), c = dim(1, 3), hw = dim(2, 4);
    return check_op(
        [](const std::vector<Tensor4<double>>& in) { return scale_channels(in[0], in[1]); },
        {uniform({b, c, hw, hw}, rng), uniform({b, c, 1, 1}, rng)}, rng);
  });

  record("concat_channels", [&] {
    const i64 b = dim(1, 2), hw = dim(2, 4);
    return check_op(
        [](const std::vector<Tensor4<double>>& in) {
          return concat_channels<double>({in[0], in[1], in[2]});
        },
        {uniform({b, dim(1, 2), hw, hw}, rng), uniform({b, dim(1, 3), hw, hw}, rng),
         uniform({b, dim(1, 2), hw, hw}, rng)},
        rng);
  });

  record("transpose01", [&] {
    const Dims4 d{dim(1, 3), dim(1, 3), dim(2, 4), dim(2, 4)};
    return check_op(
        [](const std::vector<Tensor4<double>>& in) { return transpose01(in[0]); },
        {uniform(d, rng)}, rng);
  });

  record("l1_loss", [&] {
    const Dims4 d{dim(1, 2), dim(1, 2), dim(2, 4), dim(2, 4)};
    // keep |x - y| away from the kink
    Arr4<double> x = uniform(d, rng);
    Arr4<double> y = x;
    Arr4<double> gap = uniform_away_from_zero(d, rng, 0.2);
    for (i64 i = 0; i < y.numel(); ++i) y.data[i] += gap.data[i];
    return check_op(
        [](const std::vector<Tensor4<double>>& in) { return l1_loss(in[0], in[1]); },
        {std::move(x), std::move(y)}, rng);
  });

  record("sigmoid_of_conv2d", [&] {
    const i64 b = dim(1, 2), cin = dim(1, 2), cout = dim(1, 2), hw = dim(3, 5);
    return check_op(
        [](const std::vector<Tensor4<double>>& in) {
          return sigmoid(conv2d(in[0], in[1], &in[2], 1, 1, 1));
        },
        {uniform({b, cin, hw, hw}, rng), uniform({cout, cin, 3, 3}, rng),
         uniform({1, cout, 1, 1}, rng)},
        rng);
  });

  record("residual_block", [&] {
    const i64 b = dim(1, 2), c = dim(1, 2), hw = dim(3, 5);
    return check_op(
        [](const std::vector<Tensor4<double>>& in) {
          return add(in[0], conv2d(relu(conv2d(in[0], in[1], &in[2], 1, 1, 1)), in[3], &in[4], 1,
                                   1, 1));
        },
        {uniform({b, c, hw, hw}, rng), uniform({c, c, 3, 3}, rng), uniform({1, c, 1, 1}, rng),
         uniform({c, c, 3, 3}, rng), uniform({1, c, 1, 1}, rng)},
        rng);
  });

  return reports;
}

// Finite differences over every parameter of the composed tiny model.
// The step is 1e-6 here: with ~50k ReLU pre-activations in the graph, a
// 1e-5 window straddles kinks for a handful of parameters, which invalidates
// the central difference itself rather than the gradient under test.
inline double run_model_check(std::uint64_t seed, i64 hw = 8, double h = 1e-6) {
  ModelConfig cfg;
  cfg.angular_u = cfg.angular_v = 3;
  cfg.channels = 4;
  cfg.scale = 2;
  cfg.n_blocks = 1;
  Model<double> m = Model<double>::init(cfg, seed);
  auto rng = make_rng(seed, "gradcheck-model");
  const Arr4<double> input = uniform({cfg.n_views(), 1, hw, hw}, rng, 0.0, 1.0);
  Tensor4<double> out = m.forward(input);
  const Arr4<double> proj = uniform(out.dims(), rng);
  m.params.zero_grad();
  weighted_sum(out, proj).backward();

  auto loss_at = [&]() {
    NoGradGuard ng;
    const Tensor4<double> o = m.forward(input);
    double acc = 0.0;
    for (i64 i = 0; i < o.value().numel(); ++i) acc += o.value().data[i] * proj.data[i];
    return acc;
  };

  double worst = 0.0;
  for (auto& p : m.params.all()) {
    const Arr4<double>* g = p.value.has_grad() ? &p.value.grad() : nullptr;
    Arr4<double>& v = p.value.value_mut();
    for (i64 i = 0; i < v.numel(); ++i) {
      const double orig = v.data[i];
      v.data[i] = orig + h;
      const double lp = loss_at();
      v.data[i] = orig - h;
      const double lm = loss_at();
      v.data[i] = orig;
      const double fd = (lp - lm) / (2.0 * h);
      worst = std::max(worst, rel_err(g ? g->data[i] : 0.0, fd));
    }
  }
  return worst;
}

}  // namespace gradcheck
}  // namespace ddan
