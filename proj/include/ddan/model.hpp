#pragma once

#include "ddan/adam.hpp"
#include "ddan/autograd.hpp"
#include "ddan/params.hpp"
#include "ddan/resample.hpp"

namespace ddan {

enum class Structure { dual_branch, cascaded };

struct ModelConfig {
  int angular_u = 5, angular_v = 5;
  int channels = 32;  // feature depth C
  int scale = 2;
  int n_blocks = 4;  // attention blocks per branch
  int ratio_view = 2, ratio_channel = 2;
  bool use_aspp = true, use_va = true, use_ca = true;
  Structure structure = Structure::dual_branch;

  int n_views() const { return angular_u * angular_v; }
  int reduced_view() const { return std::max(1, n_views() / ratio_view); }
  int reduced_channel() const { return std::max(1, channels / ratio_channel); }

  void validate() const {
    if (angular_u < 1 || angular_v < 1) throw std::invalid_argument("config: angular grid empty");
    if (channels < 1) throw std::invalid_argument("config: channels must be >= 1");
    if (n_blocks < 1) throw std::invalid_argument("config: n_blocks must be >= 1");
    if (scale != 2 && scale != 4) throw std::invalid_argument("config: scale must be 2 or 4");
    if (ratio_view < 1 || ratio_channel < 1)
      throw std::invalid_argument("config: reduction ratios must be >= 1");
  }
};

// key=value serialization and built-in presets (model_config.cpp)
std::string write_model_config(const ModelConfig& cfg);
ModelConfig parse_model_config(const std::string& text);
ModelConfig load_model_config(const std::string& path_or_preset);
std::vector<std::string> model_config_presets();

struct ParamShape {
  std::string name;
  Dims4 dims;
  i64 fan_in;  // 0 => zero-initialized (biases)
};

// The single source of truth for the weight table; init, checkpoint layout
// and count_params all derive from it.
inline std::vector<ParamShape> enumerate_param_shapes(const ModelConfig& cfg) {
  cfg.validate();
  std::vector<ParamShape> out;
  auto conv = [&](const std::string& prefix, i64 cout, i64 cin, i64 k) {
    out.push_back({prefix + ".w", {cout, cin, k, k}, cin * k * k});
    out.push_back({prefix + ".b", {1, cout, 1, 1}, 0});
  };
  auto res_block = [&](const std::string& prefix, i64 ch) {
    conv(prefix + ".conv1", ch, ch, 3);
    conv(prefix + ".conv2", ch, ch, 3);
  };
  const i64 C = cfg.channels;
  const i64 N = cfg.n_views();

  conv("shallow.head", C, 1, 3);
  if (cfg.use_aspp) {
    conv("shallow.aspp.d1", C, C, 3);
    conv("shallow.aspp.d2", C, C, 3);
    conv("shallow.aspp.d4", C, C, 3);
    conv("shallow.aspp.merge", C, 3 * C, 1);
  } else {
    res_block("shallow.sub", C);  // ASPP replaced by an extra residual block
  }
  res_block("shallow.res0", C);
  res_block("shallow.res1", C);

  for (int k = 0; k < cfg.n_blocks; ++k) {
    const std::string p = "va.block" + std::to_string(k);
    res_block(p + ".res0", N);
    res_block(p + ".res1", N);
    if (cfg.use_va) {
      conv(p + ".gate.fc1", cfg.reduced_view(), N, 1);
      conv(p + ".gate.fc2", N, cfg.reduced_view(), 1);
    }
  }
  for (int k = 0; k < cfg.n_blocks; ++k) {
    const std::string p = "ca.block" + std::to_string(k);
    res_block(p + ".res0", C);
    res_block(p + ".res1", C);
    if (cfg.use_ca) {
      conv(p + ".gate.fc1", cfg.reduced_channel(), C, 1);
      conv(p + ".gate.fc2", C, cfg.reduced_channel(), 1);
    }
  }

  conv("fuse.conv_in", 2 * C, 2 * C, 1);
  res_block("fuse.res0", 2 * C);
  res_block("fuse.res1", 2 * C);
  conv("fuse.conv_out", C, 2 * C, 1);

  const int stages = cfg.scale == 2 ? 1 : 2;  // x4 = two cascaded x2 shuffles
  for (int i = 0; i < stages; ++i) conv("up.stage" + std::to_string(i), 4 * C, C, 3);
  conv("up.final", 1, C, 3);
  return out;
}

inline i64 count_params(const ModelConfig& cfg) {
  i64 n = 0;
  for (const auto& ps : enumerate_param_shapes(cfg))
    n += ps.dims[0] * ps.dims[1] * ps.dims[2] * ps.dims[3];
  return n;
}

// Per-RVAB view-attention weights, one N-vector per block (mean over C slices).
struct AttentionProbe {
  std::vector<std::vector<double>> block_weights;
};

template <typename S>
struct Model {
  ModelConfig cfg;
  ParamSet<S> params;

  static Model init(const ModelConfig& cfg, std::uint64_t seed) {
    Model m;
    m.cfg = cfg;
    for (const auto& ps : enumerate_param_shapes(cfg)) {
      if (ps.fan_in > 0) {
        auto rng = make_rng(seed, ps.name);
        m.params.add(ps.name, kaiming_init<S>(ps.dims, ps.fan_in, rng));
      } else {
        m.params.add(ps.name, Arr4<S>(ps.dims));
      }
    }
    return m;
  }

  static Model zeros(const ModelConfig& cfg) {
    Model m;
    m.cfg = cfg;
    for (const auto& ps : enumerate_param_shapes(cfg)) m.params.add(ps.name, Arr4<S>(ps.dims));
    return m;
  }

  // 3x3 convs keep H x W via pad = dilation; 1x1 convs use pad = 0.
  Tensor4<S> conv(const Tensor4<S>& x, const std::string& prefix, i64 dilation = 1) const {
    const Tensor4<S>& w = params[prefix + ".w"];
    const Tensor4<S>& b = params[prefix + ".b"];
    const i64 k = w.dims()[2];
    const i64 pad = k == 1 ? 0 : dilation * (k - 1) / 2;
    return conv2d(x, w, &b, 1, dilation, pad);
  }

  Tensor4<S> residual_block(const Tensor4<S>& x, const std::string& prefix) const {
    return add(x, conv(relu(conv(x, prefix + ".conv1")), prefix + ".conv2"));
  }

  // per view: head conv -> ASPP (or substitute block) -> two residual blocks
  Tensor4<S> shallow_extract(const Tensor4<S>& x) const {
    Tensor4<S> t = conv(x, "shallow.head");
    if (cfg.use_aspp) {
      std::vector<Tensor4<S>> branches = {conv(t, "shallow.aspp.d1", 1),
                                          conv(t, "shallow.aspp.d2", 2),
                                          conv(t, "shallow.aspp.d4", 4)};
      t = conv(concat_channels(branches), "shallow.aspp.merge");
    } else {
      t = residual_block(t, "shallow.sub");
    }
    t = residual_block(t, "shallow.res0");
    return residual_block(t, "shallow.res1");
  }

  // x viewed as (C,N,H,W): pool over H x W per slice, gate shared across the
  // C slices, then rescale each view feature by its sigmoid weight.
  Tensor4<S> view_attention(const Tensor4<S>& x, const std::string& gate_prefix,
                            AttentionProbe* probe = nullptr) const {
    Tensor4<S> z = global_avg_pool(x);
    Tensor4<S> w = sigmoid(conv(relu(conv(z, gate_prefix + ".fc1")), gate_prefix + ".fc2"));
    if (probe) {
      const Arr4<S>& wv = w.value();
      std::vector<double> mean(static_cast<size_t>(wv.dims[1]), 0.0);
      for (i64 c = 0; c < wv.dims[0]; ++c)
        for (i64 n = 0; n < wv.dims[1]; ++n)
          mean[static_cast<size_t>(n)] += static_cast<double>(wv.at(c, n, 0, 0));
      for (double& m : mean) m /= static_cast<double>(wv.dims[0]);
      probe->block_weights.push_back(std::move(mean));
    }
    return scale_channels(x, w);
  }

  // y viewed as (N,C,H,W): gate shared across views.
  Tensor4<S> channel_attention(const Tensor4<S>& y, const std::string& gate_prefix) const {
    Tensor4<S> s = global_avg_pool(y);
    Tensor4<S> m = sigmoid(conv(relu(conv(s, gate_prefix + ".fc1")), gate_prefix + ".fc2"));
    return scale_channels(y, m);
  }

  // y = x + Attn(R2(R1(x))); Attn degrades to identity when ablated.
  Tensor4<S> rvab_forward(const Tensor4<S>& x, int k, AttentionProbe* probe = nullptr) const {
    const std::string p = "va.block" + std::to_string(k);
    Tensor4<S> t = residual_block(residual_block(x, p + ".res0"), p + ".res1");
    if (cfg.use_va) t = view_attention(t, p + ".gate", probe);
    return add(x, t);
  }

  Tensor4<S> rcab_forward(const Tensor4<S>& x, int k) const {
    const std::string p = "ca.block" + std::to_string(k);
    Tensor4<S> t = residual_block(residual_block(x, p + ".res0"), p + ".res1");
    if (cfg.use_ca) t = channel_attention(t, p + ".gate");
    return add(x, t);
  }

  // F_k = Block_k(F_0 + ... + F_{k-1}); output = F_0 + ... + F_n.
  template <typename BlockFn>
  Tensor4<S> branch_forward(const Tensor4<S>& f0, int n_blocks, BlockFn&& block) const {
    Tensor4<S> sum = f0;
    for (int k = 0; k < n_blocks; ++k) sum = add(sum, block(sum, k));
    return sum;
  }

  // transpose F_VA to (N,C,H,W), concatenate with F_CA along channels, then
  // 1x1 -> two residual blocks at 2C -> 1x1 back to C.
  Tensor4<S> fuse(const Tensor4<S>& f_va, const Tensor4<S>& f_ca) const {
    Tensor4<S> cat = concat_channels<S>({transpose01(f_va), f_ca});
    Tensor4<S> t = conv(cat, "fuse.conv_in");
    t = residual_block(t, "fuse.res0");
    t = residual_block(t, "fuse.res1");
    return conv(t, "fuse.conv_out");
  }

  // conv -> shuffle (x2 per stage) -> final 3x3 conv -> + bicubic residual
  Tensor4<S> upscale(const Tensor4<S>& f_fu, const Arr4<S>& lr_bicubic) const {
    Tensor4<S> t = f_fu;
    const int stages = cfg.scale == 2 ? 1 : 2;
    for (int i = 0; i < stages; ++i)
      t = pixel_shuffle(conv(t, "up.stage" + std::to_string(i)), 2);
    t = conv(t, "up.final");
    return add(t, Tensor4<S>::leaf(lr_bicubic));
  }

  // lr_views: (N,1,H,W) Y-channel stack; returns (N,1,aH,aW).
  Tensor4<S> forward(const Arr4<S>& lr_views, AttentionProbe* probe = nullptr) const {
    const i64 N = cfg.n_views();
    if (lr_views.dims[0] != N || lr_views.dims[1] != 1)
      throw std::invalid_argument("forward: expected (" + std::to_string(N) +
                                  ",1,H,W) input, got " + dims_str(lr_views.dims));
    Arr4<S> lr_bicubic = bicubic_resample_bc(lr_views, scale_up(cfg.scale));
    Tensor4<S> x = Tensor4<S>::leaf(lr_views);
    Tensor4<S> fs = shallow_extract(x);  // (N,C,H,W)
    Tensor4<S> f_fu;
    if (cfg.structure == Structure::dual_branch) {
      Tensor4<S> f_va = branch_forward(transpose01(fs), cfg.n_blocks,
                                       [&](const Tensor4<S>& t, int k) {
                                         return rvab_forward(t, k, probe);
                                       });
      Tensor4<S> f_ca = branch_forward(
          fs, cfg.n_blocks, [&](const Tensor4<S>& t, int k) { return rcab_forward(t, k); });
      f_fu = fuse(f_va, f_ca);
    } else {
      // cascaded VA-CA: one chain, dense sums within each segment
      Tensor4<S> f_va = branch_forward(transpose01(fs), cfg.n_blocks,
                                       [&](const Tensor4<S>& t, int k) {
                                         return rvab_forward(t, k, probe);
                                       });
      Tensor4<S> f_ca = branch_forward(
          transpose01(f_va), cfg.n_blocks,
          [&](const Tensor4<S>& t, int k) { return rcab_forward(t, k); });
      f_fu = fuse(f_va, f_ca);
    }
    return upscale(f_fu, lr_bicubic);
  }

  // Fig. 8/9-style probe: the per-block view-attention vectors for one input.
  AttentionProbe probe_attention(const Arr4<S>& lr_views) const {
    if (!cfg.use_va)
      throw std::runtime_error("probe_attention: view attention is disabled in this config");
    AttentionProbe probe;
    NoGradGuard ng;
    forward(lr_views, &probe);
    return probe;
  }

  void save(const std::string& path) const { write_checkpoint(path, params_to_entries(params)); }

  void load(const std::string& path) {
    load_params_from_entries(params, read_checkpoint(path));
  }
};

}  // namespace ddan
