#include "ddan/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "ddan/gradcheck.hpp"
#include "ddan/synth.hpp"
#include "ddan/train.hpp"

namespace fs = std::filesystem;

namespace ddan {

namespace {

enum class Precision { f32, f64 };

Precision precision_from_env() {
  const char* p = std::getenv("DDAN_PRECISION");
  if (!p || !*p) return Precision::f32;
  const std::string s(p);
  if (s == "f32") return Precision::f32;
  if (s == "f64") return Precision::f64;
  throw std::runtime_error("DDAN_PRECISION must be f32 or f64, got: " + s);
}

std::vector<fs::path> list_lf_files(const std::string& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& de : fs::directory_iterator(dir))
    if (de.is_regular_file() && de.path().extension() == ".lf") files.push_back(de.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no .lf containers in " + dir);
  return files;
}

std::pair<i64, i64> parse_view(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos)
    throw std::runtime_error("--noise-view expects U,V, got: " + s);
  return {std::stoll(s.substr(0, comma)), std::stoll(s.substr(comma + 1))};
}

struct Options {
  std::string config, data, out, ckpt;
  int scale = 2;
  std::uint64_t seed = 1;
  int epochs = 80;
  int batch = 30;
  i64 steps = -1;
  int trials = 20;
  bool rgb = false;
  std::string noise_view;
  double noise_var = -1.0;
};

template <typename S>
int do_degrade(const Options& o) {
  const LightField hr = load_lf(o.data);
  const LightField lr = lf_bicubic<S>(hr.to_f32(), scale_down(o.scale));
  save_lf(lr, o.out);
  std::cout << "degraded " << hr.H << "x" << hr.W << " -> " << lr.H << "x" << lr.W << " ("
            << hr.U << "x" << hr.V << " views) into " << o.out << "\n";
  return 0;
}

template <typename S>
int do_train(const Options& o) {
  const ModelConfig cfg = load_model_config(o.config);
  fs::create_directories(o.out);
  std::vector<PatchPair> pool;
  for (const auto& f : list_lf_files(o.data)) {
    const LightField hr_y = extract_y(load_lf(f.string())).to_f32();
    PatchSet set = extract_patches(hr_y, cfg.scale, 64, 32);
    for (auto& p : set.pairs) pool.push_back(std::move(p));
  }
  Model<S> model = Model<S>::init(cfg, o.seed);
  AdamState<S> adam;
  adam.attach(model.params);
  TrainConfig tc;
  tc.seed = o.seed;
  tc.epochs = o.epochs;
  tc.batch = o.batch;
  tc.max_steps = o.steps;
  tc.out_dir = o.out;
  int start_epoch = 0;
  i64 start_step = 0;
  if (!o.ckpt.empty())
    std::tie(start_epoch, start_step) = load_train_checkpoint(o.ckpt, model, adam);
  const TrainResult res = train(model, adam, pool, tc, start_epoch, start_step);
  write_trace_csv((fs::path(o.out) / "trace.csv").string(), res.trace);
  save_train_checkpoint((fs::path(o.out) / "model.ckpt").string(), model, adam, res.next_epoch,
                        res.steps);
  std::cout << "trained " << res.steps << " steps over " << pool.size() << " patch pairs; "
            << "final loss "
            << (res.trace.empty() ? 0.0 : res.trace.back().loss) << "\n";
  return 0;
}

template <typename S>
LightField super_resolve_container(const Model<S>& model, const LightField& lr, bool rgb_out) {
  NoGradGuard ng;
  if (lr.channels == 1) {
    Arr4<S> x = lf_to_views<S>(lr.to_f32());
    return views_to_lf(model.forward(x).value(), lr.U, lr.V);
  }
  const LightField ycc =
      lr.color == ColorTag::RGB ? rgb_to_ycbcr(lr.to_f32()) : lr.to_f32();
  if (ycc.color != ColorTag::YCbCr)
    throw std::runtime_error("infer: unsupported color tag for 3-channel input");
  // Y through the network, chroma through plain bicubic
  LightField y_only(ycc.U, ycc.V, ycc.H, ycc.W, 1, LfDtype::F32, ColorTag::Y);
  for (i64 u = 0; u < ycc.U; ++u)
    for (i64 v = 0; v < ycc.V; ++v)
      std::copy(ycc.dataf.begin() + ycc.offset(u, v, 0, 0, 0),
                ycc.dataf.begin() + ycc.offset(u, v, 0, 0, 0) + ycc.plane_size(),
                y_only.dataf.begin() + y_only.offset(u, v, 0, 0, 0));
  Arr4<S> x = lf_to_views<S>(y_only);
  const LightField sr_y = views_to_lf(model.forward(x).value(), ycc.U, ycc.V);
  const LightField chroma_up = lf_bicubic<S>(ycc, scale_up(model.cfg.scale));
  LightField out(ycc.U, ycc.V, sr_y.H, sr_y.W, 3, LfDtype::F32, ColorTag::YCbCr);
  for (i64 u = 0; u < out.U; ++u)
    for (i64 v = 0; v < out.V; ++v) {
      std::copy(sr_y.dataf.begin() + sr_y.offset(u, v, 0, 0, 0),
                sr_y.dataf.begin() + sr_y.offset(u, v, 0, 0, 0) + sr_y.plane_size(),
                out.dataf.begin() + out.offset(u, v, 0, 0, 0));
      for (i64 c = 1; c < 3; ++c)
        std::copy(chroma_up.dataf.begin() + chroma_up.offset(u, v, c, 0, 0),
                  chroma_up.dataf.begin() + chroma_up.offset(u, v, c, 0, 0) +
                      chroma_up.plane_size(),
                  out.dataf.begin() + out.offset(u, v, c, 0, 0));
    }
  return rgb_out ? ycbcr_to_rgb(out) : out;
}

template <typename S>
int do_infer(const Options& o) {
  const ModelConfig cfg = load_model_config(o.config);
  Model<S> model = Model<S>::zeros(cfg);
  model.load(o.ckpt);
  const LightField lr = load_lf(o.data);
  if (lr.U * lr.V != cfg.n_views())
    throw std::runtime_error("config/checkpoint mismatch: input has " +
                             std::to_string(lr.U * lr.V) + " views, config expects " +
                             std::to_string(cfg.n_views()));
  const LightField sr = super_resolve_container(model, lr, o.rgb);
  save_lf(sr, o.out);
  std::cout << "super-resolved to " << sr.H << "x" << sr.W << " into " << o.out << "\n";
  return 0;
}

template <typename S>
int do_eval(const Options& o) {
  const ModelConfig cfg = load_model_config(o.config);
  Model<S> model = Model<S>::zeros(cfg);
  model.load(o.ckpt);
  std::vector<std::pair<std::string, LightField>> scenes;
  for (const auto& f : list_lf_files(o.data))
    scenes.emplace_back(f.stem().string(), load_lf(f.string()));
  const EvalReport rep = evaluate(model, scenes);
  fs::create_directories(o.out);
  write_eval_csv((fs::path(o.out) / "report.csv").string(), rep.model_rows, rep.model_psnr,
                 rep.model_ssim);
  write_eval_csv((fs::path(o.out) / "baseline.csv").string(), rep.bicubic_rows, rep.bicubic_psnr,
                 rep.bicubic_ssim);
  std::cout << "model    mean Y-PSNR " << rep.model_psnr << " dB, SSIM " << rep.model_ssim
            << "\n";
  std::cout << "bicubic  mean Y-PSNR " << rep.bicubic_psnr << " dB, SSIM " << rep.bicubic_ssim
            << "\n";
  return 0;
}

int do_gradcheck(const Options& o) {
  const auto reports = gradcheck::run_op_suite(o.trials, o.seed);
  bool ok = true;
  double worst_op = 0.0;
  for (const auto& r : reports) {
    std::cout << r.op << " max_rel_err " << r.max_rel_err << "\n";
    worst_op = std::max(worst_op, r.max_rel_err);
    ok = ok && r.max_rel_err < 1e-4;
  }
  const double model_err = gradcheck::run_model_check(o.seed);
  std::cout << "ddan_tiny_full_model max_rel_err " << model_err << "\n";
  ok = ok && model_err < 1e-3;
  std::cout << (ok ? "gradcheck passed" : "gradcheck FAILED") << " (ops " << worst_op
            << ", model " << model_err << ")\n";
  return ok ? 0 : 1;
}

template <typename S>
int do_probe(const Options& o) {
  const ModelConfig cfg = load_model_config(o.config);
  Model<S> model = Model<S>::zeros(cfg);
  model.load(o.ckpt);
  LightField lr_y = extract_y(load_lf(o.data)).to_f32();
  double var = 0.0;
  if (!o.noise_view.empty()) {
    if (o.noise_var < 0) throw std::runtime_error("--noise-view requires --noise-var");
    const auto [u, v] = parse_view(o.noise_view);
    var = o.noise_var;
    lr_y = add_gaussian_noise(lr_y, u, v, var, o.seed);
  }
  const AttentionProbe probe = model.probe_attention(lf_to_views<S>(lr_y));
  write_probe_csv(o.out, probe, lr_y.U, lr_y.V, var);
  std::cout << "wrote " << probe.block_weights.size() << " attention blocks x "
            << cfg.n_views() << " views to " << o.out << "\n";
  return 0;
}

int do_count_params(const Options& o) {
  const ModelConfig cfg = load_model_config(o.config);
  std::cout << count_params(cfg) << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"DDAN light-field super-resolution toolkit"};
  app.require_subcommand(1);
  Options o;

  auto* degrade = app.add_subcommand("degrade", "bicubic-downsample an LF container");
  degrade->add_option("--data", o.data, "HR container")->required();
  degrade->add_option("--scale", o.scale, "downsample factor")->check(CLI::IsMember({2, 4}));
  degrade->add_option("--out", o.out, "LR container path")->required();

  auto* train = app.add_subcommand("train", "train a model on a directory of HR containers");
  train->add_option("--config", o.config, "model config path or preset")->required();
  train->add_option("--data", o.data, "directory of HR .lf scenes")->required();
  train->add_option("--out", o.out, "output directory")->required();
  train->add_option("--ckpt", o.ckpt, "resume from checkpoint");
  train->add_option("--seed", o.seed, "master seed");
  train->add_option("--epochs", o.epochs, "total epochs");
  train->add_option("--batch", o.batch, "batch size");
  train->add_option("--steps", o.steps, "stop after this many steps");

  auto* infer = app.add_subcommand("infer", "super-resolve an LR container");
  infer->add_option("--config", o.config)->required();
  infer->add_option("--ckpt", o.ckpt)->required();
  infer->add_option("--data", o.data, "LR container")->required();
  infer->add_option("--out", o.out, "SR container path")->required();
  infer->add_flag("--rgb", o.rgb, "recombine to RGB output");

  auto* eval = app.add_subcommand("eval", "evaluate against HR ground truth");
  eval->add_option("--config", o.config)->required();
  eval->add_option("--ckpt", o.ckpt)->required();
  eval->add_option("--data", o.data, "directory of HR .lf scenes")->required();
  eval->add_option("--out", o.out, "report directory")->required();

  auto* gradcheck_cmd = app.add_subcommand("gradcheck", "finite-difference gradient suite (f64)");
  gradcheck_cmd->add_option("--trials", o.trials, "random trials per op");
  gradcheck_cmd->add_option("--seed", o.seed);

  auto* probe = app.add_subcommand("probe-attention", "dump view-attention weights as CSV");
  probe->add_option("--config", o.config)->required();
  probe->add_option("--ckpt", o.ckpt)->required();
  probe->add_option("--data", o.data, "LR container")->required();
  probe->add_option("--out", o.out, "CSV path")->required();
  probe->add_option("--noise-view", o.noise_view, "inject noise into view U,V");
  probe->add_option("--noise-var", o.noise_var, "noise variance");
  probe->add_option("--seed", o.seed);

  auto* count = app.add_subcommand("count-params", "print the trainable parameter count");
  count->add_option("--config", o.config)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const Precision prec = precision_from_env();
    auto dispatch = [&](auto tag) -> int {
      using S = decltype(tag);
      if (degrade->parsed()) return do_degrade<S>(o);
      if (train->parsed()) return do_train<S>(o);
      if (infer->parsed()) return do_infer<S>(o);
      if (eval->parsed()) return do_eval<S>(o);
      if (probe->parsed()) return do_probe<S>(o);
      if (count->parsed()) return do_count_params(o);
      if (gradcheck_cmd->parsed()) return do_gradcheck(o);
      return 1;
    };
    return prec == Precision::f64 ? dispatch(double{}) : dispatch(float{});
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  static const char* prog = "ddan";
  argv.push_back(prog);
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace ddan
