#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "ddan/metrics.hpp"
#include "ddan/model.hpp"
#include "ddan/patches.hpp"

namespace ddan {

struct TrainConfig {
  double lr0 = 5e-4;
  int halve_every = 20;  // epochs between halvings
  int epochs = 80;
  int batch = 30;
  std::uint64_t seed = 1;
  bool augment = true;
  std::string out_dir;       // checkpoints + trace land here when non-empty
  int checkpoint_every = 1;  // epochs
  i64 max_steps = -1;        // optional cap
  double max_seconds = -1;   // optional wall-clock cap
  double stop_at_psnr = -1;  // optional early exit on train PSNR
  bool verbose = false;
};

// lr(e) = lr0 * 0.5^floor(e / halve_every)
inline double lr_schedule(double lr0, int halve_every, int epoch) {
  if (epoch < 0) throw std::invalid_argument("lr_schedule: negative epoch");
  if (halve_every <= 0) return lr0;
  return lr0 * std::pow(0.5, static_cast<double>(epoch / halve_every));
}

struct TraceRow {
  i64 step;
  int epoch;
  double lr;
  double loss;
  double psnr;  // batch train PSNR (pre-update); not part of the CSV contract
};

struct TrainResult {
  std::vector<TraceRow> trace;
  i64 steps = 0;
  int next_epoch = 0;
  bool hit_psnr_target = false;
};

inline void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write trace: " + path);
  f << "step,epoch,lr,loss\n";
  f.precision(10);
  for (const auto& r : trace) f << r.step << "," << r.epoch << "," << r.lr << "," << r.loss << "\n";
}

template <typename S>
void save_train_checkpoint(const std::string& path, const Model<S>& model,
                           const AdamState<S>& adam, int next_epoch, i64 step) {
  std::vector<CkptEntry> entries = params_to_entries(model.params);
  adam.export_entries(model.params, entries);
  CkptEntry meta;
  meta.name = "__meta__.progress";
  meta.dims = {1, 2, 1, 1};
  meta.data = {static_cast<float>(next_epoch), static_cast<float>(step)};
  entries.push_back(std::move(meta));
  write_checkpoint(path, entries);
}

template <typename S>
std::pair<int, i64> load_train_checkpoint(const std::string& path, Model<S>& model,
                                          AdamState<S>& adam) {
  const auto entries = read_checkpoint(path);
  load_params_from_entries(model.params, entries);
  adam.import_entries(model.params, entries);
  for (const auto& e : entries)
    if (e.name == "__meta__.progress")
      return {static_cast<int>(e.data.at(0)), static_cast<i64>(e.data.at(1))};
  throw std::runtime_error("checkpoint has no training progress entry: " + path);
}

// One epoch = one seeded shuffle of all patch pairs; per-epoch RNG streams
// derive from (seed, epoch) so an epoch-boundary resume replays identically.
template <typename S>
TrainResult train(Model<S>& model, AdamState<S>& adam, const std::vector<PatchPair>& data,
                  const TrainConfig& cfg, int start_epoch = 0, i64 start_step = 0) {
  if (data.empty()) throw std::invalid_argument("train: dataset is empty");
  if (cfg.batch < 1) throw std::invalid_argument("train: batch size must be >= 1");
  if (!adam.attached()) adam.attach(model.params);
  const auto t0 = std::chrono::steady_clock::now();
  TrainResult res;
  res.steps = start_step;
  res.next_epoch = start_epoch;

  std::vector<size_t> perm(data.size());
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;

  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_schedule(cfg.lr0, cfg.halve_every, epoch);
    // epoch order is a pure function of (seed, epoch) so resumes replay exactly
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    auto shuffle_rng = make_rng(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch));
    std::shuffle(perm.begin(), perm.end(), shuffle_rng);
    auto aug_rng = make_rng(cfg.seed, "augment", static_cast<std::uint64_t>(epoch));

    for (size_t off = 0; off < perm.size(); off += static_cast<size_t>(cfg.batch)) {
      const size_t bsz = std::min<size_t>(cfg.batch, perm.size() - off);
      model.params.zero_grad();
      double batch_loss = 0.0;
      double batch_mse = 0.0;
      i64 batch_px = 0;
      for (size_t k = 0; k < bsz; ++k) {
        const PatchPair& pair = data[perm[off + k]];
        LightField hr = pair.hr;
        LightField lr_lf = pair.lr;
        if (cfg.augment) {
          const AugmentDraw draw = draw_augment(aug_rng);
          hr = apply_augment(hr, draw);
          lr_lf = apply_augment(lr_lf, draw);
        }
        Arr4<S> x = lf_to_views<S>(lr_lf);
        Arr4<S> target = lf_to_views<S>(hr.to_f32());
        Tensor4<S> pred = model.forward(x);
        for (i64 i = 0; i < target.numel(); ++i) {
          const double d = static_cast<double>(pred.value().data[i]) -
                           static_cast<double>(target.data[i]);
          batch_mse += d * d;
        }
        batch_px += target.numel();
        Tensor4<S> loss =
            scale(l1_loss(pred, Tensor4<S>::leaf(std::move(target))), 1.0 / bsz);
        loss.backward();
        batch_loss += static_cast<double>(loss.value().data[0]);
      }
      if (!std::isfinite(batch_loss))
        throw std::runtime_error("train: loss became non-finite at step " +
                                 std::to_string(res.steps + 1) + " (epoch " +
                                 std::to_string(epoch) + "); aborting");
      adam.step(model.params, lr);
      ++res.steps;
      const double mse = batch_mse / static_cast<double>(batch_px);
      const double train_psnr = mse == 0.0 ? kPsnrCap : std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
      res.trace.push_back({res.steps, epoch, lr, batch_loss, train_psnr});
      if (cfg.verbose && res.steps % 50 == 0)
        std::cerr << "step " << res.steps << " epoch " << epoch << " loss " << batch_loss
                  << " psnr " << train_psnr << "\n";
      if (cfg.stop_at_psnr > 0 && train_psnr >= cfg.stop_at_psnr) {
        res.hit_psnr_target = true;
        res.next_epoch = epoch + 1;
        return res;
      }
      if ((cfg.max_steps >= 0 && res.steps >= cfg.max_steps) ||
          (cfg.max_seconds > 0 && elapsed() > cfg.max_seconds)) {
        res.next_epoch = epoch + 1;
        return res;
      }
    }
    res.next_epoch = epoch + 1;
    if (!cfg.out_dir.empty() && cfg.checkpoint_every > 0 &&
        ((epoch + 1) % cfg.checkpoint_every == 0 || epoch + 1 == cfg.epochs)) {
      char name[64];
      std::snprintf(name, sizeof(name), "ckpt_epoch_%04d.ckpt", epoch + 1);
      save_train_checkpoint(std::filesystem::path(cfg.out_dir) / name, model, adam, epoch + 1,
                            res.steps);
      save_train_checkpoint(std::filesystem::path(cfg.out_dir) / "ckpt_latest.ckpt", model, adam,
                            epoch + 1, res.steps);
    }
  }
  return res;
}

template <typename S>
void save_train_checkpoint(const std::filesystem::path& path, const Model<S>& model,
                           const AdamState<S>& adam, int next_epoch, i64 step) {
  save_train_checkpoint(path.string(), model, adam, next_epoch, step);
}

// ---- evaluation ----

struct EvalRow {
  std::string scene;
  i64 u, v;
  double psnr, ssim;
};

struct EvalReport {
  std::vector<EvalRow> model_rows, bicubic_rows;
  double model_psnr = 0, model_ssim = 0;
  double bicubic_psnr = 0, bicubic_ssim = 0;
};

namespace detail {
inline void finish_rows(const std::vector<EvalRow>& rows, double& pm, double& sm) {
  pm = sm = 0;
  for (const auto& r : rows) {
    pm += r.psnr;
    sm += r.ssim;
  }
  if (!rows.empty()) {
    pm /= static_cast<double>(rows.size());
    sm /= static_cast<double>(rows.size());
  }
}
}  // namespace detail

// Y-channel PSNR/SSIM per view against ground truth, plus the bicubic
// baseline under identical metrics. SR outputs are clamped to [0,1] the same
// way a saved container would be.
template <typename S>
EvalReport evaluate(const Model<S>& model,
                    const std::vector<std::pair<std::string, LightField>>& scenes) {
  EvalReport rep;
  NoGradGuard ng;
  for (const auto& [name, hr] : scenes) {
    const LightField hr_y = extract_y(hr).to_f32();
    const LightField lr_y = lf_bicubic<S>(hr_y, scale_down(model.cfg.scale));
    if (lr_y.H < 4 || lr_y.W < 4)
      throw std::invalid_argument("evaluate: scene too small for the scale");
    Arr4<S> x = lf_to_views<S>(lr_y);
    const LightField sr = views_to_lf(model.forward(x).value(), hr_y.U, hr_y.V);
    const LightField bicubic = lf_bicubic<S>(lr_y, scale_up(model.cfg.scale));
    if (sr.H != hr_y.H || sr.W != hr_y.W)
      throw std::runtime_error("evaluate: SR dims do not match ground truth");
    for (i64 u = 0; u < hr_y.U; ++u)
      for (i64 v = 0; v < hr_y.V; ++v) {
        const Image<double> gt = lf_plane<double>(hr_y, u, v, 0);
        const Image<double> pm = lf_plane<double>(sr, u, v, 0);
        const Image<double> pb = lf_plane<double>(bicubic, u, v, 0);
        rep.model_rows.push_back({name, u, v, psnr(pm, gt, 1.0), ssim(pm, gt, 1.0)});
        rep.bicubic_rows.push_back({name, u, v, psnr(pb, gt, 1.0), ssim(pb, gt, 1.0)});
      }
  }
  detail::finish_rows(rep.model_rows, rep.model_psnr, rep.model_ssim);
  detail::finish_rows(rep.bicubic_rows, rep.bicubic_psnr, rep.bicubic_ssim);
  return rep;
}

inline void write_eval_csv(const std::string& path, const std::vector<EvalRow>& rows,
                           double psnr_mean, double ssim_mean) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write report: " + path);
  f << "scene,u,v,psnr,ssim\n";
  f.precision(8);
  for (const auto& r : rows)
    f << r.scene << "," << r.u << "," << r.v << "," << r.psnr << "," << r.ssim << "\n";
  f << "aggregate,,," << psnr_mean << "," << ssim_mean << "\n";
}

inline void write_probe_csv(const std::string& path, const AttentionProbe& probe, i64 U, i64 V,
                            double noise_var) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write probe: " + path);
  f << "noise_var,block,u,v,weight\n";
  f.precision(8);
  for (size_t k = 0; k < probe.block_weights.size(); ++k)
    for (i64 u = 0; u < U; ++u)
      for (i64 v = 0; v < V; ++v)
        f << noise_var << ",Att_" << (k + 1) << "," << u << "," << v << ","
          << probe.block_weights[k][static_cast<size_t>(u * V + v)] << "\n";
}

}  // namespace ddan
