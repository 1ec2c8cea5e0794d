#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include "ddan/cli.hpp"
#include "ddan/model.hpp"
#include "ddan/synth.hpp"
#include "testutil.hpp"

using namespace ddan;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

struct PrecisionEnv {
  explicit PrecisionEnv(const char* mode) { setenv("DDAN_PRECISION", mode, 1); }
  ~PrecisionEnv() { unsetenv("DDAN_PRECISION"); }
};

}  // namespace

TEST_CASE("cli: unknown subcommands and bad inputs exit nonzero") {
  CHECK(run_cli({"frobnicate"}) != 0);
  CHECK(run_cli({}) != 0);
  CHECK(run_cli({"degrade", "--data", "/nonexistent.lf", "--scale", "2", "--out",
                 "/tmp/x.lf"}) != 0);
  CHECK(run_cli({"count-params", "--config", "no_such_preset"}) != 0);
  CHECK(run_cli({"degrade", "--data", "/tmp/x.lf", "--scale", "3", "--out", "/tmp/y.lf"}) != 0);
}

TEST_CASE("cli: count-params succeeds for every preset") {
  for (const auto& p : model_config_presets())
    CHECK(run_cli({"count-params", "--config", p}) == 0);
}

TEST_CASE("cli: degrade is idempotent and infer with a zero checkpoint reproduces bicubic") {
  testutil::TempDir tmp("cli_infer");
  PrecisionEnv f64("f64");

  const LightField hr = extract_y(synth::make_scene(5, 3, 3, 48, 48)).to_f32();
  save_lf(hr, tmp.str("hr.lf"));

  REQUIRE(run_cli({"degrade", "--data", tmp.str("hr.lf"), "--scale", "2", "--out",
                   tmp.str("lr.lf")}) == 0);
  REQUIRE(run_cli({"degrade", "--data", tmp.str("hr.lf"), "--scale", "2", "--out",
                   tmp.str("lr2.lf")}) == 0);
  CHECK(slurp(tmp.str("lr.lf")) == slurp(tmp.str("lr2.lf")));

  ModelConfig cfg = load_model_config("tiny_3x3_x2");
  Model<double> zeros = Model<double>::zeros(cfg);
  zeros.save(tmp.str("zeros.ckpt"));
  REQUIRE(run_cli({"infer", "--config", "tiny_3x3_x2", "--ckpt", tmp.str("zeros.ckpt"),
                   "--data", tmp.str("lr.lf"), "--out", tmp.str("sr.lf")}) == 0);

  const LightField lr = load_lf(tmp.str("lr.lf"));
  const LightField sr = load_lf(tmp.str("sr.lf"));
  const LightField expect = lf_bicubic<double>(lr, scale_up(2));
  REQUIRE(sr.dataf.size() == expect.dataf.size());
  CHECK(std::memcmp(sr.dataf.data(), expect.dataf.data(), sr.dataf.size() * 4) == 0);
}

TEST_CASE("cli: infer recombines chroma for RGB containers") {
  testutil::TempDir tmp("cli_rgb");
  const LightField rgb = synth::make_scene(6, 3, 3, 24, 24);
  const LightField lr = lf_bicubic<float>(rgb, scale_down(2));
  save_lf(lr, tmp.str("lr.lf"));
  ModelConfig cfg = load_model_config("tiny_3x3_x2");
  Model<float> m = Model<float>::init(cfg, 4);
  m.save(tmp.str("m.ckpt"));
  REQUIRE(run_cli({"infer", "--config", "tiny_3x3_x2", "--ckpt", tmp.str("m.ckpt"), "--data",
                   tmp.str("lr.lf"), "--out", tmp.str("sr.lf"), "--rgb"}) == 0);
  const LightField sr = load_lf(tmp.str("sr.lf"));
  CHECK(sr.channels == 3);
  CHECK(sr.color == ColorTag::RGB);
  CHECK(sr.H == 24);
  CHECK(sr.W == 24);
}

TEST_CASE("cli: train end-to-end on a tiny synthetic directory") {
  testutil::TempDir tmp("cli_train");
  std::filesystem::create_directories(tmp.str("scenes"));
  for (int i = 0; i < 2; ++i)
    save_lf(synth::make_scene(40 + i, 3, 3, 64, 64),
            (std::filesystem::path(tmp.str("scenes")) / ("s" + std::to_string(i) + ".lf"))
                .string());
  REQUIRE(run_cli({"train", "--config", "tiny_3x3_x2", "--data", tmp.str("scenes"), "--out",
                   tmp.str("run"), "--steps", "2", "--batch", "1", "--epochs", "1", "--seed",
                   "3"}) == 0);
  CHECK(std::filesystem::exists(tmp.str("run") + "/trace.csv"));
  CHECK(std::filesystem::exists(tmp.str("run") + "/model.ckpt"));

  // eval with the trained checkpoint emits both report CSVs
  REQUIRE(run_cli({"eval", "--config", "tiny_3x3_x2", "--ckpt", tmp.str("run") + "/model.ckpt",
                   "--data", tmp.str("scenes"), "--out", tmp.str("rep")}) == 0);
  const std::string report = slurp(tmp.str("rep") + "/report.csv");
  const std::string baseline = slurp(tmp.str("rep") + "/baseline.csv");
  CHECK(report.rfind("scene,u,v,psnr,ssim", 0) == 0);
  CHECK(report.find("aggregate") != std::string::npos);
  CHECK(baseline.find("aggregate") != std::string::npos);
}

TEST_CASE("cli: probe-attention emits the weight CSV, with and without noise") {
  testutil::TempDir tmp("cli_probe");
  const LightField lr = extract_y(synth::make_scene(9, 3, 3, 16, 16)).to_f32();
  save_lf(lr, tmp.str("lr.lf"));
  ModelConfig cfg = load_model_config("tiny_3x3_x2");
  Model<float> zeros = Model<float>::zeros(cfg);
  zeros.save(tmp.str("z.ckpt"));

  REQUIRE(run_cli({"probe-attention", "--config", "tiny_3x3_x2", "--ckpt", tmp.str("z.ckpt"),
                   "--data", tmp.str("lr.lf"), "--out", tmp.str("probe.csv")}) == 0);
  const std::string csv = slurp(tmp.str("probe.csv"));
  CHECK(csv.rfind("noise_var,block,u,v,weight", 0) == 0);
  CHECK(csv.find("Att_1") != std::string::npos);
  CHECK(csv.find("0.5") != std::string::npos);  // zero gating

  REQUIRE(run_cli({"probe-attention", "--config", "tiny_3x3_x2", "--ckpt", tmp.str("z.ckpt"),
                   "--data", tmp.str("lr.lf"), "--out", tmp.str("probe2.csv"), "--noise-view",
                   "1,1", "--noise-var", "0.01", "--seed", "2"}) == 0);
  CHECK(slurp(tmp.str("probe2.csv")).rfind("noise_var,block,u,v,weight", 0) == 0);
}

TEST_CASE("cli: gradcheck reports per-op errors and exits 0") {
  CHECK(run_cli({"gradcheck", "--trials", "2", "--seed", "11"}) == 0);
}
