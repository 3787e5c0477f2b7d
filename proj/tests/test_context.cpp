#include <doctest.h>

#include <cmath>
#include <cstring>

#include "scanpath/context.hpp"
#include "scanpath/entropy.hpp"
#include "scanpath/rng.hpp"

using namespace scanpath;

namespace {

constexpr double kPi = 3.14159265358979323846;

ViewportSpec paper_spec() { return {252, 484, 63.0 * kPi / 180.0, 112.0 * kPi / 180.0}; }

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.history_r = 2;
  cfg.horizon_s = 3;
  cfg.mixture_k = 2;
  cfg.cv = 8;
  cfg.ch = 8;
  cfg.cc = 4;
  cfg.head_width = 8;
  cfg.visual_blocks = 1;
  cfg.path_anchor_blocks = 1;
  cfg.path_step_blocks = 1;
  cfg.causal_blocks = 2;
  cfg.head_blocks = 1;
  cfg.causal_embed = 4;
  cfg.pool_rows = 2;
  cfg.pool_cols = 3;
  cfg.pool_channels = 2;
  cfg.variance_init_bias = 4.0;
  cfg.init_seed = 21;
  return cfg;
}

ModelInput random_input(const ScanpathModel& model, Rng& rng) {
  const auto& cfg = model.config();
  ModelInput input;
  for (int i = 0; i < cfg.history_r; ++i) {
    Vec pre(cfg.pool_rows * cfg.pool_cols);
    for (int j = 0; j < pre.size(); ++j) pre[j] = rng.uniform(0, 255);
    input.provider_pre.push_back(pre);
    std::vector<UvPoint> window;
    for (int k = 0; k < 2 * cfg.history_r + 1; ++k) {
      window.push_back({rng.uniform(-20, 20), rng.uniform(-20, 20)});
    }
    input.paths.push_back(window);
  }
  return input;
}

std::vector<SphericalPoint> wandering_path(int n, Rng& rng) {
  std::vector<SphericalPoint> path;
  double phi = 0.1, theta = -0.4;
  for (int i = 0; i < n; ++i) {
    path.emplace_back(phi, theta);
    phi += rng.uniform(-0.02, 0.02);
    theta += rng.uniform(-0.03, 0.03);
  }
  return path;
}

}  // namespace

TEST_SUITE_BEGIN("context");

TEST_CASE("build_history window shape and anchor zeros") {
  Rng rng(12);
  const auto path = wandering_path(40, rng);
  const ViewportSpec spec = paper_spec();
  const int r = 5;
  const HistoryWindow window = build_history(path, {}, 20, r, spec);
  REQUIRE(window.paths.size() == 5);
  for (const auto& w : window.paths) CHECK(w.size() == 11);
  for (const auto& w : window.paths) {
    CHECK(w[static_cast<std::size_t>(r)].u == 0.0);
    CHECK(w[static_cast<std::size_t>(r)].v == 0.0);
  }
  CHECK(window.viewports.empty());
  CHECK(window.anchor.phi == path[20].phi);
}

TEST_CASE("build_history on a static scanpath gives all-zero windows") {
  const std::vector<SphericalPoint> path(30, SphericalPoint(0.2, 0.7));
  const HistoryWindow window = build_history(path, {}, 15, 5, paper_spec());
  for (const auto& w : window.paths) {
    for (const auto& p : w) {
      CHECK(p.u == doctest::Approx(0.0).epsilon(1e-9));
      CHECK(p.v == doctest::Approx(0.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("build_history rejects insufficient history") {
  Rng rng(13);
  const auto path = wandering_path(30, rng);
  CHECK_THROWS_AS(build_history(path, {}, 9, 5, paper_spec()), std::invalid_argument);
  CHECK_NOTHROW(build_history(path, {}, 10, 5, paper_spec()));
}

TEST_CASE("pooled luminance grid is mean preserving") {
  ErpFrame raster(252, 484, 1);
  Rng rng(14);
  for (auto& s : raster.samples) s = static_cast<std::uint8_t>(rng.below(256));
  const Vec grid = PooledLuminanceProvider::pool_luminance(raster, 8, 14);
  double raster_mean = 0.0;
  for (auto s : raster.samples) raster_mean += s;
  raster_mean /= static_cast<double>(raster.samples.size());
  CHECK(grid.mean() == doctest::Approx(raster_mean).epsilon(1e-9));

  ErpFrame constant(100, 70, 3);
  std::fill(constant.samples.begin(), constant.samples.end(), 42);
  const Vec cgrid = PooledLuminanceProvider::pool_luminance(constant, 8, 14);
  for (int i = 0; i < cgrid.size(); ++i) CHECK(cgrid[i] == doctest::Approx(42.0).epsilon(1e-12));
}

TEST_CASE("pooled provider feature length is 8*14*16") {
  PooledLuminanceProvider provider(8, 14, 16);
  CHECK(provider.feature_length() == 1792);
}

TEST_CASE("zero provider output yields a content-independent bias response") {
  ScanpathModel model(tiny_config());
  // Zeroing the provider map makes its features vanish for any content.
  auto w = model.params().vec(model.params().id_of("provider.w"));
  auto b = model.params().vec(model.params().id_of("provider.b"));
  w.setZero();
  b.setZero();
  Rng rng(15);
  const ModelInput a = random_input(model, rng);
  ModelInput b_in = random_input(model, rng);
  b_in.paths = a.paths;  // same paths, different visual content
  const MatRM fa = model.visual_features(a);
  const MatRM fb = model.visual_features(b_in);
  CHECK(fa.rows() == model.config().horizon_s);
  CHECK(fa.cols() == model.config().cv);
  CHECK((fa - fb).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("default feature widths match the runtime configuration") {
  ModelConfig cfg;  // paper-scale defaults
  cfg.history_r = 5;
  cfg.horizon_s = 5;
  ScanpathModel model(cfg);
  Rng rng(16);
  const ModelInput input = random_input(model, rng);
  CHECK(model.visual_features(input).cols() == 128);
  CHECK(model.path_features(input).cols() == 128);
  CHECK(model.path_features(input).rows() == 5);
  CHECK(model.causal_features({}).cols() == 32);
  const auto params = model.predict(input, {});
  CHECK(params.size() == 5);
  for (const auto& p : params) CHECK(p.components() == 3);
}

TEST_CASE("forward passes are deterministic and reproducible") {
  const ModelConfig cfg = tiny_config();
  ScanpathModel m1(cfg);
  ScanpathModel m2(cfg);
  REQUIRE(m1.params().size() == m2.params().size());
  const auto v1 = m1.params().values();
  const auto v2 = m2.params().values();
  CHECK(std::memcmp(v1.data(), v2.data(), v1.size() * sizeof(double)) == 0);

  Rng rng(17);
  const ModelInput input = random_input(m1, rng);
  const CausalContext ctx{{0.4, -0.2}, {1.0, 0.3}};
  const auto pa = m1.predict(input, ctx);
  const auto pb = m2.predict(input, ctx);
  for (std::size_t t = 0; t < pa.size(); ++t) {
    for (int i = 0; i < pa[t].components(); ++i) {
      const auto idx = static_cast<std::size_t>(i);
      CHECK(pa[t].weights[idx] == pb[t].weights[idx]);
      CHECK(pa[t].means[idx][0] == pb[t].means[idx][0]);
      CHECK(pa[t].variances[idx][1] == pb[t].variances[idx][1]);
    }
  }
}

TEST_CASE("head outputs satisfy the mixture contracts") {
  ScanpathModel model(tiny_config());
  Rng rng(18);
  const ModelInput input = random_input(model, rng);
  const auto params = model.predict(input, {{1.0, 2.0}});
  for (const auto& p : params) {
    double sum = 0.0;
    for (double wgt : p.weights) sum += wgt;
    CHECK(std::abs(sum - 1.0) < 1e-9);
    for (const auto& var : p.variances) {
      CHECK(var[0] >= kVarianceFloor);
      CHECK(var[1] >= kVarianceFloor);
    }
  }
}

TEST_CASE("causal features are strictly causal") {
  ScanpathModel model(tiny_config());
  const int s = model.config().horizon_s;
  CausalContext ctx;
  Rng rng(19);
  for (int t = 0; t < s; ++t) ctx.push_back({rng.uniform(-3, 3), rng.uniform(-3, 3)});

  const MatRM base = model.causal_features(ctx);
  CausalContext perturbed = ctx;
  perturbed[static_cast<std::size_t>(s - 1)] = {99.0, -99.0};
  const MatRM changed = model.causal_features(perturbed);
  for (int t = 0; t < s - 1; ++t) {
    for (int c = 0; c < base.cols(); ++c) {
      CHECK(base(t, c) == changed(t, c));  // bitwise
    }
  }

  // Empty context gives a deterministic bias-only response.
  const MatRM empty1 = model.causal_features({});
  const MatRM empty2 = model.causal_features({});
  CHECK((empty1 - empty2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gmm parameters are causally invariant to future context entries") {
  ScanpathModel model(tiny_config());
  Rng rng(20);
  const ModelInput input = random_input(model, rng);
  const int s = model.config().horizon_s;

  CausalContext full;
  for (int t = 0; t < s; ++t) full.push_back({rng.uniform(-3, 3), rng.uniform(-3, 3)});

  for (int t = 0; t < s; ++t) {
    CausalContext mutated = full;
    for (int j = t; j < s; ++j) {
      mutated[static_cast<std::size_t>(j)] = {rng.uniform(-50, 50), rng.uniform(-50, 50)};
    }
    const auto a = model.predict(input, full);
    const auto b = model.predict(input, mutated);
    for (int step = 0; step <= t; ++step) {
      const auto si = static_cast<std::size_t>(step);
      for (int i = 0; i < a[si].components(); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        CHECK(a[si].weights[idx] == b[si].weights[idx]);
        CHECK(a[si].means[idx][0] == b[si].means[idx][0]);
        CHECK(a[si].means[idx][1] == b[si].means[idx][1]);
        CHECK(a[si].variances[idx][0] == b[si].variances[idx][0]);
        CHECK(a[si].variances[idx][1] == b[si].variances[idx][1]);
      }
    }
  }
}

TEST_CASE("end-to-end gradients match finite differences on a tiny model") {
  ScanpathModel model(tiny_config());
  const int s = model.config().horizon_s;
  Rng rng(22);
  const ModelInput input = random_input(model, rng);
  std::vector<UvPoint> targets;
  for (int t = 0; t < s; ++t) targets.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2)});
  const CausalContext ctx(targets.begin(), targets.end());
  const QuantizerSpec qspec(0.2);

  auto loss = [&]() {
    const auto params = model.predict(input, ctx);
    return code_length(std::span<const UvPoint>(targets), std::span<const GmmParams>(params),
                       qspec);
  };

  ScanpathModel::ForwardCache cache;
  const auto params = model.forward(input, ctx, cache);
  std::vector<GmmGrad> dgmm;
  code_length_grad(std::span<const UvPoint>(targets), std::span<const GmmParams>(params), qspec,
                   dgmm);
  std::vector<double> grads(model.params().size(), 0.0);
  model.backward(cache, dgmm, grads);

  auto values = model.params().values();
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + h;
    const double up = loss();
    values[i] = saved - h;
    const double dn = loss();
    values[i] = saved;
    const double numeric = (up - dn) / (2 * h);
    const double abs_err = std::abs(numeric - grads[i]);
    if (abs_err < 1e-8) continue;  // FD roundoff floor for near-zero gradients
    worst = std::max(worst, abs_err / std::max(std::abs(numeric), std::abs(grads[i])));
  }
  CHECK(worst < 1e-3);
}

TEST_SUITE_END();
