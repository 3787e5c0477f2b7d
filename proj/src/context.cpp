#include "scanpath/context.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scanpath {

namespace {

UvPoint clamp_to_fov_rect(double u, double v, const ViewportSpec& spec) {
  const double hu = 0.5 * spec.width_px;
  const double hv = 0.5 * spec.height_px;
  const double s = std::max(std::abs(u) / hu, std::abs(v) / hv);
  if (s <= 0.0) return {hu, 0.0};
  return {u / s, v / s};
}

// Projection that never throws: behind-viewport points land on the FoV
// rectangle boundary in their azimuthal direction.
UvPoint project_clamped(const Vec3& p, const RotationMatrix& rot, const ViewportSpec& spec,
                        int& clamped) {
  const Vec3 q = rot.apply_transposed(p);
  const double x_min = 1e-6 * spec.radius;
  if (q.x <= x_min) {
    ++clamped;
    return clamp_to_fov_rect(q.y, -q.z, spec);
  }
  const double scale = spec.radius / q.x;
  const UvPoint uv{q.y * scale, -q.z * scale};
  const double hu = 0.5 * spec.width_px;
  const double hv = 0.5 * spec.height_px;
  if (std::abs(uv.u) > hu || std::abs(uv.v) > hv) {
    ++clamped;
    return clamp_to_fov_rect(uv.u, uv.v, spec);
  }
  return uv;
}

}  // namespace

UvPoint project_to_uv_clamped(const SphericalPoint& point, const RotationMatrix& anchor_rot,
                              const ViewportSpec& spec, int& clamped) {
  return project_clamped(sph_to_vec3(point, spec.radius), anchor_rot, spec, clamped);
}

HistoryWindow build_history(const std::vector<SphericalPoint>& path,
                            std::span<const ErpFrame> frames, int t_anchor, int history_r,
                            const ViewportSpec& spec) {
  const int r = history_r;
  if (r < 1) throw std::invalid_argument("build_history: R must be >= 1");
  if (t_anchor < 2 * r) {
    throw std::invalid_argument("build_history: insufficient history (t_anchor < 2R)");
  }
  if (t_anchor >= static_cast<int>(path.size())) {
    throw std::invalid_argument("build_history: t_anchor out of range");
  }

  HistoryWindow window;
  window.anchor = path[static_cast<std::size_t>(t_anchor)];
  window.paths.reserve(static_cast<std::size_t>(r));
  for (int tau = t_anchor - r + 1; tau <= t_anchor; ++tau) {
    const SphericalPoint& anchor = path[static_cast<std::size_t>(tau)];
    if (!frames.empty()) {
      if (tau < static_cast<int>(frames.size())) {
        window.viewports.push_back(
            extract_viewport(frames[static_cast<std::size_t>(tau)], anchor, spec));
      } else {
        window.viewports.emplace_back();  // sentinel: provider sees zero input
        ++window.missing_frames;
      }
    }
    const RotationMatrix rot = rotation_matrix(anchor);
    std::vector<UvPoint> projected;
    projected.reserve(static_cast<std::size_t>(2 * r + 1));
    for (int k = tau - r; k <= tau + r; ++k) {
      const int kk = std::clamp(k, 0, t_anchor);
      if (kk == tau) {
        projected.push_back({0.0, 0.0});
        continue;
      }
      const Vec3 p = sph_to_vec3(path[static_cast<std::size_t>(kk)], spec.radius);
      projected.push_back(project_clamped(p, rot, spec, window.behind_clamped));
    }
    window.paths.push_back(std::move(projected));
  }
  return window;
}

PooledLuminanceProvider::PooledLuminanceProvider(int rows, int cols, int channels)
    : rows_(rows), cols_(cols), channels_(channels) {
  if (rows < 1 || cols < 1 || channels < 1) {
    throw std::invalid_argument("PooledLuminanceProvider: bad dimensions");
  }
}

Vec PooledLuminanceProvider::pool_luminance(const ErpFrame& raster, int rows, int cols) {
  Vec grid = Vec::Zero(static_cast<Eigen::Index>(rows) * cols);
  const double row_span = static_cast<double>(raster.height) / rows;
  const double col_span = static_cast<double>(raster.width) / cols;
  for (int i = 0; i < rows; ++i) {
    const double r0 = i * row_span;
    const double r1 = (i + 1) * row_span;
    for (int j = 0; j < cols; ++j) {
      const double c0 = j * col_span;
      const double c1 = (j + 1) * col_span;
      double acc = 0.0;
      for (int rr = static_cast<int>(std::floor(r0)); rr < raster.height && rr < r1; ++rr) {
        const double wr = std::min(r1, static_cast<double>(rr) + 1.0) -
                          std::max(r0, static_cast<double>(rr));
        if (wr <= 0.0) continue;
        for (int cc = static_cast<int>(std::floor(c0)); cc < raster.width && cc < c1; ++cc) {
          const double wc = std::min(c1, static_cast<double>(cc) + 1.0) -
                            std::max(c0, static_cast<double>(cc));
          if (wc <= 0.0) continue;
          double lum = 0.0;
          for (int ch = 0; ch < raster.channels; ++ch) lum += raster.at(rr, cc, ch);
          lum /= raster.channels;
          acc += wr * wc * lum;
        }
      }
      grid[static_cast<Eigen::Index>(i) * cols + j] = acc / (row_span * col_span);
    }
  }
  return grid;
}

Vec PooledLuminanceProvider::precompute(const ErpFrame* raster) const {
  if (raster == nullptr) return Vec::Zero(static_cast<Eigen::Index>(rows_) * cols_);
  return pool_luminance(*raster, rows_, cols_);
}

void PooledLuminanceProvider::register_params(ParamStore& ps) {
  w_ = ps.add("provider.w", {static_cast<std::size_t>(channels_)});
  b_ = ps.add("provider.b", {static_cast<std::size_t>(channels_)});
}

void PooledLuminanceProvider::init_params(ParamStore& ps, Rng& rng) const {
  init_uniform(ps, w_, 1, rng);
  init_uniform(ps, b_, 1, rng);
}

Vec PooledLuminanceProvider::features(const ParamStore& ps, const Vec& pre) const {
  const auto w = ps.vec(w_);
  const auto b = ps.vec(b_);
  Vec out(feature_length());
  for (int cell = 0; cell < rows_ * cols_; ++cell) {
    out.segment(cell * channels_, channels_) = pre[cell] * w + b;
  }
  return out;
}

void PooledLuminanceProvider::backward(const ParamStore& ps, std::span<double> grads,
                                       const Vec& pre, const Vec& dfeat) const {
  auto gw = ps.grad_vec(w_, grads);
  auto gb = ps.grad_vec(b_, grads);
  for (int cell = 0; cell < rows_ * cols_; ++cell) {
    gw += pre[cell] * dfeat.segment(cell * channels_, channels_);
    gb += dfeat.segment(cell * channels_, channels_);
  }
}

ScanpathModel::ScanpathModel(ModelConfig cfg)
    : ScanpathModel(cfg, std::make_unique<PooledLuminanceProvider>(cfg.pool_rows, cfg.pool_cols,
                                                                   cfg.pool_channels)) {}

ScanpathModel::ScanpathModel(ModelConfig cfg, std::unique_ptr<FeatureProvider> provider)
    : cfg_(cfg), provider_(std::move(provider)) {
  build();
}

void ScanpathModel::build() {
  const int r = cfg_.history_r;
  const int s = cfg_.horizon_s;
  const int window = 2 * (2 * r + 1);
  const int fused = cfg_.cv + cfg_.ch + cfg_.cc;
  const double slope = cfg_.lrelu_slope;

  provider_->register_params(store_);
  visual_mix_ = TimeMix(store_, "visual.timemix", r, s);
  visual_step_ = Mlp(store_, "visual.mlp", provider_->feature_length(), cfg_.cv,
                     cfg_.visual_blocks, cfg_.cv, slope);
  path_anchor_ = Mlp(store_, "path.embed", window, cfg_.ch, cfg_.path_anchor_blocks,
                     std::nullopt, slope);
  path_mix_ = TimeMix(store_, "path.timemix", r, s);
  path_step_.reserve(static_cast<std::size_t>(cfg_.path_step_blocks));
  for (int i = 0; i < cfg_.path_step_blocks; ++i) {
    path_step_.emplace_back(store_, "path.step" + std::to_string(i), cfg_.ch, slope);
  }
  causal_embed_ = Linear(store_, "causal.embed", 2, cfg_.causal_embed);
  causal_front_ = MaskedLinear(store_, "causal.front", s, cfg_.causal_embed, cfg_.cc,
                               MaskedLinear::Kind::Front);
  causal_blocks_.reserve(static_cast<std::size_t>(cfg_.causal_blocks));
  for (int i = 0; i < cfg_.causal_blocks; ++i) {
    causal_blocks_.emplace_back(store_, "causal.res" + std::to_string(i), s, cfg_.cc, slope);
  }
  causal_back_ = MaskedLinear(store_, "causal.back", s, cfg_.cc, cfg_.cc,
                              MaskedLinear::Kind::Hidden);
  head_alpha_ = Mlp(store_, "head.alpha", fused, cfg_.head_width, cfg_.head_blocks,
                    cfg_.mixture_k, slope);
  head_mu_ = Mlp(store_, "head.mu", fused, cfg_.head_width, cfg_.head_blocks,
                 2 * cfg_.mixture_k, slope);
  head_var_ = Mlp(store_, "head.var", fused, cfg_.head_width, cfg_.head_blocks,
                  2 * cfg_.mixture_k, slope);

  store_.allocate();
  Rng rng(cfg_.init_seed);
  provider_->init_params(store_, rng);
  visual_mix_.init(store_, rng);
  visual_step_.init(store_, rng);
  path_anchor_.init(store_, rng);
  path_mix_.init(store_, rng);
  for (const auto& blk : path_step_) blk.init(store_, rng);
  causal_embed_.init(store_, rng);
  causal_front_.init(store_, rng);
  for (const auto& blk : causal_blocks_) blk.init(store_, rng);
  causal_back_.init(store_, rng);
  head_alpha_.init(store_, rng);
  head_mu_.init(store_, rng);
  head_var_.init(store_, rng);
  // Start with wide mixture components so early targets keep usable mass.
  store_.vec(head_var_.back->b).setConstant(cfg_.variance_init_bias);
}

ModelInput ScanpathModel::make_input(const HistoryWindow& window) const {
  const int r = cfg_.history_r;
  if (static_cast<int>(window.paths.size()) != r) {
    throw std::invalid_argument("make_input: window has wrong anchor count");
  }
  ModelInput input;
  input.provider_pre.reserve(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) {
    const ErpFrame* raster =
        window.viewports.empty() ? nullptr : &window.viewports[static_cast<std::size_t>(i)];
    if (raster != nullptr && raster->height == 0) raster = nullptr;
    input.provider_pre.push_back(provider_->precompute(raster));
  }
  input.paths = window.paths;
  return input;
}

MatRM ScanpathModel::visual_forward(const ModelInput& input, ForwardCache& cache) const {
  const int r = cfg_.history_r;
  const int s = cfg_.horizon_s;
  const int f = provider_->feature_length();
  cache.provider_pre = input.provider_pre;
  cache.visual_stacked.resize(r, f);
  for (int i = 0; i < r; ++i) {
    cache.visual_stacked.row(i) =
        provider_->features(store_, input.provider_pre[static_cast<std::size_t>(i)]).transpose();
  }
  cache.visual_mixed = visual_mix_.forward(store_, cache.visual_stacked);
  cache.visual_steps.resize(static_cast<std::size_t>(s));
  MatRM out(s, cfg_.cv);
  for (int t = 0; t < s; ++t) {
    const Vec x = cache.visual_mixed.row(t).transpose();
    out.row(t) =
        visual_step_.forward(store_, x, cache.visual_steps[static_cast<std::size_t>(t)])
            .transpose();
  }
  return out;
}

MatRM ScanpathModel::path_forward(const ModelInput& input, ForwardCache& cache) const {
  const int r = cfg_.history_r;
  const int s = cfg_.horizon_s;
  const int window = 2 * (2 * r + 1);
  cache.path_flat.resize(static_cast<std::size_t>(r));
  cache.path_anchor.resize(static_cast<std::size_t>(r));
  cache.path_stacked.resize(r, cfg_.ch);
  for (int i = 0; i < r; ++i) {
    const auto& pts = input.paths[static_cast<std::size_t>(i)];
    if (static_cast<int>(pts.size()) != 2 * r + 1) {
      throw std::invalid_argument("path_forward: projected window has wrong length");
    }
    Vec flat(window);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      flat[static_cast<Eigen::Index>(2 * k)] = pts[k].u;
      flat[static_cast<Eigen::Index>(2 * k + 1)] = pts[k].v;
    }
    cache.path_flat[static_cast<std::size_t>(i)] = flat;
    cache.path_stacked.row(i) =
        path_anchor_.forward(store_, flat, cache.path_anchor[static_cast<std::size_t>(i)])
            .transpose();
  }
  cache.path_mixed = path_mix_.forward(store_, cache.path_stacked);
  cache.path_steps.assign(static_cast<std::size_t>(s), {});
  MatRM out(s, cfg_.ch);
  for (int t = 0; t < s; ++t) {
    Vec h = cache.path_mixed.row(t).transpose();
    auto& step_caches = cache.path_steps[static_cast<std::size_t>(t)];
    step_caches.resize(path_step_.size());
    for (std::size_t bidx = 0; bidx < path_step_.size(); ++bidx) {
      h = path_step_[bidx].forward(store_, h, step_caches[bidx]);
    }
    out.row(t) = h.transpose();
  }
  return out;
}

MatRM ScanpathModel::causal_forward(const CausalContext& ctx, ForwardCache& cache) const {
  const int s = cfg_.horizon_s;
  const int ce = cfg_.causal_embed;
  if (static_cast<int>(ctx.size()) > s) {
    throw std::invalid_argument("causal_forward: context longer than horizon");
  }
  cache.causal_coords.assign(static_cast<std::size_t>(s), Vec::Zero(2));
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    cache.causal_coords[i][0] = ctx[i].u;
    cache.causal_coords[i][1] = ctx[i].v;
  }
  cache.causal_embedded.resize(static_cast<Eigen::Index>(s) * ce);
  for (int t = 0; t < s; ++t) {
    cache.causal_embedded.segment(t * ce, ce) =
        causal_embed_.forward(store_, cache.causal_coords[static_cast<std::size_t>(t)]);
  }
  cache.causal_front_out = causal_front_.forward(store_, cache.causal_embedded);
  Vec h = leaky_relu(cache.causal_front_out, cfg_.lrelu_slope);
  cache.causal_blocks.resize(causal_blocks_.size());
  for (std::size_t i = 0; i < causal_blocks_.size(); ++i) {
    h = causal_blocks_[i].forward(store_, h, cache.causal_blocks[i]);
  }
  cache.causal_back_in = h;
  const Vec flat = causal_back_.forward(store_, h);
  MatRM out(s, cfg_.cc);
  for (int t = 0; t < s; ++t) out.row(t) = flat.segment(t * cfg_.cc, cfg_.cc).transpose();
  return out;
}

MatRM ScanpathModel::visual_features(const ModelInput& input) const {
  ForwardCache cache;
  return visual_forward(input, cache);
}

MatRM ScanpathModel::path_features(const ModelInput& input) const {
  ForwardCache cache;
  return path_forward(input, cache);
}

MatRM ScanpathModel::causal_features(const CausalContext& ctx) const {
  ForwardCache cache;
  return causal_forward(ctx, cache);
}

std::vector<GmmParams> ScanpathModel::fuse_and_heads(const MatRM& vis, const MatRM& pat,
                                                     const MatRM& cau,
                                                     ForwardCache& cache) const {
  const int s = cfg_.horizon_s;
  const int k = cfg_.mixture_k;
  cache.fused.resize(static_cast<std::size_t>(s));
  cache.head_alpha.resize(static_cast<std::size_t>(s));
  cache.head_mu.resize(static_cast<std::size_t>(s));
  cache.head_var.resize(static_cast<std::size_t>(s));
  cache.var_raw.resize(static_cast<std::size_t>(s));

  std::vector<GmmParams> out;
  out.reserve(static_cast<std::size_t>(s));
  for (int t = 0; t < s; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    Vec fused(cfg_.cv + cfg_.ch + cfg_.cc);
    fused << vis.row(t).transpose(), pat.row(t).transpose(), cau.row(t).transpose();
    cache.fused[ti] = fused;

    const Vec logits = head_alpha_.forward(store_, fused, cache.head_alpha[ti]);
    const Vec mu = head_mu_.forward(store_, fused, cache.head_mu[ti]);
    const Vec var_raw = head_var_.forward(store_, fused, cache.head_var[ti]);
    cache.var_raw[ti] = var_raw;

    const Vec alpha = softmax(logits);
    std::vector<double> weights(static_cast<std::size_t>(k));
    std::vector<std::array<double, 2>> means(static_cast<std::size_t>(k));
    std::vector<std::array<double, 2>> variances(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      weights[idx] = alpha[i];
      means[idx] = {mu[2 * i], mu[2 * i + 1]};
      variances[idx] = {std::max(var_raw[2 * i], kVarianceFloor),
                        std::max(var_raw[2 * i + 1], kVarianceFloor)};
    }
    out.emplace_back(std::move(weights), std::move(means), std::move(variances));
  }
  return out;
}

std::vector<GmmParams> ScanpathModel::forward(const ModelInput& input, const CausalContext& ctx,
                                              ForwardCache& cache) const {
  const MatRM vis = visual_forward(input, cache);
  const MatRM pat = path_forward(input, cache);
  const MatRM cau = causal_forward(ctx, cache);
  return fuse_and_heads(vis, pat, cau, cache);
}

std::vector<GmmParams> ScanpathModel::predict(const ModelInput& input,
                                              const CausalContext& ctx) const {
  ForwardCache cache;
  return forward(input, ctx, cache);
}

std::vector<GmmParams> ScanpathModel::predict_given(const MatRM& visual, const MatRM& path,
                                                    const CausalContext& ctx) const {
  ForwardCache cache;
  const MatRM cau = causal_forward(ctx, cache);
  return fuse_and_heads(visual, path, cau, cache);
}

std::vector<GmmParams> ScanpathModel::predict(const HistoryWindow& window,
                                              const CausalContext& ctx) const {
  return predict(make_input(window), ctx);
}

void ScanpathModel::backward(const ForwardCache& cache, const std::vector<GmmGrad>& dgmm,
                             std::span<double> grads) const {
  const int s = cfg_.horizon_s;
  const int k = cfg_.mixture_k;
  const int r = cfg_.history_r;
  if (static_cast<int>(dgmm.size()) != s) {
    throw std::invalid_argument("backward: per-step gradient count mismatch");
  }

  MatRM dvis = MatRM::Zero(s, cfg_.cv);
  MatRM dpat = MatRM::Zero(s, cfg_.ch);
  Vec dcau_flat = Vec::Zero(static_cast<Eigen::Index>(s) * cfg_.cc);

  for (int t = 0; t < s; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    Vec dlogits(k), dmu(2 * k), dvar(2 * k);
    for (int i = 0; i < k; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      dlogits[i] = dgmm[ti].weight_logits[idx];
      dmu[2 * i] = dgmm[ti].means[idx][0];
      dmu[2 * i + 1] = dgmm[ti].means[idx][1];
      // d max(x, floor)/dx vanishes below the floor
      dvar[2 * i] =
          cache.var_raw[ti][2 * i] > kVarianceFloor ? dgmm[ti].variances[idx][0] : 0.0;
      dvar[2 * i + 1] =
          cache.var_raw[ti][2 * i + 1] > kVarianceFloor ? dgmm[ti].variances[idx][1] : 0.0;
    }
    Vec dfused = head_alpha_.backward(store_, grads, cache.head_alpha[ti], dlogits);
    dfused += head_mu_.backward(store_, grads, cache.head_mu[ti], dmu);
    dfused += head_var_.backward(store_, grads, cache.head_var[ti], dvar);

    dvis.row(t) = dfused.segment(0, cfg_.cv).transpose();
    dpat.row(t) = dfused.segment(cfg_.cv, cfg_.ch).transpose();
    dcau_flat.segment(t * cfg_.cc, cfg_.cc) += dfused.segment(cfg_.cv + cfg_.ch, cfg_.cc);
  }

  // visual branch
  MatRM dmixed(s, provider_->feature_length());
  for (int t = 0; t < s; ++t) {
    const Vec dx = visual_step_.backward(store_, grads,
                                         cache.visual_steps[static_cast<std::size_t>(t)],
                                         dvis.row(t).transpose());
    dmixed.row(t) = dx.transpose();
  }
  const MatRM dstacked = visual_mix_.backward(store_, grads, cache.visual_stacked, dmixed);
  for (int i = 0; i < r; ++i) {
    provider_->backward(store_, grads, cache.provider_pre[static_cast<std::size_t>(i)],
                        dstacked.row(i).transpose());
  }

  // path branch
  MatRM dpath_mixed(s, cfg_.ch);
  for (int t = 0; t < s; ++t) {
    Vec dh = dpat.row(t).transpose();
    const auto& step_caches = cache.path_steps[static_cast<std::size_t>(t)];
    for (std::size_t bidx = path_step_.size(); bidx-- > 0;) {
      dh = path_step_[bidx].backward(store_, grads, step_caches[bidx], dh);
    }
    dpath_mixed.row(t) = dh.transpose();
  }
  const MatRM dpath_stacked = path_mix_.backward(store_, grads, cache.path_stacked, dpath_mixed);
  for (int i = 0; i < r; ++i) {
    path_anchor_.backward(store_, grads, cache.path_anchor[static_cast<std::size_t>(i)],
                          dpath_stacked.row(i).transpose());
  }

  // causal branch
  Vec dh = causal_back_.backward(store_, grads, cache.causal_back_in, dcau_flat);
  for (std::size_t i = causal_blocks_.size(); i-- > 0;) {
    dh = causal_blocks_[i].backward(store_, grads, cache.causal_blocks[i], dh);
  }
  dh = leaky_relu_backward(cache.causal_front_out, dh, cfg_.lrelu_slope);
  const Vec dembedded = causal_front_.backward(store_, grads, cache.causal_embedded, dh);
  const int ce = cfg_.causal_embed;
  for (int t = 0; t < s; ++t) {
    causal_embed_.backward(store_, grads, cache.causal_coords[static_cast<std::size_t>(t)],
                           dembedded.segment(t * ce, ce));
  }
}

}  // namespace scanpath
