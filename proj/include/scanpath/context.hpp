#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "scanpath/entropy.hpp"
#include "scanpath/geometry.hpp"
#include "scanpath/layers.hpp"
#include "scanpath/param_store.hpp"

namespace scanpath {

/// Historical context for one prediction: R viewports (optional rasters) and
/// the scanpath projected onto each of the R anchor viewports as relative-uv
/// windows of length 2R+1.
struct HistoryWindow {
  std::vector<ErpFrame> viewports;           // empty when no frames are available
  std::vector<std::vector<UvPoint>> paths;   // R windows of 2R+1 points
  SphericalPoint anchor;                     // viewpoint at the last history index
  double rate_hz = 5.0;
  int behind_clamped = 0;   // projections clamped to the FoV rectangle
  int missing_frames = 0;   // anchors whose frame was unavailable
};

/// Previously emitted uv viewpoints, projected onto the anchor viewport.
using CausalContext = std::vector<UvPoint>;

/// Builds the history window ending at path index t_anchor. Window indices
/// outside [0, t_anchor] are clamped to the anchor time, so no data after
/// the prediction boundary is consulted. Behind-viewport projections clamp
/// to the FoV rectangle boundary and are counted in behind_clamped.
HistoryWindow build_history(const std::vector<SphericalPoint>& path,
                            std::span<const ErpFrame> frames, int t_anchor, int history_r,
                            const ViewportSpec& spec);

/// project_to_uv that never throws: behind-viewport and out-of-FoV points
/// land on the FoV rectangle boundary and increment `clamped`.
UvPoint project_to_uv_clamped(const SphericalPoint& point, const RotationMatrix& anchor_rot,
                              const ViewportSpec& spec, int& clamped);

/// Deterministic transform from a viewport raster to a fixed-length feature
/// vector, with an optional learned stage whose weights live in the model's
/// parameter store.
class FeatureProvider {
 public:
  virtual ~FeatureProvider() = default;
  virtual std::string name() const = 0;
  virtual int feature_length() const = 0;
  /// Parameter-free part, usable for dataset-time caching. A null raster
  /// stands for missing visual input.
  virtual Vec precompute(const ErpFrame* raster) const = 0;
  virtual void register_params(ParamStore& ps) = 0;
  virtual void init_params(ParamStore& ps, Rng& rng) const = 0;
  virtual Vec features(const ParamStore& ps, const Vec& pre) const = 0;
  virtual void backward(const ParamStore& ps, std::span<double> grads, const Vec& pre,
                        const Vec& dfeat) const = 0;
};

/// Average-pools luminance onto a rows x cols grid, then maps each cell to
/// `channels` learned channels. Pooling uses exact fractional-area cells, so
/// the grid mean equals the raster mean.
class PooledLuminanceProvider : public FeatureProvider {
 public:
  PooledLuminanceProvider(int rows, int cols, int channels);

  std::string name() const override { return "pooled-luminance"; }
  int feature_length() const override { return rows_ * cols_ * channels_; }
  Vec precompute(const ErpFrame* raster) const override;
  void register_params(ParamStore& ps) override;
  void init_params(ParamStore& ps, Rng& rng) const override;
  Vec features(const ParamStore& ps, const Vec& pre) const override;
  void backward(const ParamStore& ps, std::span<double> grads, const Vec& pre,
                const Vec& dfeat) const override;

  static Vec pool_luminance(const ErpFrame& raster, int rows, int cols);

 private:
  int rows_, cols_, channels_;
  ParamId w_ = 0, b_ = 0;
};

struct ModelConfig {
  int history_r = 5;
  int horizon_s = 5;
  int mixture_k = 3;
  int cv = 128;
  int ch = 128;
  int cc = 32;
  int head_width = 128;
  int visual_blocks = 3;
  int path_anchor_blocks = 1;
  int path_step_blocks = 4;
  int causal_blocks = 4;
  int head_blocks = 2;
  int causal_embed = 32;
  int pool_rows = 8;
  int pool_cols = 14;
  int pool_channels = 16;
  double lrelu_slope = 0.01;
  double variance_init_bias = 25.0;
  std::uint64_t init_seed = 1;
};

/// Precomputed per-sample inputs (provider precomputations + projected path
/// windows); the raster-level HistoryWindow reduces to this.
struct ModelInput {
  std::vector<Vec> provider_pre;            // R entries
  std::vector<std::vector<UvPoint>> paths;  // R x (2R+1)
};

/// The conditional probability model P(eta_t | X, s, c_t): visual, historical
/// path, and causal path feature networks fused into three GMM prediction
/// heads, all parameters in one named store.
class ScanpathModel {
 public:
  explicit ScanpathModel(ModelConfig cfg);
  ScanpathModel(ModelConfig cfg, std::unique_ptr<FeatureProvider> provider);

  const ModelConfig& config() const { return cfg_; }
  const FeatureProvider& provider() const { return *provider_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }
  std::size_t parameter_count() const { return store_.size(); }

  ModelInput make_input(const HistoryWindow& window) const;

  struct ForwardCache {
    // visual branch
    std::vector<Vec> provider_pre;    // R provider precomputations
    MatRM visual_stacked;             // R x F
    MatRM visual_mixed;               // S x F
    std::vector<Mlp::Cache> visual_steps;
    // path branch
    std::vector<Vec> path_flat;       // R x 2(2R+1)
    std::vector<Mlp::Cache> path_anchor;
    MatRM path_stacked;               // R x Ch
    MatRM path_mixed;                 // S x Ch
    std::vector<std::vector<ResidualBlock::Cache>> path_steps;
    // causal branch
    std::vector<Vec> causal_coords;   // S x 2 (padded)
    Vec causal_embedded;              // S*Ce
    Vec causal_front_out;
    std::vector<MaskedResidualBlock::Cache> causal_blocks;
    Vec causal_back_in;
    // fusion + heads
    std::vector<Vec> fused;           // S x (Cv+Ch+Cc)
    std::vector<Mlp::Cache> head_alpha, head_mu, head_var;
    std::vector<Vec> var_raw;         // S x 2K, pre-floor
  };

  /// Features of the three branches (spec operations).
  MatRM visual_features(const ModelInput& input) const;
  MatRM path_features(const ModelInput& input) const;
  MatRM causal_features(const CausalContext& ctx) const;

  /// Per-step mixture parameters for all S steps.
  std::vector<GmmParams> predict(const ModelInput& input, const CausalContext& ctx) const;
  std::vector<GmmParams> predict(const HistoryWindow& window, const CausalContext& ctx) const;

  /// predict() with the context-independent visual/path features precomputed;
  /// only the causal branch and heads are evaluated.
  std::vector<GmmParams> predict_given(const MatRM& visual, const MatRM& path,
                                       const CausalContext& ctx) const;

  std::vector<GmmParams> forward(const ModelInput& input, const CausalContext& ctx,
                                 ForwardCache& cache) const;
  /// Accumulates parameter gradients for one sample given per-step gradients
  /// with respect to the emitted GmmParams (weight grads through logits).
  void backward(const ForwardCache& cache, const std::vector<GmmGrad>& dgmm,
                std::span<double> grads) const;

 private:
  void build();
  MatRM visual_forward(const ModelInput& input, ForwardCache& cache) const;
  MatRM path_forward(const ModelInput& input, ForwardCache& cache) const;
  MatRM causal_forward(const CausalContext& ctx, ForwardCache& cache) const;
  std::vector<GmmParams> fuse_and_heads(const MatRM& vis, const MatRM& pat, const MatRM& cau,
                                        ForwardCache& cache) const;

  ModelConfig cfg_;
  std::unique_ptr<FeatureProvider> provider_;
  ParamStore store_;

  TimeMix visual_mix_, path_mix_;
  Mlp visual_step_;                       // shared across steps
  Mlp path_anchor_;                       // shared across anchors
  std::vector<ResidualBlock> path_step_;  // shared across steps
  Linear causal_embed_;
  MaskedLinear causal_front_, causal_back_;
  std::vector<MaskedResidualBlock> causal_blocks_;
  Mlp head_alpha_, head_mu_, head_var_;
};

}  // namespace scanpath
