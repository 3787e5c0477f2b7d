#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scanpath/context.hpp"

namespace scanpath {

/// One (history window, future targets) pair with provider inputs already
/// precomputed. Targets are continuous uv in the anchor frame.
struct TrainSample {
  ModelInput input;
  std::vector<UvPoint> targets;
};

struct FitConfig {
  double lr = 1e-4;
  int batch = 16;
  int max_epochs = 60;
  std::uint64_t seed = 7;
  double delta = 0.2;
  double noise_half_range_deltas = 1.0;
  double plateau_min_delta_bits = 0.01;
  int plateau_patience = 5;
  double lr_decay = 0.1;
  double lr_min = 1e-8;
  int threads = 1;
  bool verbose = false;
};

struct EpochLog {
  int epoch = 0;
  double bits = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> log;
  double final_bits = 0.0;
};

/// Minimizes the expected code length with the additive-noise surrogate,
/// first-order adaptive-moment updates, and 10x learning-rate decay on
/// plateau. Deterministic given the seed and thread count.
TrainResult train(ScanpathModel& model, const std::vector<TrainSample>& samples,
                  const FitConfig& cfg);

/// Held-out bits per viewpoint under hard quantization; the causal context
/// is the quantized target sequence (what a decoder would have seen).
double evaluate_bits(const ScanpathModel& model, std::span<const TrainSample> samples,
                     double delta);

/// Windows a scanpath into training samples, one per anchor stride.
std::vector<TrainSample> make_samples(const ScanpathModel& model,
                                      const std::vector<SphericalPoint>& path,
                                      std::span<const ErpFrame> frames, const ViewportSpec& spec,
                                      int stride = 1);

}  // namespace scanpath
