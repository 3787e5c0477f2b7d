#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "scanpath/geometry.hpp"
#include "scanpath/rng.hpp"

namespace scanpath {

/// Smallest admissible diagonal variance, in uv pixels^2.
inline constexpr double kVarianceFloor = 1e-4;
/// Probability mass clamp inside the log (caps any symbol at ~40 bits).
inline constexpr double kProbFloor = 1e-12;

struct QuantizerSpec {
  double step = 0.0;

  explicit QuantizerSpec(double delta);
};

/// Integer lattice bin; its center is step * (bu, bv).
struct BinIndex {
  long long bu = 0;
  long long bv = 0;

  UvPoint center(const QuantizerSpec& spec) const {
    return {spec.step * static_cast<double>(bu), spec.step * static_cast<double>(bv)};
  }
};

/// Mixture of K bivariate Gaussians with diagonal covariance, in uv pixels.
struct GmmParams {
  std::vector<double> weights;
  std::vector<std::array<double, 2>> means;
  std::vector<std::array<double, 2>> variances;

  GmmParams() = default;
  GmmParams(std::vector<double> w, std::vector<std::array<double, 2>> mu,
            std::vector<std::array<double, 2>> var);

  int components() const { return static_cast<int>(weights.size()); }
};

/// Gradients of a scalar loss with respect to one step's GmmParams. Weight
/// gradients are expressed through unconstrained softmax logits.
struct GmmGrad {
  std::vector<double> weight_logits;
  std::vector<std::array<double, 2>> means;
  std::vector<std::array<double, 2>> variances;

  explicit GmmGrad(int k)
      : weight_logits(static_cast<std::size_t>(k), 0.0),
        means(static_cast<std::size_t>(k), {0.0, 0.0}),
        variances(static_cast<std::size_t>(k), {0.0, 0.0}) {}
};

/// Uniform quantizer: step * floor(x / step + 1/2).
double quantize(double xi, const QuantizerSpec& spec);

BinIndex quantize_bin(const UvPoint& p, const QuantizerSpec& spec);

/// Training-time quantizer surrogate: adds uniform noise on
/// [-half_range_in_deltas * step, +half_range_in_deltas * step).
double noise_surrogate(double xi, const QuantizerSpec& spec, Rng& rng,
                       double half_range_in_deltas = 1.0);

/// Continuous mixture density at eta, in 1/pixels^2.
double gmm_density(const UvPoint& eta, const GmmParams& params);

/// Probability mass of the step x step window centered at an arbitrary point
/// (products of normal CDF differences per dimension). Not floor-clamped.
double window_mass(const UvPoint& center, const GmmParams& params, const QuantizerSpec& spec);

/// Same as window_mass, also accumulating d(mass)/d(params) scaled by
/// `upstream` into grad.
double window_mass_grad(const UvPoint& center, const GmmParams& params,
                        const QuantizerSpec& spec, double upstream, GmmGrad& grad);

/// Mass of a lattice bin, clamped below by kProbFloor.
double discretized_prob(const BinIndex& bin, const GmmParams& params, const QuantizerSpec& spec);

/// Mean bits per viewpoint: -(1/N) sum log2 of the clamped window masses.
double code_length(std::span<const UvPoint> centers, std::span<const GmmParams> params,
                   const QuantizerSpec& spec);
double code_length(std::span<const BinIndex> bins, std::span<const GmmParams> params,
                   const QuantizerSpec& spec);

/// Code length plus exact analytic gradients per step.
double code_length_grad(std::span<const UvPoint> centers, std::span<const GmmParams> params,
                        const QuantizerSpec& spec, std::vector<GmmGrad>& grads);

double normal_cdf(double z);
double normal_pdf(double z);

}  // namespace scanpath
