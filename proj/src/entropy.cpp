#include "scanpath/entropy.hpp"

#include <cmath>
#include <stdexcept>

namespace scanpath {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kLn2 = 0.69314718055994530942;

// Phi(b) - Phi(a), evaluated through erfc on the side that avoids
// cancellation in the tails.
double cdf_diff(double a, double b) {
  if (a + b >= 0.0) {
    return 0.5 * (std::erfc(a * kInvSqrt2) - std::erfc(b * kInvSqrt2));
  }
  return 0.5 * (std::erfc(-b * kInvSqrt2) - std::erfc(-a * kInvSqrt2));
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

QuantizerSpec::QuantizerSpec(double delta) : step(delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("QuantizerSpec: step must be positive and finite");
  }
}

GmmParams::GmmParams(std::vector<double> w, std::vector<std::array<double, 2>> mu,
                     std::vector<std::array<double, 2>> var)
    : weights(std::move(w)), means(std::move(mu)), variances(std::move(var)) {
  const std::size_t k = weights.size();
  if (k == 0 || means.size() != k || variances.size() != k) {
    throw std::invalid_argument("GmmParams: component counts disagree");
  }
  double sum = 0.0;
  for (double a : weights) {
    if (!(a >= 0.0)) throw std::invalid_argument("GmmParams: weights must be nonnegative");
    sum += a;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("GmmParams: weights must sum to 1");
  }
  for (const auto& v : variances) {
    for (double s2 : v) {
      if (!(s2 >= kVarianceFloor)) {
        throw std::invalid_argument("GmmParams: variance below floor");
      }
    }
  }
}

double quantize(double xi, const QuantizerSpec& spec) {
  if (!std::isfinite(xi)) throw std::invalid_argument("quantize: value must be finite");
  // floor(x/step + 1/2), associated as (x + step/2)/step for stable ties
  return spec.step * std::floor((xi + 0.5 * spec.step) / spec.step);
}

BinIndex quantize_bin(const UvPoint& p, const QuantizerSpec& spec) {
  return {static_cast<long long>(std::floor((p.u + 0.5 * spec.step) / spec.step)),
          static_cast<long long>(std::floor((p.v + 0.5 * spec.step) / spec.step))};
}

double noise_surrogate(double xi, const QuantizerSpec& spec, Rng& rng,
                       double half_range_in_deltas) {
  const double h = half_range_in_deltas * spec.step;
  return xi + rng.uniform(-h, h);
}

double gmm_density(const UvPoint& eta, const GmmParams& params) {
  double density = 0.0;
  for (int i = 0; i < params.components(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const double su2 = params.variances[idx][0];
    const double sv2 = params.variances[idx][1];
    const double du = eta.u - params.means[idx][0];
    const double dv = eta.v - params.means[idx][1];
    const double quad = 0.5 * (du * du / su2 + dv * dv / sv2);
    density += params.weights[idx] / (2.0 * 3.14159265358979323846 * std::sqrt(su2 * sv2)) *
               std::exp(-quad);
  }
  return density;
}

double window_mass(const UvPoint& center, const GmmParams& params, const QuantizerSpec& spec) {
  const double half = 0.5 * spec.step;
  double mass = 0.0;
  for (int i = 0; i < params.components(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const double su = std::sqrt(params.variances[idx][0]);
    const double sv = std::sqrt(params.variances[idx][1]);
    const double au = (center.u - half - params.means[idx][0]) / su;
    const double bu = (center.u + half - params.means[idx][0]) / su;
    const double av = (center.v - half - params.means[idx][1]) / sv;
    const double bv = (center.v + half - params.means[idx][1]) / sv;
    mass += params.weights[idx] * cdf_diff(au, bu) * cdf_diff(av, bv);
  }
  return mass;
}

double window_mass_grad(const UvPoint& center, const GmmParams& params,
                        const QuantizerSpec& spec, double upstream, GmmGrad& grad) {
  const double half = 0.5 * spec.step;
  const int k = params.components();
  double mass = 0.0;
  std::vector<double> d_weight(static_cast<std::size_t>(k), 0.0);
  for (int i = 0; i < k; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const double su2 = params.variances[idx][0];
    const double sv2 = params.variances[idx][1];
    const double su = std::sqrt(su2);
    const double sv = std::sqrt(sv2);
    const double au = (center.u - half - params.means[idx][0]) / su;
    const double bu = (center.u + half - params.means[idx][0]) / su;
    const double av = (center.v - half - params.means[idx][1]) / sv;
    const double bv = (center.v + half - params.means[idx][1]) / sv;
    const double cu = cdf_diff(au, bu);
    const double cv = cdf_diff(av, bv);
    const double alpha = params.weights[idx];
    mass += alpha * cu * cv;
    d_weight[idx] = cu * cv;

    // d(Phi(b) - Phi(a))/dmu = (pdf(a) - pdf(b)) / sigma
    const double dcu_dmu = (normal_pdf(au) - normal_pdf(bu)) / su;
    const double dcv_dmu = (normal_pdf(av) - normal_pdf(bv)) / sv;
    // d(Phi(b) - Phi(a))/dsigma^2 = (a pdf(a) - b pdf(b)) / (2 sigma^2)
    const double dcu_dvar = (au * normal_pdf(au) - bu * normal_pdf(bu)) / (2.0 * su2);
    const double dcv_dvar = (av * normal_pdf(av) - bv * normal_pdf(bv)) / (2.0 * sv2);

    grad.means[idx][0] += upstream * alpha * dcu_dmu * cv;
    grad.means[idx][1] += upstream * alpha * cu * dcv_dmu;
    grad.variances[idx][0] += upstream * alpha * dcu_dvar * cv;
    grad.variances[idx][1] += upstream * alpha * cu * dcv_dvar;
  }
  // Chain through softmax: dL/dlogit_i = alpha_i (g_i - sum_j alpha_j g_j).
  double weighted = 0.0;
  for (int i = 0; i < k; ++i) {
    weighted += params.weights[static_cast<std::size_t>(i)] * d_weight[static_cast<std::size_t>(i)];
  }
  for (int i = 0; i < k; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    grad.weight_logits[idx] +=
        upstream * params.weights[idx] * (d_weight[idx] - weighted);
  }
  return mass;
}

double discretized_prob(const BinIndex& bin, const GmmParams& params, const QuantizerSpec& spec) {
  const double mass = window_mass(bin.center(spec), params, spec);
  return mass < kProbFloor ? kProbFloor : mass;
}

double code_length(std::span<const UvPoint> centers, std::span<const GmmParams> params,
                   const QuantizerSpec& spec) {
  if (centers.size() != params.size()) {
    throw std::invalid_argument("code_length: sequence lengths disagree");
  }
  if (centers.empty()) throw std::invalid_argument("code_length: empty sequences");
  double bits = 0.0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    double mass = window_mass(centers[i], params[i], spec);
    if (mass < kProbFloor) mass = kProbFloor;
    bits -= std::log2(mass);
  }
  return bits / static_cast<double>(centers.size());
}

double code_length(std::span<const BinIndex> bins, std::span<const GmmParams> params,
                   const QuantizerSpec& spec) {
  std::vector<UvPoint> centers(bins.size());
  for (std::size_t i = 0; i < bins.size(); ++i) centers[i] = bins[i].center(spec);
  return code_length(std::span<const UvPoint>(centers), params, spec);
}

double code_length_grad(std::span<const UvPoint> centers, std::span<const GmmParams> params,
                        const QuantizerSpec& spec, std::vector<GmmGrad>& grads) {
  if (centers.size() != params.size()) {
    throw std::invalid_argument("code_length_grad: sequence lengths disagree");
  }
  if (centers.empty()) throw std::invalid_argument("code_length_grad: empty sequences");
  const double n = static_cast<double>(centers.size());
  grads.clear();
  grads.reserve(centers.size());
  double bits = 0.0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    GmmGrad g(params[i].components());
    const double mass = window_mass(centers[i], params[i], spec);
    if (mass < kProbFloor) {
      bits -= std::log2(kProbFloor);
    } else {
      bits -= std::log2(mass);
      // d(-log2 m)/dm = -1 / (m ln 2), averaged over the N symbols.
      window_mass_grad(centers[i], params[i], spec, -1.0 / (mass * kLn2 * n), g);
    }
    grads.push_back(std::move(g));
  }
  return bits / n;
}

}  // namespace scanpath
