#include "scanpath/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace scanpath {

namespace {

double clamp_abs(double x, double bound) { return std::clamp(x, -bound, bound); }

double axis_step(double prev_pos, double prev_vel, double prev_acc, double dt) {
  return prev_pos + dt * prev_vel + 0.5 * dt * dt * prev_acc;
}

struct BinRange {
  long long lo = 0;
  long long hi = 0;
};

BinRange support_range(const GmmParams& params, int dim, double delta) {
  BinRange range{std::numeric_limits<long long>::max(), std::numeric_limits<long long>::min()};
  for (int i = 0; i < params.components(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const double mu = params.means[idx][static_cast<std::size_t>(dim)];
    const double sigma = std::sqrt(params.variances[idx][static_cast<std::size_t>(dim)]);
    const long long lo = static_cast<long long>(std::floor((mu - 8.0 * sigma) / delta + 0.5));
    const long long hi = static_cast<long long>(std::floor((mu + 8.0 * sigma) / delta + 0.5));
    range.lo = std::min(range.lo, lo);
    range.hi = std::max(range.hi, hi);
  }
  return range;
}

// Per-component CDF differences for every bin in [range.lo, range.hi].
std::vector<std::vector<double>> bin_masses_1d(const GmmParams& params, int dim, double delta,
                                               const BinRange& range) {
  const std::size_t n = static_cast<std::size_t>(range.hi - range.lo + 1);
  std::vector<std::vector<double>> masses(static_cast<std::size_t>(params.components()));
  for (int i = 0; i < params.components(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const double mu = params.means[idx][static_cast<std::size_t>(dim)];
    const double sigma = std::sqrt(params.variances[idx][static_cast<std::size_t>(dim)]);
    masses[idx].resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double center = delta * static_cast<double>(range.lo + static_cast<long long>(k));
      const double a = (center - 0.5 * delta - mu) / sigma;
      const double b = (center + 0.5 * delta - mu) / sigma;
      masses[idx][k] = normal_cdf(b) - normal_cdf(a);
    }
  }
  return masses;
}

long long inverse_transform_1d(double mu, double sigma, double delta, Rng& rng) {
  const long long lo = static_cast<long long>(std::floor((mu - 8.0 * sigma) / delta + 0.5));
  const long long hi = static_cast<long long>(std::floor((mu + 8.0 * sigma) / delta + 0.5));
  const std::size_t n = static_cast<std::size_t>(hi - lo + 1);
  std::vector<double> masses(n);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double center = delta * static_cast<double>(lo + static_cast<long long>(k));
    const double a = (center - 0.5 * delta - mu) / sigma;
    const double b = (center + 0.5 * delta - mu) / sigma;
    masses[k] = normal_cdf(b) - normal_cdf(a);
    total += masses[k];
  }
  const double u = rng.uniform01() * total;
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    acc += masses[k];
    if (u < acc) return lo + static_cast<long long>(k);
  }
  return hi;
}

UvPoint clamp_position(const UvPoint& p, const ViewportSpec& spec, int& clamped) {
  const double hu = 0.5 * spec.width_px;
  const double hv = 0.5 * spec.height_px;
  if (std::abs(p.u) <= hu && std::abs(p.v) <= hv) return p;
  ++clamped;
  return {std::clamp(p.u, -hu, hu), std::clamp(p.v, -hv, hv)};
}

// Top `count` bins by mixture mass over the +-8 sigma support, best first.
// Ties break toward smaller (bu, bv) so results are deterministic.
std::vector<std::pair<BinIndex, double>> top_bins(const GmmParams& params,
                                                  const QuantizerSpec& spec, int count) {
  const BinRange ru = support_range(params, 0, spec.step);
  const BinRange rv = support_range(params, 1, spec.step);
  const auto mu = bin_masses_1d(params, 0, spec.step, ru);
  const auto mv = bin_masses_1d(params, 1, spec.step, rv);
  const int k = params.components();

  std::vector<std::pair<BinIndex, double>> best;
  best.reserve(static_cast<std::size_t>(count) + 1);
  const std::size_t nu = static_cast<std::size_t>(ru.hi - ru.lo + 1);
  const std::size_t nv = static_cast<std::size_t>(rv.hi - rv.lo + 1);
  for (std::size_t iu = 0; iu < nu; ++iu) {
    for (std::size_t iv = 0; iv < nv; ++iv) {
      double mass = 0.0;
      for (int i = 0; i < k; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        mass += params.weights[idx] * mu[idx][iu] * mv[idx][iv];
      }
      const BinIndex bin{ru.lo + static_cast<long long>(iu), rv.lo + static_cast<long long>(iv)};
      auto pos = best.begin();
      while (pos != best.end() && pos->second >= mass) ++pos;
      if (pos - best.begin() < count) {
        best.insert(pos, {bin, mass});
        if (static_cast<int>(best.size()) > count) best.pop_back();
      }
    }
  }
  return best;
}

struct Beam {
  CausalContext ctx;
  std::vector<BinIndex> bins;
  double log_mass = 0.0;
};

std::vector<UvPoint> beam_search_round(const ScanpathModel& model, const ModelInput& input,
                                       const SamplerConfig& cfg) {
  const QuantizerSpec qspec(cfg.delta);
  const int s = model.config().horizon_s;
  const int width = std::max(1, cfg.beam_width);
  const MatRM vis = model.visual_features(input);
  const MatRM pat = model.path_features(input);

  std::vector<Beam> beams(1);
  for (int t = 0; t < s; ++t) {
    std::vector<Beam> expanded;
    for (const Beam& beam : beams) {
      const std::vector<GmmParams> params = model.predict_given(vis, pat, beam.ctx);
      const auto candidates = top_bins(params[static_cast<std::size_t>(t)], qspec, width);
      for (const auto& [bin, mass] : candidates) {
        Beam next = beam;
        next.bins.push_back(bin);
        next.ctx.push_back(bin.center(qspec));
        next.log_mass += std::log2(std::max(mass, kProbFloor));
        expanded.push_back(std::move(next));
      }
    }
    std::stable_sort(expanded.begin(), expanded.end(),
                     [](const Beam& a, const Beam& b) { return a.log_mass > b.log_mass; });
    if (static_cast<int>(expanded.size()) > width) expanded.resize(static_cast<std::size_t>(width));
    beams = std::move(expanded);
  }
  return beams.front().ctx;
}

}  // namespace

PidGains PidGains::from_ultimate(double ku, double pu) {
  if (!(pu > 0.0)) throw std::invalid_argument("PidGains: oscillation period must be positive");
  return {0.6 * ku, 2.0 * ku / pu, ku * pu / 8.0};
}

PidState pid_step(const PidState& state, const UvPoint& reference, const PidGains& gains,
                  const PidOptions& options) {
  PidState next = state;
  const double dt = state.dt;
  next.position = {axis_step(state.position.u, state.velocity.u, state.acceleration.u, dt),
                   axis_step(state.position.v, state.velocity.v, state.acceleration.v, dt)};
  next.velocity = {state.velocity.u + dt * state.acceleration.u,
                   state.velocity.v + dt * state.acceleration.v};
  const UvPoint error{reference.u - next.position.u, reference.v - next.position.v};
  next.error_integral = {clamp_abs(state.error_integral.u + error.u, options.anti_windup),
                         clamp_abs(state.error_integral.v + error.v, options.anti_windup)};
  const double ki_scale = options.dt_scaled ? dt : 1.0;
  const double kd_scale = options.dt_scaled ? 1.0 / dt : 1.0;
  next.acceleration = {gains.kp * error.u + gains.ki * ki_scale * next.error_integral.u +
                           gains.kd * kd_scale * (error.u - state.prev_error.u),
                       gains.kp * error.v + gains.ki * ki_scale * next.error_integral.v +
                           gains.kd * kd_scale * (error.v - state.prev_error.v)};
  next.prev_error = error;
  return next;
}

BinIndex sample_reference(const GmmParams& params, const QuantizerSpec& spec, Rng& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  int comp = params.components() - 1;
  for (int i = 0; i < params.components(); ++i) {
    acc += params.weights[static_cast<std::size_t>(i)];
    if (u < acc) {
      comp = i;
      break;
    }
  }
  const auto idx = static_cast<std::size_t>(comp);
  const long long bu = inverse_transform_1d(
      params.means[idx][0], std::sqrt(params.variances[idx][0]), spec.step, rng);
  const long long bv = inverse_transform_1d(
      params.means[idx][1], std::sqrt(params.variances[idx][1]), spec.step, rng);
  return {bu, bv};
}

BinIndex argmax_bin(const GmmParams& params, const QuantizerSpec& spec) {
  return top_bins(params, spec, 1).front().first;
}

RoundResult generate_round(const ScanpathModel& model, const ModelInput& input, PidState state,
                           const SamplerConfig& cfg, Rng& rng, const ViewportSpec& spec) {
  const QuantizerSpec qspec(cfg.delta);
  const int s = model.config().horizon_s;
  RoundResult result;
  result.emitted.reserve(static_cast<std::size_t>(s));

  if (cfg.mode == SamplerMode::Beam) {
    result.emitted = beam_search_round(model, input, cfg);
    result.state = state;
    return result;
  }

  const MatRM vis = model.visual_features(input);
  const MatRM pat = model.path_features(input);
  CausalContext ctx;
  for (int t = 0; t < s; ++t) {
    const std::vector<GmmParams> params = model.predict_given(vis, pat, ctx);
    const GmmParams& step_params = params[static_cast<std::size_t>(t)];
    switch (cfg.mode) {
      case SamplerMode::Pid: {
        const BinIndex bin = sample_reference(step_params, qspec, rng);
        state = pid_step(state, bin.center(qspec), cfg.gains, cfg.pid);
        state.position = clamp_position(state.position, spec, result.clamped);
        result.emitted.push_back(state.position);
        ctx.push_back(state.position);
        break;
      }
      case SamplerMode::Random: {
        const BinIndex bin = sample_reference(step_params, qspec, rng);
        const UvPoint center = bin.center(qspec);
        result.emitted.push_back(center);
        ctx.push_back(center);
        break;
      }
      case SamplerMode::Max: {
        const BinIndex bin = argmax_bin(step_params, qspec);
        const UvPoint center = bin.center(qspec);
        result.emitted.push_back(center);
        ctx.push_back(center);
        break;
      }
      case SamplerMode::Beam:
        break;  // handled above
    }
  }
  result.state = state;
  return result;
}

Scanpath generate_scanpath(const ScanpathModel& model, const std::vector<SphericalPoint>& history,
                           std::span<const ErpFrame> frames, int rounds,
                           const SamplerConfig& cfg, Rng& rng, const ViewportSpec& spec,
                           double rate_hz) {
  if (rounds < 1) throw std::invalid_argument("generate_scanpath: rounds must be >= 1");
  const int r = model.config().history_r;
  const int s = model.config().horizon_s;
  if (static_cast<int>(history.size()) < 2 * r + 1) {
    throw std::invalid_argument("generate_scanpath: history too short (need 2R+1 viewpoints)");
  }
  const double dt = 1.0 / rate_hz;

  std::vector<SphericalPoint> full = history;
  int t_anchor = static_cast<int>(full.size()) - 1;

  PidState state;
  state.dt = dt;
  if (cfg.velocity_from_history && full.size() >= 2) {
    int clamped = 0;
    const RotationMatrix rot = rotation_matrix(full.back());
    const UvPoint prev =
        project_to_uv_clamped(full[full.size() - 2], rot, spec, clamped);
    state.velocity = {-prev.u / dt, -prev.v / dt};
  }

  Scanpath out;
  out.rate_hz = rate_hz;
  bool warned_missing = false;
  for (int round = 0; round < rounds; ++round) {
    const HistoryWindow window = build_history(full, frames, t_anchor, r, spec);
    if (window.missing_frames > 0 && !warned_missing) {
      std::fprintf(stderr,
                   "warning: frames exhausted at anchor %d; visual provider sees zero input\n",
                   t_anchor);
      warned_missing = true;
    }
    const ModelInput input = model.make_input(window);
    const RoundResult rr = generate_round(model, input, state, cfg, rng, spec);
    const SphericalPoint anchor = window.anchor;
    for (const UvPoint& uv : rr.emitted) {
      const SphericalPoint sph = uv_to_sph(uv, anchor, spec);
      full.push_back(sph);
      out.points.push_back(sph);
    }
    t_anchor += s;

    if (cfg.mode == SamplerMode::Pid && round + 1 < rounds) {
      // One more kinematic point gives the average speed to carry over.
      const UvPoint extrapolated{
          axis_step(rr.state.position.u, rr.state.velocity.u, rr.state.acceleration.u, dt),
          axis_step(rr.state.position.v, rr.state.velocity.v, rr.state.acceleration.v, dt)};
      const SphericalPoint sph_next = uv_to_sph(extrapolated, anchor, spec);
      int clamped = 0;
      const RotationMatrix rot = rotation_matrix(full.back());
      const UvPoint in_new_frame = project_to_uv_clamped(sph_next, rot, spec, clamped);
      state = PidState{};
      state.dt = dt;
      state.velocity = {in_new_frame.u / dt, in_new_frame.v / dt};
    }
  }
  return out;
}

}  // namespace scanpath
