#include "scanpath/synth.hpp"

#include <cmath>
#include <string>

namespace scanpath {

double generator_entropy_bits(const GmmParams& generator, double delta) {
  const QuantizerSpec qspec(delta);
  long long lo_u = 0, hi_u = 0, lo_v = 0, hi_v = 0;
  bool first = true;
  for (int i = 0; i < generator.components(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const double su = std::sqrt(generator.variances[idx][0]);
    const double sv = std::sqrt(generator.variances[idx][1]);
    const long long u0 =
        static_cast<long long>(std::floor((generator.means[idx][0] - 8.0 * su) / delta + 0.5));
    const long long u1 =
        static_cast<long long>(std::floor((generator.means[idx][0] + 8.0 * su) / delta + 0.5));
    const long long v0 =
        static_cast<long long>(std::floor((generator.means[idx][1] - 8.0 * sv) / delta + 0.5));
    const long long v1 =
        static_cast<long long>(std::floor((generator.means[idx][1] + 8.0 * sv) / delta + 0.5));
    if (first) {
      lo_u = u0;
      hi_u = u1;
      lo_v = v0;
      hi_v = v1;
      first = false;
    } else {
      lo_u = std::min(lo_u, u0);
      hi_u = std::max(hi_u, u1);
      lo_v = std::min(lo_v, v0);
      hi_v = std::max(hi_v, v1);
    }
  }
  double entropy = 0.0;
  for (long long bu = lo_u; bu <= hi_u; ++bu) {
    for (long long bv = lo_v; bv <= hi_v; ++bv) {
      const double p = window_mass(BinIndex{bu, bv}.center(qspec), generator, qspec);
      if (p > 0.0) entropy -= p * std::log2(p);
    }
  }
  return entropy;
}

SynthResult synthesize(const SyntheticSpec& spec) {
  if (spec.path_count < 1 || spec.path_length < 2) {
    throw std::invalid_argument("synthesize: need at least one path of length >= 2");
  }
  Rng rng(spec.seed);
  SynthResult result;
  result.entropy_bits = generator_entropy_bits(spec.generator, spec.delta);
  result.paths.reserve(static_cast<std::size_t>(spec.path_count));

  const GmmParams& gen = spec.generator;
  for (int p = 0; p < spec.path_count; ++p) {
    Scanpath path;
    path.video_id = spec.video_id;
    path.user_id = "u" + std::to_string(p);
    path.rate_hz = spec.rate_hz;
    SphericalPoint current = spec.start;
    if (spec.random_start) {
      current = SphericalPoint(rng.uniform(-0.5, 0.5),
                               rng.uniform(-3.14159265358979323846, 3.14159265358979323846));
    }
    path.points.push_back(current);
    for (int t = 1; t < spec.path_length; ++t) {
      const double u = rng.uniform01();
      double acc = 0.0;
      int comp = gen.components() - 1;
      for (int i = 0; i < gen.components(); ++i) {
        acc += gen.weights[static_cast<std::size_t>(i)];
        if (u < acc) {
          comp = i;
          break;
        }
      }
      const auto idx = static_cast<std::size_t>(comp);
      const UvPoint inc{gen.means[idx][0] + std::sqrt(gen.variances[idx][0]) * rng.normal(),
                        gen.means[idx][1] + std::sqrt(gen.variances[idx][1]) * rng.normal()};
      current = uv_to_sph(inc, current, spec.viewport);
      path.points.push_back(current);
    }
    result.paths.push_back(std::move(path));
  }
  return result;
}

}  // namespace scanpath
