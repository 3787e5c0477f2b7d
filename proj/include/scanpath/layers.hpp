#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scanpath/param_store.hpp"
#include "scanpath/rng.hpp"

namespace scanpath {

/// Fan-in-scaled uniform init, U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
void init_uniform(ParamStore& ps, ParamId id, int fan_in, Rng& rng);

Vec leaky_relu(const Vec& x, double slope);
Vec leaky_relu_backward(const Vec& x, const Vec& dy, double slope);

Vec softmax(const Vec& logits);

struct Linear {
  ParamId w = 0, b = 0;
  int in = 0, out = 0;

  Linear() = default;
  Linear(ParamStore& ps, const std::string& name, int in_dim, int out_dim);
  void init(ParamStore& ps, Rng& rng) const;
  Vec forward(const ParamStore& ps, const Vec& x) const;
  Vec backward(const ParamStore& ps, std::span<double> grads, const Vec& x, const Vec& dy) const;
};

struct LayerNorm {
  ParamId gain = 0, bias = 0;
  int dim = 0;

  struct Cache {
    Vec xhat;
    double inv_std = 0.0;
  };

  LayerNorm() = default;
  LayerNorm(ParamStore& ps, const std::string& name, int d);
  void init(ParamStore& ps) const;
  Vec forward(const ParamStore& ps, const Vec& x, Cache& cache) const;
  Vec backward(const ParamStore& ps, std::span<double> grads, const Cache& cache,
               const Vec& dy) const;
};

/// x + lrelu(LN(FC2(FC1(x)))), all at a fixed width.
struct ResidualBlock {
  Linear fc1, fc2;
  LayerNorm ln;
  double slope = 0.01;

  struct Cache {
    Vec x, h1, h2, normed;
    LayerNorm::Cache ln;
  };

  ResidualBlock() = default;
  ResidualBlock(ParamStore& ps, const std::string& name, int width, double lrelu_slope);
  void init(ParamStore& ps, Rng& rng) const;
  Vec forward(const ParamStore& ps, const Vec& x, Cache& cache) const;
  Vec backward(const ParamStore& ps, std::span<double> grads, const Cache& cache,
               const Vec& dy) const;
};

/// front FC -> lrelu -> residual blocks -> optional back FC.
struct Mlp {
  Linear front;
  std::vector<ResidualBlock> blocks;
  std::optional<Linear> back;
  double slope = 0.01;

  struct Cache {
    Vec x, front_out;
    std::vector<ResidualBlock::Cache> blocks;
    Vec back_in;
  };

  Mlp() = default;
  Mlp(ParamStore& ps, const std::string& name, int in_dim, int width, int n_blocks,
      std::optional<int> back_out, double lrelu_slope);
  void init(ParamStore& ps, Rng& rng) const;
  int out_dim() const { return back ? back->out : front.out; }
  Vec forward(const ParamStore& ps, const Vec& x, Cache& cache) const;
  Vec backward(const ParamStore& ps, std::span<double> grads, const Cache& cache,
               const Vec& dy) const;
};

/// Learned linear map over the time axis: (steps_out x steps_in) applied to
/// a (steps_in x features) matrix.
struct TimeMix {
  ParamId w = 0;
  int steps_in = 0, steps_out = 0;

  TimeMix() = default;
  TimeMix(ParamStore& ps, const std::string& name, int in_steps, int out_steps);
  void init(ParamStore& ps, Rng& rng) const;
  MatRM forward(const ParamStore& ps, const MatRM& x) const;
  MatRM backward(const ParamStore& ps, std::span<double> grads, const MatRM& x,
                 const MatRM& dy) const;
};

/// Block-causal masked fully connected layer over flattened (steps x chans)
/// features. Front kind: output time block t sees input blocks < t;
/// hidden/back kind: blocks <= t.
struct MaskedLinear {
  enum class Kind { Front, Hidden };

  ParamId w = 0, b = 0;
  int steps = 0, in_per_step = 0, out_per_step = 0;
  Kind kind = Kind::Hidden;

  MaskedLinear() = default;
  MaskedLinear(ParamStore& ps, const std::string& name, int s, int in_c, int out_c, Kind k);
  void init(ParamStore& ps, Rng& rng) const;
  bool mask(int row, int col) const {
    const int bi = row / out_per_step;
    const int bj = col / in_per_step;
    return kind == Kind::Front ? bj < bi : bj <= bi;
  }
  /// x has length steps * in_per_step; result steps * out_per_step.
  Vec forward(const ParamStore& ps, const Vec& x) const;
  Vec backward(const ParamStore& ps, std::span<double> grads, const Vec& x, const Vec& dy) const;
};

/// x + ML2(lrelu(ML1(x))) with Hidden masks.
struct MaskedResidualBlock {
  MaskedLinear m1, m2;
  double slope = 0.01;

  struct Cache {
    Vec x, h1;
  };

  MaskedResidualBlock() = default;
  MaskedResidualBlock(ParamStore& ps, const std::string& name, int steps, int chans,
                      double lrelu_slope);
  void init(ParamStore& ps, Rng& rng) const;
  Vec forward(const ParamStore& ps, const Vec& x, Cache& cache) const;
  Vec backward(const ParamStore& ps, std::span<double> grads, const Cache& cache,
               const Vec& dy) const;
};

}  // namespace scanpath
