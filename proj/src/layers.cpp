#include "scanpath/layers.hpp"

#include <cmath>

namespace scanpath {

void init_uniform(ParamStore& ps, ParamId id, int fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in > 0 ? fan_in : 1));
  auto v = ps.vec(id);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-bound, bound);
}

Vec leaky_relu(const Vec& x, double slope) {
  Vec y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : slope * x[i];
  return y;
}

Vec leaky_relu_backward(const Vec& x, const Vec& dy, double slope) {
  Vec dx(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) dx[i] = dy[i] * (x[i] > 0.0 ? 1.0 : slope);
  return dx;
}

Vec softmax(const Vec& logits) {
  const double m = logits.maxCoeff();
  Vec e = (logits.array() - m).exp();
  return e / e.sum();
}

Linear::Linear(ParamStore& ps, const std::string& name, int in_dim, int out_dim)
    : in(in_dim), out(out_dim) {
  w = ps.add(name + ".w", {static_cast<std::size_t>(out_dim), static_cast<std::size_t>(in_dim)});
  b = ps.add(name + ".b", {static_cast<std::size_t>(out_dim)});
}

void Linear::init(ParamStore& ps, Rng& rng) const {
  init_uniform(ps, w, in, rng);
  init_uniform(ps, b, in, rng);
}

Vec Linear::forward(const ParamStore& ps, const Vec& x) const {
  return ps.mat(w) * x + ps.vec(b);
}

Vec Linear::backward(const ParamStore& ps, std::span<double> grads, const Vec& x,
                     const Vec& dy) const {
  ps.grad_mat(w, grads).noalias() += dy * x.transpose();
  ps.grad_vec(b, grads) += dy;
  return ps.mat(w).transpose() * dy;
}

LayerNorm::LayerNorm(ParamStore& ps, const std::string& name, int d) : dim(d) {
  gain = ps.add(name + ".g", {static_cast<std::size_t>(d)});
  bias = ps.add(name + ".b", {static_cast<std::size_t>(d)});
}

void LayerNorm::init(ParamStore& ps) const { ps.vec(gain).setOnes(); }

Vec LayerNorm::forward(const ParamStore& ps, const Vec& x, Cache& cache) const {
  const double mean = x.mean();
  const double var = (x.array() - mean).square().mean();
  cache.inv_std = 1.0 / std::sqrt(var + 1e-5);
  cache.xhat = (x.array() - mean) * cache.inv_std;
  return (cache.xhat.array() * ps.vec(gain).array()).matrix() + ps.vec(bias);
}

Vec LayerNorm::backward(const ParamStore& ps, std::span<double> grads, const Cache& cache,
                        const Vec& dy) const {
  ps.grad_vec(gain, grads).array() += dy.array() * cache.xhat.array();
  ps.grad_vec(bias, grads) += dy;
  const Vec dxhat = (dy.array() * ps.vec(gain).array()).matrix();
  const double m1 = dxhat.mean();
  const double m2 = (dxhat.array() * cache.xhat.array()).mean();
  return (cache.inv_std * (dxhat.array() - m1 - cache.xhat.array() * m2)).matrix();
}

ResidualBlock::ResidualBlock(ParamStore& ps, const std::string& name, int width,
                             double lrelu_slope)
    : fc1(ps, name + ".fc1", width, width),
      fc2(ps, name + ".fc2", width, width),
      ln(ps, name + ".ln", width),
      slope(lrelu_slope) {}

void ResidualBlock::init(ParamStore& ps, Rng& rng) const {
  fc1.init(ps, rng);
  fc2.init(ps, rng);
  ln.init(ps);
}

Vec ResidualBlock::forward(const ParamStore& ps, const Vec& x, Cache& cache) const {
  cache.x = x;
  cache.h1 = fc1.forward(ps, x);
  cache.h2 = fc2.forward(ps, cache.h1);
  cache.normed = ln.forward(ps, cache.h2, cache.ln);
  return x + leaky_relu(cache.normed, slope);
}

Vec ResidualBlock::backward(const ParamStore& ps, std::span<double> grads, const Cache& cache,
                            const Vec& dy) const {
  const Vec dnormed = leaky_relu_backward(cache.normed, dy, slope);
  const Vec dh2 = ln.backward(ps, grads, cache.ln, dnormed);
  const Vec dh1 = fc2.backward(ps, grads, cache.h1, dh2);
  Vec dx = fc1.backward(ps, grads, cache.x, dh1);
  dx += dy;  // skip connection
  return dx;
}

Mlp::Mlp(ParamStore& ps, const std::string& name, int in_dim, int width, int n_blocks,
         std::optional<int> back_out, double lrelu_slope)
    : front(ps, name + ".front", in_dim, width), slope(lrelu_slope) {
  blocks.reserve(static_cast<std::size_t>(n_blocks));
  for (int i = 0; i < n_blocks; ++i) {
    blocks.emplace_back(ps, name + ".res" + std::to_string(i), width, lrelu_slope);
  }
  if (back_out) back.emplace(ps, name + ".back", width, *back_out);
}

void Mlp::init(ParamStore& ps, Rng& rng) const {
  front.init(ps, rng);
  for (const auto& blk : blocks) blk.init(ps, rng);
  if (back) back->init(ps, rng);
}

Vec Mlp::forward(const ParamStore& ps, const Vec& x, Cache& cache) const {
  cache.x = x;
  cache.front_out = front.forward(ps, x);
  Vec h = leaky_relu(cache.front_out, slope);
  cache.blocks.resize(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    h = blocks[i].forward(ps, h, cache.blocks[i]);
  }
  cache.back_in = h;
  return back ? back->forward(ps, h) : h;
}

Vec Mlp::backward(const ParamStore& ps, std::span<double> grads, const Cache& cache,
                  const Vec& dy) const {
  Vec dh = back ? back->backward(ps, grads, cache.back_in, dy) : dy;
  for (std::size_t i = blocks.size(); i-- > 0;) {
    dh = blocks[i].backward(ps, grads, cache.blocks[i], dh);
  }
  dh = leaky_relu_backward(cache.front_out, dh, slope);
  return front.backward(ps, grads, cache.x, dh);
}

TimeMix::TimeMix(ParamStore& ps, const std::string& name, int in_steps, int out_steps)
    : steps_in(in_steps), steps_out(out_steps) {
  w = ps.add(name + ".w",
             {static_cast<std::size_t>(out_steps), static_cast<std::size_t>(in_steps)});
}

void TimeMix::init(ParamStore& ps, Rng& rng) const { init_uniform(ps, w, steps_in, rng); }

MatRM TimeMix::forward(const ParamStore& ps, const MatRM& x) const { return ps.mat(w) * x; }

MatRM TimeMix::backward(const ParamStore& ps, std::span<double> grads, const MatRM& x,
                        const MatRM& dy) const {
  ps.grad_mat(w, grads).noalias() += dy * x.transpose();
  return ps.mat(w).transpose() * dy;
}

MaskedLinear::MaskedLinear(ParamStore& ps, const std::string& name, int s, int in_c, int out_c,
                           Kind k)
    : steps(s), in_per_step(in_c), out_per_step(out_c), kind(k) {
  w = ps.add(name + ".w", {static_cast<std::size_t>(s) * static_cast<std::size_t>(out_c),
                           static_cast<std::size_t>(s) * static_cast<std::size_t>(in_c)});
  b = ps.add(name + ".b", {static_cast<std::size_t>(s) * static_cast<std::size_t>(out_c)});
}

void MaskedLinear::init(ParamStore& ps, Rng& rng) const {
  init_uniform(ps, w, steps * in_per_step, rng);
  init_uniform(ps, b, steps * in_per_step, rng);
  // Zero the masked-out entries so the dense checkpoint matches the
  // effective weights.
  auto wm = ps.mat(w);
  for (int row = 0; row < wm.rows(); ++row) {
    for (int col = 0; col < wm.cols(); ++col) {
      if (!mask(row, col)) wm(row, col) = 0.0;
    }
  }
}

Vec MaskedLinear::forward(const ParamStore& ps, const Vec& x) const {
  if (x.size() != static_cast<Eigen::Index>(steps) * in_per_step) {
    throw std::invalid_argument("MaskedLinear: input dimension mismatch");
  }
  Vec y = ps.vec(b);
  const auto wm = ps.mat(w);
  for (int bi = 0; bi < steps; ++bi) {
    const int limit = kind == Kind::Front ? bi : bi + 1;
    for (int bj = 0; bj < limit; ++bj) {
      y.segment(bi * out_per_step, out_per_step).noalias() +=
          wm.block(bi * out_per_step, bj * in_per_step, out_per_step, in_per_step) *
          x.segment(bj * in_per_step, in_per_step);
    }
  }
  return y;
}

Vec MaskedLinear::backward(const ParamStore& ps, std::span<double> grads, const Vec& x,
                           const Vec& dy) const {
  Vec dx = Vec::Zero(x.size());
  const auto wm = ps.mat(w);
  auto gw = ps.grad_mat(w, grads);
  ps.grad_vec(b, grads) += dy;
  for (int bi = 0; bi < steps; ++bi) {
    const int limit = kind == Kind::Front ? bi : bi + 1;
    const auto dyi = dy.segment(bi * out_per_step, out_per_step);
    for (int bj = 0; bj < limit; ++bj) {
      gw.block(bi * out_per_step, bj * in_per_step, out_per_step, in_per_step).noalias() +=
          dyi * x.segment(bj * in_per_step, in_per_step).transpose();
      dx.segment(bj * in_per_step, in_per_step).noalias() +=
          wm.block(bi * out_per_step, bj * in_per_step, out_per_step, in_per_step).transpose() *
          dyi;
    }
  }
  return dx;
}

MaskedResidualBlock::MaskedResidualBlock(ParamStore& ps, const std::string& name, int steps,
                                         int chans, double lrelu_slope)
    : m1(ps, name + ".m1", steps, chans, chans, MaskedLinear::Kind::Hidden),
      m2(ps, name + ".m2", steps, chans, chans, MaskedLinear::Kind::Hidden),
      slope(lrelu_slope) {}

void MaskedResidualBlock::init(ParamStore& ps, Rng& rng) const {
  m1.init(ps, rng);
  m2.init(ps, rng);
}

Vec MaskedResidualBlock::forward(const ParamStore& ps, const Vec& x, Cache& cache) const {
  cache.x = x;
  cache.h1 = m1.forward(ps, x);
  return x + m2.forward(ps, leaky_relu(cache.h1, slope));
}

Vec MaskedResidualBlock::backward(const ParamStore& ps, std::span<double> grads,
                                  const Cache& cache, const Vec& dy) const {
  const Vec da = m2.backward(ps, grads, leaky_relu(cache.h1, slope), dy);
  const Vec dh1 = leaky_relu_backward(cache.h1, da, slope);
  Vec dx = m1.backward(ps, grads, cache.x, dh1);
  dx += dy;
  return dx;
}

}  // namespace scanpath
