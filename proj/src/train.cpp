#include "scanpath/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

namespace scanpath {

namespace {

class Adam {
 public:
  explicit Adam(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> params, std::span<const double> grads, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double g = grads[i];
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
      params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
    }
  }

 private:
  double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
  std::vector<double> m_, v_;
};

struct BatchItem {
  const TrainSample* sample = nullptr;
  std::vector<UvPoint> noised;  // quantizer surrogate applied to targets
};

// Forward + backward for one item; returns its mean bits. Gradients are
// scaled by inv_batch so the accumulated sum matches the minibatch mean.
double item_loss_grad(const ScanpathModel& model, const BatchItem& item,
                      const QuantizerSpec& qspec, double inv_batch, std::span<double> grads) {
  ScanpathModel::ForwardCache cache;
  CausalContext ctx(item.sample->targets.begin(), item.sample->targets.end());
  const std::vector<GmmParams> params = model.forward(item.sample->input, ctx, cache);
  std::vector<GmmGrad> dgmm;
  const double bits = code_length_grad(std::span<const UvPoint>(item.noised),
                                       std::span<const GmmParams>(params), qspec, dgmm);
  for (auto& g : dgmm) {
    for (auto& x : g.weight_logits) x *= inv_batch;
    for (auto& mpair : g.means) {
      mpair[0] *= inv_batch;
      mpair[1] *= inv_batch;
    }
    for (auto& vpair : g.variances) {
      vpair[0] *= inv_batch;
      vpair[1] *= inv_batch;
    }
  }
  model.backward(cache, dgmm, grads);
  return bits;
}

}  // namespace

TrainResult train(ScanpathModel& model, const std::vector<TrainSample>& samples,
                  const FitConfig& cfg) {
  if (samples.empty()) throw std::invalid_argument("train: empty dataset");
  const int s = model.config().horizon_s;
  for (const auto& sm : samples) {
    if (static_cast<int>(sm.targets.size()) != s) {
      throw std::invalid_argument("train: sample target length != horizon");
    }
  }
  const QuantizerSpec qspec(cfg.delta);
  const int threads = std::max(1, cfg.threads);

  Adam adam(model.params().size());
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<std::vector<double>> grad_bufs(
      static_cast<std::size_t>(threads), std::vector<double>(model.params().size(), 0.0));

  TrainResult result;
  double lr = cfg.lr;
  double best_bits = std::numeric_limits<double>::infinity();
  int best_epoch = 0;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    // Fisher-Yates with the shared stream keeps runs reproducible.
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.below(i));
      std::swap(order[i - 1], order[j]);
    }

    double epoch_bits = 0.0;
    std::size_t seen = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch));
      const std::size_t b = end - begin;

      std::vector<BatchItem> items(b);
      for (std::size_t i = 0; i < b; ++i) {
        items[i].sample = &samples[order[begin + i]];
        items[i].noised.resize(static_cast<std::size_t>(s));
        for (int t = 0; t < s; ++t) {
          const UvPoint& target = items[i].sample->targets[static_cast<std::size_t>(t)];
          items[i].noised[static_cast<std::size_t>(t)] = {
              noise_surrogate(target.u, qspec, rng, cfg.noise_half_range_deltas),
              noise_surrogate(target.v, qspec, rng, cfg.noise_half_range_deltas)};
        }
      }

      const double inv_b = 1.0 / static_cast<double>(b);
      std::vector<double> bits_per_item(b, 0.0);
      if (threads == 1) {
        auto& g = grad_bufs[0];
        std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t i = 0; i < b; ++i) {
          bits_per_item[i] = item_loss_grad(model, items[i], qspec, inv_b, g);
        }
      } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < threads; ++w) {
          auto& g = grad_bufs[static_cast<std::size_t>(w)];
          std::fill(g.begin(), g.end(), 0.0);
          pool.emplace_back([&, w]() {
            for (std::size_t i = static_cast<std::size_t>(w); i < b;
                 i += static_cast<std::size_t>(threads)) {
              bits_per_item[i] = item_loss_grad(model, items[i], qspec, inv_b,
                                                grad_bufs[static_cast<std::size_t>(w)]);
            }
          });
        }
        for (auto& th : pool) th.join();
        for (int w = 1; w < threads; ++w) {
          auto& dst = grad_bufs[0];
          const auto& src = grad_bufs[static_cast<std::size_t>(w)];
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
        }
      }

      double batch_bits = 0.0;
      for (double x : bits_per_item) batch_bits += x;
      if (!std::isfinite(batch_bits)) {
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch));
      }
      epoch_bits += batch_bits;
      seen += b;
      adam.step(model.params().values(), grad_bufs[0], lr);
    }

    epoch_bits /= static_cast<double>(seen);
    result.log.push_back({epoch, epoch_bits, lr});
    result.final_bits = epoch_bits;
    if (cfg.verbose) {
      std::fprintf(stdout, "epoch %d  bits/viewpoint %.4f  lr %.2e\n", epoch, epoch_bits, lr);
      std::fflush(stdout);
    }

    if (epoch_bits < best_bits - cfg.plateau_min_delta_bits) {
      best_bits = epoch_bits;
      best_epoch = epoch;
    } else if (epoch - best_epoch >= cfg.plateau_patience) {
      lr = std::max(cfg.lr_min, lr * cfg.lr_decay);
      best_epoch = epoch;  // restart the patience window after a decay
    }
  }
  return result;
}

double evaluate_bits(const ScanpathModel& model, std::span<const TrainSample> samples,
                     double delta) {
  if (samples.empty()) throw std::invalid_argument("evaluate_bits: empty dataset");
  const QuantizerSpec qspec(delta);
  const int s = model.config().horizon_s;
  double bits = 0.0;
  std::size_t count = 0;
  for (const auto& sample : samples) {
    CausalContext ctx(sample.targets.size());
    std::vector<BinIndex> bins(sample.targets.size());
    for (std::size_t t = 0; t < sample.targets.size(); ++t) {
      bins[t] = quantize_bin(sample.targets[t], qspec);
      ctx[t] = bins[t].center(qspec);
    }
    const std::vector<GmmParams> params = model.predict(sample.input, ctx);
    for (int t = 0; t < s; ++t) {
      bits -= std::log2(
          discretized_prob(bins[static_cast<std::size_t>(t)], params[static_cast<std::size_t>(t)],
                           qspec));
      ++count;
    }
  }
  return bits / static_cast<double>(count);
}

std::vector<TrainSample> make_samples(const ScanpathModel& model,
                                      const std::vector<SphericalPoint>& path,
                                      std::span<const ErpFrame> frames, const ViewportSpec& spec,
                                      int stride) {
  const int r = model.config().history_r;
  const int s = model.config().horizon_s;
  std::vector<TrainSample> out;
  if (stride < 1) stride = 1;
  const int last_anchor = static_cast<int>(path.size()) - 1 - s;
  for (int t_anchor = 2 * r; t_anchor <= last_anchor; t_anchor += stride) {
    HistoryWindow window = build_history(path, frames, t_anchor, r, spec);
    TrainSample sample;
    sample.input = model.make_input(window);
    const RotationMatrix rot = rotation_matrix(window.anchor);
    sample.targets.reserve(static_cast<std::size_t>(s));
    int clamped = 0;
    for (int t = 0; t < s; ++t) {
      sample.targets.push_back(project_to_uv_clamped(
          path[static_cast<std::size_t>(t_anchor + 1 + t)], rot, spec, clamped));
    }
    out.push_back(std::move(sample));
  }
  return out;
}

}  // namespace scanpath
