#pragma once

// Feed-forward network  d -> H1 (ReLU) -> H2 (ReLU) -> 1 (sigmoid), trained
// on binary cross-entropy with mini-batch Adam.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "hitpredict/learners/config.hpp"
#include "hitpredict/learners/math.hpp"
#include "hitpredict/random.hpp"

namespace hitpredict {

struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;  // outputs x inputs, row-major
  std::vector<double> bias;     // outputs

  void forward(std::span<const double> in, std::span<double> out) const noexcept {
    for (std::size_t o = 0; o < outputs; ++o) {
      double z = bias[o];
      const double* w = weights.data() + o * inputs;
      for (std::size_t i = 0; i < inputs; ++i) z += w[i] * in[i];
      out[o] = z;
    }
  }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct MlpModel {
  std::vector<DenseLayer> layers;  // hidden layers use ReLU, the last is the logit

  double margin(std::span<const double> x) const {
    std::vector<double> cur(x.begin(), x.end()), next;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      next.assign(layers[l].outputs, 0.0);
      layers[l].forward(cur, next);
      if (l + 1 < layers.size())
        for (double& v : next) v = std::max(v, 0.0);
      cur.swap(next);
    }
    return cur[0];
  }
  double score(std::span<const double> x) const { return sigmoid(margin(x)); }

  std::size_t parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weights.size() + l.bias.size();
    return n;
  }

  // Layer by layer: weights then bias.
  std::vector<double> flatten() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (const auto& l : layers) {
      out.insert(out.end(), l.weights.begin(), l.weights.end());
      out.insert(out.end(), l.bias.begin(), l.bias.end());
    }
    return out;
  }

  void assign(std::span<const double> flat) {
    std::size_t k = 0;
    for (auto& l : layers) {
      for (double& v : l.weights) v = flat[k++];
      for (double& v : l.bias) v = flat[k++];
    }
  }

  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

// Glorot-uniform weights, zero biases. With zero_output_init the logit layer
// starts at zero, so every initial score is 0.5.
inline MlpModel mlp_init(std::size_t n_inputs, const MlpParams& p, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const std::size_t widths[] = {n_inputs, static_cast<std::size_t>(p.hidden1),
                                static_cast<std::size_t>(p.hidden2), 1};
  MlpModel m;
  for (std::size_t l = 0; l < 3; ++l) {
    DenseLayer layer{widths[l], widths[l + 1], {}, {}};
    layer.weights.resize(layer.inputs * layer.outputs);
    layer.bias.assign(layer.outputs, 0.0);
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.inputs + layer.outputs));
    const bool zero = l == 2 && p.zero_output_init;
    for (double& w : layer.weights) w = zero ? 0.0 : rng.uniform(-limit, limit);
    m.layers.push_back(std::move(layer));
  }
  return m;
}

struct MlpLossGradient {
  double loss = 0.0;
  std::vector<double> gradient;  // same layout as MlpModel::flatten
};

// Weighted mean cross-entropy over `rows` and its gradient by backprop.
inline MlpLossGradient mlp_loss_and_gradient(const MlpModel& m, const Matrix& x,
                                             std::span<const int> y,
                                             std::span<const std::size_t> rows,
                                             std::span<const double> sample_weight = {}) {
  const std::size_t L = m.layers.size();
  MlpLossGradient out;
  out.gradient.assign(m.parameter_count(), 0.0);

  std::vector<std::size_t> offset(L);
  for (std::size_t l = 0, k = 0; l < L; ++l) {
    offset[l] = k;
    k += m.layers[l].weights.size() + m.layers[l].bias.size();
  }

  std::vector<std::vector<double>> act(L + 1), pre(L);
  std::vector<double> delta, prev_delta;
  double wsum = 0.0;
  for (std::size_t r : rows) {
    const double w = sample_weight.empty() ? 1.0 : sample_weight[r];
    wsum += w;
    act[0].assign(x.row(r).begin(), x.row(r).end());
    for (std::size_t l = 0; l < L; ++l) {
      pre[l].assign(m.layers[l].outputs, 0.0);
      m.layers[l].forward(act[l], pre[l]);
      act[l + 1] = pre[l];
      if (l + 1 < L)
        for (double& v : act[l + 1]) v = std::max(v, 0.0);
    }
    const double z = pre[L - 1][0];
    out.loss += w * logit_loss(z, y[r]);

    delta.assign(1, w * (sigmoid(z) - y[r]));
    for (std::size_t l = L; l-- > 0;) {
      const DenseLayer& layer = m.layers[l];
      double* gw = out.gradient.data() + offset[l];
      double* gb = gw + layer.weights.size();
      for (std::size_t o = 0; o < layer.outputs; ++o) {
        gb[o] += delta[o];
        for (std::size_t i = 0; i < layer.inputs; ++i) gw[o * layer.inputs + i] += delta[o] * act[l][i];
      }
      if (l == 0) break;
      prev_delta.assign(layer.inputs, 0.0);
      for (std::size_t o = 0; o < layer.outputs; ++o)
        for (std::size_t i = 0; i < layer.inputs; ++i)
          prev_delta[i] += layer.weights[o * layer.inputs + i] * delta[o];
      for (std::size_t i = 0; i < layer.inputs; ++i)
        if (pre[l - 1][i] <= 0.0) prev_delta[i] = 0.0;
      delta.swap(prev_delta);
    }
  }
  out.loss /= wsum;
  for (double& g : out.gradient) g /= wsum;
  return out;
}

inline double mlp_loss(const MlpModel& m, const Matrix& x, std::span<const int> y,
                       std::span<const double> sample_weight = {}) {
  double total = 0.0, wsum = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double w = sample_weight.empty() ? 1.0 : sample_weight[r];
    total += w * logit_loss(m.margin(x.row(r)), y[r]);
    wsum += w;
  }
  return total / wsum;
}

// Expects standardized features. Seed streams: 0 initializes the weights,
// 1 shuffles the rows at the start of every epoch. `epoch_loss`, when given,
// receives the full training loss after every epoch.
inline MlpModel train_mlp(const Matrix& x, std::span<const int> y, const TrainConfig& config,
                          std::vector<double>* epoch_loss = nullptr) {
  detail::require_binary_labels(x, y, /*need_both_classes=*/true, "train_mlp");
  config.validate();
  const MlpParams& p = config.mlp;
  const auto w = class_sample_weights(y, config.balanced_class_weight);

  MlpModel model = mlp_init(x.cols(), p, derive_seed(config.seed, 0));
  SplitMix64 shuffle_rng(derive_seed(config.seed, 1));

  std::vector<double> theta = model.flatten();
  std::vector<double> m1(theta.size(), 0.0), m2(theta.size(), 0.0);
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch = static_cast<std::size_t>(p.batch_size);
  double b1t = 1.0, b2t = 1.0;
  if (epoch_loss) epoch_loss->clear();

  for (int epoch = 0; epoch < p.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t len = std::min(batch, order.size() - start);
      const auto lg = mlp_loss_and_gradient(
          model, x, y, std::span<const std::size_t>(order).subspan(start, len), w);
      b1t *= p.beta1;
      b2t *= p.beta2;
      for (std::size_t k = 0; k < theta.size(); ++k) {
        const double g = lg.gradient[k];
        m1[k] = p.beta1 * m1[k] + (1.0 - p.beta1) * g;
        m2[k] = p.beta2 * m2[k] + (1.0 - p.beta2) * g * g;
        const double mhat = m1[k] / (1.0 - b1t);
        const double vhat = m2[k] / (1.0 - b2t);
        theta[k] -= p.learning_rate * mhat / (std::sqrt(vhat) + p.epsilon);
      }
      model.assign(theta);
    }
    if (epoch_loss) epoch_loss->push_back(mlp_loss(model, x, y, w));
  }
  return model;
}

}  // namespace hitpredict
