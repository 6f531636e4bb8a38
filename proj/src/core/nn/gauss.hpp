#pragma once

#include <cmath>

#include "../latent.hpp"
#include "../rng.hpp"
#include "tensor.hpp"

namespace unfactor {

// Batched diagonal Gaussians: mean and log-variance as (N, dim) tensors.
// log_var is clamped on construction; gradients are gated at the clamp.
struct GaussBatch {
  Tensor mean;
  Tensor log_var;
  Tensor raw_log_var;  // pre-clamp values, for the gradient gate

  int batch() const { return mean.dim(0); }
  int dim() const { return mean.dim(1); }

  // Splits the (N, 2*dim) output of an encoder head.
  static GaussBatch from_packed(const Tensor& packed) {
    const int n = packed.dim(0);
    const int d = packed.dim(1) / 2;
    GaussBatch g;
    g.mean = Tensor({n, d});
    g.log_var = Tensor({n, d});
    g.raw_log_var = Tensor({n, d});
    for (int i = 0; i < n; ++i) {
      const float* src = packed.data() + static_cast<size_t>(i) * 2 * d;
      float* mu = g.mean.data() + static_cast<size_t>(i) * d;
      float* lv = g.log_var.data() + static_cast<size_t>(i) * d;
      float* rv = g.raw_log_var.data() + static_cast<size_t>(i) * d;
      for (int j = 0; j < d; ++j) {
        mu[j] = src[j];
        rv[j] = src[d + j];
        lv[j] = clamp_log_var(src[d + j]);
      }
    }
    return g;
  }

  // Packs (d_mean, d_log_var) back into the encoder-head gradient layout,
  // zeroing the log-variance gradient where the clamp was active.
  Tensor pack_grad(const Tensor& d_mean, const Tensor& d_log_var) const {
    const int n = batch(), d = dim();
    Tensor out({n, 2 * d});
    for (int i = 0; i < n; ++i) {
      float* dst = out.data() + static_cast<size_t>(i) * 2 * d;
      const float* dm = d_mean.data() + static_cast<size_t>(i) * d;
      const float* dl = d_log_var.data() + static_cast<size_t>(i) * d;
      const float* rv = raw_log_var.data() + static_cast<size_t>(i) * d;
      for (int j = 0; j < d; ++j) {
        dst[j] = dm[j];
        dst[d + j] = (rv[j] < kLogVarMin || rv[j] > kLogVarMax) ? 0.f : dl[j];
      }
    }
    return out;
  }

  DiagonalGaussian row(int i) const {
    const int d = dim();
    std::vector<float> mu(mean.data() + static_cast<size_t>(i) * d,
                          mean.data() + static_cast<size_t>(i + 1) * d);
    std::vector<float> lv(log_var.data() + static_cast<size_t>(i) * d,
                          log_var.data() + static_cast<size_t>(i + 1) * d);
    return DiagonalGaussian(std::move(mu), std::move(lv));
  }
};

// One reparameterized sample per row; keeps the noise for backward.
struct GaussSample {
  Tensor value;  // mu + sigma * z
  Tensor noise;  // z

  static GaussSample draw(const GaussBatch& g, Rng& rng) {
    GaussSample s;
    s.value = Tensor(g.mean.shape);
    s.noise = Tensor(g.mean.shape);
    for (size_t j = 0; j < s.value.v.size(); ++j) {
      const float z = rng.normal_f();
      s.noise.v[j] = z;
      s.value.v[j] = g.mean.v[j] + std::exp(0.5f * g.log_var.v[j]) * z;
    }
    return s;
  }

  // d value / d mean = 1; d value / d log_var = 0.5 * sigma * z.
  void backward(const GaussBatch& g, const Tensor& d_value, Tensor& d_mean,
                Tensor& d_log_var, bool accumulate = false) const {
    if (!accumulate) {
      d_mean = Tensor(g.mean.shape);
      d_log_var = Tensor(g.mean.shape);
    }
    for (size_t j = 0; j < d_value.v.size(); ++j) {
      d_mean.v[j] += d_value.v[j];
      d_log_var.v[j] += d_value.v[j] * 0.5f *
                        std::exp(0.5f * g.log_var.v[j]) * noise.v[j];
    }
  }
};

// Batch-mean KL against the standard normal, summed over code dimensions.
inline double kl_batch_mean(const GaussBatch& g) {
  double total = 0.0;
  for (size_t j = 0; j < g.mean.v.size(); ++j) {
    const double mu = g.mean.v[j];
    const double lv = g.log_var.v[j];
    total += 0.5 * (mu * mu + std::exp(lv) - 1.0 - lv);
  }
  return total / g.batch();
}

// Accumulates the gradient of weight * kl_batch_mean into (d_mean, d_log_var).
inline void kl_batch_mean_grad(const GaussBatch& g, float weight, Tensor& d_mean,
                               Tensor& d_log_var) {
  const float scale = weight / static_cast<float>(g.batch());
  for (size_t j = 0; j < g.mean.v.size(); ++j) {
    d_mean.v[j] += scale * g.mean.v[j];
    d_log_var.v[j] += scale * 0.5f * (std::exp(g.log_var.v[j]) - 1.f);
  }
}

}  // namespace unfactor
