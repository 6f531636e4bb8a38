#pragma once

#include <cmath>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace unfactor {

// log-variance is clamped to keep sigma within [~2.5e-3, ~400].
inline constexpr float kLogVarMin = -12.f;
inline constexpr float kLogVarMax = 12.f;

inline float clamp_log_var(float lv) {
  return lv < kLogVarMin ? kLogVarMin : (lv > kLogVarMax ? kLogVarMax : lv);
}

// Diagonal Gaussian over a latent code: the common output contract of the
// unknown encoder, the label embedders, and the labeled-factor encoders.
struct DiagonalGaussian {
  std::vector<float> mean;
  std::vector<float> log_var;

  DiagonalGaussian() = default;
  DiagonalGaussian(std::vector<float> mu, std::vector<float> lv)
      : mean(std::move(mu)), log_var(std::move(lv)) {
    if (mean.size() != log_var.size())
      throw argument_error("mean/log_variance length mismatch");
    for (float x : mean)
      if (!std::isfinite(x)) throw argument_error("non-finite mean");
    for (float& x : log_var) {
      if (!std::isfinite(x)) throw argument_error("non-finite log_variance");
      x = clamp_log_var(x);
    }
  }

  int dim() const { return static_cast<int>(mean.size()); }
};

// Reparameterized draw: mu + exp(log_var / 2) * z, z ~ N(0, I).
inline std::vector<float> sample(const DiagonalGaussian& d, Rng& rng) {
  std::vector<float> out(d.mean.size());
  for (size_t j = 0; j < out.size(); ++j) {
    const float sigma = std::exp(0.5f * d.log_var[j]);
    out[j] = d.mean[j] + sigma * rng.normal_f();
  }
  return out;
}

inline std::vector<float> mean_only(const DiagonalGaussian& d) { return d.mean; }

}  // namespace unfactor
