#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace unfactor {

// Probability clamp applied by the *_clamped variants used in training.
// The raw functions are left exact so oracle tests see the true formulas.
inline constexpr double kProbEps = 1e-7;

// Per-class probability vector, optionally paired with the logits it was
// produced from. Validated on construction: probs sum to 1 within 1e-6 and,
// when logits are present, probs must equal softmax(logits) within 1e-6.
struct ClassDistribution {
  std::vector<double> probs;
  std::optional<std::vector<double>> logits;

  static ClassDistribution from_probs(std::vector<double> p);
  static ClassDistribution from_logits(std::vector<double> t);

  int size() const { return static_cast<int>(probs.size()); }
};

// Empirical class frequencies of the training split. Strictly positive.
struct ReferenceDistribution {
  std::vector<double> q;

  static ReferenceDistribution from_counts(const std::vector<long long>& counts);
  static ReferenceDistribution from_probs(std::vector<double> q);

  int size() const { return static_cast<int>(q.size()); }
};

std::vector<double> softmax(const std::vector<double>& t);

// -ln p_(k). p_(k) = 0 yields +infinity (by design, not an error).
double nll(const ClassDistribution& p, int k);

// -ln(1 - p_(k)). p_(k) = 1 yields +infinity.
double nlu(const ClassDistribution& p, int k);

// -((1-q_(k))/q_(k)) * ln(1 - p_(k)).
double nlu_weighted(const ClassDistribution& p, int k, const ReferenceDistribution& q);

// Gradient of nll(softmax(t), k) with respect to the logits:
// entry i = -delta_ik + softmax(t)_i.
std::vector<double> nll_grad_logits(const std::vector<double>& t, int k);

// Gradient of nlu(softmax(t), k) with respect to the logits:
// entry k = s_k, entry i!=k = -s_k * s_i / (1 - s_k), with s = softmax(t).
// Throws a numeric error when softmax(t)_k is saturated at 1.
std::vector<double> nlu_grad_logits(const std::vector<double>& t, int k);

// Gradient of nlu_weighted(softmax(t), k, q) with respect to the logits.
std::vector<double> nlu_weighted_grad_logits(const std::vector<double>& t, int k,
                                             const ReferenceDistribution& q);

// KL(N(mu, diag(exp(log_var))) || N(0, I)), summed over dimensions.
double kl_standard_normal(const std::vector<double>& mean,
                          const std::vector<double>& log_var);

// LSGAN terms: discriminator loss (d_real - 1)^2 + (d_fake + 1)^2 and the
// generator term d_fake^2.
std::pair<double, double> lsgan_terms(double d_real, double d_fake);

// Clamped single-probability forms used inside the training loops.
double nll_clamped(double pk);
double nlu_clamped(double pk);

}  // namespace unfactor
