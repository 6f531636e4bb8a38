#include "losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "errors.hpp"

namespace unfactor {
namespace {

constexpr double kSumTol = 1e-6;

void check_index(int k, int m) {
  if (k < 0 || k >= m)
    throw argument_error("class index " + std::to_string(k) + " out of range [0, " +
                         std::to_string(m) + ")");
}

}  // namespace

ClassDistribution ClassDistribution::from_probs(std::vector<double> p) {
  if (p.empty()) throw argument_error("empty probability vector");
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= 0.0)) throw argument_error("negative or non-finite class probability");
    sum += x;
  }
  if (std::abs(sum - 1.0) > kSumTol)
    throw argument_error("class probabilities sum to " + std::to_string(sum) + ", expected 1");
  return ClassDistribution{std::move(p), std::nullopt};
}

ClassDistribution ClassDistribution::from_logits(std::vector<double> t) {
  for (double x : t)
    if (!std::isfinite(x)) throw argument_error("non-finite logit");
  ClassDistribution d;
  d.probs = softmax(t);
  d.logits = std::move(t);
  return d;
}

ReferenceDistribution ReferenceDistribution::from_counts(const std::vector<long long>& counts) {
  long long total = 0;
  for (long long c : counts) total += c;
  if (total <= 0) throw argument_error("empty reference counts");
  std::vector<double> q(counts.size());
  for (size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] <= 0)
      throw config_error("reference class " + std::to_string(i) + " has zero occurrences");
    q[i] = double(counts[i]) / double(total);
  }
  return ReferenceDistribution{std::move(q)};
}

ReferenceDistribution ReferenceDistribution::from_probs(std::vector<double> q) {
  if (q.empty()) throw argument_error("empty reference distribution");
  double sum = 0.0;
  for (size_t i = 0; i < q.size(); ++i) {
    if (!(q[i] > 0.0))
      throw config_error("reference class " + std::to_string(i) + " has non-positive frequency");
    sum += q[i];
  }
  if (std::abs(sum - 1.0) > kSumTol)
    throw argument_error("reference distribution sums to " + std::to_string(sum));
  return ReferenceDistribution{std::move(q)};
}

std::vector<double> softmax(const std::vector<double>& t) {
  if (t.empty()) throw argument_error("softmax of empty vector");
  const double mx = *std::max_element(t.begin(), t.end());
  std::vector<double> s(t.size());
  double z = 0.0;
  for (size_t i = 0; i < t.size(); ++i) {
    s[i] = std::exp(t[i] - mx);
    z += s[i];
  }
  for (double& x : s) x /= z;
  return s;
}

double nll(const ClassDistribution& p, int k) {
  check_index(k, p.size());
  const double pk = p.probs[static_cast<size_t>(k)];
  if (pk <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(pk);
}

double nlu(const ClassDistribution& p, int k) {
  check_index(k, p.size());
  if (p.size() < 2) throw argument_error("nlu requires at least 2 classes");
  const double pk = p.probs[static_cast<size_t>(k)];
  if (pk >= 1.0) return std::numeric_limits<double>::infinity();
  return -std::log1p(-pk);
}

double nlu_weighted(const ClassDistribution& p, int k, const ReferenceDistribution& q) {
  check_index(k, p.size());
  if (q.size() != p.size())
    throw argument_error("reference distribution size mismatch");
  const double qk = q.q[static_cast<size_t>(k)];
  return (1.0 - qk) / qk * nlu(p, k);
}

std::vector<double> nll_grad_logits(const std::vector<double>& t, int k) {
  check_index(k, static_cast<int>(t.size()));
  std::vector<double> g = softmax(t);
  g[static_cast<size_t>(k)] -= 1.0;
  return g;
}

std::vector<double> nlu_grad_logits(const std::vector<double>& t, int k) {
  check_index(k, static_cast<int>(t.size()));
  if (t.size() < 2) throw argument_error("nlu requires at least 2 classes");
  const std::vector<double> s = softmax(t);
  const double sk = s[static_cast<size_t>(k)];
  if (1.0 - sk <= 0.0) throw numeric_error("nlu gradient saturated: softmax(t)_k == 1");
  std::vector<double> g(t.size());
  const double scale = -sk / (1.0 - sk);
  for (size_t i = 0; i < t.size(); ++i) g[i] = scale * s[i];
  g[static_cast<size_t>(k)] = sk;
  return g;
}

std::vector<double> nlu_weighted_grad_logits(const std::vector<double>& t, int k,
                                             const ReferenceDistribution& q) {
  if (q.size() != static_cast<int>(t.size()))
    throw argument_error("reference distribution size mismatch");
  std::vector<double> g = nlu_grad_logits(t, k);
  const double qk = q.q[static_cast<size_t>(k)];
  const double w = (1.0 - qk) / qk;
  for (double& x : g) x *= w;
  return g;
}

double kl_standard_normal(const std::vector<double>& mean,
                          const std::vector<double>& log_var) {
  if (mean.size() != log_var.size())
    throw argument_error("mean/log_variance size mismatch");
  double kl = 0.0;
  for (size_t j = 0; j < mean.size(); ++j) {
    const double v = std::exp(log_var[j]);
    if (!(v > 0.0)) throw argument_error("non-positive variance");
    kl += 0.5 * (mean[j] * mean[j] + v - 1.0 - log_var[j]);
  }
  return kl;
}

std::pair<double, double> lsgan_terms(double d_real, double d_fake) {
  if (!std::isfinite(d_real) || !std::isfinite(d_fake))
    throw argument_error("non-finite discriminator output");
  const double d_loss = (d_real - 1.0) * (d_real - 1.0) + (d_fake + 1.0) * (d_fake + 1.0);
  return {d_loss, d_fake * d_fake};
}

double nll_clamped(double pk) {
  return -std::log(std::clamp(pk, kProbEps, 1.0 - kProbEps));
}

double nlu_clamped(double pk) {
  return -std::log1p(-std::clamp(pk, kProbEps, 1.0 - kProbEps));
}

}  // namespace unfactor
