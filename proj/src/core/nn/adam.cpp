#include "adam.hpp"

#include <cmath>

namespace unfactor {

Adam::Adam(std::vector<Param*> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  slots_.reserve(params_.size());
  for (Param* p : params_) {
    Slot s;
    s.m = Tensor(p->w.shape);
    s.v = Tensor(p->w.shape);
    slots_.push_back(std::move(s));
  }
}

void Adam::zero_grad() {
  for (Param* p : params_) p->g.zero();
}

void Adam::step() {
  ++t_;
  const float b1 = cfg_.beta1, b2 = cfg_.beta2;
  const float bc1 = 1.f - std::pow(b1, static_cast<float>(t_));
  const float bc2 = 1.f - std::pow(b2, static_cast<float>(t_));
  const float lr = cfg_.lr;
  for (size_t i = 0; i < params_.size(); ++i) {
    float* w = params_[i]->w.data();
    const float* g = params_[i]->g.data();
    float* m = slots_[i].m.data();
    float* v = slots_[i].v.data();
    const size_t n = params_[i]->w.numel();
    for (size_t j = 0; j < n; ++j) {
      m[j] = b1 * m[j] + (1.f - b1) * g[j];
      v[j] = b2 * v[j] + (1.f - b2) * g[j] * g[j];
      const float mhat = m[j] / bc1;
      const float vhat = v[j] / bc2;
      w[j] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

}  // namespace unfactor
