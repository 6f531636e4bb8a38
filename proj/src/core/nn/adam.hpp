#pragma once

#include <cstdint>
#include <vector>

#include "layers.hpp"

namespace unfactor {

struct AdamConfig {
  float lr = 2e-4f;
  float beta1 = 0.5f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
};

// Adam bound to a fixed parameter list. Moment buffers are serialized with
// checkpoints so training resumes bit-exactly.
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<Param*> params, AdamConfig cfg);

  void zero_grad();
  void step();

  int64_t step_count() const { return t_; }
  const std::vector<Param*>& params() const { return params_; }

  // Serialization hooks for the checkpoint container.
  struct Slot {
    Tensor m;
    Tensor v;
  };
  std::vector<Slot>& slots() { return slots_; }
  void set_step_count(int64_t t) { t_ = t; }

 private:
  std::vector<Param*> params_;
  std::vector<Slot> slots_;
  AdamConfig cfg_;
  int64_t t_ = 0;
};

}  // namespace unfactor
