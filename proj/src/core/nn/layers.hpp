#pragma once

#include <string>
#include <vector>

#include "../rng.hpp"
#include "tensor.hpp"

namespace unfactor {

// A learnable tensor and its gradient accumulator.
struct Param {
  std::string name;
  Tensor w;
  Tensor g;

  void init_shape(std::string n, std::vector<int> shape) {
    name = std::move(n);
    w = Tensor(shape);
    g = Tensor(shape);
  }
};

// He-normal fill with leaky-rectifier gain.
void init_he_normal(Tensor& t, int fan_in, Rng& rng, float negative_slope = 0.f);

// ---------------------------------------------------------------------------
// Layers. forward() caches what backward() needs; backward() accumulates
// parameter gradients (caller zeroes them via the optimizer) and writes input
// gradients. Batch leading dimension everywhere; images are NHWC.
// ---------------------------------------------------------------------------

class Linear {
 public:
  Linear() = default;
  Linear(std::string name, int in_features, int out_features, Rng& rng,
         float init_slope = 0.2f);

  const Tensor& forward(const Tensor& x);
  // dx may be null when input gradients are not needed.
  void backward(const Tensor& dy, Tensor* dx, bool param_grads = true);

  void collect(std::vector<Param*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }
  int in_features() const { return in_; }
  int out_features() const { return out_; }

 private:
  int in_ = 0, out_ = 0;
  Param weight_;  // (out, in)
  Param bias_;    // (out)
  Tensor x_;      // cached input (N, in)
  Tensor y_;      // output (N, out)
};

class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::string name, int in_ch, int out_ch, int kernel, int stride,
         int pad, Rng& rng, float init_slope = 0.2f);

  const Tensor& forward(const Tensor& x);  // x: (N, H, W, C)
  void backward(const Tensor& dy, Tensor* dx, bool param_grads = true);

  void collect(std::vector<Param*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }
  int out_size(int in_size) const { return (in_size + 2 * pad_ - kernel_) / stride_ + 1; }
  int out_channels() const { return out_ch_; }

 private:
  int in_ch_ = 0, out_ch_ = 0, kernel_ = 0, stride_ = 0, pad_ = 0;
  int n_ = 0, h_ = 0, w_ = 0, oh_ = 0, ow_ = 0;
  Param weight_;  // (out_ch, kernel*kernel*in_ch)
  Param bias_;    // (out_ch)
  Tensor col_;    // (N*OH*OW, kernel*kernel*in_ch)
  Tensor y_;      // (N, OH, OW, out_ch)
  Tensor dcol_;
};

class ConvTranspose2d {
 public:
  ConvTranspose2d() = default;
  ConvTranspose2d(std::string name, int in_ch, int out_ch, int kernel,
                  int stride, int pad, Rng& rng, float init_slope = 0.f);

  const Tensor& forward(const Tensor& x);  // x: (N, H, W, C_in)
  void backward(const Tensor& dy, Tensor* dx, bool param_grads = true);

  void collect(std::vector<Param*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }
  int out_size(int in_size) const { return (in_size - 1) * stride_ - 2 * pad_ + kernel_; }

 private:
  int in_ch_ = 0, out_ch_ = 0, kernel_ = 0, stride_ = 0, pad_ = 0;
  int n_ = 0, h_ = 0, w_ = 0, oh_ = 0, ow_ = 0;
  Param weight_;  // (in_ch, kernel*kernel*out_ch)
  Param bias_;    // (out_ch)
  Tensor x_;      // cached input
  Tensor col_;    // (N*H*W, kernel*kernel*out_ch)
  Tensor y_;
  Tensor dcol_;
};

// Class-label lookup table emitting (mean, log_variance) rows.
class Embedding {
 public:
  Embedding() = default;
  Embedding(std::string name, int num_classes, int out_dim, Rng& rng,
            float mean_scale = 0.3f, float init_log_var = -4.f);

  // labels: one per batch row. Output (N, out_dim).
  const Tensor& forward(const std::vector<int>& labels);
  void backward(const Tensor& dy);

  void collect(std::vector<Param*>& out) { out.push_back(&table_); }
  const Tensor& table() const { return table_.w; }
  int out_dim() const { return dim_; }

 private:
  int classes_ = 0, dim_ = 0;
  Param table_;  // (num_classes, out_dim)
  std::vector<int> labels_;
  Tensor y_;
};

// Activations operate in place on the layer-owned output buffer.
class LeakyReLU {
 public:
  explicit LeakyReLU(float slope = 0.2f) : slope_(slope) {}
  const Tensor& forward(const Tensor& x);
  void backward(const Tensor& dy, Tensor& dx) const;
  void backward_inplace(Tensor& d) const;

 private:
  float slope_;
  Tensor y_;
};

class Tanh {
 public:
  const Tensor& forward(const Tensor& x);
  void backward_inplace(Tensor& d) const;

 private:
  Tensor y_;
};

}  // namespace unfactor
