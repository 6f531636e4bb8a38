#include "layers.hpp"

#include <cmath>
#include <cstring>

#include "../latent.hpp"
#include "gemm.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace unfactor {

void init_he_normal(Tensor& t, int fan_in, Rng& rng, float negative_slope) {
  const float gain = std::sqrt(2.f / (1.f + negative_slope * negative_slope));
  const float stddev = gain / std::sqrt(static_cast<float>(fan_in));
  for (float& x : t.v) x = stddev * rng.normal_f();
}

// ---------------------------------------------------------------- Linear ---

Linear::Linear(std::string name, int in_features, int out_features, Rng& rng,
               float init_slope)
    : in_(in_features), out_(out_features) {
  weight_.init_shape(name + ".w", {out_, in_});
  bias_.init_shape(name + ".b", {out_});
  init_he_normal(weight_.w, in_, rng, init_slope);
}

const Tensor& Linear::forward(const Tensor& x) {
  const int n = x.dim(0);
  x_ = x;
  x_.reshape({n, in_});
  y_ = Tensor({n, out_});
  sgemm(false, true, n, out_, in_, 1.f, x_.data(), in_, weight_.w.data(), in_,
        0.f, y_.data(), out_);
  const float* b = bias_.w.data();
  for (int i = 0; i < n; ++i) {
    float* row = y_.data() + static_cast<size_t>(i) * out_;
    for (int j = 0; j < out_; ++j) row[j] += b[j];
  }
  return y_;
}

void Linear::backward(const Tensor& dy, Tensor* dx, bool param_grads) {
  const int n = x_.dim(0);
  if (param_grads) {
    sgemm(true, false, out_, in_, n, 1.f, dy.data(), out_, x_.data(), in_, 1.f,
          weight_.g.data(), in_);
    float* db = bias_.g.data();
    for (int i = 0; i < n; ++i) {
      const float* row = dy.data() + static_cast<size_t>(i) * out_;
      for (int j = 0; j < out_; ++j) db[j] += row[j];
    }
  }
  if (dx) {
    *dx = Tensor({n, in_});
    sgemm(false, false, n, in_, out_, 1.f, dy.data(), out_, weight_.w.data(),
          in_, 0.f, dx->data(), in_);
  }
}

// ---------------------------------------------------------------- Conv2d ---

namespace {

// NHWC im2col: rows indexed by (n, oy, ox), columns by (ky, kx, c).
void im2col(const float* x, int n, int h, int w, int c, int kernel, int stride,
            int pad, int oh, int ow, float* col) {
  const int patch = kernel * kernel * c;
#ifdef _OPENMP
#pragma omp parallel for num_threads(math_threads()) schedule(static)
#endif
  for (int s = 0; s < n; ++s) {
    const float* xs = x + static_cast<size_t>(s) * h * w * c;
    float* cs = col + static_cast<size_t>(s) * oh * ow * patch;
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        float* dst = cs + (static_cast<size_t>(oy) * ow + ox) * patch;
        for (int ky = 0; ky < kernel; ++ky) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) {
            std::memset(dst, 0, sizeof(float) * kernel * c);
            dst += kernel * c;
            continue;
          }
          for (int kx = 0; kx < kernel; ++kx) {
            const int ix = ox * stride - pad + kx;
            if (ix < 0 || ix >= w) {
              std::memset(dst, 0, sizeof(float) * c);
            } else {
              std::memcpy(dst, xs + (static_cast<size_t>(iy) * w + ix) * c,
                          sizeof(float) * c);
            }
            dst += c;
          }
        }
      }
    }
  }
}

// Scatter-add of a column matrix back into the NHWC image. Samples are
// independent, so the parallel loop stays deterministic.
void col2im_add(const float* col, int n, int h, int w, int c, int kernel,
                int stride, int pad, int oh, int ow, float* x) {
  const int patch = kernel * kernel * c;
#ifdef _OPENMP
#pragma omp parallel for num_threads(math_threads()) schedule(static)
#endif
  for (int s = 0; s < n; ++s) {
    float* xs = x + static_cast<size_t>(s) * h * w * c;
    const float* cs = col + static_cast<size_t>(s) * oh * ow * patch;
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        const float* src = cs + (static_cast<size_t>(oy) * ow + ox) * patch;
        for (int ky = 0; ky < kernel; ++ky) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) {
            src += kernel * c;
            continue;
          }
          for (int kx = 0; kx < kernel; ++kx) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < w) {
              float* dst = xs + (static_cast<size_t>(iy) * w + ix) * c;
              for (int j = 0; j < c; ++j) dst[j] += src[j];
            }
            src += c;
          }
        }
      }
    }
  }
}

}  // namespace

Conv2d::Conv2d(std::string name, int in_ch, int out_ch, int kernel, int stride,
               int pad, Rng& rng, float init_slope)
    : in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), stride_(stride), pad_(pad) {
  weight_.init_shape(name + ".w", {out_ch_, kernel_ * kernel_ * in_ch_});
  bias_.init_shape(name + ".b", {out_ch_});
  init_he_normal(weight_.w, kernel_ * kernel_ * in_ch_, rng, init_slope);
}

const Tensor& Conv2d::forward(const Tensor& x) {
  n_ = x.dim(0);
  h_ = x.dim(1);
  w_ = x.dim(2);
  oh_ = out_size(h_);
  ow_ = out_size(w_);
  const int patch = kernel_ * kernel_ * in_ch_;
  const int rows = n_ * oh_ * ow_;
  col_ = Tensor({rows, patch});
  im2col(x.data(), n_, h_, w_, in_ch_, kernel_, stride_, pad_, oh_, ow_, col_.data());
  y_ = Tensor({n_, oh_, ow_, out_ch_});
  sgemm(false, true, rows, out_ch_, patch, 1.f, col_.data(), patch,
        weight_.w.data(), patch, 0.f, y_.data(), out_ch_);
  const float* b = bias_.w.data();
  for (int r = 0; r < rows; ++r) {
    float* row = y_.data() + static_cast<size_t>(r) * out_ch_;
    for (int j = 0; j < out_ch_; ++j) row[j] += b[j];
  }
  return y_;
}

void Conv2d::backward(const Tensor& dy, Tensor* dx, bool param_grads) {
  const int patch = kernel_ * kernel_ * in_ch_;
  const int rows = n_ * oh_ * ow_;
  if (param_grads) {
    sgemm(true, false, out_ch_, patch, rows, 1.f, dy.data(), out_ch_,
          col_.data(), patch, 1.f, weight_.g.data(), patch);
    float* db = bias_.g.data();
    for (int r = 0; r < rows; ++r) {
      const float* row = dy.data() + static_cast<size_t>(r) * out_ch_;
      for (int j = 0; j < out_ch_; ++j) db[j] += row[j];
    }
  }
  if (dx) {
    dcol_ = Tensor({rows, patch});
    sgemm(false, false, rows, patch, out_ch_, 1.f, dy.data(), out_ch_,
          weight_.w.data(), patch, 0.f, dcol_.data(), patch);
    *dx = Tensor({n_, h_, w_, in_ch_});
    col2im_add(dcol_.data(), n_, h_, w_, in_ch_, kernel_, stride_, pad_, oh_,
               ow_, dx->data());
  }
}

// ------------------------------------------------------- ConvTranspose2d ---

ConvTranspose2d::ConvTranspose2d(std::string name, int in_ch, int out_ch,
                                 int kernel, int stride, int pad, Rng& rng,
                                 float init_slope)
    : in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), stride_(stride), pad_(pad) {
  weight_.init_shape(name + ".w", {in_ch_, kernel_ * kernel_ * out_ch_});
  bias_.init_shape(name + ".b", {out_ch_});
  // Fan-in of the equivalent convolution.
  init_he_normal(weight_.w, kernel_ * kernel_ * in_ch_ / (stride_ * stride_),
                 rng, init_slope);
}

const Tensor& ConvTranspose2d::forward(const Tensor& x) {
  n_ = x.dim(0);
  h_ = x.dim(1);
  w_ = x.dim(2);
  oh_ = out_size(h_);
  ow_ = out_size(w_);
  x_ = x;
  const int rows = n_ * h_ * w_;
  const int patch = kernel_ * kernel_ * out_ch_;
  col_ = Tensor({rows, patch});
  sgemm(false, false, rows, patch, in_ch_, 1.f, x.data(), in_ch_,
        weight_.w.data(), patch, 0.f, col_.data(), patch);
  y_ = Tensor({n_, oh_, ow_, out_ch_});
  // col rows are input pixels; scatter each patch into the upsampled output.
  col2im_add(col_.data(), n_, oh_, ow_, out_ch_, kernel_, stride_, pad_, h_, w_,
             y_.data());
  const float* b = bias_.w.data();
  const int orows = n_ * oh_ * ow_;
  for (int r = 0; r < orows; ++r) {
    float* row = y_.data() + static_cast<size_t>(r) * out_ch_;
    for (int j = 0; j < out_ch_; ++j) row[j] += b[j];
  }
  return y_;
}

void ConvTranspose2d::backward(const Tensor& dy, Tensor* dx, bool param_grads) {
  const int rows = n_ * h_ * w_;
  const int patch = kernel_ * kernel_ * out_ch_;
  dcol_ = Tensor({rows, patch});
  im2col(dy.data(), n_, oh_, ow_, out_ch_, kernel_, stride_, pad_, h_, w_,
         dcol_.data());
  if (param_grads) {
    sgemm(true, false, in_ch_, patch, rows, 1.f, x_.data(), in_ch_,
          dcol_.data(), patch, 1.f, weight_.g.data(), patch);
    float* db = bias_.g.data();
    const int orows = n_ * oh_ * ow_;
    for (int r = 0; r < orows; ++r) {
      const float* row = dy.data() + static_cast<size_t>(r) * out_ch_;
      for (int j = 0; j < out_ch_; ++j) db[j] += row[j];
    }
  }
  if (dx) {
    *dx = Tensor({n_, h_, w_, in_ch_});
    sgemm(false, true, rows, in_ch_, patch, 1.f, dcol_.data(), patch,
          weight_.w.data(), patch, 0.f, dx->data(), in_ch_);
  }
}

// ------------------------------------------------------------- Embedding ---

Embedding::Embedding(std::string name, int num_classes, int out_dim, Rng& rng,
                     float mean_scale, float init_log_var)
    : classes_(num_classes), dim_(out_dim) {
  table_.init_shape(name + ".table", {classes_, dim_});
  // First half of each row is the mean, second half the log-variance.
  for (int r = 0; r < classes_; ++r) {
    float* row = table_.w.data() + static_cast<size_t>(r) * dim_;
    for (int j = 0; j < dim_ / 2; ++j) row[j] = mean_scale * rng.normal_f();
    for (int j = dim_ / 2; j < dim_; ++j) row[j] = init_log_var;
  }
}

const Tensor& Embedding::forward(const std::vector<int>& labels) {
  labels_ = labels;
  const int n = static_cast<int>(labels.size());
  y_ = Tensor({n, dim_});
  for (int i = 0; i < n; ++i) {
    const int cls = labels[static_cast<size_t>(i)];
    if (cls < 0 || cls >= classes_) throw argument_error("embedding label out of range");
    std::memcpy(y_.data() + static_cast<size_t>(i) * dim_,
                table_.w.data() + static_cast<size_t>(cls) * dim_,
                sizeof(float) * dim_);
  }
  return y_;
}

void Embedding::backward(const Tensor& dy) {
  for (size_t i = 0; i < labels_.size(); ++i) {
    const float* src = dy.data() + i * dim_;
    float* dst = table_.g.data() + static_cast<size_t>(labels_[i]) * dim_;
    for (int j = 0; j < dim_; ++j) dst[j] += src[j];
  }
}

// ------------------------------------------------------------ Activations ---

const Tensor& LeakyReLU::forward(const Tensor& x) {
  y_ = x;
  for (float& v : y_.v) v = v > 0.f ? v : slope_ * v;
  return y_;
}

void LeakyReLU::backward(const Tensor& dy, Tensor& dx) const {
  dx = dy;
  backward_inplace(dx);
}

void LeakyReLU::backward_inplace(Tensor& d) const {
  for (size_t i = 0; i < d.v.size(); ++i)
    if (y_.v[i] <= 0.f) d.v[i] *= slope_;
}

const Tensor& Tanh::forward(const Tensor& x) {
  y_ = x;
  for (float& v : y_.v) v = std::tanh(v);
  return y_;
}

void Tanh::backward_inplace(Tensor& d) const {
  for (size_t i = 0; i < d.v.size(); ++i) d.v[i] *= 1.f - y_.v[i] * y_.v[i];
}

}  // namespace unfactor
