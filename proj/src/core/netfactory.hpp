#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "factors.hpp"
#include "nn/gauss.hpp"
#include "nn/layers.hpp"
#include "rng.hpp"

namespace unfactor {

// Network sizing derived from the image size: 3/4/5 stride-2 convolutions
// for 28/64/128 inputs, feature depth starting at 32 and doubling up to 256,
// fully-connected width 512.
struct ArchPlan {
  int image_size = 0;
  int channels_in = 0;
  std::vector<int> conv_channels;
  std::vector<int> conv_pads;  // per conv layer (kernel 4, stride 2)
  int fc_width = 512;
  int fc_count_enc_gen = 3;
  int fc_count_cls_dis = 1;
  int final_spatial = 0;   // encoder feature map size after the conv stack
  int gen_spatial = 0;     // spatial size the generator reshapes to
  int gen_channels = 0;    // channel count at gen_spatial
  std::vector<int> deconv_channels;  // output channels per transposed conv

  int flatten_dim() const {
    return final_spatial * final_spatial * conv_channels.back();
  }
};

ArchPlan plan(int image_size, int channels_in);

// --------------------------------------------------------------- networks ---

// Image -> diagonal Gaussian code. Conv stack + 3 fully-connected layers.
class Encoder {
 public:
  Encoder(const std::string& name, const ArchPlan& plan, int code_dim, Rng& rng);

  GaussBatch forward(const Tensor& x);
  // packed_grad is (N, 2*code_dim) as produced by GaussBatch::pack_grad.
  // Returns input gradients when input_grads is true.
  Tensor backward(const GaussBatch& out, const Tensor& packed_grad,
                  bool param_grads, bool input_grads);

  void collect(std::vector<Param*>& out);
  int code_dim() const { return code_dim_; }

 private:
  int code_dim_;
  std::vector<Conv2d> convs_;
  std::vector<LeakyReLU> conv_acts_;
  Linear fc1_, fc2_, fc3_;
  LeakyReLU act1_{0.2f}, act2_{0.2f};
  std::vector<int> conv_in_shape_;
};

// Code concatenation -> image in [-1, 1]. 3 fully-connected layers, then
// mirrored stride-2 transposed convolutions, tanh output.
class Generator {
 public:
  Generator(const std::string& name, const ArchPlan& plan, int code_total, Rng& rng);

  const Tensor& forward(const Tensor& codes);
  Tensor backward(const Tensor& d_img, bool param_grads);

  void collect(std::vector<Param*>& out);
  int code_total() const { return code_total_; }

 private:
  int code_total_;
  int gs_, gc_;
  Linear fc1_, fc2_, fc3_;
  LeakyReLU act1_{0.f}, act2_{0.f}, act3_{0.f};  // rectifier
  std::vector<ConvTranspose2d> deconvs_;
  std::vector<LeakyReLU> deconv_acts_;
  Tanh out_act_;
};

// Shared conv trunk + one hidden fully-connected layer, branching into one
// linear head of logits per labeled factor. Optionally consumes the unknown
// code appended to the trunk features.
class Classifier {
 public:
  Classifier(const std::string& name, const ArchPlan& plan,
             const std::vector<int>& head_dims, int unknown_code_dim, Rng& rng);

  // e must be non-null iff the classifier was built with unknown_code_dim > 0.
  std::vector<Tensor> forward(const Tensor& x, const Tensor* e);
  // d_logits: one (N, m_i) gradient per head. dx/de optional.
  void backward(const std::vector<Tensor>& d_logits, Tensor* dx, Tensor* de,
                bool param_grads);

  void collect(std::vector<Param*>& out);
  size_t head_count() const { return heads_.size(); }
  int unknown_code_dim() const { return e_dim_; }

 private:
  int e_dim_;
  std::vector<Conv2d> convs_;
  std::vector<LeakyReLU> conv_acts_;
  Linear fc_;
  LeakyReLU fc_act_{0.2f};
  std::vector<Linear> heads_;
  std::vector<int> conv_in_shape_;
  Tensor fc_in_;  // flattened trunk features (+ e)
  int flat_dim_ = 0;
};

// Conv trunk + hidden fully-connected layer + scalar output.
class Discriminator {
 public:
  Discriminator(const std::string& name, const ArchPlan& plan, Rng& rng);

  const Tensor& forward(const Tensor& x);  // (N, 1)
  void backward(const Tensor& d_out, Tensor* dx, bool param_grads);

  void collect(std::vector<Param*>& out);

 private:
  std::vector<Conv2d> convs_;
  std::vector<LeakyReLU> conv_acts_;
  Linear fc_;
  LeakyReLU fc_act_{0.2f};
  Linear out_;
  std::vector<int> conv_in_shape_;
};

// Code-space classifier used by the stability ablation: an MLP on the
// sampled unknown code, four hidden layers of 512.
class MlpClassifier {
 public:
  MlpClassifier(const std::string& name, int in_dim,
                const std::vector<int>& head_dims, Rng& rng);

  std::vector<Tensor> forward(const Tensor& e);
  void backward(const std::vector<Tensor>& d_logits, Tensor* de, bool param_grads);

  void collect(std::vector<Param*>& out);

 private:
  std::vector<Linear> hidden_;
  std::vector<LeakyReLU> acts_;
  std::vector<Linear> heads_;
  Tensor last_hidden_;
};

// ----------------------------------------------------------------- bundles ---

struct Stage1Options {
  bool classifier_uses_unknown_code = true;
  bool code_space_classifier = false;  // stability ablation
};

// Stage I networks: unknown encoder E, label embedders B_i, generator, and
// the adversarial classifier (sample-space by default).
struct StageOneModels {
  ArchPlan arch;
  std::vector<FactorSpec> specs;
  Stage1Options options;

  std::unique_ptr<Encoder> E;
  std::vector<std::unique_ptr<Embedding>> B;  // one per labeled factor
  std::unique_ptr<Generator> G;
  std::unique_ptr<Classifier> C;        // sample-space
  std::unique_ptr<MlpClassifier> Cmlp;  // code-space variant

  int unknown_code_dim() const;
  int code_total() const;
  std::vector<Param*> geb_params();  // E + B + G
  std::vector<Param*> classifier_params();
  uint64_t geb_hash() const;
  uint64_t classifier_hash() const;
};

// Stage II networks: frozen E, labeled-factor encoders S_i, generator,
// discriminative classifier R, discriminator D.
struct StageTwoModels {
  ArchPlan arch;
  std::vector<FactorSpec> specs;

  std::unique_ptr<Encoder> E;  // frozen; never optimized
  std::vector<std::unique_ptr<Encoder>> S;
  std::unique_ptr<Generator> G;
  std::unique_ptr<Classifier> R;
  std::unique_ptr<Discriminator> D;

  int unknown_code_dim() const;
  int code_total() const;
  std::vector<Param*> gs_params();  // G + S
  std::vector<Param*> r_params();
  std::vector<Param*> d_params();
  std::vector<Param*> frozen_encoder_params();
  uint64_t frozen_encoder_hash() const;
};

// Construction order is fixed (E, embedders/encoders in factor order,
// generator, classifiers) so a seed fully determines the initial weights.
std::unique_ptr<StageOneModels> build_stage1(const ArchPlan& plan,
                                             const std::vector<FactorSpec>& specs,
                                             const Stage1Options& options, Rng& rng);

std::unique_ptr<StageTwoModels> build_stage2(const ArchPlan& plan,
                                             const std::vector<FactorSpec>& specs,
                                             Rng& rng);

// Collects every named parameter of a bundle, for checkpointing.
std::vector<Param*> all_params(StageOneModels& m);
std::vector<Param*> all_params(StageTwoModels& m);

}  // namespace unfactor
