#include "netfactory.hpp"

#include <algorithm>

#include "errors.hpp"

namespace unfactor {

ArchPlan plan(int image_size, int channels_in) {
  if (image_size != 28 && image_size != 64 && image_size != 128)
    throw config_error("unsupported image size " + std::to_string(image_size) +
                       " (expected 28, 64 or 128)");
  if (channels_in < 1) throw config_error("channels_in must be >= 1");

  ArchPlan p;
  p.image_size = image_size;
  p.channels_in = channels_in;
  const int conv_count = image_size == 28 ? 3 : (image_size == 64 ? 4 : 5);
  int ch = 32;
  for (int i = 0; i < conv_count; ++i) {
    p.conv_channels.push_back(ch);
    ch = std::min(ch * 2, 256);
  }
  if (image_size == 28) {
    // 28 -> 14 -> 7 -> 4; the last conv needs padding 2 to land on 4.
    p.conv_pads = {1, 1, 2};
    p.final_spatial = 4;
    p.gen_spatial = 7;
    p.gen_channels = p.conv_channels[1];  // 64 at the 7x7 stage
    p.deconv_channels = {p.conv_channels[0], channels_in};  // 7->14->28
  } else {
    p.conv_pads.assign(static_cast<size_t>(conv_count), 1);
    p.final_spatial = 4;
    p.gen_spatial = 4;
    p.gen_channels = p.conv_channels.back();
    for (int i = conv_count - 2; i >= 0; --i)
      p.deconv_channels.push_back(p.conv_channels[static_cast<size_t>(i)]);
    p.deconv_channels.push_back(channels_in);
  }
  return p;
}

namespace {

std::vector<Conv2d> make_conv_stack(const std::string& name, const ArchPlan& plan,
                                    Rng& rng) {
  std::vector<Conv2d> convs;
  int in_ch = plan.channels_in;
  for (size_t i = 0; i < plan.conv_channels.size(); ++i) {
    convs.emplace_back(name + ".conv" + std::to_string(i), in_ch,
                       plan.conv_channels[i], 4, 2, plan.conv_pads[i], rng, 0.2f);
    in_ch = plan.conv_channels[i];
  }
  return convs;
}

}  // namespace

// ---------------------------------------------------------------- Encoder ---

Encoder::Encoder(const std::string& name, const ArchPlan& plan, int code_dim,
                 Rng& rng)
    : code_dim_(code_dim),
      convs_(make_conv_stack(name, plan, rng)),
      conv_acts_(convs_.size(), LeakyReLU(0.2f)),
      fc1_(name + ".fc0", plan.flatten_dim(), plan.fc_width, rng, 0.2f),
      fc2_(name + ".fc1", plan.fc_width, plan.fc_width, rng, 0.2f),
      fc3_(name + ".fc2", plan.fc_width, 2 * code_dim, rng, 0.2f) {}

GaussBatch Encoder::forward(const Tensor& x) {
  const Tensor* cur = &x;
  for (size_t i = 0; i < convs_.size(); ++i)
    cur = &conv_acts_[i].forward(convs_[i].forward(*cur));
  conv_in_shape_ = cur->shape;
  Tensor flat = *cur;
  flat.reshape({flat.dim(0), static_cast<int>(flat.numel()) / flat.dim(0)});
  const Tensor& h1 = act1_.forward(fc1_.forward(flat));
  const Tensor& h2 = act2_.forward(fc2_.forward(h1));
  return GaussBatch::from_packed(fc3_.forward(h2));
}

Tensor Encoder::backward(const GaussBatch&, const Tensor& packed_grad,
                         bool param_grads, bool input_grads) {
  Tensor d;
  fc3_.backward(packed_grad, &d, param_grads);
  act2_.backward_inplace(d);
  Tensor d2;
  fc2_.backward(d, &d2, param_grads);
  act1_.backward_inplace(d2);
  Tensor d3;
  fc1_.backward(d2, &d3, param_grads);
  d3.reshape(conv_in_shape_);
  for (size_t i = convs_.size(); i-- > 0;) {
    conv_acts_[i].backward_inplace(d3);
    Tensor dx;
    const bool need_input = input_grads || i > 0;
    convs_[i].backward(d3, need_input ? &dx : nullptr, param_grads);
    d3 = std::move(dx);
  }
  return d3;
}

void Encoder::collect(std::vector<Param*>& out) {
  for (auto& c : convs_) c.collect(out);
  fc1_.collect(out);
  fc2_.collect(out);
  fc3_.collect(out);
}

// -------------------------------------------------------------- Generator ---

Generator::Generator(const std::string& name, const ArchPlan& plan,
                     int code_total, Rng& rng)
    : code_total_(code_total),
      gs_(plan.gen_spatial),
      gc_(plan.gen_channels),
      fc1_(name + ".fc0", code_total, plan.fc_width, rng, 0.f),
      fc2_(name + ".fc1", plan.fc_width, plan.fc_width, rng, 0.f),
      fc3_(name + ".fc2", plan.fc_width, plan.gen_spatial * plan.gen_spatial * plan.gen_channels,
           rng, 0.f) {
  int in_ch = plan.gen_channels;
  for (size_t i = 0; i < plan.deconv_channels.size(); ++i) {
    deconvs_.emplace_back(name + ".deconv" + std::to_string(i), in_ch,
                          plan.deconv_channels[i], 4, 2, 1, rng, 0.f);
    in_ch = plan.deconv_channels[i];
  }
  deconv_acts_.assign(deconvs_.size() - 1, LeakyReLU(0.f));
}

const Tensor& Generator::forward(const Tensor& codes) {
  const Tensor& h1 = act1_.forward(fc1_.forward(codes));
  const Tensor& h2 = act2_.forward(fc2_.forward(h1));
  Tensor h3 = act3_.forward(fc3_.forward(h2));
  h3.reshape({h3.dim(0), gs_, gs_, gc_});
  const Tensor* cur = &h3;
  for (size_t i = 0; i + 1 < deconvs_.size(); ++i)
    cur = &deconv_acts_[i].forward(deconvs_[i].forward(*cur));
  return out_act_.forward(deconvs_.back().forward(*cur));
}

Tensor Generator::backward(const Tensor& d_img, bool param_grads) {
  Tensor d = d_img;
  out_act_.backward_inplace(d);
  for (size_t i = deconvs_.size(); i-- > 0;) {
    Tensor dx;
    deconvs_[i].backward(d, &dx, param_grads);
    d = std::move(dx);
    if (i > 0) deconv_acts_[i - 1].backward_inplace(d);
  }
  d.reshape({d.dim(0), gs_ * gs_ * gc_});
  act3_.backward_inplace(d);
  Tensor d2;
  fc3_.backward(d, &d2, param_grads);
  act2_.backward_inplace(d2);
  Tensor d3;
  fc2_.backward(d2, &d3, param_grads);
  act1_.backward_inplace(d3);
  Tensor d_codes;
  fc1_.backward(d3, &d_codes, param_grads);
  return d_codes;
}

void Generator::collect(std::vector<Param*>& out) {
  fc1_.collect(out);
  fc2_.collect(out);
  fc3_.collect(out);
  for (auto& d : deconvs_) d.collect(out);
}

// ------------------------------------------------------------- Classifier ---

Classifier::Classifier(const std::string& name, const ArchPlan& plan,
                       const std::vector<int>& head_dims, int unknown_code_dim,
                       Rng& rng)
    : e_dim_(unknown_code_dim),
      convs_(make_conv_stack(name, plan, rng)),
      conv_acts_(convs_.size(), LeakyReLU(0.2f)),
      fc_(name + ".fc0", plan.flatten_dim() + unknown_code_dim, plan.fc_width,
          rng, 0.2f) {
  for (size_t i = 0; i < head_dims.size(); ++i)
    heads_.emplace_back(name + ".head" + std::to_string(i), plan.fc_width,
                        head_dims[i], rng, 0.2f);
  flat_dim_ = plan.flatten_dim();
}

std::vector<Tensor> Classifier::forward(const Tensor& x, const Tensor* e) {
  if ((e_dim_ > 0) != (e != nullptr))
    throw argument_error("classifier unknown-code input mismatch");
  const Tensor* cur = &x;
  for (size_t i = 0; i < convs_.size(); ++i)
    cur = &conv_acts_[i].forward(convs_[i].forward(*cur));
  conv_in_shape_ = cur->shape;
  const int n = cur->dim(0);
  fc_in_ = Tensor({n, flat_dim_ + e_dim_});
  for (int i = 0; i < n; ++i) {
    std::copy_n(cur->data() + static_cast<size_t>(i) * flat_dim_, flat_dim_,
                fc_in_.data() + static_cast<size_t>(i) * (flat_dim_ + e_dim_));
    if (e_dim_ > 0)
      std::copy_n(e->data() + static_cast<size_t>(i) * e_dim_, e_dim_,
                  fc_in_.data() + static_cast<size_t>(i) * (flat_dim_ + e_dim_) + flat_dim_);
  }
  const Tensor& h = fc_act_.forward(fc_.forward(fc_in_));
  std::vector<Tensor> logits;
  logits.reserve(heads_.size());
  for (auto& head : heads_) logits.push_back(head.forward(h));
  return logits;
}

void Classifier::backward(const std::vector<Tensor>& d_logits, Tensor* dx,
                          Tensor* de, bool param_grads) {
  if (d_logits.size() != heads_.size())
    throw argument_error("classifier head gradient count mismatch");
  const int n = fc_in_.dim(0);
  Tensor dh({n, fc_.out_features()});
  for (size_t i = 0; i < heads_.size(); ++i) {
    Tensor dpart;
    heads_[i].backward(d_logits[i], &dpart, param_grads);
    for (size_t j = 0; j < dh.v.size(); ++j) dh.v[j] += dpart.v[j];
  }
  fc_act_.backward_inplace(dh);
  Tensor d_fc_in;
  fc_.backward(dh, &d_fc_in, param_grads);
  if (de && e_dim_ > 0) {
    *de = Tensor({n, e_dim_});
    for (int i = 0; i < n; ++i)
      std::copy_n(d_fc_in.data() + static_cast<size_t>(i) * (flat_dim_ + e_dim_) + flat_dim_,
                  e_dim_, de->data() + static_cast<size_t>(i) * e_dim_);
  }
  if (dx) {
    Tensor d_flat({n, flat_dim_});
    for (int i = 0; i < n; ++i)
      std::copy_n(d_fc_in.data() + static_cast<size_t>(i) * (flat_dim_ + e_dim_),
                  flat_dim_, d_flat.data() + static_cast<size_t>(i) * flat_dim_);
    d_flat.reshape(conv_in_shape_);
    for (size_t i = convs_.size(); i-- > 0;) {
      conv_acts_[i].backward_inplace(d_flat);
      Tensor dnext;
      convs_[i].backward(d_flat, i == 0 ? dx : &dnext, param_grads);
      if (i > 0) d_flat = std::move(dnext);
    }
  } else if (param_grads) {
    Tensor d_flat({n, flat_dim_});
    for (int i = 0; i < n; ++i)
      std::copy_n(d_fc_in.data() + static_cast<size_t>(i) * (flat_dim_ + e_dim_),
                  flat_dim_, d_flat.data() + static_cast<size_t>(i) * flat_dim_);
    d_flat.reshape(conv_in_shape_);
    for (size_t i = convs_.size(); i-- > 0;) {
      conv_acts_[i].backward_inplace(d_flat);
      Tensor dnext;
      convs_[i].backward(d_flat, i == 0 ? nullptr : &dnext, param_grads);
      if (i > 0) d_flat = std::move(dnext);
    }
  }
}

void Classifier::collect(std::vector<Param*>& out) {
  for (auto& c : convs_) c.collect(out);
  fc_.collect(out);
  for (auto& h : heads_) h.collect(out);
}

// ----------------------------------------------------------- Discriminator ---

Discriminator::Discriminator(const std::string& name, const ArchPlan& plan, Rng& rng)
    : convs_(make_conv_stack(name, plan, rng)),
      conv_acts_(convs_.size(), LeakyReLU(0.2f)),
      fc_(name + ".fc0", plan.flatten_dim(), plan.fc_width, rng, 0.2f),
      out_(name + ".out", plan.fc_width, 1, rng, 0.2f) {}

const Tensor& Discriminator::forward(const Tensor& x) {
  const Tensor* cur = &x;
  for (size_t i = 0; i < convs_.size(); ++i)
    cur = &conv_acts_[i].forward(convs_[i].forward(*cur));
  conv_in_shape_ = cur->shape;
  Tensor flat = *cur;
  flat.reshape({flat.dim(0), static_cast<int>(flat.numel()) / flat.dim(0)});
  const Tensor& h = fc_act_.forward(fc_.forward(flat));
  return out_.forward(h);
}

void Discriminator::backward(const Tensor& d_out, Tensor* dx, bool param_grads) {
  Tensor dh;
  out_.backward(d_out, &dh, param_grads);
  fc_act_.backward_inplace(dh);
  Tensor d_flat;
  fc_.backward(dh, &d_flat, param_grads);
  d_flat.reshape(conv_in_shape_);
  for (size_t i = convs_.size(); i-- > 0;) {
    conv_acts_[i].backward_inplace(d_flat);
    Tensor dnext;
    const bool need = dx != nullptr || i > 0;
    convs_[i].backward(d_flat, need ? (i == 0 ? dx : &dnext) : nullptr, param_grads);
    if (i > 0) d_flat = std::move(dnext);
  }
}

void Discriminator::collect(std::vector<Param*>& out) {
  for (auto& c : convs_) c.collect(out);
  fc_.collect(out);
  out_.collect(out);
}

// ----------------------------------------------------------- MlpClassifier ---

MlpClassifier::MlpClassifier(const std::string& name, int in_dim,
                             const std::vector<int>& head_dims, Rng& rng) {
  int cur = in_dim;
  for (int i = 0; i < 4; ++i) {
    hidden_.emplace_back(name + ".fc" + std::to_string(i), cur, 512, rng, 0.2f);
    cur = 512;
  }
  acts_.assign(hidden_.size(), LeakyReLU(0.2f));
  for (size_t i = 0; i < head_dims.size(); ++i)
    heads_.emplace_back(name + ".head" + std::to_string(i), cur, head_dims[i], rng, 0.2f);
}

std::vector<Tensor> MlpClassifier::forward(const Tensor& e) {
  const Tensor* cur = &e;
  for (size_t i = 0; i < hidden_.size(); ++i)
    cur = &acts_[i].forward(hidden_[i].forward(*cur));
  last_hidden_ = *cur;
  std::vector<Tensor> logits;
  logits.reserve(heads_.size());
  for (auto& head : heads_) logits.push_back(head.forward(*cur));
  return logits;
}

void MlpClassifier::backward(const std::vector<Tensor>& d_logits, Tensor* de,
                             bool param_grads) {
  Tensor dh(last_hidden_.shape);
  for (size_t i = 0; i < heads_.size(); ++i) {
    Tensor dpart;
    heads_[i].backward(d_logits[i], &dpart, param_grads);
    for (size_t j = 0; j < dh.v.size(); ++j) dh.v[j] += dpart.v[j];
  }
  for (size_t i = hidden_.size(); i-- > 0;) {
    acts_[i].backward_inplace(dh);
    Tensor dnext;
    const bool need = de != nullptr || i > 0;
    hidden_[i].backward(dh, need ? &dnext : nullptr, param_grads);
    if (i == 0) {
      if (de) *de = std::move(dnext);
    } else {
      dh = std::move(dnext);
    }
  }
}

void MlpClassifier::collect(std::vector<Param*>& out) {
  for (auto& h : hidden_) h.collect(out);
  for (auto& h : heads_) h.collect(out);
}

// ----------------------------------------------------------------- bundles ---

namespace {

uint64_t hash_params(const std::vector<Param*>& ps) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const Param* p : ps) h = tensor_hash(p->w, h);
  return h;
}

std::vector<int> head_dims_of(const std::vector<FactorSpec>& specs) {
  std::vector<int> dims;
  for (const auto& s : specs)
    if (s.labeled()) dims.push_back(s.class_count());
  return dims;
}

int total_code(const std::vector<FactorSpec>& specs) {
  int total = 0;
  for (const auto& s : specs) total += s.code_dim;
  return total;
}

}  // namespace

int StageOneModels::unknown_code_dim() const {
  return specs[unknown_index(specs)].code_dim;
}
int StageOneModels::code_total() const { return total_code(specs); }

std::vector<Param*> StageOneModels::geb_params() {
  std::vector<Param*> ps;
  E->collect(ps);
  for (auto& b : B) b->collect(ps);
  G->collect(ps);
  return ps;
}

std::vector<Param*> StageOneModels::classifier_params() {
  std::vector<Param*> ps;
  if (C) C->collect(ps);
  if (Cmlp) Cmlp->collect(ps);
  return ps;
}

uint64_t StageOneModels::geb_hash() const {
  return hash_params(const_cast<StageOneModels*>(this)->geb_params());
}
uint64_t StageOneModels::classifier_hash() const {
  return hash_params(const_cast<StageOneModels*>(this)->classifier_params());
}

int StageTwoModels::unknown_code_dim() const {
  return specs[unknown_index(specs)].code_dim;
}
int StageTwoModels::code_total() const { return total_code(specs); }

std::vector<Param*> StageTwoModels::gs_params() {
  std::vector<Param*> ps;
  G->collect(ps);
  for (auto& s : S) s->collect(ps);
  return ps;
}
std::vector<Param*> StageTwoModels::r_params() {
  std::vector<Param*> ps;
  R->collect(ps);
  return ps;
}
std::vector<Param*> StageTwoModels::d_params() {
  std::vector<Param*> ps;
  D->collect(ps);
  return ps;
}
std::vector<Param*> StageTwoModels::frozen_encoder_params() {
  std::vector<Param*> ps;
  E->collect(ps);
  return ps;
}
uint64_t StageTwoModels::frozen_encoder_hash() const {
  return hash_params(const_cast<StageTwoModels*>(this)->frozen_encoder_params());
}

std::unique_ptr<StageOneModels> build_stage1(const ArchPlan& arch,
                                             const std::vector<FactorSpec>& specs,
                                             const Stage1Options& options, Rng& rng) {
  validate_factor_specs(specs);
  auto m = std::make_unique<StageOneModels>();
  m->arch = arch;
  m->specs = specs;
  m->options = options;
  const size_t unk = unknown_index(specs);
  m->E = std::make_unique<Encoder>("E", arch, specs[unk].code_dim, rng);
  for (size_t i : labeled_indices(specs)) {
    const auto& f = specs[i];
    m->B.push_back(std::make_unique<Embedding>("B." + f.name, f.class_count(),
                                               2 * f.code_dim, rng));
  }
  m->G = std::make_unique<Generator>("G1", arch, total_code(specs), rng);
  const auto heads = head_dims_of(specs);
  if (options.code_space_classifier) {
    m->Cmlp = std::make_unique<MlpClassifier>("C", specs[unk].code_dim, heads, rng);
  } else {
    m->C = std::make_unique<Classifier>(
        "C", arch, heads,
        options.classifier_uses_unknown_code ? specs[unk].code_dim : 0, rng);
  }
  return m;
}

std::unique_ptr<StageTwoModels> build_stage2(const ArchPlan& arch,
                                             const std::vector<FactorSpec>& specs,
                                             Rng& rng) {
  validate_factor_specs(specs);
  auto m = std::make_unique<StageTwoModels>();
  m->arch = arch;
  m->specs = specs;
  const size_t unk = unknown_index(specs);
  m->E = std::make_unique<Encoder>("E", arch, specs[unk].code_dim, rng);
  for (size_t i : labeled_indices(specs)) {
    const auto& f = specs[i];
    m->S.push_back(std::make_unique<Encoder>("S." + f.name, arch, f.code_dim, rng));
  }
  m->G = std::make_unique<Generator>("G2", arch, total_code(specs), rng);
  m->R = std::make_unique<Classifier>("R", arch, head_dims_of(specs), 0, rng);
  m->D = std::make_unique<Discriminator>("D", arch, rng);
  return m;
}

std::vector<Param*> all_params(StageOneModels& m) {
  std::vector<Param*> ps = m.geb_params();
  auto cls = m.classifier_params();
  ps.insert(ps.end(), cls.begin(), cls.end());
  return ps;
}

std::vector<Param*> all_params(StageTwoModels& m) {
  std::vector<Param*> ps;
  m.E->collect(ps);
  for (auto& s : m.S) s->collect(ps);
  m.G->collect(ps);
  m.R->collect(ps);
  m.D->collect(ps);
  return ps;
}

}  // namespace unfactor
