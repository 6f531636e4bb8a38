#include "factors.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace unfactor {

void validate_factor_specs(const std::vector<FactorSpec>& specs) {
  if (specs.empty()) throw config_error("no factors declared");
  int unknown = 0;
  for (const auto& f : specs) {
    if (f.name.empty()) throw config_error("factor with empty name");
    if (f.code_dim < 1)
      throw config_error("factor '" + f.name + "': code_dim must be >= 1");
    switch (f.kind) {
      case FactorKind::Unknown:
        ++unknown;
        break;
      case FactorKind::LabeledDiscrete:
        if (f.num_classes < 2)
          throw config_error("factor '" + f.name + "': num_classes must be >= 2");
        break;
      case FactorKind::LabeledContinuous:
        if (f.num_buckets < 2)
          throw config_error("factor '" + f.name + "': num_buckets must be >= 2");
        if (!(f.lo < f.hi))
          throw config_error("factor '" + f.name + "': requires lo < hi");
        break;
    }
  }
  if (unknown != 1)
    throw config_error("exactly one unknown factor required, found " +
                       std::to_string(unknown));
}

std::vector<size_t> labeled_indices(const std::vector<FactorSpec>& specs) {
  std::vector<size_t> idx;
  for (size_t i = 0; i < specs.size(); ++i)
    if (specs[i].labeled()) idx.push_back(i);
  return idx;
}

size_t unknown_index(const std::vector<FactorSpec>& specs) {
  for (size_t i = 0; i < specs.size(); ++i)
    if (!specs[i].labeled()) return i;
  throw config_error("no unknown factor declared");
}

void estimate_frequencies(const LabelBatch& labels, std::vector<FactorSpec>& specs) {
  const auto labeled = labeled_indices(specs);
  if (labels.factor_count() != labeled.size())
    throw argument_error("label batch has " + std::to_string(labels.factor_count()) +
                         " columns, expected " + std::to_string(labeled.size()));
  if (labels.size() == 0) throw argument_error("empty label sequence");

  for (size_t f = 0; f < labeled.size(); ++f) {
    FactorSpec& spec = specs[labeled[f]];
    const int m = spec.class_count();
    std::vector<long long> counts(static_cast<size_t>(m), 0);
    for (int y : labels.columns[f]) {
      if (y < 0 || y >= m)
        throw argument_error("factor '" + spec.name + "': label " + std::to_string(y) +
                             " out of range [0, " + std::to_string(m) + ")");
      ++counts[static_cast<size_t>(y)];
    }
    for (int c = 0; c < m; ++c) {
      if (counts[static_cast<size_t>(c)] == 0)
        throw config_error("factor '" + spec.name + "': class " + std::to_string(c) +
                           " never occurs in the training split");
    }
    const auto ref = ReferenceDistribution::from_counts(counts);
    spec.frequencies = ref.q;
  }
}

LabelBatch sample_mismatched(const LabelBatch& batch, Rng& rng) {
  if (batch.size() < 2)
    throw argument_error("mismatched sampling requires batch size >= 2");
  LabelBatch out;
  out.columns.resize(batch.factor_count());
  for (size_t f = 0; f < batch.factor_count(); ++f) {
    const auto perm = rng.permutation(batch.size());
    out.columns[f].resize(batch.size());
    for (size_t s = 0; s < batch.size(); ++s)
      out.columns[f][s] = batch.columns[f][perm[s]];
  }
  return out;
}

int quantize(double value, const FactorSpec& spec) {
  if (spec.kind != FactorKind::LabeledContinuous)
    throw argument_error("factor '" + spec.name + "' is not continuous");
  if (!(value >= spec.lo) || !(value < spec.hi))
    throw argument_error("factor '" + spec.name + "': value " + std::to_string(value) +
                         " outside [" + std::to_string(spec.lo) + ", " +
                         std::to_string(spec.hi) + ")");
  const double t = (value - spec.lo) / (spec.hi - spec.lo);
  int bucket = static_cast<int>(std::floor(t * spec.num_buckets));
  return std::clamp(bucket, 0, spec.num_buckets - 1);
}

}  // namespace unfactor
