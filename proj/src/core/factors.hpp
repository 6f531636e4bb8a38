#pragma once

#include <string>
#include <vector>

#include "losses.hpp"
#include "rng.hpp"

namespace unfactor {

enum class FactorKind { LabeledDiscrete, LabeledContinuous, Unknown };

// Declaration of one factor of variation. Continuous factors are quantized
// into equal-width buckets over [lo, hi) and treated as discrete afterwards.
struct FactorSpec {
  std::string name;
  FactorKind kind = FactorKind::LabeledDiscrete;
  int num_classes = 0;    // discrete only (continuous: filled from num_buckets)
  int code_dim = 1;
  double lo = 0.0, hi = 0.0;  // continuous only
  int num_buckets = 36;       // continuous only; "a few dozen" default
  std::vector<double> frequencies;  // filled by estimate_frequencies

  bool labeled() const { return kind != FactorKind::Unknown; }
  int class_count() const {
    return kind == FactorKind::LabeledContinuous ? num_buckets : num_classes;
  }
  ReferenceDistribution reference() const {
    return ReferenceDistribution::from_probs(frequencies);
  }
};

// One class index per labeled factor, in spec order.
using LabelVector = std::vector<int>;

// Column-major label storage: columns[f][s] is the label of labeled factor f
// for sample s.
struct LabelBatch {
  std::vector<std::vector<int>> columns;

  size_t factor_count() const { return columns.size(); }
  size_t size() const { return columns.empty() ? 0 : columns[0].size(); }
  LabelVector row(size_t s) const {
    LabelVector y(columns.size());
    for (size_t f = 0; f < columns.size(); ++f) y[f] = columns[f][s];
    return y;
  }
};

// Validates the factor set: exactly one unknown factor, positive code dims,
// sane continuous ranges.
void validate_factor_specs(const std::vector<FactorSpec>& specs);

// Indices of the labeled factors within the spec set, in declaration order;
// and the index of the unknown factor.
std::vector<size_t> labeled_indices(const std::vector<FactorSpec>& specs);
size_t unknown_index(const std::vector<FactorSpec>& specs);

// Fills spec.frequencies from empirical counts over the training labels.
// labels must hold one column per *labeled* factor, in spec order. A class
// that never occurs is a configuration error naming the factor and class.
void estimate_frequencies(const LabelBatch& labels, std::vector<FactorSpec>& specs);

// Replaces each factor's label column with an independently drawn uniform
// permutation of itself, so every sample is paired with labels that occur in
// the batch but are independent of the sample's own. Batch size must be >= 2.
LabelBatch sample_mismatched(const LabelBatch& batch, Rng& rng);

// Equal-width bucket index of a continuous value within [lo, hi).
int quantize(double value, const FactorSpec& spec);

}  // namespace unfactor
