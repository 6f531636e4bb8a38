#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "../errors.hpp"

namespace unfactor {

// Dense float32 tensor. Image batches use NHWC layout throughout.
struct Tensor {
  std::vector<float> v;
  std::vector<int> shape;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) { v.assign(numel_of(shape), 0.f); }
  Tensor(std::initializer_list<int> s) : Tensor(std::vector<int>(s)) {}

  static size_t numel_of(const std::vector<int>& s) {
    size_t n = 1;
    for (int d : s) {
      if (d < 0) throw argument_error("negative tensor dimension");
      n *= static_cast<size_t>(d);
    }
    return n;
  }

  size_t numel() const { return v.size(); }
  float* data() { return v.data(); }
  const float* data() const { return v.data(); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }

  void zero() { std::fill(v.begin(), v.end(), 0.f); }

  void reshape(std::vector<int> s) {
    if (numel_of(s) != v.size()) throw argument_error("reshape changes element count");
    shape = std::move(s);
  }
};

// FNV-1a over raw parameter bytes; used by tests and the training loops to
// assert that frozen networks stay untouched.
inline uint64_t fnv1a64(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ULL) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t tensor_hash(const Tensor& t, uint64_t h = 0xcbf29ce484222325ULL) {
  return fnv1a64(t.v.data(), t.v.size() * sizeof(float), h);
}

}  // namespace unfactor
