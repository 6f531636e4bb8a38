#include "gemm.hpp"

#include <dlfcn.h>

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <thread>

namespace unfactor {
namespace {

using cblas_sgemm_fn = void (*)(int order, int trans_a, int trans_b, int m,
                                int n, int k, float alpha, const float* a,
                                int lda, const float* b, int ldb, float beta,
                                float* c, int ldc);
using set_threads_fn = void (*)(int);

constexpr int kCblasRowMajor = 101;
constexpr int kCblasNoTrans = 111;
constexpr int kCblasTrans = 112;

struct BlasHandle {
  cblas_sgemm_fn sgemm = nullptr;
  int threads = 1;
};

int env_threads() {
  if (const char* s = std::getenv("UNFACTOR_THREADS")) {
    int t = std::atoi(s);
    if (t >= 1) return t;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min(hw == 0 ? 1u : hw, 4u));
}

const BlasHandle& blas() {
  static BlasHandle handle = [] {
    BlasHandle h;
    h.threads = env_threads();
    // OpenBLAS selects its kernels from /proc/cpuinfo, which reports an
    // unknown model on some virtualized hosts; pinning the core type keeps
    // it from falling back to the generic kernel. Must happen before the
    // library is loaded, hence dlopen instead of link-time binding.
#if defined(__x86_64__)
    if (__builtin_cpu_supports("avx512f"))
      setenv("OPENBLAS_CORETYPE", "SKYLAKEX", 0);
    else if (__builtin_cpu_supports("avx2"))
      setenv("OPENBLAS_CORETYPE", "HASWELL", 0);
#endif
    void* lib = dlopen("libopenblas.so.0", RTLD_NOW | RTLD_LOCAL);
    if (!lib) lib = dlopen("libopenblas.so", RTLD_NOW | RTLD_LOCAL);
    if (lib) {
      h.sgemm = reinterpret_cast<cblas_sgemm_fn>(dlsym(lib, "cblas_sgemm"));
      if (auto set = reinterpret_cast<set_threads_fn>(dlsym(lib, "openblas_set_num_threads")))
        set(h.threads);
    }
    return h;
  }();
  return handle;
}

// Fallback path: straightforward blocked triple loop. Slow but correct.
void sgemm_fallback(bool trans_a, bool trans_b, int m, int n, int k,
                    float alpha, const float* a, int lda, const float* b,
                    int ldb, float beta, float* c, int ldc) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) c[i * ldc + j] *= beta;
  }
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < k; ++p) {
      const float av = alpha * (trans_a ? a[p * lda + i] : a[i * lda + p]);
      if (av == 0.f) continue;
      const float* brow = trans_b ? nullptr : &b[p * ldb];
      if (brow) {
        float* crow = &c[i * ldc];
        for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
      } else {
        for (int j = 0; j < n; ++j) c[i * ldc + j] += av * b[j * ldb + p];
      }
    }
  }
}

}  // namespace

void sgemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
           const float* a, int lda, const float* b, int ldb, float beta,
           float* c, int ldc) {
  if (m == 0 || n == 0) return;
  const BlasHandle& h = blas();
  if (h.sgemm) {
    h.sgemm(kCblasRowMajor, trans_a ? kCblasTrans : kCblasNoTrans,
            trans_b ? kCblasTrans : kCblasNoTrans, m, n, k, alpha, a, lda, b,
            ldb, beta, c, ldc);
  } else {
    sgemm_fallback(trans_a, trans_b, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
  }
}

int math_threads() { return blas().threads; }

bool blas_available() { return blas().sgemm != nullptr; }

}  // namespace unfactor
