#pragma once

#include <cstddef>

namespace unfactor {

// Row-major sgemm: C = alpha * op(A) * op(B) + beta * C.
// Backed by OpenBLAS when available (loaded at runtime so the core can pick
// a kernel matching the actual CPU before the library initializes itself);
// falls back to a blocked scalar loop otherwise.
void sgemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
           const float* a, int lda, const float* b, int ldb, float beta,
           float* c, int ldc);

// Number of threads the math core may use (BLAS and batch-level loops).
// Defaults to min(hardware_concurrency, 4), overridable with UNFACTOR_THREADS.
int math_threads();

// True when sgemm is served by OpenBLAS.
bool blas_available();

}  // namespace unfactor
