#pragma once

#include <cstddef>

namespace egm::nn {

// C[M,N] += A[M,K] · B[K,N], row-major with explicit leading dimensions (in
// elements). Saxpy formulation: the k loop is outermost over the inner
// product, so every C element accumulates its K terms in the same fixed order
// no matter how the surrounding code batches rows — that is what makes
// training bitwise reproducible and eval independent of batch composition.
// The k-by-4 unroll folds four terms into one expression per pass; the
// grouping is part of the fixed order.
template <class T>
void gemm_acc(int M, int N, int K, const T* A, int lda, const T* B, int ldb, T* C, int ldc) {
    for (int i = 0; i < M; ++i) {
        const T* a = A + static_cast<size_t>(i) * lda;
        T* c = C + static_cast<size_t>(i) * ldc;
        int k = 0;
        for (; k + 4 <= K; k += 4) {
            const T a0 = a[k], a1 = a[k + 1], a2 = a[k + 2], a3 = a[k + 3];
            if (a0 == T(0) && a1 == T(0) && a2 == T(0) && a3 == T(0)) continue;
            const T* b0 = B + static_cast<size_t>(k) * ldb;
            const T* b1 = b0 + ldb;
            const T* b2 = b1 + ldb;
            const T* b3 = b2 + ldb;
#pragma omp simd
            for (int j = 0; j < N; ++j)
                c[j] += a0 * b0[j] + a1 * b1[j] + a2 * b2[j] + a3 * b3[j];
        }
        for (; k < K; ++k) {
            const T ak = a[k];
            if (ak == T(0)) continue;
            const T* b = B + static_cast<size_t>(k) * ldb;
#pragma omp simd
            for (int j = 0; j < N; ++j) c[j] += ak * b[j];
        }
    }
}

// C[K,N] += Aᵀ·B for A[M,K], B[M,N]: the weight-gradient shape. Accumulation
// runs over rows i in ascending order.
template <class T>
void gemm_acc_tn(int M, int N, int K, const T* A, int lda, const T* B, int ldb, T* C, int ldc) {
    for (int i = 0; i < M; ++i) {
        const T* a = A + static_cast<size_t>(i) * lda;
        const T* b = B + static_cast<size_t>(i) * ldb;
        for (int k = 0; k < K; ++k) {
            const T ak = a[k];
            if (ak == T(0)) continue;
            T* c = C + static_cast<size_t>(k) * ldc;
#pragma omp simd
            for (int j = 0; j < N; ++j) c[j] += ak * b[j];
        }
    }
}

} // namespace egm::nn
