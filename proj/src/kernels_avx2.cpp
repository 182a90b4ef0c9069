// AVX2+FMA variants. Built with -mavx2 -mfma and only reachable after the
// cpuid check in kernels_dispatch.cpp. Same contracts as the scalar
// reference; reductions differ from it only by FMA/lane reassociation.

#if defined(__AVX2__) && defined(__FMA__)

#include "ddpmlab/kernels.hpp"
#include "ddpmlab/parallel.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace ddpmlab::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

// one row of Y against an 8-column block of W
inline void dot8(const double* x, const double* W, std::size_t inner, std::size_t ldw,
                 double* out) {
    __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd(), acc3 = _mm256_setzero_pd();
    __m256d acc4 = _mm256_setzero_pd(), acc5 = _mm256_setzero_pd();
    __m256d acc6 = _mm256_setzero_pd(), acc7 = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= inner; k += 4) {
        const __m256d xv = _mm256_loadu_pd(x + k);
        acc0 = _mm256_fmadd_pd(xv, _mm256_loadu_pd(W + 0 * ldw + k), acc0);
        acc1 = _mm256_fmadd_pd(xv, _mm256_loadu_pd(W + 1 * ldw + k), acc1);
        acc2 = _mm256_fmadd_pd(xv, _mm256_loadu_pd(W + 2 * ldw + k), acc2);
        acc3 = _mm256_fmadd_pd(xv, _mm256_loadu_pd(W + 3 * ldw + k), acc3);
        acc4 = _mm256_fmadd_pd(xv, _mm256_loadu_pd(W + 4 * ldw + k), acc4);
        acc5 = _mm256_fmadd_pd(xv, _mm256_loadu_pd(W + 5 * ldw + k), acc5);
        acc6 = _mm256_fmadd_pd(xv, _mm256_loadu_pd(W + 6 * ldw + k), acc6);
        acc7 = _mm256_fmadd_pd(xv, _mm256_loadu_pd(W + 7 * ldw + k), acc7);
    }
    double t[8] = {hsum(acc0), hsum(acc1), hsum(acc2), hsum(acc3),
                   hsum(acc4), hsum(acc5), hsum(acc6), hsum(acc7)};
    for (; k < inner; ++k) {
        const double xk = x[k];
        for (int j = 0; j < 8; ++j) t[j] += xk * W[j * ldw + k];
    }
    for (int j = 0; j < 8; ++j) out[j] = t[j];
}

inline double dot1(const double* x, const double* w, std::size_t inner) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= inner; k += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + k), _mm256_loadu_pd(w + k), acc);
    double r = hsum(acc);
    for (; k < inner; ++k) r += x[k] * w[k];
    return r;
}

void gemm_nt(const double* X, const double* W, double* Y,
             std::size_t rows, std::size_t inner, std::size_t cols) {
    parallel_for(rows, 64, [&](std::size_t r0, std::size_t r1) {
        for (std::size_t r = r0; r < r1; ++r) {
            const double* x = X + r * inner;
            double* y = Y + r * cols;
            std::size_t c = 0;
            for (; c + 8 <= cols; c += 8) dot8(x, W + c * inner, inner, inner, y + c);
            for (; c < cols; ++c) y[c] = dot1(x, W + c * inner, inner);
        }
    });
}

void gemm_nn_acc(const double* A, const double* B, double* Y,
                 std::size_t rows, std::size_t inner, std::size_t cols) {
    parallel_for(rows, 64, [&](std::size_t r0, std::size_t r1) {
        for (std::size_t r = r0; r < r1; ++r) {
            const double* a = A + r * inner;
            double* y = Y + r * cols;
            std::size_t k = 0;
            for (; k + 4 <= inner; k += 4) {
                const __m256d a0 = _mm256_set1_pd(a[k + 0]);
                const __m256d a1 = _mm256_set1_pd(a[k + 1]);
                const __m256d a2 = _mm256_set1_pd(a[k + 2]);
                const __m256d a3 = _mm256_set1_pd(a[k + 3]);
                const double* b0 = B + (k + 0) * cols;
                const double* b1 = B + (k + 1) * cols;
                const double* b2 = B + (k + 2) * cols;
                const double* b3 = B + (k + 3) * cols;
                std::size_t c = 0;
                for (; c + 4 <= cols; c += 4) {
                    __m256d acc = _mm256_loadu_pd(y + c);
                    acc = _mm256_fmadd_pd(a0, _mm256_loadu_pd(b0 + c), acc);
                    acc = _mm256_fmadd_pd(a1, _mm256_loadu_pd(b1 + c), acc);
                    acc = _mm256_fmadd_pd(a2, _mm256_loadu_pd(b2 + c), acc);
                    acc = _mm256_fmadd_pd(a3, _mm256_loadu_pd(b3 + c), acc);
                    _mm256_storeu_pd(y + c, acc);
                }
                for (; c < cols; ++c)
                    y[c] += a[k] * b0[c] + a[k + 1] * b1[c] + a[k + 2] * b2[c] + a[k + 3] * b3[c];
            }
            for (; k < inner; ++k) {
                const double ak = a[k];
                const double* b = B + k * cols;
                std::size_t c = 0;
                const __m256d av = _mm256_set1_pd(ak);
                for (; c + 4 <= cols; c += 4) {
                    __m256d acc = _mm256_loadu_pd(y + c);
                    acc = _mm256_fmadd_pd(av, _mm256_loadu_pd(b + c), acc);
                    _mm256_storeu_pd(y + c, acc);
                }
                for (; c < cols; ++c) y[c] += ak * b[c];
            }
        }
    });
}

void gemm_tn_acc(const double* A, const double* B, double* Y,
                 std::size_t batch, std::size_t ja, std::size_t ib) {
    // Pack 4 A-columns contiguously per j-block, then run the b-reduction with
    // register accumulators over 8-wide i-blocks.
    parallel_for(ja, 4, [&](std::size_t j0, std::size_t j1) {
        thread_local std::vector<double> packed;
        for (std::size_t jb = j0; jb < j1; jb += 4) {
            const std::size_t jn = std::min<std::size_t>(4, j1 - jb);
            if (jn == 4) {
                packed.resize(4 * batch);
                for (std::size_t b = 0; b < batch; ++b) {
                    const double* ar = A + b * ja + jb;
                    packed[4 * b + 0] = ar[0];
                    packed[4 * b + 1] = ar[1];
                    packed[4 * b + 2] = ar[2];
                    packed[4 * b + 3] = ar[3];
                }
                std::size_t i = 0;
                for (; i + 8 <= ib; i += 8) {
                    __m256d acc[4][2];
                    for (int jj = 0; jj < 4; ++jj) {
                        acc[jj][0] = _mm256_setzero_pd();
                        acc[jj][1] = _mm256_setzero_pd();
                    }
                    for (std::size_t b = 0; b < batch; ++b) {
                        const double* br = B + b * ib + i;
                        const __m256d bv0 = _mm256_loadu_pd(br);
                        const __m256d bv1 = _mm256_loadu_pd(br + 4);
                        const double* ap = packed.data() + 4 * b;
                        for (int jj = 0; jj < 4; ++jj) {
                            const __m256d av = _mm256_set1_pd(ap[jj]);
                            acc[jj][0] = _mm256_fmadd_pd(av, bv0, acc[jj][0]);
                            acc[jj][1] = _mm256_fmadd_pd(av, bv1, acc[jj][1]);
                        }
                    }
                    for (int jj = 0; jj < 4; ++jj) {
                        double* y = Y + (jb + jj) * ib + i;
                        _mm256_storeu_pd(y, _mm256_add_pd(_mm256_loadu_pd(y), acc[jj][0]));
                        _mm256_storeu_pd(y + 4, _mm256_add_pd(_mm256_loadu_pd(y + 4), acc[jj][1]));
                    }
                }
                for (; i < ib; ++i) {
                    double t[4] = {0, 0, 0, 0};
                    for (std::size_t b = 0; b < batch; ++b) {
                        const double bv = B[b * ib + i];
                        const double* ap = packed.data() + 4 * b;
                        for (int jj = 0; jj < 4; ++jj) t[jj] += ap[jj] * bv;
                    }
                    for (int jj = 0; jj < 4; ++jj) Y[(jb + jj) * ib + i] += t[jj];
                }
            } else {
                for (std::size_t j = jb; j < jb + jn; ++j) {
                    double* y = Y + j * ib;
                    for (std::size_t b = 0; b < batch; ++b) {
                        const double abj = A[b * ja + j];
                        const double* br = B + b * ib;
                        const __m256d av = _mm256_set1_pd(abj);
                        std::size_t i = 0;
                        for (; i + 4 <= ib; i += 4) {
                            __m256d acc = _mm256_loadu_pd(y + i);
                            acc = _mm256_fmadd_pd(av, _mm256_loadu_pd(br + i), acc);
                            _mm256_storeu_pd(y + i, acc);
                        }
                        for (; i < ib; ++i) y[i] += abj * br[i];
                    }
                }
            }
        }
    });
}

void add_row_bias(double* Y, const double* bias, std::size_t rows, std::size_t cols) {
    parallel_for(rows, 256, [&](std::size_t r0, std::size_t r1) {
        for (std::size_t r = r0; r < r1; ++r) {
            double* y = Y + r * cols;
            std::size_t c = 0;
            for (; c + 4 <= cols; c += 4)
                _mm256_storeu_pd(y + c, _mm256_add_pd(_mm256_loadu_pd(y + c),
                                                      _mm256_loadu_pd(bias + c)));
            for (; c < cols; ++c) y[c] += bias[c];
        }
    });
}

void leaky_relu(const double* x, double* y, std::size_t n, double slope) {
    parallel_for(n, 1 << 15, [&](std::size_t i0, std::size_t i1) {
        const __m256d sv = _mm256_set1_pd(slope);
        const __m256d zero = _mm256_setzero_pd();
        std::size_t i = i0;
        for (; i + 4 <= i1; i += 4) {
            const __m256d xv = _mm256_loadu_pd(x + i);
            const __m256d mask = _mm256_cmp_pd(xv, zero, _CMP_GT_OQ);
            _mm256_storeu_pd(y + i, _mm256_blendv_pd(_mm256_mul_pd(sv, xv), xv, mask));
        }
        for (; i < i1; ++i) y[i] = x[i] > 0.0 ? x[i] : slope * x[i];
    });
}

void leaky_relu_grad(const double* x, const double* dy, double* dx, std::size_t n,
                     double slope) {
    parallel_for(n, 1 << 15, [&](std::size_t i0, std::size_t i1) {
        const __m256d sv = _mm256_set1_pd(slope);
        const __m256d zero = _mm256_setzero_pd();
        std::size_t i = i0;
        for (; i + 4 <= i1; i += 4) {
            const __m256d xv = _mm256_loadu_pd(x + i);
            const __m256d dyv = _mm256_loadu_pd(dy + i);
            const __m256d mask = _mm256_cmp_pd(xv, zero, _CMP_GT_OQ);
            _mm256_storeu_pd(dx + i, _mm256_blendv_pd(_mm256_mul_pd(sv, dyv), dyv, mask));
        }
        for (; i < i1; ++i) dx[i] = x[i] > 0.0 ? dy[i] : slope * dy[i];
    });
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i),
                                                _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale(const double* x, double a, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] = a * x[i];
}

double dot(const double* x, const double* y, std::size_t n) { return dot1(x, y, n); }

double sum(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double r = hsum(acc);
    for (; i < n; ++i) r += x[i];
    return r;
}

double sumsq_diff(const double* x, double mu, std::size_t n) {
    const __m256d mv = _mm256_set1_pd(mu);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), mv);
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double r = hsum(acc);
    for (; i < n; ++i) {
        const double d = x[i] - mu;
        r += d * d;
    }
    return r;
}

void colsum_acc(const double* X, double* out, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = X + r * cols;
        std::size_t c = 0;
        for (; c + 4 <= cols; c += 4)
            _mm256_storeu_pd(out + c, _mm256_add_pd(_mm256_loadu_pd(out + c),
                                                    _mm256_loadu_pd(x + c)));
        for (; c < cols; ++c) out[c] += x[c];
    }
}

void adam_update(double* p, const double* g, double* m, double* v, std::size_t n,
                 double lr, double b1, double b2, double eps, double bc1, double bc2) {
    parallel_for(n, 1 << 14, [&](std::size_t i0, std::size_t i1) {
        const __m256d b1v = _mm256_set1_pd(b1), ob1 = _mm256_set1_pd(1.0 - b1);
        const __m256d b2v = _mm256_set1_pd(b2), ob2 = _mm256_set1_pd(1.0 - b2);
        const __m256d lrv = _mm256_set1_pd(lr), epsv = _mm256_set1_pd(eps);
        const __m256d ibc1 = _mm256_set1_pd(1.0 / bc1), ibc2 = _mm256_set1_pd(1.0 / bc2);
        std::size_t i = i0;
        for (; i + 4 <= i1; i += 4) {
            const __m256d gv = _mm256_loadu_pd(g + i);
            __m256d mv = _mm256_loadu_pd(m + i);
            __m256d vv = _mm256_loadu_pd(v + i);
            mv = _mm256_fmadd_pd(b1v, mv, _mm256_mul_pd(ob1, gv));
            vv = _mm256_fmadd_pd(b2v, vv, _mm256_mul_pd(ob2, _mm256_mul_pd(gv, gv)));
            _mm256_storeu_pd(m + i, mv);
            _mm256_storeu_pd(v + i, vv);
            const __m256d mhat = _mm256_mul_pd(mv, ibc1);
            const __m256d denom =
                _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vv, ibc2)), epsv);
            __m256d pv = _mm256_loadu_pd(p + i);
            pv = _mm256_sub_pd(pv, _mm256_mul_pd(lrv, _mm256_div_pd(mhat, denom)));
            _mm256_storeu_pd(p + i, pv);
        }
        for (; i < i1; ++i) {
            const double gi = g[i];
            m[i] = b1 * m[i] + (1.0 - b1) * gi;
            v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
            p[i] -= lr * (m[i] * (1.0 / bc1)) / (std::sqrt(v[i] * (1.0 / bc2)) + eps);
        }
    });
}

}  // namespace

const Ops* avx2_ops() {
    static const Ops ops = {
        "avx2",      gemm_nt, gemm_nn_acc, gemm_tn_acc, add_row_bias,
        leaky_relu,  leaky_relu_grad,      axpy,        scale,
        dot,         sum,     sumsq_diff,  colsum_acc,  adam_update,
    };
    return &ops;
}

}  // namespace ddpmlab::kernels

#else

#include "ddpmlab/kernels.hpp"

namespace ddpmlab::kernels {
const Ops* avx2_ops() { return nullptr; }
}  // namespace ddpmlab::kernels

#endif
