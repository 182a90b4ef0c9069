#include "ddpmlab/kernels.hpp"

#include "ddpmlab/parallel.hpp"

#include <cmath>

// Reference kernels. Plain loops, no intrinsics; the SIMD variants are
// checked against these. Row-level parallelism only, so outputs are
// independent of the worker count.

namespace ddpmlab::kernels {
namespace {

void gemm_nt(const double* X, const double* W, double* Y,
             std::size_t rows, std::size_t inner, std::size_t cols) {
    parallel_for(rows, 64, [&](std::size_t r0, std::size_t r1) {
        for (std::size_t r = r0; r < r1; ++r) {
            const double* x = X + r * inner;
            double* y = Y + r * cols;
            for (std::size_t c = 0; c < cols; ++c) {
                const double* w = W + c * inner;
                double acc = 0.0;
                for (std::size_t k = 0; k < inner; ++k) acc += x[k] * w[k];
                y[c] = acc;
            }
        }
    });
}

void gemm_nn_acc(const double* A, const double* B, double* Y,
                 std::size_t rows, std::size_t inner, std::size_t cols) {
    parallel_for(rows, 64, [&](std::size_t r0, std::size_t r1) {
        for (std::size_t r = r0; r < r1; ++r) {
            const double* a = A + r * inner;
            double* y = Y + r * cols;
            for (std::size_t k = 0; k < inner; ++k) {
                const double ak = a[k];
                const double* b = B + k * cols;
                for (std::size_t c = 0; c < cols; ++c) y[c] += ak * b[c];
            }
        }
    });
}

void gemm_tn_acc(const double* A, const double* B, double* Y,
                 std::size_t batch, std::size_t ja, std::size_t ib) {
    // parallel over output rows j; the b-reduction stays sequential
    parallel_for(ja, 16, [&](std::size_t j0, std::size_t j1) {
        for (std::size_t j = j0; j < j1; ++j) {
            double* y = Y + j * ib;
            for (std::size_t b = 0; b < batch; ++b) {
                const double abj = A[b * ja + j];
                const double* br = B + b * ib;
                for (std::size_t i = 0; i < ib; ++i) y[i] += abj * br[i];
            }
        }
    });
}

void add_row_bias(double* Y, const double* bias, std::size_t rows, std::size_t cols) {
    parallel_for(rows, 256, [&](std::size_t r0, std::size_t r1) {
        for (std::size_t r = r0; r < r1; ++r) {
            double* y = Y + r * cols;
            for (std::size_t c = 0; c < cols; ++c) y[c] += bias[c];
        }
    });
}

void leaky_relu(const double* x, double* y, std::size_t n, double slope) {
    parallel_for(n, 1 << 15, [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) y[i] = x[i] > 0.0 ? x[i] : slope * x[i];
    });
}

void leaky_relu_grad(const double* x, const double* dy, double* dx, std::size_t n,
                     double slope) {
    parallel_for(n, 1 << 15, [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) dx[i] = x[i] > 0.0 ? dy[i] : slope * dy[i];
    });
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(const double* x, double a, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i];
}

double dot(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double sumsq_diff(const double* x, double mu, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - mu;
        acc += d * d;
    }
    return acc;
}

void colsum_acc(const double* X, double* out, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = X + r * cols;
        for (std::size_t c = 0; c < cols; ++c) out[c] += x[c];
    }
}

void adam_update(double* p, const double* g, double* m, double* v, std::size_t n,
                 double lr, double b1, double b2, double eps, double bc1, double bc2) {
    parallel_for(n, 1 << 14, [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) {
            const double gi = g[i];
            m[i] = b1 * m[i] + (1.0 - b1) * gi;
            v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
            p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
        }
    });
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops = {
        "scalar",    gemm_nt, gemm_nn_acc, gemm_tn_acc, add_row_bias,
        leaky_relu,  leaky_relu_grad,      axpy,        scale,
        dot,         sum,     sumsq_diff,  colsum_acc,  adam_update,
    };
    return ops;
}

}  // namespace ddpmlab::kernels
