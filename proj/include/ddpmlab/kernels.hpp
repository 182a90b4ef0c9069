#pragma once

#include <cstddef>
#include <string>

namespace ddpmlab::kernels {

// Runtime-dispatched fp64 kernels. Every entry has a scalar reference
// implementation; AVX2/AVX-512 variants are selected at startup via cpuid and
// must agree with the reference to tight tolerance (see tests/test_kernels).
//
// All matrices are dense row-major. Reductions inside one output element run
// in a fixed sequential order so results do not depend on the worker count;
// they DO depend on the active backend (FMA + lane reassociation), which is
// why the backend is pinned per process and recorded in run manifests.
struct Ops {
    const char* name;

    // Y[r,c] = sum_k X[r,k] * W[c,k]      X: rows x inner, W: cols x inner
    void (*gemm_nt)(const double* X, const double* W, double* Y,
                    std::size_t rows, std::size_t inner, std::size_t cols);

    // Y[r,c] += sum_k A[r,k] * B[k,c]     A: rows x inner, B: inner x cols
    void (*gemm_nn_acc)(const double* A, const double* B, double* Y,
                        std::size_t rows, std::size_t inner, std::size_t cols);

    // Y[j,i] += sum_b A[b,j] * B[b,i]     A: batch x ja, B: batch x ib
    void (*gemm_tn_acc)(const double* A, const double* B, double* Y,
                        std::size_t batch, std::size_t ja, std::size_t ib);

    // Y[r,c] += bias[c]
    void (*add_row_bias)(double* Y, const double* bias, std::size_t rows, std::size_t cols);

    void (*leaky_relu)(const double* x, double* y, std::size_t n, double slope);

    // dx[i] = dy[i] * (x[i] > 0 ? 1 : slope), keyed off the pre-activation x
    void (*leaky_relu_grad)(const double* x, const double* dy, double* dx,
                            std::size_t n, double slope);

    void (*axpy)(double a, const double* x, double* y, std::size_t n);  // y += a*x
    void (*scale)(const double* x, double a, double* y, std::size_t n); // y = a*x
    double (*dot)(const double* x, const double* y, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    double (*sumsq_diff)(const double* x, double mu, std::size_t n);    // sum((x-mu)^2)

    // out[c] += sum_r X[r,c]
    void (*colsum_acc)(const double* X, double* out, std::size_t rows, std::size_t cols);

    // bias-corrected Adam update over a flat parameter block:
    //   m = b1*m + (1-b1)*g;  v = b2*v + (1-b2)*g^2
    //   p -= lr * (m/bc1) / (sqrt(v/bc2) + eps)
    void (*adam_update)(double* p, const double* g, double* m, double* v, std::size_t n,
                        double lr, double b1, double b2, double eps, double bc1, double bc2);
};

enum class Backend { scalar, avx2, avx512 };

const char* backend_name(Backend b);
bool cpu_supports(Backend b);
Backend detect_best();

// Active table. Defaults to detect_best() on first use.
const Ops& active();
Backend active_backend();

// Pin the backend for the process (used by --kernels and by the equivalence
// tests). Throws ConfigError if unsupported on this CPU or not compiled in.
void force_backend(Backend b);
Backend parse_backend(const std::string& name);  // "scalar" | "avx2" | "avx512" | "auto"

const Ops& scalar_ops();
const Ops* avx2_ops();    // nullptr when not compiled in
const Ops* avx512_ops();  // nullptr when not compiled in

}  // namespace ddpmlab::kernels
