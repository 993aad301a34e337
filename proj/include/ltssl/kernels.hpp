#ifndef LTSSL_KERNELS_HPP
#define LTSSL_KERNELS_HPP

#include <cstddef>

namespace ltssl::kernels {

// Dense inner loops behind the tensor ops. Every kernel exists twice: a
// serial reference (namespace serial) and an OpenMP version (namespace omp)
// that parallelizes over output elements only. Each output element is owned
// by exactly one thread and its inner reduction runs in a fixed left-to-right
// order, so both backends produce bitwise-identical results; tests assert
// this and the bench tool compares their throughput.
//
// _acc variants accumulate (+=) into the destination; plain variants
// overwrite it.

enum class Backend { serial, openmp };

Backend backend();
void set_backend(Backend b);
bool openmp_compiled();
int max_threads();

namespace serial {
// out[n,m] = a[n,k] * b[k,m]
void matmul_nn(const double* a, const double* b, double* out, int n, int k, int m);
// da[n,k] += g[n,m] * b[k,m]^T
void matmul_nt_acc(const double* g, const double* b, double* da, int n, int k, int m);
// db[k,m] += a[n,k]^T * g[n,m]
void matmul_tn_acc(const double* a, const double* g, double* db, int n, int k, int m);
void add(const double* a, const double* b, double* out, std::size_t n);
// out[i,j] = x[i,j] + bias[j]
void add_bias(const double* x, const double* bias, double* out, int n, int m);
void mul(const double* a, const double* b, double* out, std::size_t n);
void relu(const double* x, double* out, std::size_t n);
void relu_bwd_acc(const double* x, const double* g, double* dx, std::size_t n);
void softmax_rows(const double* x, double* out, int n, int m);
// dx[i,j] += p[i,j] * (g[i,j] - sum_c g[i,c] p[i,c])
void softmax_rows_bwd_acc(const double* p, const double* g, double* dx, int n, int m);
// out[i,j] = x[i,j] * s[i]
void scale_rows(const double* x, const double* s, double* out, int n, int m);
}  // namespace serial

namespace omp {
void matmul_nn(const double* a, const double* b, double* out, int n, int k, int m);
void matmul_nt_acc(const double* g, const double* b, double* da, int n, int k, int m);
void matmul_tn_acc(const double* a, const double* g, double* db, int n, int k, int m);
void add(const double* a, const double* b, double* out, std::size_t n);
void add_bias(const double* x, const double* bias, double* out, int n, int m);
void mul(const double* a, const double* b, double* out, std::size_t n);
void relu(const double* x, double* out, std::size_t n);
void relu_bwd_acc(const double* x, const double* g, double* dx, std::size_t n);
void softmax_rows(const double* x, double* out, int n, int m);
void softmax_rows_bwd_acc(const double* p, const double* g, double* dx, int n, int m);
void scale_rows(const double* x, const double* s, double* out, int n, int m);
}  // namespace omp

// Dispatch to the active backend.
void matmul_nn(const double* a, const double* b, double* out, int n, int k, int m);
void matmul_nt_acc(const double* g, const double* b, double* da, int n, int k, int m);
void matmul_tn_acc(const double* a, const double* g, double* db, int n, int k, int m);
void add(const double* a, const double* b, double* out, std::size_t n);
void add_bias(const double* x, const double* bias, double* out, int n, int m);
void mul(const double* a, const double* b, double* out, std::size_t n);
void relu(const double* x, double* out, std::size_t n);
void relu_bwd_acc(const double* x, const double* g, double* dx, std::size_t n);
void softmax_rows(const double* x, double* out, int n, int m);
void softmax_rows_bwd_acc(const double* p, const double* g, double* dx, int n, int m);
void scale_rows(const double* x, const double* s, double* out, int n, int m);

}  // namespace ltssl::kernels

#endif
