#include "ltssl/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ltssl::kernels {

namespace {
Backend g_backend =
#ifdef _OPENMP
    Backend::openmp;
#else
    Backend::serial;
#endif
}  // namespace

Backend backend() { return g_backend; }

void set_backend(Backend b) {
#ifndef _OPENMP
  b = Backend::serial;
#endif
  g_backend = b;
}

bool openmp_compiled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// ---------------------------------------------------------------- serial

namespace serial {

void matmul_nn(const double* a, const double* b, double* out, int n, int k, int m) {
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += a[i * k + p] * b[p * m + j];
      out[i * m + j] = acc;
    }
  }
}

void matmul_nt_acc(const double* g, const double* b, double* da, int n, int k, int m) {
  for (int i = 0; i < n; ++i) {
    for (int p = 0; p < k; ++p) {
      double acc = 0.0;
      for (int j = 0; j < m; ++j) acc += g[i * m + j] * b[p * m + j];
      da[i * k + p] += acc;
    }
  }
}

void matmul_tn_acc(const double* a, const double* g, double* db, int n, int k, int m) {
  for (int p = 0; p < k; ++p) {
    for (int j = 0; j < m; ++j) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += a[i * k + p] * g[i * m + j];
      db[p * m + j] += acc;
    }
  }
}

void add(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void add_bias(const double* x, const double* bias, double* out, int n, int m) {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) out[i * m + j] = x[i * m + j] + bias[j];
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void relu(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd_acc(const double* x, const double* g, double* dx, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] > 0.0) dx[i] += g[i];
}

void softmax_rows(const double* x, double* out, int n, int m) {
  for (int i = 0; i < n; ++i) {
    const double* row = x + static_cast<std::size_t>(i) * m;
    double* orow = out + static_cast<std::size_t>(i) * m;
    double mx = row[0];
    for (int j = 1; j < m; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (int j = 0; j < m; ++j) {
      orow[j] = std::exp(row[j] - mx);
      sum += orow[j];
    }
    for (int j = 0; j < m; ++j) orow[j] /= sum;
  }
}

void softmax_rows_bwd_acc(const double* p, const double* g, double* dx, int n, int m) {
  for (int i = 0; i < n; ++i) {
    const double* prow = p + static_cast<std::size_t>(i) * m;
    const double* grow = g + static_cast<std::size_t>(i) * m;
    double* drow = dx + static_cast<std::size_t>(i) * m;
    double dot = 0.0;
    for (int j = 0; j < m; ++j) dot += grow[j] * prow[j];
    for (int j = 0; j < m; ++j) drow[j] += prow[j] * (grow[j] - dot);
  }
}

void scale_rows(const double* x, const double* s, double* out, int n, int m) {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) out[i * m + j] = x[i * m + j] * s[i];
}

}  // namespace serial

// ---------------------------------------------------------------- openmp

namespace omp {

void matmul_nn(const double* a, const double* b, double* out, int n, int k, int m) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += a[i * k + p] * b[p * m + j];
      out[i * m + j] = acc;
    }
  }
}

void matmul_nt_acc(const double* g, const double* b, double* da, int n, int k, int m) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    for (int p = 0; p < k; ++p) {
      double acc = 0.0;
      for (int j = 0; j < m; ++j) acc += g[i * m + j] * b[p * m + j];
      da[i * k + p] += acc;
    }
  }
}

void matmul_tn_acc(const double* a, const double* g, double* db, int n, int k, int m) {
#pragma omp parallel for schedule(static)
  for (int p = 0; p < k; ++p) {
    for (int j = 0; j < m; ++j) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += a[i * k + p] * g[i * m + j];
      db[p * m + j] += acc;
    }
  }
}

void add(const double* a, const double* b, double* out, std::size_t n) {
  const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < sn; ++i) out[i] = a[i] + b[i];
}

void add_bias(const double* x, const double* bias, double* out, int n, int m) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) out[i * m + j] = x[i * m + j] + bias[j];
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
  const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < sn; ++i) out[i] = a[i] * b[i];
}

void relu(const double* x, double* out, std::size_t n) {
  const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < sn; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd_acc(const double* x, const double* g, double* dx, std::size_t n) {
  const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < sn; ++i)
    if (x[i] > 0.0) dx[i] += g[i];
}

void softmax_rows(const double* x, double* out, int n, int m) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const double* row = x + static_cast<std::size_t>(i) * m;
    double* orow = out + static_cast<std::size_t>(i) * m;
    double mx = row[0];
    for (int j = 1; j < m; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (int j = 0; j < m; ++j) {
      orow[j] = std::exp(row[j] - mx);
      sum += orow[j];
    }
    for (int j = 0; j < m; ++j) orow[j] /= sum;
  }
}

void softmax_rows_bwd_acc(const double* p, const double* g, double* dx, int n, int m) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const double* prow = p + static_cast<std::size_t>(i) * m;
    const double* grow = g + static_cast<std::size_t>(i) * m;
    double* drow = dx + static_cast<std::size_t>(i) * m;
    double dot = 0.0;
    for (int j = 0; j < m; ++j) dot += grow[j] * prow[j];
    for (int j = 0; j < m; ++j) drow[j] += prow[j] * (grow[j] - dot);
  }
}

void scale_rows(const double* x, const double* s, double* out, int n, int m) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) out[i * m + j] = x[i * m + j] * s[i];
}

}  // namespace omp

// -------------------------------------------------------------- dispatch

#define LTSSL_DISPATCH(fn, ...)            \
  do {                                     \
    if (g_backend == Backend::openmp)      \
      omp::fn(__VA_ARGS__);                \
    else                                   \
      serial::fn(__VA_ARGS__);             \
  } while (0)

void matmul_nn(const double* a, const double* b, double* out, int n, int k, int m) {
  LTSSL_DISPATCH(matmul_nn, a, b, out, n, k, m);
}
void matmul_nt_acc(const double* g, const double* b, double* da, int n, int k, int m) {
  LTSSL_DISPATCH(matmul_nt_acc, g, b, da, n, k, m);
}
void matmul_tn_acc(const double* a, const double* g, double* db, int n, int k, int m) {
  LTSSL_DISPATCH(matmul_tn_acc, a, g, db, n, k, m);
}
void add(const double* a, const double* b, double* out, std::size_t n) {
  LTSSL_DISPATCH(add, a, b, out, n);
}
void add_bias(const double* x, const double* bias, double* out, int n, int m) {
  LTSSL_DISPATCH(add_bias, x, bias, out, n, m);
}
void mul(const double* a, const double* b, double* out, std::size_t n) {
  LTSSL_DISPATCH(mul, a, b, out, n);
}
void relu(const double* x, double* out, std::size_t n) {
  LTSSL_DISPATCH(relu, x, out, n);
}
void relu_bwd_acc(const double* x, const double* g, double* dx, std::size_t n) {
  LTSSL_DISPATCH(relu_bwd_acc, x, g, dx, n);
}
void softmax_rows(const double* x, double* out, int n, int m) {
  LTSSL_DISPATCH(softmax_rows, x, out, n, m);
}
void softmax_rows_bwd_acc(const double* p, const double* g, double* dx, int n, int m) {
  LTSSL_DISPATCH(softmax_rows_bwd_acc, p, g, dx, n, m);
}
void scale_rows(const double* x, const double* s, double* out, int n, int m) {
  LTSSL_DISPATCH(scale_rows, x, s, out, n, m);
}

#undef LTSSL_DISPATCH

}  // namespace ltssl::kernels
