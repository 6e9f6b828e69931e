// Scalar reference kernels and the runtime dispatch table.

#include "ane/kernels.hpp"

namespace ane::kernels {

namespace scalar {

double Dot(const double *a, const double *b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double SumSquares(const double *a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
  return acc;
}

double SquaredDistance(const double *a, const double *b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void Axpy(double alpha, const double *x, double *y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void Scale(double *x, double alpha, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

}  // namespace scalar

namespace {

struct DispatchTable {
  double (*dot)(const double *, const double *, std::size_t);
  double (*sum_squares)(const double *, std::size_t);
  double (*squared_distance)(const double *, const double *, std::size_t);
  void (*axpy)(double, const double *, double *, std::size_t);
  void (*scale)(double *, double, std::size_t);
};

constexpr DispatchTable kScalarTable = {
    &scalar::Dot, &scalar::SumSquares, &scalar::SquaredDistance, &scalar::Axpy,
    &scalar::Scale};

#if defined(__x86_64__) || defined(_M_X64)
constexpr DispatchTable kAvx2Table = {&avx2::Dot, &avx2::SumSquares,
                                      &avx2::SquaredDistance, &avx2::Axpy,
                                      &avx2::Scale};
#endif
#if defined(__aarch64__)
constexpr DispatchTable kNeonTable = {&neon::Dot, &neon::SumSquares,
                                      &neon::SquaredDistance, &neon::Axpy,
                                      &neon::Scale};
#endif

Backend DetectBackend() {
#if defined(__x86_64__) || defined(_M_X64)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return Backend::kAvx2;
#elif defined(__aarch64__)
  return Backend::kNeon;
#endif
  return Backend::kScalar;
}

const DispatchTable *TableFor(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return &kScalarTable;
    case Backend::kAvx2:
#if defined(__x86_64__) || defined(_M_X64)
      return &kAvx2Table;
#else
      return nullptr;
#endif
    case Backend::kNeon:
#if defined(__aarch64__)
      return &kNeonTable;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

Backend g_active = DetectBackend();
const DispatchTable *g_table = TableFor(DetectBackend());

}  // namespace

const char *BackendName(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
    case Backend::kNeon:
      return "neon";
  }
  return "unknown";
}

Backend ActiveBackend() { return g_active; }

bool BackendAvailable(Backend b) {
  if (b == Backend::kScalar) return true;
  if (TableFor(b) == nullptr) return false;
#if defined(__x86_64__) || defined(_M_X64)
  if (b == Backend::kAvx2)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#endif
  return b == DetectBackend();
}

bool SetBackend(Backend b) {
  if (!BackendAvailable(b)) return false;
  g_active = b;
  g_table = TableFor(b);
  return true;
}

double Dot(const double *a, const double *b, std::size_t n) {
  return g_table->dot(a, b, n);
}

double SumSquares(const double *a, std::size_t n) {
  return g_table->sum_squares(a, n);
}

double SquaredDistance(const double *a, const double *b, std::size_t n) {
  return g_table->squared_distance(a, b, n);
}

void Axpy(double alpha, const double *x, double *y, std::size_t n) {
  g_table->axpy(alpha, x, y, n);
}

void Scale(double *x, double alpha, std::size_t n) {
  g_table->scale(x, alpha, n);
}

void MatVec(const double *m, std::size_t rows, std::size_t cols,
            const double *x, double *out) {
  for (std::size_t r = 0; r < rows; ++r) out[r] = Dot(m + r * cols, x, cols);
}

void MatTVecAccum(const double *m, std::size_t rows, std::size_t cols,
                  const double *x, double *out) {
  for (std::size_t r = 0; r < rows; ++r) Axpy(x[r], m + r * cols, out, cols);
}

}  // namespace ane::kernels
