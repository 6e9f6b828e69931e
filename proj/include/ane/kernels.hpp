// ane/kernels.hpp
//
// Double-precision vector kernels used by every arithmetic inner loop in the
// library (distances, gradient accumulation, matrix-vector products). Each
// kernel has a scalar reference implementation plus SIMD variants; the active
// variant is chosen at runtime from CPU capabilities and can be overridden
// for equivalence testing.

#ifndef ANE_KERNELS_HPP
#define ANE_KERNELS_HPP

#include <cstddef>
#include <span>

namespace ane::kernels {

enum class Backend {
  kScalar,
  kAvx2,
  kNeon,
};

// Name for logs and test output ("scalar", "avx2", "neon").
const char *BackendName(Backend b);

// Backend currently routing the dispatched kernels.
Backend ActiveBackend();

// True if the running CPU (and this build) can execute the given backend.
bool BackendAvailable(Backend b);

// Force a specific backend. Returns false (and leaves the dispatch table
// unchanged) if the backend is unavailable.
bool SetBackend(Backend b);

// Dispatched kernels. All accept n == 0.
double Dot(const double *a, const double *b, std::size_t n);
double SumSquares(const double *a, std::size_t n);
double SquaredDistance(const double *a, const double *b, std::size_t n);
// y += alpha * x
void Axpy(double alpha, const double *x, double *y, std::size_t n);
void Scale(double *x, double alpha, std::size_t n);

// Row-major matrix (rows x cols) times vector; out has length rows.
void MatVec(const double *m, std::size_t rows, std::size_t cols,
            const double *x, double *out);
// Transposed product: out (length cols) += m^T * x, with x of length rows.
void MatTVecAccum(const double *m, std::size_t rows, std::size_t cols,
                  const double *x, double *out);

// Span conveniences (sizes must agree; unchecked beyond debug builds).
inline double Dot(std::span<const double> a, std::span<const double> b) {
  return Dot(a.data(), b.data(), a.size());
}
inline double SumSquares(std::span<const double> a) {
  return SumSquares(a.data(), a.size());
}
inline double SquaredDistance(std::span<const double> a,
                              std::span<const double> b) {
  return SquaredDistance(a.data(), b.data(), a.size());
}
inline void Axpy(double alpha, std::span<const double> x,
                 std::span<double> y) {
  Axpy(alpha, x.data(), y.data(), x.size());
}
inline void Scale(std::span<double> x, double alpha) {
  Scale(x.data(), alpha, x.size());
}

// Scalar reference implementations, always available. The SIMD variants are
// equivalence-tested against these.
namespace scalar {
double Dot(const double *a, const double *b, std::size_t n);
double SumSquares(const double *a, std::size_t n);
double SquaredDistance(const double *a, const double *b, std::size_t n);
void Axpy(double alpha, const double *x, double *y, std::size_t n);
void Scale(double *x, double alpha, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double Dot(const double *a, const double *b, std::size_t n);
double SumSquares(const double *a, std::size_t n);
double SquaredDistance(const double *a, const double *b, std::size_t n);
void Axpy(double alpha, const double *x, double *y, std::size_t n);
void Scale(double *x, double alpha, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
double Dot(const double *a, const double *b, std::size_t n);
double SumSquares(const double *a, std::size_t n);
double SquaredDistance(const double *a, const double *b, std::size_t n);
void Axpy(double alpha, const double *x, double *y, std::size_t n);
void Scale(double *x, double alpha, std::size_t n);
}  // namespace neon
#endif

}  // namespace ane::kernels

#endif  // ANE_KERNELS_HPP
