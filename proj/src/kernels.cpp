#include "romkit/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace romkit::kernels {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

// Kept out of line so the OpenMP and serial drivers execute the same
// instruction sequence per element; inlining into differently shaped loops
// could change contraction and break bitwise agreement.
__attribute__((noinline)) double dot(const double* a, const double* b,
                                     std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void matvec_row_major(const double* a, std::size_t rows, std::size_t cols,
                      const double* x, double* y) {
  const long long m = static_cast<long long>(rows);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < m; ++i) {
    y[i] = dot(a + static_cast<std::size_t>(i) * cols, x, cols);
  }
}

void matvec_row_major_serial(const double* a, std::size_t rows, std::size_t cols,
                             const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) {
    y[i] = dot(a + i * cols, x, cols);
  }
}

void matvec_t_col_major(const double* a, std::size_t rows, std::size_t cols,
                        const double* x, double* y) {
  const long long k = static_cast<long long>(cols);
#pragma omp parallel for schedule(static)
  for (long long j = 0; j < k; ++j) {
    y[j] = dot(a + static_cast<std::size_t>(j) * rows, x, rows);
  }
}

void matvec_t_col_major_serial(const double* a, std::size_t rows, std::size_t cols,
                               const double* x, double* y) {
  for (std::size_t j = 0; j < cols; ++j) {
    y[j] = dot(a + j * rows, x, rows);
  }
}

}  // namespace romkit::kernels
