#pragma once

#include <cstddef>

// Dense kernels used by the basis and closure evaluations.  Every kernel has
// an OpenMP driver and a serial reference driver; both call the same
// out-of-line per-element routine, so their outputs are bitwise identical and
// the serial route stays usable as a test oracle.

namespace romkit::kernels {

int max_threads();
void set_threads(int n);

double dot(const double* a, const double* b, std::size_t n);

// y = A x with A stored row-major (rows x cols).
void matvec_row_major(const double* a, std::size_t rows, std::size_t cols,
                      const double* x, double* y);
void matvec_row_major_serial(const double* a, std::size_t rows, std::size_t cols,
                             const double* x, double* y);

// y = A^T x with A stored column-major (rows x cols); y has length cols.
void matvec_t_col_major(const double* a, std::size_t rows, std::size_t cols,
                        const double* x, double* y);
void matvec_t_col_major_serial(const double* a, std::size_t rows, std::size_t cols,
                               const double* x, double* y);

}  // namespace romkit::kernels
