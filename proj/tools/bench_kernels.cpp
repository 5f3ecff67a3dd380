#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "romkit/kernels.hpp"

namespace {

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <typename F>
double time_best_of(int reps, const F& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now_s();
    f();
    best = std::min(best, now_s() - t0);
  }
  return best;
}

}  // namespace

int main() {
  using namespace romkit::kernels;
  std::mt19937_64 gen(12345);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);

  std::printf("threads available: %d\n", max_threads());
  std::printf("%-10s %-10s %-14s %-14s %-10s %-8s\n", "kernel", "size",
              "serial_s", "parallel_s", "speedup", "bitwise");

  for (std::size_t n : {std::size_t(4000), std::size_t(1000000)}) {
    const std::size_t rows = n >= 1000000 ? 1000 : 200;
    const std::size_t cols = n / rows;
    std::vector<double> a(rows * cols), x(cols), xr(rows), y1(rows), y2(rows),
        z1(cols), z2(cols);
    for (auto& v : a) v = dist(gen);
    for (auto& v : x) v = dist(gen);
    for (auto& v : xr) v = dist(gen);

    const int reps = n >= 1000000 ? 20 : 200;
    const double ts = time_best_of(reps, [&]() {
      matvec_row_major_serial(a.data(), rows, cols, x.data(), y1.data());
    });
    const double tp = time_best_of(reps, [&]() {
      matvec_row_major(a.data(), rows, cols, x.data(), y2.data());
    });
    bool same = true;
    for (std::size_t i = 0; i < rows; ++i) same = same && y1[i] == y2[i];
    std::printf("%-10s %-10zu %-14.3e %-14.3e %-10.2f %-8s\n", "matvec",
                rows * cols, ts, tp, ts / tp, same ? "yes" : "NO");

    const double ts2 = time_best_of(reps, [&]() {
      matvec_t_col_major_serial(a.data(), rows, cols, xr.data(), z1.data());
    });
    const double tp2 = time_best_of(reps, [&]() {
      matvec_t_col_major(a.data(), rows, cols, xr.data(), z2.data());
    });
    same = true;
    for (std::size_t i = 0; i < cols; ++i) same = same && z1[i] == z2[i];
    std::printf("%-10s %-10zu %-14.3e %-14.3e %-10.2f %-8s\n", "matvec_t",
                rows * cols, ts2, tp2, ts2 / tp2, same ? "yes" : "NO");
  }
  return 0;
}
