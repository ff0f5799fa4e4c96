// Timing comparison of the OpenMP kernels against the serial reference.
// The parallel kernels accumulate per output element in a fixed order, so
// results must also match bitwise; this harness checks that too.

#include <chrono>
#include <cstdio>
#include <string>

#include "gflow/kernels.hpp"
#include "gflow/rng.hpp"

using namespace gflow;
using clk = std::chrono::steady_clock;

namespace {

double secs(clk::time_point a, clk::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

template <typename F>
double time_best(F&& f, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = clk::now();
    f();
    best = std::min(best, secs(t0, clk::now()));
  }
  return best;
}

void report(const char* name, double serial, double parallel, bool bitwise) {
  std::printf("%-22s serial %8.3f ms   parallel %8.3f ms   speedup %5.2fx   bitwise %s\n", name,
              serial * 1e3, parallel * 1e3, serial / parallel, bitwise ? "ok" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 900;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 5;
  Rng rng(1);
  Mat a(n, n), b(n, n);
  for (auto& v : a.a) v = rng.gaussian();
  for (auto& v : b.a) v = rng.gaussian();
  Vec x(n), w(n);
  for (auto& v : x) v = rng.gaussian();
  for (auto& v : w) v = std::fabs(rng.gaussian()) + 0.1;

  {
    Vec y1(n), y2(n);
    const double ts = time_best([&] { kern_serial::matvec(a, x.data(), y1.data()); }, reps);
    const double tp = time_best([&] { kern::matvec(a, x.data(), y2.data()); }, reps);
    report("matvec", ts, tp, y1 == y2);
  }
  {
    Mat g1, g2;
    const double ts = time_best([&] { kern_serial::gram(a, w.data(), g1); }, reps);
    const double tp = time_best([&] { kern::gram(a, w.data(), g2); }, reps);
    report("gram (A^T W A)", ts, tp, g1.a == g2.a);
  }
  {
    Mat c1, c2;
    const double ts = time_best([&] { kern_serial::matmul(a, b, c1); }, reps);
    const double tp = time_best([&] { kern::matmul(a, b, c2); }, reps);
    report("matmul", ts, tp, c1.a == c2.a);
  }
  {
    const size_t len = static_cast<size_t>(n) * n;
    double d1 = 0, d2 = 0;
    const double ts = time_best([&] { d1 = kern_serial::dot(a.a.data(), b.a.data(), len); }, reps);
    const double tp = time_best([&] { d2 = kern::dot(a.a.data(), b.a.data(), len); }, reps);
    report("dot (n^2 length)", ts, tp, d1 == d2);
  }
  return 0;
}
