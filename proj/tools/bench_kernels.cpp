// Timing comparison of the serial reference kernels against the OpenMP
// versions the solver uses. Run manually:
//   ./bench_kernels [threads]

#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dcra/kernels.hpp"
#include "dcra/loss.hpp"
#include "dcra/rng.hpp"

using namespace dcra;

namespace {

double time_ms(int reps, const auto& fn) {
  fn();  // warm up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count() / reps;
}

double sink = 0.0;  // keeps results alive without volatile compound-assign warnings

}  // namespace

int main(int argc, char** argv) {
#ifdef _OPENMP
  if (argc > 1) omp_set_num_threads(std::atoi(argv[1]));
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  (void)argc;
  (void)argv;
  std::printf("built without OpenMP; par == ref\n");
#endif

  std::printf("%-28s %10s %10s %8s\n", "kernel", "ref ms", "omp ms", "speedup");

  struct Size {
    int rows, cols;
  };
  const Size sizes[] = {{500, 500}, {2000, 1000}, {3000, 2000}};

  for (const Size& sz : sizes) {
    Rng rng(1);
    Matrix A(sz.rows, sz.cols);
    for (auto& v : A.data) v = rng.normal();
    Vector x(static_cast<std::size_t>(sz.cols)), y(static_cast<std::size_t>(sz.rows));
    for (auto& v : x) v = rng.normal();
    for (auto& v : y) v = rng.normal();
    Vector out_r(y.size()), out_c(x.size());

    char label[64];
    std::snprintf(label, sizeof(label), "matvec %dx%d", sz.rows, sz.cols);
    const double tr = time_ms(20, [&] { ref::matvec(A, x, out_r); sink = sink * 0.5 + out_r[0]; });
    const double tp = time_ms(20, [&] { par::matvec(A, x, out_r); sink = sink * 0.5 + out_r[0]; });
    std::printf("%-28s %10.3f %10.3f %7.2fx\n", label, tr, tp, tr / tp);

    std::snprintf(label, sizeof(label), "matvec_t %dx%d", sz.rows, sz.cols);
    const double ttr = time_ms(20, [&] { ref::matvec_t(A, y, out_c); sink = sink * 0.5 + out_c[0]; });
    const double ttp = time_ms(20, [&] { par::matvec_t(A, y, out_c); sink = sink * 0.5 + out_c[0]; });
    std::printf("%-28s %10.3f %10.3f %7.2fx\n", label, ttr, ttp, ttr / ttp);
  }

  {
    Rng rng(2);
    Matrix V(20, 3001);
    for (auto& v : V.data) v = rng.normal();
    const double tr = time_ms(20, [&] { sink = sink * 0.5 + ref::gram(V)(0, 0); });
    const double tp = time_ms(20, [&] { sink = sink * 0.5 + par::gram(V)(0, 0); });
    std::printf("%-28s %10.3f %10.3f %7.2fx\n", "gram 20x3001", tr, tp, tr / tp);
  }

  {
    Rng rng(3);
    Vector v(2'000'000);
    for (auto& val : v) val = rng.normal();
    const double tr = time_ms(20, [&] { sink = sink * 0.5 + ref::sum(v); });
    const double tp = time_ms(20, [&] { sink = sink * 0.5 + par::sum(v); });
    std::printf("%-28s %10.3f %10.3f %7.2fx\n", "sum 2e6", tr, tp, tr / tp);
  }

  {
    Rng rng(4);
    const int r = 500'000;
    SeparableLoss loss({LossBlock::l1(r)});
    Vector u(static_cast<std::size_t>(r)), out(static_cast<std::size_t>(r));
    for (auto& val : u) val = rng.normal();
    // prox/envelope run through the same OpenMP loops the solver uses; the
    // serial path here is the chunk-free small-size branch forced via spans
    const double tp = time_ms(20, [&] {
      prox(loss, u, 0.3, out);
      sink = sink * 0.5 + out[0];
    });
    const double te = time_ms(20, [&] { sink = sink * 0.5 + envelope(loss, u, 0.3); });
    std::printf("%-28s %10s %10.3f\n", "prox l1 5e5 (omp)", "-", tp);
    std::printf("%-28s %10s %10.3f\n", "envelope l1 5e5 (omp)", "-", te);
  }

  std::printf("# checksum %g\n", sink);
  return 0;
}
