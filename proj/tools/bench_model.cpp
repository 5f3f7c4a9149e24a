#include <chrono>
#include <cstdio>

#include "sw4dvar/model.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace sw4dvar;

namespace {

template <typename F>
double time_ms(const F& f, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
  const int sizes[][2] = {{72, 36}, {144, 72}, {288, 144}};
  const int reps = 50;

#ifdef _OPENMP
  std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
  std::printf("openmp: disabled at build time\n");
#endif
  std::printf("%8s %12s %12s %8s %10s\n", "grid", "serial[ms]", "parallel[ms]", "speedup",
              "bitwise");

  for (const auto& sz : sizes) {
    const SphereGrid grid = build_grid(sz[0], sz[1]);
    const ModelParams mp;
    const StateVector x0 = synth_initial(42, grid, SynthFieldParams{});
    const StateVector state = step(x0, grid, mp);  // nonzero u, v

    double sink = 0.0;
    const double t_serial = time_ms([&] { sink += rhs_serial(state, grid, mp).data[0]; }, reps);
    const double t_par = time_ms([&] { sink += rhs(state, grid, mp).data[0]; }, reps);
    asm volatile("" : : "g"(&sink) : "memory");

    const StateVector a = rhs_serial(state, grid, mp);
    const StateVector b = rhs(state, grid, mp);
    bool same = a.data == b.data;

    char label[16];
    std::snprintf(label, sizeof(label), "%dx%d", sz[0], sz[1]);
    std::printf("%8s %12.3f %12.3f %8.2f %10s\n", label, t_serial, t_par, t_serial / t_par,
                same ? "yes" : "NO");
    if (!same) return 1;
  }
  return 0;
}
