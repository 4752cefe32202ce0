// Tachibana, Killing and planar numbers of 1-forms on icospheres of increasing resolution.
#include <cstdio>

#include <tachibana/blas_runtime.hpp>
#include <tachibana/generators.hpp>
#include <tachibana/spectra.hpp>

using namespace tachibana;

int main(int, char** argv) {
  ensure_reliable_blas(argv);
  std::printf("level  edges   b  t  k  p   kernel max|eig|  next eig   gap\n");
  for (int level = 0; level <= 3; ++level) {
    const Mesh mesh = icosphere(level);
    const MetricComplex mc = build_metric(mesh);
    try {
      const InvariantReport rep = invariant_numbers(mesh, mc, 1);
      const auto& ck = rep.ck.estimate;
      std::printf("%5d  %5d  %2d %2d %2d %2d   %14.3e  %9.4f  %6.1f\n", level, mc.count(1), rep.betti, rep.tachibana,
                  rep.killing, rep.planar, ck.below.value_or(0.0), ck.above.value_or(0.0), ck.gap_ratio);
    } catch (const Error& e) {
      std::printf("%5d  %5d  %s\n", level, mc.count(1), e.what());
    }
  }
  return 0;
}
