// The concircular 1-form f(t) dt on warped tori: planar-form residual under refinement.
#include <cmath>
#include <cstdio>
#include <numbers>

#include <tachibana/analytic.hpp>
#include <tachibana/blas_runtime.hpp>
#include <tachibana/generators.hpp>

using namespace tachibana;

int main(int, char** argv) {
  ensure_reliable_blas(argv);
  const double amplitude = 0.3;
  std::printf("grid   residual(Q_P)   residual(Q_T)   |d w|\n");
  for (int p : {12, 24, 48, 96}) {
    std::vector<double> f(p);
    for (int i = 0; i < p; ++i) f[i] = 1.0 + amplitude * std::cos(2.0 * std::numbers::pi * i / p);
    const Mesh mesh = warped_torus(p, p, f);
    const MetricComplex mc = build_metric(mesh);
    const Eigen::VectorXd w = warped_concircular(mesh);
    std::printf("%4d   %13.3e   %13.3e   %.1e\n", p, residual(planar_form(mc, 1), w), residual(ck_form(mc, 1), w),
                (coboundary(mc, 1) * w).norm());
  }
  return 0;
}
