// Moves a cloud by a known motor, adds noise, and registers it back with both methods.
//   register_bunny [cloud.ply] [sigma]

#include <cstdio>
#include <cstdlib>
#include <string>

#include "cgareg/cgareg.hpp"

int main(int argc, char** argv) {
  using namespace cgareg;
  const std::string path = argc > 1 ? argv[1] : "data/bunny.ply";
  const double sigma = argc > 2 ? std::atof(argv[2]) : 0.01;
  try {
    const PointCloud src = load_ply(path);
    const Motor truth = random_motor(5.0, 0.01, 7);
    const PointCloud dst = perturb(src, truth, sigma, 8, true);
    std::printf("%s: %zu points, sigma %g\n", src.name.c_str(), src.points.size(), sigma);
    for (Method m : {Method::cga_evd, Method::vga_evd}) {
      const RegistrationResult res = register_clouds(m, src.points, dst.points);
      const PoseErrors e = pose_errors(res.motor, truth);
      std::printf("  %-8s RRE %.4f deg  RTE %.3e  (%.3f s)\n", method_name(m).c_str(), e.rre_deg, e.rte,
                  res.runtime_s);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
  return 0;
}
