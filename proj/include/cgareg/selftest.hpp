#pragma once

// Quick invariant checks that can run in an installed binary (`cgareg selftest`).

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "cgareg/bench.hpp"
#include "cgareg/cga.hpp"
#include "cgareg/ga.hpp"
#include "cgareg/register.hpp"
#include "cgareg/spectra.hpp"

namespace cgareg {

struct SelftestResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;  // largest observed error
  double tol = 0.0;
};

namespace selftest_detail {

inline MV random_mv(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  MV m;
  for (auto& c : m.coeffs()) c = g(rng);
  return m;
}

inline Motor random_rigid(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  const Vec3 axis(g(rng), g(rng), g(rng));
  const double angle = u(rng);
  const Vec3 t(g(rng), g(rng), g(rng));
  return make_motor(rotor_axis_angle(axis, angle), t);
}

}  // namespace selftest_detail

inline std::vector<SelftestResult> run_selftest(std::uint64_t seed = 1) {
  using namespace selftest_detail;
  std::mt19937_64 rng(seed);
  std::vector<SelftestResult> out;
  auto check = [&](const std::string& name, double tol, const std::function<double()>& worst_of) {
    const double w = worst_of();
    out.push_back({name, std::isfinite(w) && w <= tol, w, tol});
  };

  check("associativity", 1e-10, [&] {
    double w = 0.0;
    for (int i = 0; i < 200; ++i) {
      const MV a = random_mv(rng), b = random_mv(rng), c = random_mv(rng);
      const double scale = a.max_abs() * b.max_abs() * c.max_abs();
      w = std::max(w, ((a * b) * c - a * (b * c)).max_abs() / scale);
    }
    return w;
  });
  check("null embedding", 1e-12, [&] {
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    double w = 0.0;
    for (int i = 0; i < 200; ++i) {
      const Vec3 x(u(rng), u(rng), u(rng));
      w = std::max(w, std::abs(norm_sq(embed(x))) / (1.0 + std::pow(x.squaredNorm(), 2)));
    }
    return w;
  });
  check("coefficient transport", 1e-12, [&] {
    double w = 0.0;
    for (int i = 0; i < 200; ++i) {
      const MV p = random_mv(rng);
      const Motor m = random_rigid(rng);
      const MV q = apply_versor(m.versor(), p);
      const CoeffQuad cp = coefficients(p), cq = coefficients(q);
      const CoeffQuad f = coeffs_under_motor(cp, m, Direction::forward);
      const CoeffQuad b = coeffs_under_motor(cq, m, Direction::inverse);
      const double scale = std::max(1.0, q.max_abs());
      for (const auto& [x, y] : {std::pair{f.c1, cq.c1}, {f.c2, cq.c2}, {f.c3, cq.c3}, {f.c4, cq.c4},
                                 {b.c1, cp.c1}, {b.c2, cp.c2}, {b.c3, cp.c3}, {b.c4, cp.c4}})
        w = std::max(w, (x - y).max_abs() / scale);
    }
    return w;
  });
  // Worst of RRE / 1e-6 deg and RTE / 1e-8.
  check("noise-free cga-evd recovery", 1.0, [&] {
    double w = 0.0;
    for (int i = 0; i < 5; ++i) {
      const PointCloud src = synth_cloud(50, rng(), Shape::uniform_cube);
      const Motor truth = random_motor(std::nullopt, 1.0, rng());
      const PointCloud dst = perturb(src, truth, 0.0, rng(), true);
      const PoseErrors pe = pose_errors(register_cga_evd(src.points, dst.points).motor, truth);
      w = std::max({w, pe.rre_deg / 1e-6, pe.rte / 1e-8});
    }
    return w;
  });
  return out;
}

}  // namespace cgareg
