#pragma once

// Motor estimation from corresponded multivectors, the CGA-EVD pipeline, the
// VGA-EVD baseline, pose errors and primitive export.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "cgareg/cga.hpp"
#include "cgareg/errors.hpp"
#include "cgareg/ga.hpp"
#include "cgareg/spectra.hpp"

namespace cgareg {

struct RotorEstimate {
  MV rotor{1.0};
  double lambda = 0.0;
};

// 4x4 matrix of R -> 1/2 <sum B R A^dagger + B^dagger R A>_{0,2} on the rotor basis
// {1, e12, e13, e23}, which is orthonormal under <X Y^dagger>.
inline Eigen::Matrix4d rotor_matrix(const std::vector<std::pair<MV, MV>>& pairs) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  for (int k = 0; k < 4; ++k) {
    const MV rk = MV::blade(kRotorBasis[static_cast<std::size_t>(k)]);
    MV l;
    for (const auto& [a, b] : pairs) l += b * rk * reverse(a) + reverse(b) * rk * a;
    for (int j = 0; j < 4; ++j)
      m(j, k) = 0.5 * scalar_product(l, reverse(MV::blade(kRotorBasis[static_cast<std::size_t>(j)])));
  }
  return m;
}

// Eigenrotator with the largest eigenvalue of rotor_matrix.
inline RotorEstimate estimate_rotor(const std::vector<std::pair<MV, MV>>& pairs) {
  double scale = 0.0;
  int nonzero = 0;
  for (const auto& [a, b] : pairs) {
    if (!is_euclidean(a) || !is_euclidean(b))
      throw UsageError("estimate_rotor: inputs must lie in G3");
    const double na = norm_sq(a);
    if (na > 0.0) ++nonzero;
    scale += na + norm_sq(b);
  }
  if (nonzero < 2) throw AmbiguousRotationError("estimate_rotor: need at least 2 pairs with non-zero A");

  const Eigen::Matrix4d m = rotor_matrix(pairs);
  const Eigen::Matrix4d sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> solver(sym);
  if (solver.info() != Eigen::Success) throw AmbiguousRotationError("estimate_rotor: eigensolver failed");
  const auto& ev = solver.eigenvalues();  // ascending
  if (ev[3] - ev[2] <= 1e-9 * std::max(scale, 1e-300))
    throw AmbiguousRotationError("estimate_rotor: top eigenvalues coincide, rotation is not determined");
  Eigen::Vector4d v = solver.eigenvectors().col(3).normalized();
  MV r = rotor_from_coeffs({v[0], v[1], v[2], v[3]});
  return {canonicalize_rotor(r), ev[3]};
}

inline void check_single_grade(const MV& x, int k) {
  const double tol = 1e-10 * std::max(x.max_abs(), 1e-300);
  const std::uint32_t g = x.grades_present(tol);
  if (g != 0 && g != (std::uint32_t{1} << k)) throw UsageError("translation pair is not of a single grade");
}

inline int single_grade(const MV& x) {
  const std::uint32_t g = x.grades_present(1e-10 * std::max(x.max_abs(), 1e-300));
  if (std::popcount(g) != 1) throw UsageError("translation input must be of a single grade");
  return std::countr_zero(g);
}

// Least-squares t over pairs (S_i = R(P_i), Q_i):
// t = s_N^{-1} sum <(C1(S)+C1(Q)) (C3(Q)+C4(Q)-C3(S)-C4(S))^dagger>_1,
// s_N = sum ||C1(S)||^2 + ||C1(Q)||^2.
inline Vec3 estimate_translation_lsq(const std::vector<std::pair<MV, MV>>& pairs, double eps = 1e-12) {
  MV acc;
  double s_n = 0.0;
  for (const auto& [s_raw, q_raw] : pairs) {
    const int k = single_grade(q_raw.max_abs() > 0.0 ? q_raw : s_raw);
    if (k < 1) throw UsageError("translation pairs must have grade > 0");
    check_single_grade(s_raw, k);
    check_single_grade(q_raw, k);
    const CoeffQuad s = coefficients(grade(s_raw, k));
    const CoeffQuad q = coefficients(grade(q_raw, k));
    acc += grade((s.c1 + q.c1) * reverse(q.c3 + q.c4 - s.c3 - s.c4), 1);
    s_n += norm_sq(s.c1) + norm_sq(q.c1);
  }
  if (!(s_n > eps)) throw UndeterminedTranslationError("estimate_translation_lsq: s_N vanishes");
  return to_vec3(acc / s_n);
}

// t = <(C3(Q)+C4(Q) - C3(S) - C4(S)) C1(Q)^{-1}>_1 with S = R(P).
inline Vec3 estimate_translation_exact(const MV& s_mv, const MV& q_mv) {
  const CoeffQuad s = coefficients(s_mv);
  const CoeffQuad q = coefficients(q_mv);
  MV q1_inv;
  try {
    q1_inv = inverse_simple(q.c1);
  } catch (const NumericalError& e) {
    throw ExactTranslationUnavailable(std::string("estimate_translation_exact: ") + e.what());
  }
  return to_vec3(grade((q.c3 + q.c4 - s.c3 - s.c4) * q1_inv, 1));
}

enum class Method { cga_evd, vga_evd };

inline std::string method_name(Method m) { return m == Method::cga_evd ? "cga-evd" : "vga-evd"; }

inline Method parse_method(const std::string& s) {
  if (s == "cga-evd") return Method::cga_evd;
  if (s == "vga-evd") return Method::vga_evd;
  throw UsageError("unknown method '" + s + "' (expected cga-evd or vga-evd)");
}

enum class TranslationMode {
  exact,  // single-pair formula on the most spectrally isolated grade-1 pair
  lsq,    // least squares over every corresponded pair of grades 1 and 2
};

inline TranslationMode parse_translation_mode(const std::string& s) {
  if (s == "exact") return TranslationMode::exact;
  if (s == "lsq") return TranslationMode::lsq;
  throw UsageError("unknown translation mode '" + s + "' (expected exact or lsq)");
}

struct RegisterConfig {
  SpectraOptions spectra;
  TranslationMode translation = TranslationMode::exact;
};

struct RegistrationResult {
  Motor motor;
  std::vector<std::vector<double>> spectra_source;  // [grade-1 lambdas, grade-2 lambdas]
  std::vector<std::vector<double>> spectra_target;
  double rotor_eigenvalue = 0.0;
  double residual = 0.0;
  std::vector<std::string> flags;
  double runtime_s = 0.0;
  int rotor_pairs = 0;
  int translation_pairs = 0;
};

inline void check_cloud(const std::vector<Vec3>& pts, const char* which) {
  if (pts.size() < 4)
    throw UsageError(std::string(which) + " cloud needs at least 4 points, got " + std::to_string(pts.size()));
  for (const Vec3& p : pts)
    if (!p.allFinite()) throw UsageError(std::string(which) + " cloud has non-finite coordinates");
}

// Normalized grade-1 and grade-2 eigenbases of an embedded point cloud.
struct CloudSpectra {
  EigenBasis grade1;
  EigenBasis grade2;
  MV reference;
};

inline CloudSpectra cloud_spectra(const std::vector<Vec3>& pts, const SpectraOptions& opt = {}) {
  const std::vector<MV> x = embed_cloud(pts);
  const MultilinearMap f(x);
  const MV ref = reference_multivector(x);
  return {normalize_eigenbasis(eigen_grade(f, 1, opt), ref, opt),
          normalize_eigenbasis(eigen_grade(f, 2, opt), ref, opt), ref};
}

inline std::vector<double> all_lambdas(const EigenBasis& b) {
  std::vector<EigenPair> all = b.pairs;
  all.insert(all.end(), b.dropped.begin(), b.dropped.end());
  std::sort(all.begin(), all.end(), [](const EigenPair& a, const EigenPair& c) { return a.rank < c.rank; });
  std::vector<double> out;
  for (const auto& p : all) out.push_back(p.lambda);
  return out;
}

// Distance from lambda[rank] to its nearest neighbour, relative to max |lambda|.
inline double relative_gap(const std::vector<double>& lambdas, int rank) {
  double lam_max = 0.0, gap = std::numeric_limits<double>::infinity();
  for (double l : lambdas) lam_max = std::max(lam_max, std::abs(l));
  const auto r = static_cast<std::size_t>(rank);
  if (r > 0) gap = std::min(gap, lambdas[r - 1] - lambdas[r]);
  if (r + 1 < lambdas.size()) gap = std::min(gap, lambdas[r] - lambdas[r + 1]);
  return lam_max > 0.0 ? gap / lam_max : 0.0;
}

// Pairs eigenmultivectors of two bases by descending-eigenvalue rank. When the
// numbers of real eigenpairs differ, falls back to mutual-nearest eigenvalues.
inline std::vector<std::pair<const EigenPair*, const EigenPair*>> correspond(
    const EigenBasis& src, const EigenBasis& dst, std::vector<std::string>& flags) {
  std::vector<std::pair<const EigenPair*, const EigenPair*>> out;
  const std::size_t n_src = src.pairs.size() + src.dropped.size();
  const std::size_t n_dst = dst.pairs.size() + dst.dropped.size();
  if (n_src == n_dst) {
    for (const auto& a : src.pairs) {
      if (a.degenerate) continue;
      for (const auto& b : dst.pairs)
        if (b.rank == a.rank && !b.degenerate) out.emplace_back(&a, &b);
    }
    return out;
  }
  flags.push_back("grade " + std::to_string(src.grade) +
                  ": real eigenpair counts differ, matched by nearest eigenvalue");
  auto nearest = [](const EigenPair& x, const EigenBasis& other) -> const EigenPair* {
    const EigenPair* best = nullptr;
    for (const auto& y : other.pairs)
      if (!best || std::abs(y.lambda - x.lambda) < std::abs(best->lambda - x.lambda)) best = &y;
    return best;
  };
  for (const auto& a : src.pairs) {
    if (a.degenerate) continue;
    const EigenPair* b = nearest(a, dst);
    if (b && !b->degenerate && nearest(*b, src) == &a) out.emplace_back(&a, b);
  }
  return out;
}

inline Vec3 centroid(const std::vector<Vec3>& pts) {
  return detail::pairwise_sum<Vec3>(0, pts.size(), [&](std::size_t i) { return pts[i]; }) /
         static_cast<double>(pts.size());
}

inline std::vector<Vec3> shifted(const std::vector<Vec3>& pts, const Vec3& c) {
  std::vector<Vec3> out;
  out.reserve(pts.size());
  for (const Vec3& p : pts) out.push_back(p - c);
  return out;
}

// Both clouds are centred before embedding. The estimator is motor-equivariant,
// so this only conjugates the result by known translations, but it keeps the
// e_inf coefficients (|x|^2 / 2) small when the clouds sit far from the origin.
inline RegistrationResult register_cga_evd(const std::vector<Vec3>& source, const std::vector<Vec3>& target,
                                           const RegisterConfig& cfg = {}) {
  const auto start = std::chrono::steady_clock::now();
  check_cloud(source, "source");
  check_cloud(target, "target");

  const Vec3 cx = centroid(source), cy = centroid(target);
  const CloudSpectra sp = cloud_spectra(shifted(source, cx), cfg.spectra);
  const CloudSpectra sq = cloud_spectra(shifted(target, cy), cfg.spectra);

  RegistrationResult res;
  res.spectra_source = {all_lambdas(sp.grade1), all_lambdas(sp.grade2)};
  res.spectra_target = {all_lambdas(sq.grade1), all_lambdas(sq.grade2)};
  for (const EigenBasis* b : {&sp.grade1, &sp.grade2})
    for (const auto& d : b->diagnostics) res.flags.push_back("source " + d);
  for (const EigenBasis* b : {&sq.grade1, &sq.grade2})
    for (const auto& d : b->diagnostics) res.flags.push_back("target " + d);

  const auto pairs1 = correspond(sp.grade1, sq.grade1, res.flags);
  const auto pairs2 = correspond(sp.grade2, sq.grade2, res.flags);

  std::vector<std::pair<MV, MV>> rot_in;
  for (const auto& [p, q] : pairs2) rot_in.emplace_back(coefficients(p->p).c1, coefficients(q->p).c1);
  res.rotor_pairs = static_cast<int>(rot_in.size());
  const RotorEstimate rot = estimate_rotor(rot_in);
  res.rotor_eigenvalue = rot.lambda;

  std::vector<std::pair<MV, MV>> trans_in;
  for (const auto* ps : {&pairs1, &pairs2})
    for (const auto& [p, q] : *ps) trans_in.emplace_back(rotate(rot.rotor, p->p), q->p);
  res.translation_pairs = static_cast<int>(trans_in.size());

  Vec3 t = Vec3::Zero();
  bool have_t = false;
  if (cfg.translation == TranslationMode::exact) {
    // Perturbation of an eigenvector scales with the inverse of its eigenvalue
    // gap, so the best isolated pair gives the steadiest single-pair estimate.
    // Grade-1 pairs first: their C1 is a scalar and always invertible.
    const std::size_t n1 = pairs1.size();
    const bool use_g1 = n1 > 0;
    const auto lam = all_lambdas(use_g1 ? sp.grade1 : sp.grade2);
    const std::pair<MV, MV>* best = nullptr;
    double best_gap = -1.0;
    for (std::size_t i = 0; i < (use_g1 ? n1 : pairs2.size()); ++i) {
      const EigenPair& p = use_g1 ? *pairs1[i].first : *pairs2[i].first;
      const double gap = relative_gap(lam, p.rank);
      if (gap > best_gap) best_gap = gap, best = &trans_in[use_g1 ? i : n1 + i];
    }
    if (best) {
      try {
        t = estimate_translation_exact(best->first, best->second);
        have_t = true;
      } catch (const ExactTranslationUnavailable& e) {
        res.flags.push_back(std::string("exact translation unavailable, used least squares: ") + e.what());
      }
    }
  }
  if (!have_t) t = estimate_translation_lsq(trans_in);

  const MV u = Motor{rot.rotor, t}.versor();
  res.motor = {rot.rotor, t + cy - rotate(rot.rotor, cx)};
  double acc = 0.0;
  for (const auto* ps : {&pairs1, &pairs2})
    for (const auto& [p, q] : *ps) acc += coeff_distance_sq(u * p->p * reverse(u), q->p);
  res.residual = trans_in.empty() ? 0.0 : std::max(0.0, acc / static_cast<double>(trans_in.size()));
  res.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

struct PrincipalFrame {
  Vec3 centroid;
  Eigen::Matrix3d axes;     // columns, descending variance
  Eigen::Vector3d moments;  // descending
  std::array<bool, 3> skew_tie{};
};

inline PrincipalFrame principal_frame(const std::vector<Vec3>& pts, double delta_gap) {
  const Vec3 c = centroid(pts);
  const Eigen::Matrix3d cov = detail::pairwise_sum<Eigen::Matrix3d>(0, pts.size(), [&](std::size_t i) {
    const Vec3 d = pts[i] - c;
    return Eigen::Matrix3d(d * d.transpose());
  });
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  const Eigen::Vector3d ev = solver.eigenvalues();  // ascending
  if (ev[1] - ev[0] < delta_gap * ev[2] || ev[2] - ev[1] < delta_gap * ev[2])
    throw DegenerateSpectrumError("vga-evd: near-isotropic covariance, principal axes are not unique");
  PrincipalFrame fr;
  fr.centroid = c;
  for (int k = 0; k < 3; ++k) {
    fr.axes.col(k) = solver.eigenvectors().col(2 - k);
    fr.moments[k] = ev[2 - k];
  }
  int ties = 0;
  for (int k = 0; k < 3; ++k) {
    const Vec3 a = fr.axes.col(k);
    double m3 = 0.0, abs3 = 0.0;
    for (const Vec3& p : pts) {
      const double s = (p - c).dot(a);
      m3 += s * s * s;
      abs3 += std::abs(s * s * s);
    }
    if (std::abs(m3) <= 1e-12 * abs3) {
      fr.skew_tie[static_cast<std::size_t>(k)] = true;
      ++ties;
    } else if (m3 < 0.0) {
      fr.axes.col(k) = -a;
    }
  }
  if (ties > 1) throw AmbiguousRotationError("vga-evd: axis signs undetermined (symmetric cloud)");
  for (int k = 0; k < 3; ++k) {
    if (!fr.skew_tie[static_cast<std::size_t>(k)]) continue;
    // Complete a right-handed frame from the two skew-signed axes.
    const Vec3 a = fr.axes.col((k + 1) % 3), b = fr.axes.col((k + 2) % 3);
    fr.axes.col(k) = a.cross(b);
  }
  return fr;
}

inline RegistrationResult register_vga_evd(const std::vector<Vec3>& source, const std::vector<Vec3>& target,
                                           const RegisterConfig& cfg = {}) {
  const auto start = std::chrono::steady_clock::now();
  check_cloud(source, "source");
  check_cloud(target, "target");
  const PrincipalFrame fx = principal_frame(source, cfg.spectra.delta_gap);
  const PrincipalFrame fy = principal_frame(target, cfg.spectra.delta_gap);

  std::vector<std::pair<MV, MV>> pairs;
  for (int k = 0; k < 3; ++k) pairs.emplace_back(vec(fx.axes.col(k)), vec(fy.axes.col(k)));
  const RotorEstimate rot = estimate_rotor(pairs);

  RegistrationResult res;
  res.spectra_source = {{fx.moments[0], fx.moments[1], fx.moments[2]}};
  res.spectra_target = {{fy.moments[0], fy.moments[1], fy.moments[2]}};
  for (int k = 0; k < 3; ++k) {
    if (fx.skew_tie[static_cast<std::size_t>(k)]) res.flags.push_back("source axis " + std::to_string(k) + " signed by handedness");
    if (fy.skew_tie[static_cast<std::size_t>(k)]) res.flags.push_back("target axis " + std::to_string(k) + " signed by handedness");
  }
  res.rotor_eigenvalue = rot.lambda;
  res.rotor_pairs = 3;
  res.motor = {rot.rotor, fy.centroid - rotate(rot.rotor, fx.centroid)};
  double acc = 0.0;
  const Eigen::Matrix3d rm = [&] {
    Eigen::Matrix3d r;
    for (int k = 0; k < 3; ++k) r.col(k) = rotate(rot.rotor, Vec3(Vec3::Unit(k)));
    return r;
  }();
  for (int k = 0; k < 3; ++k) acc += (rm * fx.axes.col(k) - fy.axes.col(k)).squaredNorm();
  res.residual = acc / 3.0;
  res.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

inline RegistrationResult register_clouds(Method method, const std::vector<Vec3>& source,
                                          const std::vector<Vec3>& target, const RegisterConfig& cfg = {}) {
  return method == Method::cga_evd ? register_cga_evd(source, target, cfg)
                                   : register_vga_evd(source, target, cfg);
}

struct PoseErrors {
  double rre_deg = 0.0;
  double rte = 0.0;
};

// RRE = 2 acos(|<R_est R_true^dagger>|) in degrees, evaluated as
// 2 atan2(|<D>_2|, |<D>_0|) with D = R_est R_true^dagger so that angles near
// zero keep full precision. RTE = ||t_est - t_true||.
inline PoseErrors pose_errors(const Motor& est, const Motor& truth) {
  const MV d = est.rotor * reverse(truth.rotor);
  const double biv = std::sqrt(d[blade::e12] * d[blade::e12] + d[blade::e13] * d[blade::e13] +
                               d[blade::e23] * d[blade::e23]);
  return {2.0 * std::atan2(biv, std::abs(d.scalar())) * 180.0 / std::numbers::pi, (est.t - truth.t).norm()};
}

enum class PrimitiveKind { sphere, circle_raw, arrow };

inline std::string primitive_kind_name(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::sphere: return "sphere";
    case PrimitiveKind::circle_raw: return "circle-raw";
    case PrimitiveKind::arrow: return "arrow";
  }
  return "?";
}

struct PrimitiveRecord {
  PrimitiveKind kind = PrimitiveKind::sphere;
  int grade = 1;
  int rank = 0;
  double lambda = 0.0;
  // sphere: cx, cy, cz, r_sq; circle-raw: 10 bivector coefficients in
  // blades_of_grade(2) order; arrow: x, y, z.
  std::vector<double> payload;
  bool degenerate = false;
  bool normalized = true;
};

inline std::vector<PrimitiveRecord> export_primitives(const EigenBasis& grade1, const EigenBasis& grade2) {
  std::vector<PrimitiveRecord> out;
  auto each = [](const EigenBasis& b, auto&& fn) {
    std::vector<std::pair<const EigenPair*, bool>> all;
    for (const auto& p : b.pairs) all.emplace_back(&p, true);
    for (const auto& p : b.dropped) all.emplace_back(&p, false);
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& c) { return a.first->rank < c.first->rank; });
    for (const auto& [p, normalized] : all) fn(*p, normalized);
  };
  each(grade1, [&](const EigenPair& p, bool normalized) {
    PrimitiveRecord rec{PrimitiveKind::sphere, 1, p.rank, p.lambda, {}, p.degenerate, normalized};
    try {
      const SphereParams s = dual_sphere_params(p.p);
      rec.payload = {s.center.x(), s.center.y(), s.center.z(), s.r_sq};
    } catch (const DegeneratePointError&) {
      rec.payload = {0.0, 0.0, 0.0, 0.0};
      rec.degenerate = true;
    }
    out.push_back(std::move(rec));
  });
  const auto blades2 = blades_of_grade<G41>(2);
  each(grade2, [&](const EigenPair& p, bool normalized) {
    PrimitiveRecord circ{PrimitiveKind::circle_raw, 2, p.rank, p.lambda, {}, p.degenerate, normalized};
    for (BladeIndex b : blades2) circ.payload.push_back(p.p[b]);
    out.push_back(std::move(circ));
    const Vec3 arrow = to_vec3(grade(coefficients(p.p).c1, 1));
    out.push_back({PrimitiveKind::arrow, 2, p.rank, p.lambda, {arrow.x(), arrow.y(), arrow.z()},
                   p.degenerate, normalized});
  });
  return out;
}

}  // namespace cgareg
