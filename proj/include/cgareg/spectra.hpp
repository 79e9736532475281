#pragma once

// Multilinear cloud map F(Z) = sum_i X_i Z X_i and its per-grade eigenmultivectors.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "cgareg/cga.hpp"
#include "cgareg/errors.hpp"
#include "cgareg/ga.hpp"

namespace cgareg {

struct SpectraOptions {
  double eps_eig = 1e-8;    // residual bound, relative to ||M||
  double delta_gap = 1e-6;  // relative eigenvalue gap below which a cluster is degenerate
  double eps_ref = 1e-9;    // reference-product bound for normalization
  double imag_tol = 1e-8;   // |Im lambda| bound, relative to ||M||
};

namespace detail {

// Fixed-shape pairwise reduction so the result does not depend on thread
// count or call site, only on the order of the input.
template <class T, class Leaf>
T pairwise_sum(std::size_t lo, std::size_t hi, const Leaf& leaf) {
  if (hi - lo <= 8) {
    T acc = leaf(lo);
    for (std::size_t i = lo + 1; i < hi; ++i) acc += leaf(i);
    return acc;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  T left = pairwise_sum<T>(lo, mid, leaf);
  left += pairwise_sum<T>(mid, hi, leaf);
  return left;
}

}  // namespace detail

class MultilinearMap {
 public:
  using Moments = Eigen::Matrix<double, 5, 5>;

  explicit MultilinearMap(std::vector<MV> cloud) : cloud_(std::move(cloud)) {
    if (cloud_.empty()) throw UsageError("build_cloud_map: empty cloud");
    vector_cloud_ = std::all_of(cloud_.begin(), cloud_.end(),
                                [](const MV& x) { return grade(x, 1) == x; });
    if (vector_cloud_) {
      // For X = sum_a x_a e_a: F(Z) = sum_ab S_ab e_a Z e_b with S = sum_i x x^T.
      moments_ = detail::pairwise_sum<Moments>(0, cloud_.size(), [&](std::size_t i) {
        Eigen::Matrix<double, 5, 1> x;
        for (int a = 0; a < 5; ++a) x[a] = cloud_[i][BladeIndex{1} << a];
        return Moments(x * x.transpose());
      });
    }
  }

  const std::vector<MV>& cloud() const noexcept { return cloud_; }
  bool is_vector_cloud() const noexcept { return vector_cloud_; }
  const Moments& moments() const noexcept { return moments_; }

  MV apply(const MV& z) const {
    if (!vector_cloud_) {
      return detail::pairwise_sum<MV>(0, cloud_.size(),
                                      [&](std::size_t i) { return cloud_[i] * z * cloud_[i]; });
    }
    MV out;
    for (int a = 0; a < 5; ++a) {
      const MV ea = MV::basis_vector(a);
      const MV left = ea * z;
      for (int b = 0; b < 5; ++b) {
        const double s = moments_(a, b);
        if (s == 0.0) continue;
        out += s * (left * MV::basis_vector(b));
      }
    }
    return out;
  }

 private:
  std::vector<MV> cloud_;
  bool vector_cloud_ = false;
  Moments moments_ = Moments::Zero();
};

inline MultilinearMap build_cloud_map(std::vector<MV> cloud) { return MultilinearMap(std::move(cloud)); }

inline std::vector<MV> embed_cloud(const std::vector<Vec3>& points) {
  std::vector<MV> out;
  out.reserve(points.size());
  for (const Vec3& p : points) out.push_back(embed(p));
  return out;
}

inline void check_supported_grade(int k) {
  if (k != 1 && k != 2) throw UsageError("only grades 1 and 2 are decomposed, got " + std::to_string(k));
}

// M(J, K) = <F(e_J) e^K> over grade-k blades in lexicographic order, so that
// F(sum_J p_J e_J) has coefficient vector M^T p.
inline Eigen::MatrixXd grade_matrix(const MultilinearMap& f, int k) {
  check_supported_grade(k);
  const auto blades = blades_of_grade<G41>(k);
  const auto n = static_cast<Eigen::Index>(blades.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const MV fj = f.apply(MV::blade(blades[static_cast<std::size_t>(j)]));
    for (Eigen::Index kk = 0; kk < n; ++kk)
      m(j, kk) = scalar_product(fj, reciprocal_blade<G41>(blades[static_cast<std::size_t>(kk)]));
  }
  return m;
}

struct EigenPair {
  double lambda = 0.0;
  MV p;
  int rank = 0;              // position in the sorted list of real eigenpairs
  bool degenerate = false;   // member of a cluster with relative gap < delta_gap
  double scale = 1.0;        // s applied by normalization (P <- P / s)
  double residual = 0.0;     // ||F(P) - lambda P|| / ||M|| before normalization
};

struct EigenBasis {
  int grade = 0;
  std::vector<EigenPair> pairs;    // retained, sorted by descending lambda
  std::vector<EigenPair> dropped;  // removed during normalization
  int complex_rejected = 0;
  int residual_rejected = 0;
  std::vector<std::string> diagnostics;

  std::vector<double> lambdas() const {
    std::vector<double> out;
    for (const auto& p : pairs) out.push_back(p.lambda);
    return out;
  }
};

inline EigenBasis eigen_grade(const MultilinearMap& f, int k, const SpectraOptions& opt = {}) {
  const auto blades = blades_of_grade<G41>(k);
  const Eigen::MatrixXd m = grade_matrix(f, k);
  const double m_norm = std::max(m.norm(), 1e-300);

  Eigen::EigenSolver<Eigen::MatrixXd> solver(m.transpose(), true);
  if (solver.info() != Eigen::Success) throw DegenerateSpectrumError("eigensolver did not converge");

  EigenBasis basis;
  basis.grade = k;
  const auto& values = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();
  for (Eigen::Index c = 0; c < values.size(); ++c) {
    if (std::abs(values[c].imag()) > opt.imag_tol * m_norm) {
      ++basis.complex_rejected;
      continue;
    }
    Eigen::VectorXcd v = vectors.col(c);
    Eigen::Index big = 0;
    v.cwiseAbs().maxCoeff(&big);
    v *= std::conj(v[big]) / std::abs(v[big]);
    Eigen::VectorXd re = v.real();
    re.normalize();

    EigenPair pair;
    pair.lambda = values[c].real();
    for (Eigen::Index j = 0; j < re.size(); ++j) pair.p[blades[static_cast<std::size_t>(j)]] = re[j];
    pair.residual = (f.apply(pair.p) - pair.lambda * pair.p).coeff_norm() / m_norm;
    if (pair.residual > opt.eps_eig) {
      ++basis.residual_rejected;
      continue;
    }
    basis.pairs.push_back(pair);
  }
  if (basis.complex_rejected > 0)
    basis.diagnostics.push_back("grade " + std::to_string(k) + ": " +
                                std::to_string(basis.complex_rejected) + " complex eigenvalue(s) rejected");
  if (basis.residual_rejected > 0)
    basis.diagnostics.push_back("grade " + std::to_string(k) + ": " +
                                std::to_string(basis.residual_rejected) + " eigenpair(s) failed the residual check");
  if (basis.pairs.size() < 2)
    throw DegenerateSpectrumError("grade " + std::to_string(k) + ": fewer than 2 usable real eigenpairs");

  std::stable_sort(basis.pairs.begin(), basis.pairs.end(),
                   [](const EigenPair& a, const EigenPair& b) { return a.lambda > b.lambda; });
  double lam_max = 0.0;
  for (const auto& p : basis.pairs) lam_max = std::max(lam_max, std::abs(p.lambda));
  for (std::size_t i = 0; i < basis.pairs.size(); ++i) {
    basis.pairs[i].rank = static_cast<int>(i);
    if (i + 1 < basis.pairs.size() &&
        basis.pairs[i].lambda - basis.pairs[i + 1].lambda < opt.delta_gap * lam_max) {
      basis.pairs[i].degenerate = true;
      basis.pairs[i + 1].degenerate = true;
    }
  }
  const auto n_degenerate = std::count_if(basis.pairs.begin(), basis.pairs.end(),
                                          [](const EigenPair& p) { return p.degenerate; });
  if (n_degenerate > 0)
    basis.diagnostics.push_back("grade " + std::to_string(k) + ": " + std::to_string(n_degenerate) +
                                " eigenpair(s) in degenerate clusters");
  return basis;
}

// (1 + i)(e_inf + Xbar ^ e_inf) with Xbar the cloud mean.
inline MV reference_multivector(const std::vector<MV>& cloud) {
  if (cloud.empty()) throw UsageError("reference_multivector: empty cloud");
  const MV mean = detail::pairwise_sum<MV>(0, cloud.size(), [&](std::size_t i) { return cloud[i]; }) /
                  static_cast<double>(cloud.size());
  return (1.0 + pseudoscalar5()) * (e_inf() + outer(mean, e_inf()));
}

inline EigenBasis normalize_eigenbasis(EigenBasis basis, const MV& p_ref, const SpectraOptions& opt = {}) {
  std::vector<EigenPair> kept;
  const double ref_norm = p_ref.coeff_norm();
  for (auto& pair : basis.pairs) {
    const double s = scalar_product(pair.p, p_ref);
    if (!(std::abs(s) >= opt.eps_ref * pair.p.coeff_norm() * ref_norm)) {
      basis.diagnostics.push_back("grade " + std::to_string(basis.grade) + ": eigenpair rank " +
                                  std::to_string(pair.rank) + " dropped (<P P_ref> vanishes)");
      basis.dropped.push_back(pair);
      continue;
    }
    pair.p /= s;
    pair.scale = s;
    kept.push_back(pair);
  }
  basis.pairs = std::move(kept);
  if (basis.pairs.empty())
    throw NormalizationError("grade " + std::to_string(basis.grade) + ": every eigenpair was dropped");
  return basis;
}

}  // namespace cgareg
