#pragma once

// Synthetic data, seeded perturbation and the (dataset x sigma x trial) benchmark.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "cgareg/cga.hpp"
#include "cgareg/errors.hpp"
#include "cgareg/ply.hpp"
#include "cgareg/register.hpp"

namespace cgareg {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class SeedRole : std::uint64_t { cell = 0, motor = 1, noise = 2 };

// Counter-based split: every index is folded in through mix64 so that each
// (dataset, sigma, trial) cell owns an independent stream.
constexpr std::uint64_t child_seed(std::uint64_t master, std::uint64_t dataset, std::uint64_t sigma,
                                   std::uint64_t trial) noexcept {
  std::uint64_t s = mix64(master);
  s = mix64(s ^ (dataset + 0x01));
  s = mix64(s ^ (sigma + 0x0100));
  s = mix64(s ^ (trial + 0x010000));
  return s;
}

constexpr std::uint64_t role_seed(std::uint64_t cell, SeedRole role) noexcept {
  return mix64(cell ^ (0xd1b54a32d192ed03ULL * (static_cast<std::uint64_t>(role) + 1)));
}

enum class Shape { uniform_cube, gaussian_blob };

inline Shape parse_shape(const std::string& s) {
  if (s == "uniform-cube") return Shape::uniform_cube;
  if (s == "gaussian-blob") return Shape::gaussian_blob;
  throw UsageError("unknown shape '" + s + "' (expected uniform-cube or gaussian-blob)");
}

// uniform-cube: points in [0,1]^3. gaussian-blob: zero mean, per-axis
// standard deviations 1, 0.5, 0.25 (distinct principal moments).
inline PointCloud synth_cloud(std::size_t n, std::uint64_t seed, Shape shape) {
  if (n == 0) throw UsageError("synth_cloud: n must be >= 1");
  std::mt19937_64 rng(seed);
  PointCloud c{shape == Shape::uniform_cube ? "uniform-cube" : "gaussian-blob", {}};
  c.points.reserve(n);
  if (shape == Shape::uniform_cube) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = u(rng), y = u(rng), z = u(rng);
      c.points.emplace_back(x, y, z);
    }
  } else {
    std::normal_distribution<double> g(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = g(rng), y = 0.5 * g(rng), z = 0.25 * g(rng);
      c.points.emplace_back(x, y, z);
    }
  }
  return c;
}

// Fixed angle in degrees, or uniform in [0, 360) when empty.
using ThetaSpec = std::optional<double>;

inline Vec3 random_unit_vector(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  while (true) {
    const double x = g(rng), y = g(rng), z = g(rng);
    const Vec3 v(x, y, z);
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

inline Motor random_motor(ThetaSpec theta_deg, double t_mag, std::uint64_t seed) {
  if (!(t_mag >= 0.0)) throw UsageError("random_motor: t_mag must be >= 0");
  std::mt19937_64 rng(seed);
  const Vec3 axis = random_unit_vector(rng);
  double deg = 0.0;
  if (theta_deg) {
    deg = *theta_deg;
  } else {
    std::uniform_real_distribution<double> u(0.0, 360.0);
    deg = u(rng);
  }
  const Vec3 dir = random_unit_vector(rng);
  return make_motor(rotor_axis_angle(axis, deg * std::numbers::pi / 180.0), t_mag * dir);
}

// y_i = R(x_i) + t + n_i with n_i ~ N(0, sigma^2 I), optionally shuffled.
inline PointCloud perturb(const PointCloud& cloud, const Motor& m, double sigma, std::uint64_t seed,
                          bool shuffle) {
  if (!(sigma >= 0.0)) throw UsageError("perturb: sigma must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const Eigen::Matrix3d r = [&] {
    Eigen::Matrix3d out;
    for (int k = 0; k < 3; ++k) out.col(k) = rotate(m.rotor, Vec3(Vec3::Unit(k)));
    return out;
  }();
  PointCloud out{cloud.name, {}};
  out.points.reserve(cloud.points.size());
  for (const Vec3& x : cloud.points) {
    Vec3 y = r * x + m.t;
    if (sigma > 0.0) {
      const double a = g(rng), b = g(rng), c = g(rng);
      y += sigma * Vec3(a, b, c);
    }
    out.points.push_back(y);
  }
  if (shuffle) std::shuffle(out.points.begin(), out.points.end(), rng);
  return out;
}

struct BenchConfig {
  std::vector<std::string> datasets;
  std::vector<double> sigmas;
  int trials = 10;
  ThetaSpec theta_deg = 5.0;
  double t_mag = 0.01;
  std::uint64_t seed = 0;
  Method method = Method::cga_evd;
  bool shuffle = true;
  RegisterConfig reg;
};

struct BenchRecord {
  std::string method;
  std::string dataset;
  double sigma = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double rre_deg = std::numeric_limits<double>::quiet_NaN();
  double rte = std::numeric_limits<double>::quiet_NaN();
  double runtime_s = 0.0;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
  friend bool operator==(const BenchRecord&, const BenchRecord&) = default;
};

inline void validate(const BenchConfig& cfg) {
  if (cfg.trials < 1) throw UsageError("trials must be >= 1");
  if (cfg.sigmas.empty()) throw UsageError("at least one sigma is required");
  for (double s : cfg.sigmas)
    if (!(s >= 0.0)) throw UsageError("sigmas must be >= 0");
  if (!(cfg.t_mag >= 0.0)) throw UsageError("t-mag must be >= 0");
}

inline BenchRecord run_cell(const PointCloud& cloud, const BenchConfig& cfg, std::size_t dataset_idx,
                            std::size_t sigma_idx, int trial) {
  BenchRecord rec;
  rec.method = method_name(cfg.method);
  rec.dataset = cloud.name;
  rec.sigma = cfg.sigmas[sigma_idx];
  rec.trial = trial;
  rec.seed = child_seed(cfg.seed, dataset_idx, sigma_idx, static_cast<std::uint64_t>(trial));
  const Motor truth = random_motor(cfg.theta_deg, cfg.t_mag, role_seed(rec.seed, SeedRole::motor));
  const PointCloud target = perturb(cloud, truth, rec.sigma, role_seed(rec.seed, SeedRole::noise), cfg.shuffle);
  const auto start = std::chrono::steady_clock::now();
  try {
    const RegistrationResult res = register_clouds(cfg.method, cloud.points, target.points, cfg.reg);
    const PoseErrors pe = pose_errors(res.motor, truth);
    rec.rre_deg = pe.rre_deg;
    rec.rte = pe.rte;
  } catch (const NumericalError& e) {
    rec.error = e.what();
  }
  rec.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

inline void sort_records(std::vector<BenchRecord>& recs) {
  std::sort(recs.begin(), recs.end(), [](const BenchRecord& a, const BenchRecord& b) {
    return std::tie(a.method, a.dataset, a.sigma, a.trial) < std::tie(b.method, b.dataset, b.sigma, b.trial);
  });
}

inline std::vector<BenchRecord> run_benchmark(const BenchConfig& cfg, const std::vector<PointCloud>& clouds) {
  validate(cfg);
  std::vector<BenchRecord> recs;
  for (std::size_t d = 0; d < clouds.size(); ++d)
    for (std::size_t s = 0; s < cfg.sigmas.size(); ++s)
      for (int t = 0; t < cfg.trials; ++t) recs.push_back(run_cell(clouds[d], cfg, d, s, t));
  sort_records(recs);
  return recs;
}

inline std::vector<BenchRecord> run_benchmark(const BenchConfig& cfg) {
  validate(cfg);
  if (cfg.datasets.empty()) throw UsageError("at least one dataset is required");
  std::vector<PointCloud> clouds;
  for (const auto& path : cfg.datasets) clouds.push_back(load_ply(path));
  return run_benchmark(cfg, clouds);
}

struct SummaryRow {
  std::string method, dataset;
  double sigma = 0.0;
  int trials = 0;
  int failures = 0;
  double mean_rre_deg = std::numeric_limits<double>::quiet_NaN();
  double mean_rte = std::numeric_limits<double>::quiet_NaN();
  double mean_runtime_s = std::numeric_limits<double>::quiet_NaN();
};

// Arithmetic means per (method, dataset, sigma) over successful trials.
inline std::vector<SummaryRow> summarize(const std::vector<BenchRecord>& recs) {
  std::map<std::tuple<std::string, std::string, double>, std::vector<const BenchRecord*>> groups;
  for (const auto& r : recs) groups[{r.method, r.dataset, r.sigma}].push_back(&r);
  std::vector<SummaryRow> out;
  for (const auto& [key, rs] : groups) {
    SummaryRow row{std::get<0>(key), std::get<1>(key), std::get<2>(key)};
    row.trials = static_cast<int>(rs.size());
    double a = 0.0, b = 0.0, c = 0.0;
    int ok = 0;
    for (const auto* r : rs) {
      if (!r->ok()) {
        ++row.failures;
        continue;
      }
      a += r->rre_deg, b += r->rte, c += r->runtime_s;
      ++ok;
    }
    if (ok > 0) row.mean_rre_deg = a / ok, row.mean_rte = b / ok, row.mean_runtime_s = c / ok;
    out.push_back(row);
  }
  return out;
}

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string records_csv(const std::vector<BenchRecord>& recs) {
  std::string s = "method,dataset,sigma,trial,seed,rre_deg,rte,runtime_s\n";
  for (const auto& r : recs) {
    s += r.method + "," + r.dataset + "," + format_g17(r.sigma) + "," + std::to_string(r.trial) + "," +
         std::to_string(r.seed) + "," + format_g17(r.rre_deg) + "," + format_g17(r.rte) + "," +
         format_g17(r.runtime_s) + "\n";
  }
  return s;
}

inline nlohmann::json num_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

inline double num_from(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

inline nlohmann::json records_json(const std::vector<BenchRecord>& recs) {
  nlohmann::json out;
  out["records"] = nlohmann::json::array();
  for (const auto& r : recs) {
    nlohmann::json j = {{"method", r.method}, {"dataset", r.dataset}, {"sigma", r.sigma},
                        {"trial", r.trial},   {"seed", r.seed},       {"rre_deg", num_or_null(r.rre_deg)},
                        {"rte", num_or_null(r.rte)}, {"runtime_s", r.runtime_s}};
    if (!r.ok()) j["error"] = r.error;
    out["records"].push_back(std::move(j));
  }
  out["summary"] = nlohmann::json::array();
  for (const auto& s : summarize(recs)) {
    out["summary"].push_back({{"method", s.method},
                              {"dataset", s.dataset},
                              {"sigma", s.sigma},
                              {"trials", s.trials},
                              {"failures", s.failures},
                              {"mean_rre_deg", num_or_null(s.mean_rre_deg)},
                              {"mean_rte", num_or_null(s.mean_rte)},
                              {"mean_runtime_s", num_or_null(s.mean_runtime_s)}});
  }
  return out;
}

inline std::vector<BenchRecord> records_from_json(const nlohmann::json& j) {
  std::vector<BenchRecord> out;
  for (const auto& r : j.at("records")) {
    BenchRecord rec;
    rec.method = r.at("method").get<std::string>();
    rec.dataset = r.at("dataset").get<std::string>();
    rec.sigma = r.at("sigma").get<double>();
    rec.trial = r.at("trial").get<int>();
    rec.seed = r.at("seed").get<std::uint64_t>();
    rec.rre_deg = num_from(r.at("rre_deg"));
    rec.rte = num_from(r.at("rte"));
    rec.runtime_s = r.at("runtime_s").get<double>();
    if (r.contains("error")) rec.error = r.at("error").get<std::string>();
    out.push_back(std::move(rec));
  }
  return out;
}

enum class Format { csv, json };

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw UsageError("unknown format '" + s + "' (expected csv or json)");
}

inline void emit_results(const std::vector<BenchRecord>& recs, Format format, const std::string& path) {
  write_file(path, format == Format::csv ? records_csv(recs) : records_json(recs).dump(2) + "\n");
}

}  // namespace cgareg
