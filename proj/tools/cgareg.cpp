// cgareg command-line entry point.
// Exit codes: 0 success, 1 usage/input error, 2 numerical failure.

#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cgareg/cgareg.hpp"

namespace {

using namespace cgareg;
using nlohmann::json;

void emit_json(const json& j, const std::string& out) {
  const std::string text = j.dump(2) + "\n";
  if (out.empty()) std::cout << text;
  else write_file(out, text);
}

json result_json(const RegistrationResult& r, Method method) {
  const auto c = r.motor.rotor_coeffs();
  return {{"method", method_name(method)},
          {"rotor", {c[0], c[1], c[2], c[3]}},
          {"rotor_basis", {"1", "e12", "e13", "e23"}},
          {"t", {r.motor.t.x(), r.motor.t.y(), r.motor.t.z()}},
          {"spectra_source", r.spectra_source},
          {"spectra_target", r.spectra_target},
          {"rotor_eigenvalue", r.rotor_eigenvalue},
          {"residual", r.residual},
          {"flags", r.flags},
          {"runtime_s", r.runtime_s}};
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw UsageError("invalid number '" + item + "' in list");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("empty list");
  return out;
}

ThetaSpec parse_theta(const std::string& s) {
  if (s == "random") return std::nullopt;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw UsageError("--theta-deg expects a number or 'random'");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Correspondence-free rigid registration with conformal eigenmultivectors"};
  app.require_subcommand(1);

  std::string source, target, method = "cga-evd", out, translation = "exact";
  bool exact_translation = false;
  auto* reg = app.add_subcommand("register", "Register two PLY point clouds");
  reg->add_option("--source", source, "Source PLY")->required();
  reg->add_option("--target", target, "Target PLY")->required();
  reg->add_option("--method", method, "cga-evd or vga-evd");
  reg->add_option("--translation", translation, "exact (default) or lsq");
  reg->add_flag("--exact-translation", exact_translation, "Same as --translation exact");
  reg->add_option("--out", out, "Output JSON (stdout when omitted)");

  std::vector<std::string> datasets;
  std::string sigmas, theta = "5", format;
  int trials = 10;
  double t_mag = 0.01;
  std::uint64_t seed = 0;
  auto* bench = app.add_subcommand("bench", "Run the noise benchmark");
  bench->add_option("--dataset", datasets, "PLY dataset(s)")->required();
  bench->add_option("--sigmas", sigmas, "Comma-separated noise levels")->required();
  bench->add_option("--trials", trials, "Trials per cell");
  bench->add_option("--theta-deg", theta, "Rotation angle in degrees, or 'random'");
  bench->add_option("--t-mag", t_mag, "Translation magnitude");
  bench->add_option("--seed", seed, "Master seed");
  bench->add_option("--method", method, "cga-evd or vga-evd");
  bench->add_option("--translation", translation, "exact (default) or lsq");
  bench->add_option("--out", out, "Output file")->required();
  bench->add_option("--format", format, "csv or json (default: from extension, else csv)");

  std::size_t n = 0;
  std::string shape = "uniform-cube";
  auto* synth = app.add_subcommand("synth", "Write a synthetic point cloud");
  synth->add_option("--n", n, "Point count")->required();
  synth->add_option("--seed", seed, "Seed");
  synth->add_option("--shape", shape, "uniform-cube or gaussian-blob");
  synth->add_option("--out", out, "Output PLY")->required();

  auto* prims = app.add_subcommand("primitives", "Export eigenmultivector primitives");
  prims->add_option("--source", source, "Source PLY")->required();
  prims->add_option("--out", out, "Output JSON (stdout when omitted)");

  auto* self = app.add_subcommand("selftest", "Run built-in invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*reg) {
      const Method m = parse_method(method);
      RegisterConfig cfg;
      cfg.translation = exact_translation ? TranslationMode::exact : parse_translation_mode(translation);
      const PointCloud s = load_ply(source), t = load_ply(target);
      emit_json(result_json(register_clouds(m, s.points, t.points, cfg), m), out);
    } else if (*bench) {
      BenchConfig cfg;
      cfg.datasets = datasets;
      cfg.sigmas = parse_list(sigmas);
      cfg.trials = trials;
      cfg.theta_deg = parse_theta(theta);
      cfg.t_mag = t_mag;
      cfg.seed = seed;
      cfg.method = parse_method(method);
      cfg.reg.translation = parse_translation_mode(translation);
      Format fmt = Format::csv;
      if (!format.empty()) fmt = parse_format(format);
      else if (out.size() >= 5 && out.substr(out.size() - 5) == ".json") fmt = Format::json;
      const auto recs = run_benchmark(cfg);
      emit_results(recs, fmt, out);
      int failed = 0;
      for (const auto& r : recs) failed += r.ok() ? 0 : 1;
      if (failed > 0) std::fprintf(stderr, "cgareg: %d of %zu cells failed\n", failed, recs.size());
    } else if (*synth) {
      save_ply_ascii(out, synth_cloud(n, seed, parse_shape(shape)).points);
    } else if (*prims) {
      const PointCloud s = load_ply(source);
      check_cloud(s.points, "source");
      const CloudSpectra sp = cloud_spectra(s.points);
      json arr = json::array();
      for (const auto& r : export_primitives(sp.grade1, sp.grade2)) {
        arr.push_back({{"kind", primitive_kind_name(r.kind)},
                       {"grade", r.grade},
                       {"rank", r.rank},
                       {"lambda", r.lambda},
                       {"payload", r.payload},
                       {"degenerate", r.degenerate},
                       {"normalized", r.normalized}});
      }
      emit_json(arr, out);
    } else if (*self) {
      bool ok = true;
      for (const auto& r : run_selftest()) {
        std::printf("%-4s %-36s worst=%.3e tol=%.1e\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.worst, r.tol);
        ok = ok && r.passed;
      }
      return ok ? 0 : 2;
    }
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "cgareg: numerical failure: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cgareg: %s\n", e.what());
    return 1;
  }
  return 0;
}
