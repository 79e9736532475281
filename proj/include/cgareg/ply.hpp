#pragma once

// Minimal PLY point reader (ascii, binary_little_endian) and writers.
// Only vertex x/y/z are kept; every other element and property is skipped.

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cgareg/cga.hpp"
#include "cgareg/errors.hpp"

namespace cgareg {

struct PointCloud {
  std::string name;
  std::vector<Vec3> points;
};

namespace ply_detail {

enum class Scalar { i8, u8, i16, u16, i32, u32, f32, f64 };

inline bool parse_scalar(std::string_view s, Scalar& out) {
  struct Entry {
    std::string_view a, b;
    Scalar t;
  };
  static constexpr Entry kTable[] = {
      {"char", "int8", Scalar::i8},       {"uchar", "uint8", Scalar::u8},
      {"short", "int16", Scalar::i16},    {"ushort", "uint16", Scalar::u16},
      {"int", "int32", Scalar::i32},      {"uint", "uint32", Scalar::u32},
      {"float", "float32", Scalar::f32},  {"double", "float64", Scalar::f64},
  };
  for (const auto& e : kTable) {
    if (s == e.a || s == e.b) {
      out = e.t;
      return true;
    }
  }
  return false;
}

inline std::size_t scalar_size(Scalar t) {
  switch (t) {
    case Scalar::i8: case Scalar::u8: return 1;
    case Scalar::i16: case Scalar::u16: return 2;
    case Scalar::i32: case Scalar::u32: case Scalar::f32: return 4;
    case Scalar::f64: return 8;
  }
  return 0;
}

struct Property {
  std::string name;
  Scalar type = Scalar::f32;
  bool is_list = false;
  Scalar count_type = Scalar::u8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> props;
};

template <class T>
T load_le(const char* p) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

inline double read_binary(const char* p, Scalar t) {
  switch (t) {
    case Scalar::i8: return load_le<std::int8_t>(p);
    case Scalar::u8: return load_le<std::uint8_t>(p);
    case Scalar::i16: return load_le<std::int16_t>(p);
    case Scalar::u16: return load_le<std::uint16_t>(p);
    case Scalar::i32: return load_le<std::int32_t>(p);
    case Scalar::u32: return load_le<std::uint32_t>(p);
    case Scalar::f32: return load_le<float>(p);
    case Scalar::f64: return load_le<double>(p);
  }
  return 0.0;
}

// Whitespace tokenizer over the ascii body that remembers byte offsets.
class Tokens {
 public:
  Tokens(const std::string& data, std::size_t pos) : d_(data), pos_(pos) {}
  std::size_t offset() const noexcept { return pos_; }
  double next_number(const char* what) {
    while (pos_ < d_.size() && std::isspace(static_cast<unsigned char>(d_[pos_]))) ++pos_;
    if (pos_ >= d_.size()) throw ParseError(std::string("truncated payload: missing ") + what, pos_);
    const std::size_t start = pos_;
    while (pos_ < d_.size() && !std::isspace(static_cast<unsigned char>(d_[pos_]))) ++pos_;
    const std::string tok = d_.substr(start, pos_ - start);
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) throw ParseError("invalid number '" + tok + "'", start);
    return v;
  }

 private:
  const std::string& d_;
  std::size_t pos_;
};

}  // namespace ply_detail

inline PointCloud parse_ply(const std::string& data, std::string name = "cloud") {
  using namespace ply_detail;
  std::size_t pos = 0;
  auto next_line = [&](std::string& line) -> std::size_t {
    if (pos >= data.size()) throw ParseError("missing end_header", pos);
    const std::size_t start = pos;
    const std::size_t nl = data.find('\n', pos);
    if (nl == std::string::npos) throw ParseError("missing end_header", data.size());
    line = data.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = nl + 1;
    return start;
  };

  std::string line;
  next_line(line);
  if (line != "ply") throw ParseError("not a PLY file (missing 'ply' magic)", 0);

  bool binary = false, have_format = false;
  std::vector<Element> elements;
  while (true) {
    const std::size_t at = next_line(line);
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw.empty() || kw == "comment" || kw == "obj_info") continue;
    if (kw == "end_header") break;
    if (kw == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "ascii") binary = false;
      else if (fmt == "binary_little_endian") binary = true;
      else if (fmt == "binary_big_endian")
        throw ParseError("binary_big_endian PLY is not supported; convert to ascii or binary_little_endian", at);
      else throw ParseError("unsupported PLY format '" + fmt + "'", at);
      have_format = true;
    } else if (kw == "element") {
      Element e;
      long long count = -1;
      ls >> e.name >> count;
      if (e.name.empty() || count < 0 || ls.fail()) throw ParseError("invalid element line", at);
      e.count = static_cast<std::size_t>(count);
      elements.push_back(std::move(e));
    } else if (kw == "property") {
      if (elements.empty()) throw ParseError("property before any element", at);
      Property p;
      std::string t;
      ls >> t;
      if (t == "list") {
        std::string ct, it;
        ls >> ct >> it >> p.name;
        p.is_list = true;
        if (!parse_scalar(ct, p.count_type) || !parse_scalar(it, p.type) || p.name.empty())
          throw ParseError("invalid list property", at);
      } else {
        ls >> p.name;
        if (!parse_scalar(t, p.type) || p.name.empty()) throw ParseError("invalid property '" + t + "'", at);
      }
      elements.back().props.push_back(std::move(p));
    } else {
      throw ParseError("unknown header keyword '" + kw + "'", at);
    }
  }
  if (!have_format) throw ParseError("missing format line", 0);

  const Element* vertex = nullptr;
  for (const auto& e : elements)
    if (e.name == "vertex") vertex = &e;
  if (!vertex) throw ParseError("no vertex element", pos);
  int ix = -1, iy = -1, iz = -1;
  for (std::size_t k = 0; k < vertex->props.size(); ++k) {
    const auto& p = vertex->props[k];
    if (p.is_list) continue;
    if (p.name == "x") ix = static_cast<int>(k);
    if (p.name == "y") iy = static_cast<int>(k);
    if (p.name == "z") iz = static_cast<int>(k);
  }
  if (ix < 0 || iy < 0 || iz < 0) throw ParseError("vertex element lacks x/y/z", pos);

  PointCloud cloud{std::move(name), {}};
  cloud.points.reserve(vertex->count);
  std::vector<double> row;
  Tokens tokens(data, pos);

  for (const auto& e : elements) {
    const bool is_vertex = &e == vertex;
    for (std::size_t r = 0; r < e.count; ++r) {
      const std::size_t row_start = binary ? pos : tokens.offset();
      row.assign(e.props.size(), 0.0);
      for (std::size_t k = 0; k < e.props.size(); ++k) {
        const auto& p = e.props[k];
        if (binary) {
          auto need = [&](std::size_t n) {
            if (data.size() - pos < n)
              throw ParseError("truncated payload in element '" + e.name + "' row " + std::to_string(r), pos);
          };
          std::size_t n_items = 1;
          if (p.is_list) {
            need(scalar_size(p.count_type));
            const double c = read_binary(data.data() + pos, p.count_type);
            if (c < 0) throw ParseError("negative list length", pos);
            pos += scalar_size(p.count_type);
            n_items = static_cast<std::size_t>(c);
          }
          need(n_items * scalar_size(p.type));
          if (!p.is_list) row[k] = read_binary(data.data() + pos, p.type);
          pos += n_items * scalar_size(p.type);
        } else {
          if (p.is_list) {
            const double c = tokens.next_number("list length");
            if (c < 0 || c != std::floor(c)) throw ParseError("invalid list length", tokens.offset());
            for (std::size_t i = 0; i < static_cast<std::size_t>(c); ++i) tokens.next_number("list item");
          } else {
            row[k] = tokens.next_number(("property '" + p.name + "' of element '" + e.name + "'").c_str());
          }
        }
      }
      if (is_vertex) {
        const Vec3 v(row[static_cast<std::size_t>(ix)], row[static_cast<std::size_t>(iy)],
                     row[static_cast<std::size_t>(iz)]);
        if (!v.allFinite()) throw ParseError("non-finite vertex coordinate", row_start);
        cloud.points.push_back(v);
      }
    }
    if (is_vertex) break;  // later elements (faces, ...) are not needed
  }
  return cloud;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline PointCloud load_ply(const std::string& path) {
  return parse_ply(read_file(path), std::filesystem::path(path).stem().string());
}

inline void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << data;
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline std::string ply_ascii(const std::vector<Vec3>& pts) {
  std::string s = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(pts.size()) +
                  "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  char buf[96];
  for (const Vec3& p : pts) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
    s += buf;
  }
  return s;
}

inline std::string ply_binary_float32(const std::vector<Vec3>& pts) {
  std::string s = "ply\nformat binary_little_endian 1.0\nelement vertex " + std::to_string(pts.size()) +
                  "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  for (const Vec3& p : pts) {
    for (int k = 0; k < 3; ++k) {
      const float f = static_cast<float>(p[k]);
      char b[4];
      std::memcpy(b, &f, 4);
      s.append(b, 4);
    }
  }
  return s;
}

inline void save_ply_ascii(const std::string& path, const std::vector<Vec3>& pts) {
  write_file(path, ply_ascii(pts));
}

}  // namespace cgareg
