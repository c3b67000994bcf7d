#pragma once

// Measured laminations on a finite 2-complex as nonnegative edge weights:
// per-cell corner coordinates, triangle-inequality validation, and
// projectivization.  Rational arithmetic by default; a floating mode with a
// declared tolerance is available for inequality checks.

#include <array>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "limtk/word.hpp"

namespace limtk {

using LamRat = boost::multiprecision::cpp_rational;

struct Complex2 {
  std::vector<std::string> edges;
  std::vector<std::array<int, 3>> cells;  // indices into edges; repeats allowed

  int edge_index(const std::string& id) const {
    for (size_t i = 0; i < edges.size(); ++i)
      if (edges[i] == id) return static_cast<int>(i);
    return -1;
  }

  void validate() const {
    for (const auto& c : cells)
      for (int e : c)
        if (e < 0 || e >= static_cast<int>(edges.size()))
          throw error("cell references a missing edge");
  }
};

struct Weights {
  std::vector<LamRat> values;  // aligned with Complex2::edges

  void validate() const {
    for (const auto& v : values)
      if (v < 0) throw error("weights must be nonnegative");
  }
};

inline std::array<LamRat, 3> corner_coordinates(const LamRat& w1, const LamRat& w2,
                                                const LamRat& w3) {
  return {(w1 + w2 - w3) / 2, (w2 + w3 - w1) / 2, (w3 + w1 - w2) / 2};
}

inline std::array<LamRat, 3> corner_coordinates(const Complex2& k, const std::array<int, 3>& cell,
                                                const Weights& w) {
  (void)k;
  return corner_coordinates(w.values[static_cast<size_t>(cell[0])],
                            w.values[static_cast<size_t>(cell[1])],
                            w.values[static_cast<size_t>(cell[2])]);
}

inline bool validate(const Complex2& k, const Weights& w, double float_tolerance = 0.0) {
  k.validate();
  w.validate();
  if (w.values.size() != k.edges.size()) throw error("missing edge weight");
  LamRat tol(0);
  if (float_tolerance > 0) tol = LamRat(-1, 1) * LamRat(static_cast<long>(float_tolerance * 1e18), 1000000000000000000LL);
  for (const auto& cell : k.cells) {
    auto c = corner_coordinates(k, cell, w);
    for (const auto& x : c)
      if (x < tol) return false;
  }
  return true;
}

inline Weights projectivize(const Weights& w) {
  w.validate();
  LamRat sum(0);
  for (const auto& v : w.values) sum += v;
  if (sum == 0) throw error("projectivize: the zero point is excluded");
  Weights out;
  for (const auto& v : w.values) out.values.push_back(v / sum);
  return out;
}

// ---- serialization ------------------------------------------------------
// Complex file: `edge <id>` and `cell <e1> <e2> <e3>` lines.
// Weights file: `w <edge-id> <value>` lines; values `p/q` or integers.

inline LamRat parse_lam_rat(const std::string& s) {
  // cpp_int treats a leading 0 as an octal prefix; strip it first
  auto to_int = [](std::string t) {
    bool neg = !t.empty() && t[0] == '-';
    std::string digits = neg ? t.substr(1) : t;
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
      throw error("not a decimal integer: " + t);
    size_t nz = digits.find_first_not_of('0');
    digits = nz == std::string::npos ? "0" : digits.substr(nz);
    boost::multiprecision::cpp_int v(digits);
    return neg ? -v : v;
  };
  try {
    auto slash = s.find('/');
    if (slash != std::string::npos)
      return LamRat(to_int(s.substr(0, slash))) / LamRat(to_int(s.substr(slash + 1)));
    auto dot = s.find('.');
    if (dot != std::string::npos) {
      // decimal literal: scale by a power of ten
      LamRat den(1);
      for (size_t i = dot + 1; i < s.size(); ++i) den *= 10;
      return LamRat(to_int(s.substr(0, dot) + s.substr(dot + 1))) / den;
    }
    return LamRat(to_int(s));
  } catch (const std::exception&) {
    throw error("bad weight value: " + s);
  }
}

inline Complex2 parse_complex(std::istream& in) {
  Complex2 k;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string what;
    ls >> what;
    if (what == "edge") {
      std::string id;
      ls >> id;
      if (k.edge_index(id) >= 0) throw error("duplicate edge: " + id);
      k.edges.push_back(id);
    } else if (what == "cell") {
      std::string a, b, c;
      ls >> a >> b >> c;
      int ia = k.edge_index(a), ib = k.edge_index(b), ic = k.edge_index(c);
      if (ia < 0 || ib < 0 || ic < 0) throw error("cell references a missing edge");
      k.cells.push_back({ia, ib, ic});
    } else {
      throw error("unknown line in complex file: " + what);
    }
  }
  k.validate();
  return k;
}

inline Weights parse_weights(std::istream& in, const Complex2& k) {
  std::map<std::string, LamRat> vals;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string what, id, val;
    ls >> what >> id >> val;
    if (what != "w") throw error("unknown line in weights file: " + what);
    vals[id] = parse_lam_rat(val);
  }
  Weights w;
  for (const auto& e : k.edges) {
    auto it = vals.find(e);
    if (it == vals.end()) throw error("missing edge weight: " + e);
    w.values.push_back(it->second);
  }
  w.validate();
  return w;
}

inline std::string lam_rat_to_string(const LamRat& r) {
  std::ostringstream out;
  out << numerator(r);
  if (denominator(r) != 1) out << '/' << denominator(r);
  return out.str();
}

inline void write_weights(std::ostream& out, const Complex2& k, const Weights& w) {
  for (size_t i = 0; i < k.edges.size(); ++i)
    out << "w " << k.edges[i] << ' ' << lam_rat_to_string(w.values[i]) << '\n';
}

}  // namespace limtk
