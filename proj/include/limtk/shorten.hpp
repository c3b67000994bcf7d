#pragma once

// Shortening of homomorphisms into free groups: greedy descent over
// precomposition by modular generators and target conjugation, with a
// bounded-radius enumeration certificate for local minimality.

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "limtk/gad.hpp"
#include "limtk/hom.hpp"
#include "limtk/word.hpp"

namespace limtk {

struct ShorteningProblem {
  Hom f;
  std::vector<ModAut> mod_generators;
  bool conjugation = true;
};

struct Move {
  enum Kind { Twist, Conj } kind;
  // Twist: which generator (index into mod_generators) and direction
  int gen_index = 0;
  int sign = +1;
  std::string edge_id;  // from the ModAut, for serialization
  Word z;               // twisting word (domain side) or conjugator (target side)
};

struct ShorteningResult {
  Hom f_short;
  std::vector<Move> applied;
  int certified_radius = 0;
};

inline std::pair<int, int> length_key(const Hom& f) {
  return {hom_length(f), hom_total_length(f)};
}

// Greedy conjugation by single target letters; returns the conjugated hom
// and accumulates the full conjugator u such that the result is u^-1 f(.) u.
inline Hom optimal_conjugation(const Hom& f, Word* conjugator = nullptr) {
  Hom cur = f;
  Word u(f.target_rank());
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 1; i <= f.target_rank() && !changed; ++i) {
      for (int v : {i, -i}) {
        Word x = word_from_letters(f.target_rank(), {v});
        std::vector<Word> images;
        for (const auto& im : cur.images()) images.push_back(x.inverse() * im * x);
        Hom cand(cur.domain(), cur.target_rank(), images);
        if (length_key(cand) < length_key(cur)) {
          cur = cand;
          u = u * x;
          changed = true;
          break;
        }
      }
    }
  }
  if (conjugator) *conjugator = u;
  return cur;
}

namespace detail {

inline Hom precompose(const Hom& f, const ModAut& a) { return apply_aut(a, f); }

}  // namespace detail

inline ShorteningResult shorten(const ShorteningProblem& p) {
  ShorteningResult res{p.f, {}, 1};
  if (p.conjugation) {
    Word u;
    Hom conj = optimal_conjugation(res.f_short, &u);
    if (length_key(conj) < length_key(res.f_short)) {
      res.f_short = conj;
      res.applied.push_back({Move::Conj, 0, +1, "", u});
    }
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < p.mod_generators.size() && !changed; ++i) {
      for (int sign : {+1, -1}) {
        const ModAut& g = p.mod_generators[i];
        ModAut use = sign > 0 ? g : g.inverted();
        Hom cand = detail::precompose(res.f_short, use);
        Word u(p.f.target_rank());
        if (p.conjugation) cand = optimal_conjugation(cand, &u);
        if (length_key(cand) < length_key(res.f_short)) {
          res.f_short = cand;
          res.applied.push_back({Move::Twist, static_cast<int>(i), sign, g.twist_edge, g.twist_z});
          if (!u.empty()) res.applied.push_back({Move::Conj, 0, +1, "", u});
          changed = true;
          break;
        }
      }
    }
  }
  return res;
}

// Replays a recorded move list against a hom; reproduces shorten's output
// when applied to the original problem input.
inline Hom replay_moves(const Hom& f, const std::vector<ModAut>& gens,
                        const std::vector<Move>& moves) {
  Hom cur = f;
  for (const auto& m : moves) {
    if (m.kind == Move::Twist) {
      const ModAut& g = gens.at(static_cast<size_t>(m.gen_index));
      cur = detail::precompose(cur, m.sign > 0 ? g : g.inverted());
    } else {
      std::vector<Word> images;
      for (const auto& im : cur.images()) images.push_back(m.z.inverse() * im * m.z);
      cur = Hom(cur.domain(), cur.target_rank(), images);
    }
  }
  return cur;
}

// True iff no product of at most `radius` generator moves, followed by
// optimal conjugation, strictly reduces hom_length.
inline bool certify_local_min(const Hom& f, const std::vector<ModAut>& gens, int radius) {
  if (radius < 0) throw error("certify_local_min: negative radius");
  int target = hom_length(f);
  std::vector<Hom> frontier = {f};
  for (int depth = 1; depth <= radius; ++depth) {
    std::vector<Hom> next;
    for (const auto& g : frontier) {
      for (const auto& a : gens) {
        for (int sign : {+1, -1}) {
          Hom cand = detail::precompose(g, sign > 0 ? a : a.inverted());
          if (hom_length(optimal_conjugation(cand)) < target) return false;
          next.push_back(std::move(cand));
        }
      }
    }
    frontier = std::move(next);
  }
  return true;
}

// ---- rescaled length table ---------------------------------------------

struct Rational {
  long long num = 0, den = 1;
};

inline Rational make_rational(long long n, long long d) {
  if (d == 0) throw error("rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  long long g = std::gcd(n < 0 ? -n : n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  return {n, d};
}

inline std::vector<std::vector<Rational>> rescaled_length_table(const std::vector<Hom>& fs,
                                                               const std::vector<Word>& elements) {
  if (fs.empty()) throw error("rescaled_length_table: empty sequence");
  std::vector<std::vector<Rational>> table;
  for (const auto& f : fs) {
    std::vector<Rational> row;
    int hl = hom_length(f);
    if (hl == 0) throw error("rescaled_length_table: trivial homomorphism");
    for (const auto& g : elements) row.push_back(make_rational(translation_length(f(g)), hl));
    table.push_back(std::move(row));
  }
  return table;
}

// ---- serialization ------------------------------------------------------

inline void write_moves(std::ostream& out, const std::vector<Move>& moves,
                        const Alphabet& domain_names, const Alphabet& target_names) {
  for (const auto& m : moves) {
    if (m.kind == Move::Twist)
      out << "move twist " << m.edge_id << ' ' << format_word(m.z, domain_names) << ' ' << m.sign
          << '\n';
    else
      out << "move conj " << format_word(m.z, target_names) << '\n';
  }
}

}  // namespace limtk
