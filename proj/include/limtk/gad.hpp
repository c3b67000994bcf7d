#pragma once

// Graphs of groups with abelian edge groups: fundamental presentations,
// one-edge splittings with Bass-Serre reduced forms (Britton's lemma on the
// HNN side), syllable extraction, and modular automorphisms as generator
// substitutions.

#include <functional>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "limtk/hom.hpp"
#include "limtk/intlin.hpp"
#include "limtk/stallings.hpp"
#include "limtk/word.hpp"

namespace limtk {

// ---- vertex data --------------------------------------------------------

struct RigidVertex {
  Presentation pres;
};

struct AbelianVertex {
  int rank = 0;
  Alphabet names;
  std::vector<IVec> peripheral;  // nonzero vectors spanning the peripheral sublattice
};

struct QhVertex {
  int genus = 0;
  bool orientable = true;
  int boundaries = 0;

  int euler_characteristic() const {
    return orientable ? 2 - 2 * genus - boundaries : 2 - genus - boundaries;
  }
  // Surfaces with boundary have free fundamental group; we use the standard
  // generators with the last boundary word implicit.
  Presentation presentation() const {
    Presentation p;
    if (orientable) {
      for (int i = 1; i <= genus; ++i) {
        p.generators.push_back("a" + std::to_string(i));
        p.generators.push_back("b" + std::to_string(i));
      }
      for (int j = 1; j <= boundaries - 1; ++j) p.generators.push_back("d" + std::to_string(j));
    } else {
      for (int i = 1; i <= genus; ++i) p.generators.push_back("c" + std::to_string(i));
      for (int j = 1; j <= boundaries - 1; ++j) p.generators.push_back("d" + std::to_string(j));
    }
    return p;
  }
  // Boundary words: d_1, ..., d_{b-1}, and the last boundary as the inverse
  // of the product of the defining relator's other terms.
  std::vector<Word> boundary_words() const {
    Presentation p = presentation();
    int r = p.rank();
    std::vector<Word> out;
    Word last(r);
    if (orientable) {
      for (int i = 0; i < genus; ++i) {
        int a = 2 * i + 1, b = 2 * i + 2;
        last.push(a);
        last.push(b);
        last.push(-a);
        last.push(-b);
      }
      for (int j = 0; j < boundaries - 1; ++j) {
        int d = 2 * genus + j + 1;
        out.push_back(word_from_letters(r, {d}));
        last.push(d);
      }
    } else {
      for (int i = 1; i <= genus; ++i) {
        last.push(i);
        last.push(i);
      }
      for (int j = 0; j < boundaries - 1; ++j) {
        int d = genus + j + 1;
        out.push_back(word_from_letters(r, {d}));
        last.push(d);
      }
    }
    out.push_back(last.inverse());
    return out;
  }

  void validate() const {
    if (boundaries < 1) throw error("QH vertex needs boundary");
    if (euler_characteristic() > -1) throw error("QH vertex needs Euler characteristic <= -1");
  }
};

struct VertexData {
  std::string id;
  std::variant<RigidVertex, AbelianVertex, QhVertex> data;

  bool is_rigid() const { return std::holds_alternative<RigidVertex>(data); }
  bool is_abelian() const { return std::holds_alternative<AbelianVertex>(data); }
  bool is_qh() const { return std::holds_alternative<QhVertex>(data); }

  Presentation presentation() const {
    if (is_rigid()) return std::get<RigidVertex>(data).pres;
    if (is_qh()) return std::get<QhVertex>(data).presentation();
    const auto& a = std::get<AbelianVertex>(data);
    Presentation p;
    p.generators = a.names;
    for (int i = 1; i <= a.rank; ++i)
      for (int j = i + 1; j <= a.rank; ++j)
        p.relators.push_back(word_from_letters(a.rank, {i, j, -i, -j}));
    return p;
  }
};

struct GadEdge {
  std::string id;
  int v1 = 0, v2 = 0;
  int rank = 1;                    // edge group Z^rank
  std::vector<Word> img1, img2;    // edge generator images, over vertex-local gens
  bool tree = true;
  std::string stable;              // stable letter name for non-tree edges
};

struct Gad {
  std::vector<VertexData> vertices;
  std::vector<GadEdge> edges;

  void validate() const {
    for (const auto& v : vertices) {
      if (v.is_qh()) std::get<QhVertex>(v.data).validate();
      if (v.is_abelian()) {
        const auto& a = std::get<AbelianVertex>(v.data);
        if (static_cast<int>(a.names.size()) != a.rank) throw error("abelian vertex name count");
        for (const auto& p : a.peripheral) {
          if (static_cast<int>(p.size()) != a.rank) throw error("peripheral vector dimension");
          if (is_zero_vec(p)) throw error("peripheral vector must be nonzero");
        }
      }
      v.presentation().validate();
    }
    for (const auto& e : edges) {
      if (e.v1 < 0 || e.v1 >= static_cast<int>(vertices.size()) || e.v2 < 0 ||
          e.v2 >= static_cast<int>(vertices.size()))
        throw error("edge endpoint out of range");
      if (static_cast<int>(e.img1.size()) != e.rank || static_cast<int>(e.img2.size()) != e.rank)
        throw error("edge image count must equal edge rank");
      if (!e.tree && e.stable.empty()) throw error("non-tree edge needs a stable letter");
      // edge groups are abelian: images must commute on each side
      for (int i = 0; i < e.rank; ++i)
        for (int j = i + 1; j < e.rank; ++j) {
          if (!commutes(e.img1[static_cast<size_t>(i)], e.img1[static_cast<size_t>(j)]) ||
              !commutes(e.img2[static_cast<size_t>(i)], e.img2[static_cast<size_t>(j)]))
            throw error("edge group images must commute");
        }
    }
    // connectivity
    if (!vertices.empty()) {
      std::vector<bool> seen(vertices.size(), false);
      std::vector<int> stack = {0};
      seen[0] = true;
      while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (const auto& e : edges) {
          for (int w : {e.v1 == v ? e.v2 : -1, e.v2 == v ? e.v1 : -1}) {
            if (w >= 0 && !seen[static_cast<size_t>(w)]) {
              seen[static_cast<size_t>(w)] = true;
              stack.push_back(w);
            }
          }
        }
      }
      for (bool s : seen)
        if (!s) throw error("graph of groups is disconnected");
    }
  }
};

// ---- fundamental presentation ------------------------------------------

struct FundamentalLayout {
  Presentation pres;
  std::vector<int> vertex_gen_offset;  // per vertex: offset into pres generators
  std::map<std::string, int> stable_index;  // edge id -> generator index (1-based)
};

inline Word lift_local(const Word& local, int offset, int fund_rank) {
  Word out(fund_rank);
  for (int v : local.letters()) out.push(v > 0 ? v + offset : v - offset);
  return out;
}

inline FundamentalLayout fundamental_layout(const Gad& g) {
  g.validate();
  FundamentalLayout lay;
  for (const auto& v : g.vertices) {
    lay.vertex_gen_offset.push_back(static_cast<int>(lay.pres.generators.size()));
    for (const auto& name : v.presentation().generators) {
      if (alphabet_index(lay.pres.generators, name))
        throw error("generator name clash across vertices: " + name);
      lay.pres.generators.push_back(name);
    }
  }
  for (const auto& e : g.edges) {
    if (!e.tree) {
      if (alphabet_index(lay.pres.generators, e.stable))
        throw error("stable letter clashes with a vertex generator: " + e.stable);
      lay.pres.generators.push_back(e.stable);
      lay.stable_index[e.id] = static_cast<int>(lay.pres.generators.size());
    }
  }
  int rank = lay.pres.rank();
  for (size_t vi = 0; vi < g.vertices.size(); ++vi) {
    Presentation vp = g.vertices[vi].presentation();
    for (const auto& r : vp.relators)
      lay.pres.relators.push_back(lift_local(r, lay.vertex_gen_offset[vi], rank));
  }
  for (const auto& e : g.edges) {
    for (int i = 0; i < e.rank; ++i) {
      Word alpha = lift_local(e.img1[static_cast<size_t>(i)],
                              lay.vertex_gen_offset[static_cast<size_t>(e.v1)], rank);
      Word omega = lift_local(e.img2[static_cast<size_t>(i)],
                              lay.vertex_gen_offset[static_cast<size_t>(e.v2)], rank);
      if (e.tree) {
        lay.pres.relators.push_back(alpha * omega.inverse());
      } else {
        int t = lay.stable_index.at(e.id);
        Word rel = word_from_letters(rank, {t}) * alpha * word_from_letters(rank, {-t}) *
                   omega.inverse();
        lay.pres.relators.push_back(rel);
      }
    }
  }
  // a relator may reduce to nothing (e.g. identity identification); drop those
  std::vector<Word> kept;
  for (auto& r : lay.pres.relators)
    if (!r.empty()) kept.push_back(std::move(r));
  lay.pres.relators = std::move(kept);
  return lay;
}

inline Presentation fundamental_presentation(const Gad& g) { return fundamental_layout(g).pres; }

// ---- one-edge splittings ------------------------------------------------

struct SplitSide {
  enum Kind { Free, Abelian } kind = Free;
  Alphabet gens;                  // local names
  std::vector<int> global_index;  // local (1-based) -> fundamental generator index
  std::vector<Word> edge_images;  // over local gens

  // derived, free side: common primitive root u with edge_images[i] = u^{exp[i]}
  Word root;
  IVec root_exponents;
  // derived, abelian side: edge image vectors
  std::vector<IVec> edge_vectors;

  int rank() const { return static_cast<int>(gens.size()); }
};

struct Syllable {
  int side;  // 0 or 1 (HNN: always 0 = base)
  Word value;  // over the side's local gens
};

struct NormalForm {
  bool hnn = false;
  std::vector<Syllable> syllables;
  std::vector<int> crossings;  // HNN: stable letter exponent (+-1) after syllable i
};

inline IVec abelian_coords(const Word& w, int rank) {
  IVec v(static_cast<size_t>(rank), 0);
  for (int x : w.letters()) v[static_cast<size_t>(std::abs(x)) - 1] += (x > 0 ? 1 : -1);
  return v;
}

inline Word word_from_coords(const IVec& v, int rank) {
  Word w(rank);
  for (int i = 0; i < rank; ++i) {
    long long e = v[static_cast<size_t>(i)];
    for (long long k = 0; k < std::llabs(e); ++k) w.push(e > 0 ? i + 1 : -(i + 1));
  }
  return w;
}

class Splitting {
 public:
  bool hnn = false;
  SplitSide side[2];  // hnn: side[0] = base with alpha images, side[1].edge_images = omega images over base gens
  std::string stable;
  int stable_global = 0;  // fundamental generator index of the stable letter
  Presentation fund;
  int maximal_abelian_side = 0;
  std::string edge_id;

  void finalize() {
    for (int s = 0; s < 2; ++s) derive(side[s], s == 1 && hnn);
    // convention: edge elements count toward the side where the edge image is
    // maximal abelian; tie toward the first side
    maximal_abelian_side = 0;
    if (!hnn) {
      bool m0 = side_maximal_abelian(0), m1 = side_maximal_abelian(1);
      if (!m0 && m1) maximal_abelian_side = 1;
    }
    build_owner_map();
  }

  int edge_rank() const { return static_cast<int>(side[0].edge_images.size()); }

  // side of a fundamental-presentation letter; -1 for the stable letter
  int owner_of(int global_letter) const {
    int idx = std::abs(global_letter);
    if (hnn && idx == stable_global) return -1;
    auto it = owner_.find(idx);
    if (it == owner_.end()) throw error("letter outside the splitting's generators");
    return it->second.first;
  }
  int local_of(int global_letter) const {
    int idx = std::abs(global_letter);
    return owner_.at(idx).second;
  }

  Word to_global(int s, const Word& local) const {
    Word out(fund.rank());
    for (int v : local.letters()) {
      int g = side[s].global_index[static_cast<size_t>(std::abs(v)) - 1];
      out.push(v > 0 ? g : -g);
    }
    return out;
  }

  bool side_trivial(int s, const Word& local) const {
    if (side[s].kind == SplitSide::Free) return local.empty();
    return is_zero_vec(abelian_coords(local, side[s].rank()));
  }

  // Is `local` in the edge subgroup on side s?  On success, coords receives
  // edge-group coordinates.
  bool in_edge_subgroup(int s, const Word& local, IVec* coords) const {
    const SplitSide& sd = side[s];
    if (sd.kind == SplitSide::Abelian)
      return lattice_contains(sd.edge_vectors, abelian_coords(local, sd.rank()), coords);
    // free side: edge subgroup is { root^t : t in lattice of root_exponents }
    long long t = 0;
    if (!local.empty()) {
      if (sd.root.empty()) return false;  // trivial edge images
      RootPower rp = primitive_root(local);
      if (rp.root == sd.root)
        t = rp.exponent;
      else if (rp.root == sd.root.inverse())
        t = -rp.exponent;
      else
        return false;
    }
    std::vector<IVec> basis;
    for (long long e : sd.root_exponents) basis.push_back({e});
    return lattice_contains(basis, {t}, coords);
  }

  // Writes the edge element with the given coordinates as a side-s word.
  Word edge_element(int s, const IVec& coords) const {
    const SplitSide& sd = side[s];
    Word out(sd.rank());
    for (size_t i = 0; i < coords.size(); ++i)
      out = out * sd.edge_images[i].pow(coords[i]);
    return out;
  }

  NormalForm normal_form(const Word& w) const {
    return hnn ? britton_form(w) : amalgam_form(w);
  }

  bool is_identity(const Word& w) const {
    NormalForm nf = normal_form(w);
    if (hnn) {
      if (!nf.crossings.empty()) return false;
      return side_trivial(0, nf.syllables[0].value);
    }
    if (nf.syllables.size() != 1) return false;
    return side_trivial(nf.syllables[0].side, nf.syllables[0].value);
  }

  Word evaluate_form(const NormalForm& nf) const {
    Word out(fund.rank());
    for (size_t i = 0; i < nf.syllables.size(); ++i) {
      out = out * to_global(nf.syllables[i].side, nf.syllables[i].value);
      if (hnn && i < nf.crossings.size())
        out = out * word_from_letters(fund.rank(),
                                      {nf.crossings[i] > 0 ? stable_global : -stable_global});
    }
    return out;
  }

 private:
  std::map<int, std::pair<int, int>> owner_;  // global index -> (side, local index)

  void build_owner_map() {
    for (int s = 0; s < (hnn ? 1 : 2); ++s)
      for (size_t i = 0; i < side[s].global_index.size(); ++i)
        owner_[side[s].global_index[i]] = {s, static_cast<int>(i) + 1};
  }

  static void derive(SplitSide& sd, bool image_only) {
    if (sd.kind == SplitSide::Abelian) {
      sd.edge_vectors.clear();
      for (const auto& w : sd.edge_images) sd.edge_vectors.push_back(abelian_coords(w, sd.rank()));
      return;
    }
    (void)image_only;
    sd.root = Word(std::max(1, sd.rank()));
    sd.root_exponents.assign(sd.edge_images.size(), 0);
    Word base;
    bool have = false;
    for (const auto& w : sd.edge_images) {
      if (w.empty()) continue;
      Word r = primitive_root(w).root;
      if (!have) {
        base = r;
        have = true;
      } else if (r != base && r != base.inverse()) {
        throw error("edge images on a free side must share a primitive root");
      }
    }
    if (!have) return;
    sd.root = base;
    for (size_t i = 0; i < sd.edge_images.size(); ++i) {
      const Word& w = sd.edge_images[i];
      if (w.empty()) continue;
      RootPower rp = primitive_root(w);
      sd.root_exponents[i] = (rp.root == base) ? rp.exponent : -rp.exponent;
    }
  }

  bool side_maximal_abelian(int s) const {
    const SplitSide& sd = side[s];
    if (sd.kind == SplitSide::Free) {
      long long g = 0;
      for (long long e : sd.root_exponents) g = std::gcd(g, e);
      return g == 1;  // edge subgroup equals the full centralizer <root>
    }
    // abelian vertex: edge image maximal abelian iff it is the whole vertex
    return static_cast<int>(sd.edge_vectors.size()) >= sd.rank() &&
           injective_on_lattice(identity_mat(sd.rank()), sd.edge_vectors) &&
           [&] {
             for (int i = 0; i < sd.rank(); ++i) {
               IVec e(static_cast<size_t>(sd.rank()), 0);
               e[static_cast<size_t>(i)] = 1;
               if (!lattice_contains(sd.edge_vectors, e)) return false;
             }
             return true;
           }();
  }

  Word to_local(int s, const std::vector<int>& global_letters) const {
    Word out(std::max(1, side[s].rank()));
    for (int v : global_letters) {
      int loc = local_of(v);
      out.push(v > 0 ? loc : -loc);
    }
    return out;
  }

  NormalForm amalgam_form(const Word& w) const {
    // tokenize into maximal same-side blocks
    std::vector<Syllable> syl;
    std::vector<int> run;
    int cur = -2;
    auto flush = [&]() {
      if (!run.empty()) {
        syl.push_back({cur, to_local(cur, run)});
        run.clear();
      }
    };
    for (int v : w.letters()) {
      int s = owner_of(v);
      if (s != cur) {
        flush();
        cur = s;
      }
      run.push_back(v);
    }
    flush();
    if (syl.empty()) syl.push_back({maximal_abelian_side, Word(std::max(1, side[maximal_abelian_side].rank()))});

    // pinch: drop trivial interior syllables, convert interior edge-group
    // syllables across, merging neighbours; repeat to a fixed point
    bool changed = true;
    while (changed) {
      changed = false;
      for (size_t i = 0; i < syl.size(); ++i) {
        if (syl.size() == 1) break;
        if (side_trivial(syl[i].side, syl[i].value)) {
          // merge neighbours (same side by alternation)
          if (i > 0 && i + 1 < syl.size()) {
            syl[i - 1].value = syl[i - 1].value * syl[i + 1].value;
            syl.erase(syl.begin() + static_cast<long>(i), syl.begin() + static_cast<long>(i) + 2);
          } else {
            syl.erase(syl.begin() + static_cast<long>(i));
          }
          changed = true;
          break;
        }
        IVec coords;
        if (in_edge_subgroup(syl[i].side, syl[i].value, &coords)) {
          // convert across and merge into a neighbour (both sides agree on
          // edge elements, so the group element is unchanged)
          int other = 1 - syl[i].side;
          Word conv = edge_element(other, coords);
          if (i > 0 && i + 1 < syl.size()) {
            syl[i - 1].value = syl[i - 1].value * conv * syl[i + 1].value;
            syl.erase(syl.begin() + static_cast<long>(i), syl.begin() + static_cast<long>(i) + 2);
          } else if (i + 1 < syl.size()) {
            syl[i + 1].value = conv * syl[i + 1].value;
            syl.erase(syl.begin() + static_cast<long>(i));
          } else {
            syl[i - 1].value = syl[i - 1].value * conv;
            syl.erase(syl.begin() + static_cast<long>(i));
          }
          changed = true;
          break;
        }
      }
    }
    // single trivial syllable normalizes to the conventional side
    if (syl.size() == 1 && side_trivial(syl[0].side, syl[0].value) &&
        syl[0].side != maximal_abelian_side)
      syl[0] = {maximal_abelian_side, Word(std::max(1, side[maximal_abelian_side].rank()))};
    NormalForm nf;
    nf.hnn = false;
    nf.syllables = std::move(syl);
    return nf;
  }

  NormalForm britton_form(const Word& w) const {
    // split into base blocks and single stable-letter crossings
    std::vector<Word> blocks;
    std::vector<int> cross;
    std::vector<int> run;
    auto flush = [&]() {
      blocks.push_back(to_local(0, run));
      run.clear();
    };
    for (int v : w.letters()) {
      if (std::abs(v) == stable_global) {
        flush();
        cross.push_back(v > 0 ? 1 : -1);
      } else {
        run.push_back(v);
      }
    }
    flush();
    // Britton reduction with the relation t a(c) t^-1 = w(c): pinch the
    // pattern t^e, block, t^-e when the block lies in the matching edge image
    bool changed = true;
    while (changed) {
      changed = false;
      for (size_t i = 0; i + 1 < cross.size(); ++i) {
        if (cross[i] != -cross[i + 1]) continue;
        bool alpha = cross[i] == 1;  // t g t^-1 needs g in the alpha image
        IVec coords;
        if (!in_edge_subgroup_images(blocks[i + 1], alpha, &coords)) continue;
        Word conv = edge_word(!alpha, coords);
        blocks[i] = blocks[i] * conv * blocks[i + 2];
        blocks.erase(blocks.begin() + static_cast<long>(i) + 1,
                     blocks.begin() + static_cast<long>(i) + 3);
        cross.erase(cross.begin() + static_cast<long>(i),
                    cross.begin() + static_cast<long>(i) + 2);
        changed = true;
        break;
      }
    }
    NormalForm nf;
    nf.hnn = true;
    for (auto& b : blocks) nf.syllables.push_back({0, b});
    nf.crossings = std::move(cross);
    return nf;
  }

 public:
  // membership of a base word in the alpha (or omega) edge subgroup (HNN)
  bool in_edge_subgroup_images(const Word& local, bool alpha, IVec* coords) const {
    if (alpha) return in_edge_subgroup(0, local, coords);
    // omega images live over the base gens too (side[1] holds them)
    Splitting const* self = this;
    const SplitSide& sd = self->side[1];
    if (sd.kind == SplitSide::Abelian)
      return lattice_contains(sd.edge_vectors, abelian_coords(local, side[0].rank()), coords);
    long long t = 0;
    if (!local.empty()) {
      if (sd.root.empty()) return false;
      RootPower rp = primitive_root(local);
      if (rp.root == sd.root)
        t = rp.exponent;
      else if (rp.root == sd.root.inverse())
        t = -rp.exponent;
      else
        return false;
    }
    std::vector<IVec> basis;
    for (long long e : sd.root_exponents) basis.push_back({e});
    return lattice_contains(basis, {t}, coords);
  }

  Word edge_word(bool alpha, const IVec& coords) const {
    const SplitSide& sd = alpha ? side[0] : side[1];
    Word out(std::max(1, side[0].rank()));
    for (size_t i = 0; i < coords.size(); ++i) out = out * sd.edge_images[i].pow(coords[i]);
    return out;
  }
};

// Builds the one-edge splitting of a GAD with exactly one edge.
inline Splitting splitting_from_gad(const Gad& g, const FundamentalLayout& lay) {
  if (g.edges.size() != 1)
    throw error("splitting extraction supports exactly one edge");
  const GadEdge& e = g.edges[0];
  Splitting s;
  s.fund = lay.pres;
  s.edge_id = e.id;
  auto fill_side = [&](int si, int vi, const std::vector<Word>& imgs) {
    SplitSide& sd = s.side[si];
    const VertexData& v = g.vertices[static_cast<size_t>(vi)];
    sd.kind = v.is_abelian() ? SplitSide::Abelian : SplitSide::Free;
    if (v.is_rigid() && !std::get<RigidVertex>(v.data).pres.is_free())
      throw error("splitting side must be free or abelian");
    Presentation vp = v.presentation();
    sd.gens = vp.generators;
    int off = lay.vertex_gen_offset[static_cast<size_t>(vi)];
    for (int i = 1; i <= vp.rank(); ++i) sd.global_index.push_back(off + i);
    sd.edge_images = imgs;
  };
  if (e.tree) {
    if (e.v1 == e.v2) throw error("tree edge with equal endpoints");
    s.hnn = false;
    fill_side(0, e.v1, e.img1);
    fill_side(1, e.v2, e.img2);
  } else {
    if (e.v1 != e.v2) throw error("HNN edge must have equal endpoints");
    s.hnn = true;
    fill_side(0, e.v1, e.img1);
    // omega images also live over the base vertex
    fill_side(1, e.v2, e.img2);
    s.stable = e.stable;
    s.stable_global = lay.stable_index.at(e.id);
  }
  s.finalize();
  return s;
}

struct SyllableSets {
  std::vector<Word> x1, x2;  // global words
};

inline void push_unique(std::vector<Word>& xs, const Word& w) {
  for (const auto& x : xs)
    if (x == w) return;
  xs.push_back(w);
}

inline SyllableSets syllables_of(const Splitting& s, const std::vector<Word>& xs) {
  SyllableSets out;
  for (const auto& x : xs) {
    NormalForm nf = s.normal_form(x);
    if (!s.hnn && nf.syllables.size() == 1) {
      const Syllable& sy = nf.syllables[0];
      if (s.side_trivial(sy.side, sy.value)) continue;
      IVec coords;
      if (s.in_edge_subgroup(sy.side, sy.value, &coords)) {
        int ms = s.maximal_abelian_side;
        Word conv = (sy.side == ms) ? sy.value : s.edge_element(ms, coords);
        push_unique(ms == 0 ? out.x1 : out.x2, s.to_global(ms, conv));
        continue;
      }
    }
    for (const auto& sy : nf.syllables) {
      if (s.side_trivial(sy.side, sy.value)) continue;
      int si = s.hnn ? 0 : sy.side;
      push_unique(si == 0 ? out.x1 : out.x2, s.to_global(sy.side, sy.value));
    }
  }
  return out;
}

// ---- modular automorphisms ---------------------------------------------

struct ModAut {
  Presentation domain;
  std::vector<Word> images;
  std::vector<Word> inverse_images;
  std::string tag;
  // structured description for twist moves (empty edge id otherwise)
  std::string twist_edge;
  Word twist_z;

  ModAut inverted() const {
    ModAut r = *this;
    std::swap(r.images, r.inverse_images);
    r.tag = "inverse(" + tag + ")";
    r.twist_z = twist_z.inverse();
    return r;
  }

  Word apply(const Word& w) const { return substitute(w, images, domain.rank()); }
  Word unapply(const Word& w) const { return substitute(w, inverse_images, domain.rank()); }

  ModAut then(const ModAut& outer) const {  // outer . this
    ModAut r;
    r.domain = domain;
    for (const auto& im : images) r.images.push_back(outer.apply(im));
    for (const auto& im : outer.inverse_images) r.inverse_images.push_back(unapply(im));
    r.tag = "composite(" + tag + "; " + outer.tag + ")";
    return r;
  }

  // checks alpha(alpha^-1(g)) = g and vice versa with the given word problem
  bool verify_inverse(const std::function<bool(const Word&)>& is_trivial) const {
    for (int i = 1; i <= domain.rank(); ++i) {
      Word g = word_from_letters(domain.rank(), {i});
      if (!is_trivial(apply(unapply(g)) * g.inverse())) return false;
      if (!is_trivial(unapply(apply(g)) * g.inverse())) return false;
    }
    return true;
  }
};

inline ModAut identity_aut(const Presentation& p) {
  ModAut a;
  a.domain = p;
  for (int i = 1; i <= p.rank(); ++i) {
    a.images.push_back(word_from_letters(p.rank(), {i}));
    a.inverse_images.push_back(word_from_letters(p.rank(), {i}));
  }
  a.tag = "identity";
  return a;
}

inline ModAut inner_aut(const Presentation& p, const Word& conjugator) {
  ModAut a;
  a.domain = p;
  for (int i = 1; i <= p.rank(); ++i) {
    Word g = word_from_letters(p.rank(), {i});
    a.images.push_back(conjugator * g * conjugator.inverse());
    a.inverse_images.push_back(conjugator.inverse() * g * conjugator);
  }
  a.tag = "inner(" + format_word(conjugator, p.generators) + ")";
  return a;
}

// Dehn twist in a one-edge splitting: amalgam — fix the untwisted side and
// conjugate the generators of `twist_side` by z; HNN — fix the base and map
// the stable letter t -> t z.  z is a word over the fundamental generators,
// supported on one side, and must commute with every edge generator image.
inline ModAut dehn_twist(const Splitting& s, const Word& z, int twist_side = 1) {
  // locate z's side and check the centralizing precondition
  int zs = -2;
  for (int v : z.letters()) {
    int o = s.owner_of(v);
    if (o == -1) throw error("twisting element may not use the stable letter");
    if (zs == -2) zs = o;
    if (o != zs) throw error("twisting element must be supported on one side");
  }
  if (zs >= 0) {
    Word zl(std::max(1, s.side[zs].rank()));
    for (int v : z.letters()) {
      int loc = s.local_of(v);
      zl.push(v > 0 ? loc : -loc);
    }
    if (s.side[zs].kind == SplitSide::Free) {
      const auto& imgs = (s.hnn && zs == 0) ? s.side[0].edge_images : s.side[zs].edge_images;
      for (const auto& c : imgs)
        if (!commutes(zl, c)) throw error("twisting element does not centralize the edge group");
    }
  }
  ModAut a;
  a.domain = s.fund;
  int rank = s.fund.rank();
  for (int i = 1; i <= rank; ++i) {
    Word g = word_from_letters(rank, {i});
    if (s.hnn) {
      if (i == s.stable_global) {
        a.images.push_back(g * z);
        a.inverse_images.push_back(g * z.inverse());
      } else {
        a.images.push_back(g);
        a.inverse_images.push_back(g);
      }
    } else {
      if (s.owner_of(i) == twist_side) {
        a.images.push_back(z * g * z.inverse());
        a.inverse_images.push_back(z.inverse() * g * z);
      } else {
        a.images.push_back(g);
        a.inverse_images.push_back(g);
      }
    }
  }
  a.tag = "twist(" + s.edge_id + ", " + format_word(z, s.fund.generators) + ")";
  a.twist_edge = s.edge_id;
  a.twist_z = z;
  return a;
}

// Unimodular, peripheral-fixing automorphism of an abelian vertex.
inline ModAut generalized_dehn_twist(const Gad& g, const FundamentalLayout& lay, int vertex,
                                     const IMat& m) {
  const VertexData& v = g.vertices.at(static_cast<size_t>(vertex));
  if (!v.is_abelian()) throw error("generalized Dehn twist needs an abelian vertex");
  const auto& av = std::get<AbelianVertex>(v.data);
  int n = av.rank;
  if (static_cast<int>(m.size()) != n) throw error("matrix dimension mismatch");
  long long det = det_mat(m);
  if (det != 1 && det != -1) throw error("matrix must be unimodular, det = " + std::to_string(det));
  for (const auto& p : av.peripheral)
    if (mat_apply(m, p) != p) throw error("matrix must fix the peripheral vectors");
  // integer inverse via adjugate / det
  IMat inv(static_cast<size_t>(n), IVec(static_cast<size_t>(n), 0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      IMat minor;
      for (int r = 0; r < n; ++r) {
        if (r == j) continue;
        IVec row;
        for (int c = 0; c < n; ++c)
          if (c != i) row.push_back(m[static_cast<size_t>(r)][static_cast<size_t>(c)]);
        minor.push_back(row);
      }
      long long cof = det_mat(minor);
      if ((i + j) % 2) cof = -cof;
      inv[static_cast<size_t>(i)][static_cast<size_t>(j)] = cof * det;  // det is +-1
    }
  ModAut a;
  a.domain = lay.pres;
  int rank = lay.pres.rank();
  int off = lay.vertex_gen_offset.at(static_cast<size_t>(vertex));
  for (int i = 1; i <= rank; ++i) {
    if (i > off && i <= off + n) {
      int j = i - off - 1;  // local column
      IVec col(static_cast<size_t>(n)), icol(static_cast<size_t>(n));
      for (int r = 0; r < n; ++r) {
        col[static_cast<size_t>(r)] = m[static_cast<size_t>(r)][static_cast<size_t>(j)];
        icol[static_cast<size_t>(r)] = inv[static_cast<size_t>(r)][static_cast<size_t>(j)];
      }
      a.images.push_back(lift_local(word_from_coords(col, n), off, rank));
      a.inverse_images.push_back(lift_local(word_from_coords(icol, n), off, rank));
    } else {
      a.images.push_back(word_from_letters(rank, {i}));
      a.inverse_images.push_back(word_from_letters(rank, {i}));
    }
  }
  a.tag = "generalized_twist(" + v.id + ")";
  return a;
}

inline Word apply_aut(const ModAut& a, const Word& w) { return a.apply(w); }

inline Hom apply_aut(const ModAut& a, const Hom& f) {
  if (f.domain().generators != a.domain.generators)
    throw error("automorphism/hom generator mismatch");
  std::vector<Word> images;
  for (const auto& im : a.images) images.push_back(substitute(im, f.images(), f.target_rank()));
  return Hom(f.domain(), f.target_rank(), images);
}

// ---- serialization ------------------------------------------------------
// Words inside gad files use '.' between tokens, e.g. a.b.a^-1.b^-1

inline Word parse_dotted_word(const std::string& text, const Alphabet& names) {
  std::string spaced = text;
  for (auto& c : spaced)
    if (c == '.') c = ' ';
  return parse_word(spaced, names);
}

inline std::map<std::string, std::string> parse_kv(std::istringstream& in) {
  std::map<std::string, std::string> kv;
  std::string tok;
  while (in >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw error("expected key=value, got: " + tok);
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline Gad parse_gad(std::istream& in) {
  Gad g;
  std::map<std::string, int> vid;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string what;
    ls >> what;
    if (what == "vertex") {
      std::string id;
      ls >> id;
      auto kv = parse_kv(ls);
      VertexData v;
      v.id = id;
      const std::string kind = kv.count("kind") ? kv["kind"] : "";
      if (kind == "rigid") {
        RigidVertex rv;
        rv.pres.generators = split_list(kv.at("gens"));
        if (kv.count("rels"))
          for (const auto& r : split_list(kv["rels"], ';'))
            rv.pres.relators.push_back(parse_dotted_word(r, rv.pres.generators));
        v.data = rv;
      } else if (kind == "abelian") {
        AbelianVertex av;
        av.names = split_list(kv.at("gens"));
        av.rank = static_cast<int>(av.names.size());
        if (kv.count("peripheral"))
          for (const auto& vec : split_list(kv["peripheral"])) {
            IVec p;
            for (const auto& c : split_list(vec, ':')) p.push_back(std::stoll(c));
            av.peripheral.push_back(p);
          }
        v.data = av;
      } else if (kind == "qh") {
        QhVertex qv;
        qv.genus = std::stoi(kv.at("genus"));
        qv.orientable = kv.count("orientable") ? kv["orientable"] == "1" : true;
        qv.boundaries = std::stoi(kv.at("boundaries"));
        v.data = qv;
      } else {
        throw error("unknown vertex kind: " + kind);
      }
      vid[id] = static_cast<int>(g.vertices.size());
      g.vertices.push_back(std::move(v));
    } else if (what == "edge") {
      std::string id, a, b;
      ls >> id >> a >> b;
      auto kv = parse_kv(ls);
      GadEdge e;
      e.id = id;
      e.v1 = vid.at(a);
      e.v2 = vid.at(b);
      e.rank = kv.count("rank") ? std::stoi(kv["rank"]) : 1;
      Alphabet g1 = g.vertices[static_cast<size_t>(e.v1)].presentation().generators;
      Alphabet g2 = g.vertices[static_cast<size_t>(e.v2)].presentation().generators;
      for (const auto& w : split_list(kv.at("img1"))) e.img1.push_back(parse_dotted_word(w, g1));
      for (const auto& w : split_list(kv.at("img2"))) e.img2.push_back(parse_dotted_word(w, g2));
      e.tree = kv.count("tree") ? kv["tree"] == "1" : true;
      if (kv.count("stable")) e.stable = kv["stable"];
      if (!e.tree && e.stable.empty()) e.stable = id;
      g.edges.push_back(std::move(e));
    } else {
      throw error("unknown line in gad file: " + what);
    }
  }
  g.validate();
  return g;
}

inline void write_mod_aut(std::ostream& out, const ModAut& a) {
  out << "# tag: " << a.tag << '\n';
  for (int i = 0; i < a.domain.rank(); ++i)
    out << "aut " << a.domain.generators[static_cast<size_t>(i)] << ' '
        << format_word(a.images[static_cast<size_t>(i)], a.domain.generators) << '\n';
}

}  // namespace limtk
