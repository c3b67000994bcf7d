#pragma once

// Constructible limit groups: the recursive structure (free groups, free
// products, one-edge decompositions with a retraction to a lower level), a
// validator, the free-group nontriviality criterion with its explicit
// exponent bound, surface curve selection, and the discriminator producing
// verified homomorphisms into the rank-2 free group.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "limtk/gad.hpp"
#include "limtk/hom.hpp"
#include "limtk/word.hpp"

namespace limtk {

// ---- recursive structure ------------------------------------------------

struct Clg;
using ClgPtr = std::shared_ptr<Clg>;

struct Clg {
  enum class Form { Free, Product, Indec };
  Form form = Form::Free;
  int level = 0;
  Presentation pres;

  // Product
  std::vector<ClgPtr> parts;
  std::vector<int> part_offset;  // generator offset per part

  // Indec
  std::shared_ptr<Gad> gad;
  std::shared_ptr<FundamentalLayout> layout;
  std::shared_ptr<Splitting> split;  // present iff the gad has exactly one edge
  ClgPtr lower;
  std::vector<Word> rho;  // per fundamental generator, over lower's generators

  int rank() const { return pres.rank(); }
};

inline Clg make_free_clg(Alphabet gens) {
  Clg c;
  c.form = Clg::Form::Free;
  c.level = 0;
  c.pres = free_presentation(std::move(gens));
  return c;
}

inline Clg make_free_clg(int rank) { return make_free_clg(default_alphabet(rank)); }

inline Clg make_product_clg(std::vector<ClgPtr> parts) {
  if (parts.size() < 2) throw error("free product needs at least two parts");
  Clg c;
  c.form = Clg::Form::Product;
  for (const auto& p : parts) {
    c.level = std::max(c.level, p->level);
    c.part_offset.push_back(c.pres.rank());
    for (const auto& g : p->pres.generators) {
      if (alphabet_index(c.pres.generators, g))
        throw error("generator name clash across free factors: " + g);
      c.pres.generators.push_back(g);
    }
  }
  for (size_t i = 0; i < parts.size(); ++i)
    for (const auto& r : parts[i]->pres.relators)
      c.pres.relators.push_back(lift_local(r, c.part_offset[i], c.pres.rank()));
  c.parts = std::move(parts);
  return c;
}

inline Clg make_indec_clg(Gad gad, ClgPtr lower, std::vector<Word> rho) {
  Clg c;
  c.form = Clg::Form::Indec;
  c.gad = std::make_shared<Gad>(std::move(gad));
  c.layout = std::make_shared<FundamentalLayout>(fundamental_layout(*c.gad));
  c.pres = c.layout->pres;
  if (c.gad->edges.size() == 1)
    c.split = std::make_shared<Splitting>(splitting_from_gad(*c.gad, *c.layout));
  else if (c.gad->edges.size() > 1)
    throw error("only one-edge decompositions are supported");
  c.lower = std::move(lower);
  c.level = c.lower->level + 1;
  if (static_cast<int>(rho.size()) != c.pres.rank())
    throw error("retraction needs one image per fundamental generator");
  for (const auto& w : rho)
    if (w.rank() != c.lower->rank()) throw error("retraction image rank mismatch");
  c.rho = std::move(rho);
  return c;
}

// ---- word problem -------------------------------------------------------

inline bool clg_is_identity(const Clg& c, const Word& w);

inline int product_factor_of(const Clg& c, int letter) {
  int idx = std::abs(letter);
  for (size_t i = c.parts.size(); i-- > 0;)
    if (idx > c.part_offset[i]) return static_cast<int>(i);
  throw error("letter outside product generators");
}

inline bool clg_is_identity(const Clg& c, const Word& w) {
  if (w.rank() != c.rank()) throw error("word problem: rank mismatch");
  switch (c.form) {
    case Clg::Form::Free:
      return w.empty();
    case Clg::Form::Product: {
      // free product: trivial iff the block decomposition collapses entirely
      std::vector<std::pair<int, Word>> blocks;  // (factor, local word)
      for (int v : w.letters()) {
        int f = product_factor_of(c, v);
        int loc = std::abs(v) - c.part_offset[static_cast<size_t>(f)];
        if (blocks.empty() || blocks.back().first != f)
          blocks.push_back({f, Word(c.parts[static_cast<size_t>(f)]->rank())});
        blocks.back().second.push(v > 0 ? loc : -loc);
      }
      bool changed = true;
      while (changed) {
        changed = false;
        for (size_t i = 0; i < blocks.size(); ++i) {
          if (clg_is_identity(*c.parts[static_cast<size_t>(blocks[i].first)], blocks[i].second)) {
            if (i > 0 && i + 1 < blocks.size() && blocks[i - 1].first == blocks[i + 1].first) {
              blocks[i - 1].second = blocks[i - 1].second * blocks[i + 1].second;
              blocks.erase(blocks.begin() + static_cast<long>(i),
                           blocks.begin() + static_cast<long>(i) + 2);
            } else {
              blocks.erase(blocks.begin() + static_cast<long>(i));
            }
            changed = true;
            break;
          }
        }
      }
      return blocks.empty();
    }
    case Clg::Form::Indec: {
      if (c.split) return c.split->is_identity(w);
      const VertexData& v = c.gad->vertices.at(0);
      if (v.is_abelian())
        return is_zero_vec(abelian_coords(w, c.rank()));
      if (v.is_rigid() && !std::get<RigidVertex>(v.data).pres.is_free())
        throw error("word problem unavailable for a non-free rigid vertex");
      return w.empty();  // free vertex group
    }
  }
  throw error("unreachable");
}

// ---- validation ---------------------------------------------------------

enum class CheckStatus { Pass, Fail, Approximate };

struct CheckResult {
  std::string name;
  CheckStatus status;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool ok() const {
    for (const auto& ch : checks)
      if (ch.status == CheckStatus::Fail) return false;
    return true;
  }
};

// Extracts the common-root exponent functional of a commuting family in a
// free group; empty optional if the family does not commute pairwise.
inline std::optional<IVec> commuting_family_functional(const std::vector<Word>& ws) {
  Word root;
  bool have = false;
  for (const auto& w : ws) {
    if (w.empty()) continue;
    Word r = primitive_root(w).root;
    if (!have) {
      root = r;
      have = true;
    } else if (r != root && r != root.inverse()) {
      return std::nullopt;
    }
  }
  IVec m(ws.size(), 0);
  for (size_t i = 0; i < ws.size(); ++i) {
    if (ws[i].empty()) continue;
    RootPower rp = primitive_root(ws[i]);
    m[i] = (rp.root == root) ? rp.exponent : -rp.exponent;
  }
  return m;
}

inline ValidationReport validate_clg(const Clg& c, int ball_radius = 2) {
  if (ball_radius < 1) throw error("validate_clg needs ball radius >= 1");
  ValidationReport rep;
  auto add = [&rep](std::string name, CheckStatus st, std::string detail = "") {
    rep.checks.push_back({std::move(name), st, std::move(detail)});
  };
  switch (c.form) {
    case Clg::Form::Free:
      add("free", CheckStatus::Pass, "level 0 free group");
      return rep;
    case Clg::Form::Product: {
      for (size_t i = 0; i < c.parts.size(); ++i) {
        ValidationReport sub = validate_clg(*c.parts[i], ball_radius);
        for (auto& ch : sub.checks)
          add("part" + std::to_string(i) + "." + ch.name, ch.status, ch.detail);
      }
      add("product-level",
          c.level == [&] {
            int m = 0;
            for (const auto& p : c.parts) m = std::max(m, p->level);
            return m;
          }()
              ? CheckStatus::Pass
              : CheckStatus::Fail);
      return rep;
    }
    case Clg::Form::Indec:
      break;
  }
  if (c.level != c.lower->level + 1) throw error("level mismatch in recursion");
  {
    ValidationReport sub = validate_clg(*c.lower, ball_radius);
    for (auto& ch : sub.checks) add("lower." + ch.name, ch.status, ch.detail);
  }
  // the retraction respects the relators
  {
    bool all_ok = true;
    bool exact = true;
    for (const auto& r : c.pres.relators) {
      Word img = substitute(r, c.rho, c.lower->rank());
      try {
        if (!clg_is_identity(*c.lower, img)) all_ok = false;
      } catch (const error&) {
        exact = false;
        if (!img.empty()) all_ok = false;  // conservative
      }
    }
    add("rho-respects-relators", all_ok ? (exact ? CheckStatus::Pass : CheckStatus::Approximate)
                                        : CheckStatus::Fail);
  }
  bool lower_free = c.lower->form == Clg::Form::Free;
  auto rho_of_local = [&](int voff, const Word& local) {
    return substitute(lift_local(local, voff, c.rank()), c.rho, c.lower->rank());
  };
  for (size_t vi = 0; vi < c.gad->vertices.size(); ++vi) {
    const VertexData& v = c.gad->vertices[vi];
    int voff = c.layout->vertex_gen_offset[vi];
    std::string tag = "vertex-" + v.id;
    if (v.is_abelian()) {
      const auto& av = std::get<AbelianVertex>(v.data);
      std::vector<Word> imgs;
      for (int i = 1; i <= av.rank; ++i)
        imgs.push_back(rho_of_local(voff, word_from_letters(av.rank, {i})));
      if (!lower_free) {
        add(tag, CheckStatus::Approximate, "non-free lower level; peripheral check skipped");
        continue;
      }
      auto m = commuting_family_functional(imgs);
      if (!m) {
        add(tag, CheckStatus::Fail, "abelian vertex images do not commute");
        continue;
      }
      // rho injective on the peripheral sublattice <=> the exponent
      // functional does not vanish on any nonzero peripheral-lattice element
      bool inj = injective_on_lattice({*m}, av.peripheral);
      add(tag, inj ? CheckStatus::Pass : CheckStatus::Fail,
          inj ? "peripheral functional injective" : "functional kills a peripheral vector");
    } else if (v.is_qh()) {
      Presentation vp = v.presentation();
      bool found = false;
      std::string witness;
      for (int i = 1; i <= vp.rank() && !found; ++i)
        for (int j = i + 1; j <= vp.rank() && !found; ++j) {
          Word gi = rho_of_local(voff, word_from_letters(vp.rank(), {i}));
          Word gj = rho_of_local(voff, word_from_letters(vp.rank(), {j}));
          Word comm = gi * gj * gi.inverse() * gj.inverse();
          bool nontriv;
          try {
            nontriv = !clg_is_identity(*c.lower, comm);
          } catch (const error&) {
            nontriv = !comm.empty();
          }
          if (nontriv) {
            found = true;
            witness = vp.generators[static_cast<size_t>(i - 1)] + "," +
                      vp.generators[static_cast<size_t>(j - 1)];
          }
        }
      add(tag, found ? CheckStatus::Pass : CheckStatus::Fail,
          found ? "non-abelian image witness: " + witness : "image is abelian");
    } else {
      // rigid: injectivity on the ball of the given radius (finite check)
      Presentation vp = v.presentation();
      if (!vp.is_free()) {
        add(tag, CheckStatus::Approximate, "non-free rigid vertex; ball check skipped");
        continue;
      }
      auto ball = reduced_words_up_to(vp.rank(), ball_radius);
      bool inj = true;
      for (size_t i = 0; i < ball.size() && inj; ++i)
        for (size_t j = i + 1; j < ball.size() && inj; ++j) {
          Word d = rho_of_local(voff, ball[i] * ball[j].inverse());
          try {
            if (clg_is_identity(*c.lower, d)) inj = false;
          } catch (const error&) {
            if (d.empty()) inj = false;
          }
        }
      add(tag, inj ? CheckStatus::Approximate : CheckStatus::Fail,
          inj ? "injective on ball radius " + std::to_string(ball_radius)
              : "two ball elements collide");
    }
  }
  for (const auto& e : c.gad->edges) {
    std::string tag = "edge-" + e.id;
    int voff = c.layout->vertex_gen_offset[static_cast<size_t>(e.v1)];
    std::vector<Word> imgs;
    for (const auto& ci : e.img1) imgs.push_back(rho_of_local(voff, ci));
    if (!lower_free) {
      add(tag, CheckStatus::Approximate, "non-free lower level; edge check skipped");
      continue;
    }
    auto m = commuting_family_functional(imgs);
    if (!m) {
      add(tag, CheckStatus::Fail, "edge image family does not commute in the lower group");
      continue;
    }
    std::vector<IVec> std_basis;
    for (int i = 0; i < e.rank; ++i) {
      IVec u(static_cast<size_t>(e.rank), 0);
      u[static_cast<size_t>(i)] = 1;
      std_basis.push_back(u);
    }
    bool inj = injective_on_lattice({*m}, std_basis);
    add(tag, inj ? CheckStatus::Pass : CheckStatus::Fail,
        inj ? "injective on the edge group" : "edge group element dies");
  }
  return rep;
}

// ---- free-group criterion -----------------------------------------------

// g = a0 z^{i1} a1 ... z^{in} an with interior a's not commuting with z.
struct CriterionInstance {
  Word z;
  std::vector<Word> a;  // n+1 words
  std::vector<long long> exponents;  // n nonzero exponents
};

inline CriterionInstance make_criterion_instance(Word z, std::vector<Word> a,
                                                 std::vector<long long> exponents) {
  if (z.empty()) throw error("criterion: z must be nontrivial");
  if (exponents.empty()) throw error("criterion: need n >= 1");
  if (a.size() != exponents.size() + 1) throw error("criterion: need n+1 coefficient words");
  for (long long e : exponents)
    if (e == 0) throw error("criterion: exponents must be nonzero");
  for (size_t k = 1; k + 1 < a.size(); ++k)
    if (commutes(a[k], z)) throw error("criterion: interior coefficient commutes with z");
  return {std::move(z), std::move(a), std::move(exponents)};
}

// Minimal N with N * |primitive root of the cyclic core of z| >= the largest
// of |a_{k-1}| + |a_k| + |cyclic core of z|.
inline long long sufficient_exponent(const Word& z, const std::vector<Word>& a) {
  if (z.empty()) throw error("sufficient_exponent: trivial z");
  Word core = cyclic_reduce(z).core;
  long long root_len = primitive_root(core).root.length();
  long long bound = 0;
  for (size_t k = 1; k < a.size(); ++k)
    bound = std::max(bound, static_cast<long long>(a[k - 1].length() + a[k].length()) +
                                core.length());
  if (a.size() < 2) bound = core.length();
  long long n = (bound + root_len - 1) / root_len;
  return std::max<long long>(1, n);
}

inline Word criterion_element(const CriterionInstance& inst) {
  Word g = inst.a[0];
  for (size_t k = 0; k < inst.exponents.size(); ++k)
    g = g * inst.z.pow(inst.exponents[k]) * inst.a[k + 1];
  return g;
}

inline bool criterion_nontrivial(const CriterionInstance& inst) {
  bool nontrivial = !criterion_element(inst).empty();
  long long bound = sufficient_exponent(inst.z, inst.a);
  bool at_bound = true;
  for (long long e : inst.exponents)
    if (std::llabs(e) < bound) at_bound = false;
  if (at_bound && !nontrivial)
    throw error("criterion bound violated: trivial product with exponents at the bound");
  return nontrivial;
}

// ---- surface curve selection -------------------------------------------

struct SurfaceCurve {
  Word zeta;  // over the standard surface generators
  std::string case_fired;
  std::vector<std::string> notes;
};

// Partition of indices by commutation of the (nontrivial, free-group) images.
inline std::vector<int> commutation_classes(const std::vector<Word>& imgs) {
  std::vector<int> cls(imgs.size());
  for (size_t i = 0; i < imgs.size(); ++i) cls[i] = static_cast<int>(i);
  for (size_t i = 0; i < imgs.size(); ++i)
    for (size_t j = i + 1; j < imgs.size(); ++j)
      if (commutes(imgs[i], imgs[j])) {
        int a = cls[i], b = cls[j];
        for (auto& x : cls)
          if (x == b) x = a;
      }
  return cls;
}

inline SurfaceCurve choose_surface_curve(const QhVertex& qh, const std::vector<Word>& rho_images,
                                         int lower_rank) {
  qh.validate();
  Presentation sp = qh.presentation();
  if (static_cast<int>(rho_images.size()) != sp.rank())
    throw error("choose_surface_curve: need one image per surface generator");
  auto img_of = [&](const Word& w) { return substitute(w, rho_images, lower_rank); };
  std::vector<Word> bnd = qh.boundary_words();
  SurfaceCurve out;
  if (qh.orientable && qh.genus >= 1) {
    Word a1 = word_from_letters(sp.rank(), {1});
    if (!img_of(a1).empty()) {
      out.zeta = a1;
      out.case_fired = "positive-genus";
      out.notes.push_back("rho(a1) nontrivial");
      return out;
    }
    Word cand = a1 * bnd[0];
    if (img_of(cand).empty())
      throw error("choose_surface_curve: rho(a1 d1) trivial; hypotheses unmet");
    out.zeta = cand;
    out.case_fired = "positive-genus";
    out.notes.push_back("rho(a1) trivial, rho(a1 d1) nontrivial");
    return out;
  }
  std::vector<Word> curve_words;
  if (!qh.orientable) {
    // replace any one-sided generator with trivial image by d1 * c_i first
    for (int i = 1; i <= qh.genus; ++i) {
      Word ci = word_from_letters(sp.rank(), {i});
      if (img_of(ci).empty()) {
        Word fixed = bnd[0] * ci;
        if (img_of(fixed).empty())
          throw error("choose_surface_curve: rho(d1 c_i) still trivial");
        curve_words.push_back(fixed);
        out.notes.push_back("replaced c" + std::to_string(i) + " by d1 c" + std::to_string(i));
      } else {
        curve_words.push_back(ci);
      }
    }
    out.case_fired = "non-orientable";
  } else {
    out.case_fired = "punctured-sphere";
  }
  for (const auto& d : bnd) curve_words.push_back(d);
  std::vector<Word> imgs;
  for (const auto& w : curve_words) {
    Word im = img_of(w);
    if (im.empty()) throw error("choose_surface_curve: trivial boundary image");
    imgs.push_back(im);
  }
  std::vector<int> cls = commutation_classes(imgs);
  for (size_t i = 0; i < imgs.size(); ++i)
    for (size_t j = i + 1; j < imgs.size(); ++j)
      if (cls[i] != cls[j]) {
        out.zeta = curve_words[i] * curve_words[j];
        out.notes.push_back("noncommuting image pair at indices " + std::to_string(i) + "," +
                            std::to_string(j));
        return out;
      }
  throw error("choose_surface_curve: all images commute (abelian image)");
}

// ---- discriminator ------------------------------------------------------

enum class DiscriminationMode { Nontrivial, Injective };

struct DiscriminationStep {
  std::string place;  // edge or vertex id
  Word zeta;          // over the group's generators; identity when unused
  long long k = 0;
  std::vector<Word> recursed;  // lower-level recursion set
};

struct Discrimination {
  Hom h;  // into the rank-2 free group
  std::vector<DiscriminationStep> trace;
};

namespace detail {

inline Hom rebase(const Presentation& domain, const Hom& f) {
  return Hom(domain, f.target_rank(), f.images());
}

// h = f o (g -> images_lower[g]) as a hom from `domain` into f's target.
inline Hom compose_through(const Presentation& domain, const std::vector<Word>& images_lower,
                           const Hom& f) {
  std::vector<Word> images;
  for (const auto& im : images_lower)
    images.push_back(substitute(im, f.images(), f.target_rank()));
  return Hom(domain, f.target_rank(), images);
}

inline Discrimination disc_nontrivial(const Clg& c, const std::vector<Word>& X);

inline Hom free_embedding_hom(const Presentation& domain) {
  int n = domain.rank();
  if (n <= 2) {
    std::vector<Word> images;
    for (int i = 1; i <= n; ++i) images.push_back(word_from_letters(2, {i}));
    return Hom(domain, 2, images);
  }
  return Hom(domain, 2, embed_free_into_rank2(n).images());
}

inline Discrimination disc_free(const Clg& c) {
  return {free_embedding_hom(c.pres), {}};
}

inline Discrimination disc_product(const Clg& c, const std::vector<Word>& X) {
  size_t m = c.parts.size();
  // collect per-factor syllables
  std::vector<std::vector<Word>> ys(m);
  for (const auto& x : X) {
    for (size_t start = 0; start < x.letters().size();) {
      int f = product_factor_of(c, x.letters()[start]);
      Word blk(c.parts[static_cast<size_t>(f)]->rank());
      size_t end = start;
      while (end < x.letters().size() && product_factor_of(c, x.letters()[end]) == f) {
        int v = x.letters()[end];
        int loc = std::abs(v) - c.part_offset[static_cast<size_t>(f)];
        blk.push(v > 0 ? loc : -loc);
        ++end;
      }
      if (!clg_is_identity(*c.parts[static_cast<size_t>(f)], blk))
        push_unique(ys[static_cast<size_t>(f)], blk);
      start = end;
    }
  }
  std::vector<Discrimination> subs;
  for (size_t i = 0; i < m; ++i) subs.push_back(disc_nontrivial(*c.parts[i], ys[i]));
  // route factor i through its own rank-2 block of F_{2m}, then into F_2
  int big = 2 * static_cast<int>(m);
  Hom emb = big <= 2 ? identity_hom(2) : embed_free_into_rank2(big);
  std::vector<Word> images;
  for (size_t i = 0; i < m; ++i) {
    for (const auto& im : subs[i].h.images()) {
      Word shifted(big);
      for (int v : im.letters()) {
        int g = std::abs(v) + 2 * static_cast<int>(i);
        shifted.push(v > 0 ? g : -g);
      }
      images.push_back(substitute(shifted, emb.images(), 2));
    }
  }
  Discrimination out{Hom(c.pres, 2, images), {}};
  for (auto& s : subs)
    for (auto& st : s.trace) out.trace.push_back(std::move(st));
  return out;
}

inline Word rho_image(const Clg& c, const Word& w) {
  return substitute(w, c.rho, c.lower->rank());
}

inline Discrimination disc_abelian_vertex(const Clg& c, const std::vector<Word>& X) {
  const auto& av = std::get<AbelianVertex>(c.gad->vertices[0].data);
  int n = av.rank;
  std::vector<IVec> vecs;
  for (const auto& x : X) {
    IVec v = abelian_coords(x, n);
    if (is_zero_vec(v)) throw error("discriminate: X contains the identity");
    vecs.push_back(v);
  }
  if (av.peripheral.empty()) {
    // inner product with the canonical discriminating vector, into <first target generator>
    AbelianDiscriminator ad = abelian_discriminator(vecs);
    std::vector<Word> images;
    for (int i = 0; i < n; ++i) {
      Word im(2);
      long long e = ad.z[static_cast<size_t>(i)];
      for (long long t = 0; t < std::llabs(e); ++t) im.push(e > 0 ? 1 : -1);
      images.push_back(im);
    }
    Discrimination out{Hom(c.pres, 2, images), {}};
    out.trace.push_back({c.gad->vertices[0].id, Word(c.rank()), 0, {}});
    return out;
  }
  // peripheral-fixing automorphism search in an adapted basis: alpha fixes
  // the saturation of the peripheral lattice pointwise and acts unimodularly
  // on the quotient
  IMat pcols(static_cast<size_t>(n), IVec(av.peripheral.size(), 0));
  for (size_t j = 0; j < av.peripheral.size(); ++j)
    for (int i = 0; i < n; ++i)
      pcols[static_cast<size_t>(i)][j] = av.peripheral[j][static_cast<size_t>(i)];
  Smith sm = smith_form(pcols);
  int r = sm.rank;
  int q = n - r;
  // basis = columns of einv; first r of them span the saturation
  const IMat& B = sm.einv;
  const IMat& Binv = sm.e;
  auto alpha_from = [&](const IVec& t) {
    IMat blk = identity_mat(n);
    size_t idx = 0;
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < q; ++j) blk[static_cast<size_t>(i)][static_cast<size_t>(r + j)] = t[idx++];
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j)
        blk[static_cast<size_t>(r + i)][static_cast<size_t>(r + j)] += t[idx++];
    return mat_mul(B, mat_mul(blk, Binv));
  };
  int tn = r * q + q * q;
  std::optional<IMat> alpha;
  auto try_t = [&](const IVec& t) {
    IMat cand = alpha_from(t);
    long long det = det_mat(cand);
    if (det != 1 && det != -1) return false;
    // images of X under rho o alpha must be nontrivial in the lower group
    for (const auto& v : vecs) {
      IVec av2 = mat_apply(cand, v);
      Word xw = word_from_coords(av2, n);
      Word im = rho_image(c, xw);
      if (clg_is_identity(*c.lower, im)) return false;
    }
    alpha = cand;
    return true;
  };
  if (!try_t(IVec(static_cast<size_t>(tn), 0))) {
    if (tn == 0) throw error("discriminate: peripheral lattice saturates; no freedom left");
    enumerate_shells(tn, 64, [&](const IVec& t) { return try_t(t); });
  }
  if (!alpha) throw error("discriminate: no peripheral-fixing automorphism found");
  // recurse on the lower group
  std::vector<Word> Y;
  std::vector<Word> ax;  // alpha-images of X as vertex words
  for (const auto& v : vecs) {
    Word xw = word_from_coords(mat_apply(*alpha, v), n);
    ax.push_back(xw);
    push_unique(Y, rho_image(c, xw));
  }
  Discrimination sub = disc_nontrivial(*c.lower, Y);
  std::vector<Word> images;
  for (int i = 1; i <= n; ++i) {
    IVec col(static_cast<size_t>(n));
    for (int rr = 0; rr < n; ++rr)
      col[static_cast<size_t>(rr)] = (*alpha)[static_cast<size_t>(rr)][static_cast<size_t>(i - 1)];
    Word gi = word_from_coords(col, n);
    images.push_back(substitute(rho_image(c, gi), sub.h.images(), 2));
  }
  Discrimination out{Hom(c.pres, 2, images), std::move(sub.trace)};
  out.trace.push_back({c.gad->vertices[0].id, Word(c.rank()), 0, Y});
  return out;
}

inline Discrimination disc_indec_no_edge(const Clg& c, const std::vector<Word>& X) {
  const VertexData& v = c.gad->vertices[0];
  if (v.is_abelian()) return disc_abelian_vertex(c, X);
  if (v.is_qh()) {
    // surface with boundary: free fundamental group
    Discrimination out{free_embedding_hom(c.pres), {}};
    return out;
  }
  // rigid: push through the retraction and recurse
  std::vector<Word> Y;
  for (const auto& x : X) {
    Word im = rho_image(c, x);
    if (clg_is_identity(*c.lower, im))
      throw error("discriminate: retraction kills a rigid-vertex element");
    push_unique(Y, im);
  }
  Discrimination sub = disc_nontrivial(*c.lower, Y);
  Discrimination out{compose_through(c.pres, c.rho, sub.h), std::move(sub.trace)};
  out.trace.push_back({v.id, Word(c.rank()), 0, Y});
  return out;
}

inline Discrimination disc_one_edge(const Clg& c, const std::vector<Word>& X) {
  const Splitting& s = *c.split;
  Word zeta_local = s.side[0].edge_images[0];
  if (zeta_local.empty()) throw error("discriminate: trivial edge generator image");
  Word zeta = s.to_global(0, zeta_local);
  SyllableSets syl = syllables_of(s, X);
  // conservative recursion set: syllables, their zeta-commutators, and zeta
  std::vector<Word> Yg;
  auto add_g = [&](const Word& w) { push_unique(Yg, w); };
  for (const auto& seq : {syl.x1, syl.x2}) {
    for (const auto& x : seq) {
      add_g(x);
      add_g(zeta * x * zeta.inverse() * x.inverse());
    }
  }
  add_g(zeta);
  std::vector<Word> Y;
  for (const auto& y : Yg) {
    Word im = rho_image(c, y);
    if (!clg_is_identity(*c.lower, im)) push_unique(Y, im);
  }
  Discrimination sub = disc_nontrivial(*c.lower, Y);
  Word zF = substitute(rho_image(c, zeta), sub.h.images(), 2);
  if (zF.empty()) throw error("discriminate: edge element dies in the free image");
  // starting exponent from the criterion's sufficient bound over the
  // syllable images
  Word zcore = cyclic_reduce(zF).core;
  long long root_len = primitive_root(zcore).root.length();
  long long lmax = 0;
  for (const auto& y : Y)
    lmax = std::max<long long>(lmax, substitute(y, sub.h.images(), 2).length());
  for (const auto& x : X)
    lmax = std::max<long long>(lmax,
                               substitute(rho_image(c, x), sub.h.images(), 2).length());
  long long k0 = std::max<long long>(1, (2 * lmax + zcore.length() + root_len - 1) / root_len);
  for (long long k = k0, iter = 0; iter < 24; k *= 2, ++iter) {
    ModAut twist = dehn_twist(s, zeta.pow(k), 1);
    std::vector<Word> images;
    for (const auto& im : twist.images)
      images.push_back(substitute(rho_image(c, im), sub.h.images(), 2));
    Hom cand(c.pres, 2, images);
    bool good = true;
    for (const auto& x : X)
      if (cand(x).empty()) {
        good = false;
        break;
      }
    if (good) {
      Discrimination out{cand, std::move(sub.trace)};
      out.trace.push_back({s.edge_id, zeta, k, Y});
      return out;
    }
  }
  throw error("discriminate: twist exponent search failed on edge " + s.edge_id);
}

inline Discrimination disc_nontrivial(const Clg& c, const std::vector<Word>& X) {
  for (const auto& x : X)
    if (clg_is_identity(c, x)) throw error("discriminate: X contains the identity");
  switch (c.form) {
    case Clg::Form::Free:
      return disc_free(c);
    case Clg::Form::Product:
      return disc_product(c, X);
    case Clg::Form::Indec:
      return c.split ? disc_one_edge(c, X) : disc_indec_no_edge(c, X);
  }
  throw error("unreachable");
}

}  // namespace detail

inline Discrimination discriminate(const Clg& c, const std::vector<Word>& X,
                                   DiscriminationMode mode) {
  for (const auto& x : X) {
    if (x.rank() != c.rank()) throw error("discriminate: word rank mismatch");
    if (clg_is_identity(c, x)) throw error("discriminate: X contains the identity");
  }
  std::vector<Word> work;
  for (const auto& x : X) push_unique(work, x);
  std::vector<std::pair<size_t, size_t>> distinct_pairs;
  if (mode == DiscriminationMode::Injective) {
    size_t base = work.size();
    for (size_t i = 0; i < base; ++i)
      for (size_t j = i + 1; j < base; ++j) {
        Word d = work[i] * work[j].inverse();
        if (!clg_is_identity(c, d)) {
          distinct_pairs.push_back({i, j});
          push_unique(work, d);
        }
      }
  }
  Discrimination out = detail::disc_nontrivial(c, work);
  // a-posteriori verification is the soundness anchor
  for (const auto& x : work)
    if (out.h(x).empty()) throw error("discriminate: verification failed (trivial image)");
  if (mode == DiscriminationMode::Injective) {
    for (auto [i, j] : distinct_pairs)
      if (out.h(work[i]) == out.h(work[j]))
        throw error("discriminate: verification failed (colliding images)");
  }
  std::reverse(out.trace.begin(), out.trace.end());
  return out;
}

// ---- serialization ------------------------------------------------------
// Clg file: one `clg` line, `level=`, `form=free|product|indec`, plus
// form-specific keys (rank=/gens= ; parts=a.clg,b.clg ; gad= lower= rho=).
// Referenced paths are resolved relative to the clg file.

inline Clg parse_clg_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw error("cannot open clg file: " + path.string());
  std::string line;
  std::map<std::string, std::string> kv;
  bool seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string what;
    ls >> what;
    if (what != "clg") throw error("unknown line in clg file: " + what);
    if (seen) throw error("multiple clg lines in one file");
    seen = true;
    kv = parse_kv(ls);
  }
  if (!seen) throw error("clg file has no clg line");
  auto dir = path.parent_path();
  const std::string form = kv.count("form") ? kv["form"] : "";
  Clg c;
  if (form == "free") {
    if (kv.count("gens"))
      c = make_free_clg(split_list(kv["gens"]));
    else
      c = make_free_clg(std::stoi(kv.at("rank")));
  } else if (form == "product") {
    std::vector<ClgPtr> parts;
    for (const auto& p : split_list(kv.at("parts")))
      parts.push_back(std::make_shared<Clg>(parse_clg_file(dir / p)));
    c = make_product_clg(std::move(parts));
  } else if (form == "indec") {
    std::ifstream gin(dir / kv.at("gad"));
    if (!gin) throw error("cannot open gad file: " + kv.at("gad"));
    Gad g = parse_gad(gin);
    ClgPtr lower = std::make_shared<Clg>(parse_clg_file(dir / kv.at("lower")));
    FundamentalLayout lay = fundamental_layout(g);
    std::ifstream rin(dir / kv.at("rho"));
    if (!rin) throw error("cannot open rho file: " + kv.at("rho"));
    RawHom raw = parse_hom_raw(rin, lay.pres, lower->pres.generators);
    if (raw.target_rank != lower->rank())
      throw error("rho target rank does not match the lower level");
    c = make_indec_clg(std::move(g), std::move(lower), std::move(raw.images));
  } else {
    throw error("unknown clg form: " + form);
  }
  if (kv.count("level") && std::stoi(kv["level"]) != c.level)
    throw error("level mismatch in recursion");
  return c;
}

inline void write_trace(std::ostream& out, const Discrimination& d, const Alphabet& names) {
  for (const auto& st : d.trace)
    out << "step edge=" << st.place << " zeta=" << format_word(st.zeta, names) << " k=" << st.k
        << '\n';
}

}  // namespace limtk
