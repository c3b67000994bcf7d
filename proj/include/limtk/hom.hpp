#pragma once

// Finite presentations, verified homomorphisms into free groups, and the two
// elementary discrimination constructions (free-factor embedding of a free
// group into rank 2, and inner-product discrimination of a free abelian
// group into Z).

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "limtk/intlin.hpp"
#include "limtk/word.hpp"

namespace limtk {

struct Presentation {
  Alphabet generators;
  std::vector<Word> relators;  // over the generators

  int rank() const { return static_cast<int>(generators.size()); }

  void validate() const {
    std::set<std::string> seen;
    for (const auto& g : generators)
      if (!seen.insert(g).second) throw error("duplicate generator: " + g);
    for (const auto& r : relators) {
      if (r.empty()) throw error("empty relator");
      if (r.rank() != rank()) throw error("relator rank mismatch");
    }
  }

  bool is_free() const { return relators.empty(); }
};

inline Presentation free_presentation(int rank) {
  Presentation p;
  p.generators = default_alphabet(rank);
  return p;
}

inline Presentation free_presentation(Alphabet names) {
  Presentation p;
  p.generators = std::move(names);
  return p;
}

// Substitutes generator images into a word and reduces.
inline Word substitute(const Word& w, const std::vector<Word>& images, int target_rank) {
  Word out(target_rank);
  for (int v : w.letters()) {
    const Word& img = images[static_cast<size_t>(std::abs(v)) - 1];
    if (v > 0)
      for (int x : img.letters()) out.push(x);
    else
      for (auto it = img.letters().rbegin(); it != img.letters().rend(); ++it) out.push(-*it);
  }
  return out;
}

// A homomorphism from a presented group into a free group; relators are
// checked at construction.
class Hom {
 public:
  Hom(Presentation domain, int target_rank, std::vector<Word> images)
      : domain_(std::move(domain)), target_rank_(target_rank), images_(std::move(images)) {
    domain_.validate();
    if (target_rank_ < 1) throw error("target rank must be positive");
    if (static_cast<int>(images_.size()) != domain_.rank())
      throw error("need one image per generator");
    for (const auto& w : images_)
      if (w.rank() != target_rank_) throw error("image rank mismatch");
    for (size_t i = 0; i < domain_.relators.size(); ++i) {
      if (!substitute(domain_.relators[i], images_, target_rank_).empty())
        throw error("relator " + std::to_string(i) + " (" +
                    format_word(domain_.relators[i], domain_.generators) +
                    ") does not map to the identity");
    }
  }

  const Presentation& domain() const { return domain_; }
  int target_rank() const { return target_rank_; }
  const std::vector<Word>& images() const { return images_; }

  Word operator()(const Word& w) const {
    if (w.rank() != domain_.rank()) throw error("word not over the domain generators");
    return substitute(w, images_, target_rank_);
  }

 private:
  Presentation domain_;
  int target_rank_;
  std::vector<Word> images_;
};

inline Hom validate_hom(const Presentation& p, int target_rank, std::vector<Word> images) {
  return Hom(p, target_rank, std::move(images));
}

inline Word evaluate(const Hom& f, const Word& w) { return f(w); }

inline int hom_length(const Hom& f) {
  int m = 0;
  for (const auto& w : f.images()) m = std::max(m, w.length());
  return m;
}

inline int hom_total_length(const Hom& f) {
  int s = 0;
  for (const auto& w : f.images()) s += w.length();
  return s;
}

inline bool nontrivial_on(const Hom& f, const std::vector<Word>& xs) {
  for (const auto& x : xs)
    if (f(x).empty()) return false;
  return true;
}

inline bool injective_on(const Hom& f, const std::vector<Word>& xs) {
  for (size_t i = 0; i < xs.size(); ++i)
    for (size_t j = i + 1; j < xs.size(); ++j)
      if (f(xs[i]) == f(xs[j])) return false;
  return true;
}

inline Hom identity_hom(int rank) {
  std::vector<Word> images;
  for (int i = 1; i <= rank; ++i) images.push_back(word_from_letters(rank, {i}));
  return Hom(free_presentation(rank), rank, images);
}

// x_i |-> b^i a b^-i, a free basis of an infinite-rank free factor of F_2.
inline Hom embed_free_into_rank2(int n) {
  if (n < 1) throw error("embed_free_into_rank2 needs n >= 1");
  std::vector<Word> images;
  for (int i = 1; i <= n; ++i) {
    Word w(2);
    for (int k = 0; k < i; ++k) w.push(2);
    w.push(1);
    for (int k = 0; k < i; ++k) w.push(-2);
    images.push_back(w);
  }
  Presentation dom;
  for (int i = 1; i <= n; ++i) dom.generators.push_back("x" + std::to_string(i));
  return Hom(dom, 2, images);
}

// ---- abelian discrimination --------------------------------------------

// Enumerates integer vectors by max-norm shells k = 1, 2, ...; within a
// shell, lexicographically ascending, skipping interior points. Calls the
// visitor until it returns true; returns the accepted vector.
template <typename Pred>
inline std::optional<IVec> enumerate_shells(int n, int max_shell, Pred&& accept) {
  IVec v(static_cast<size_t>(n), 0);
  for (int k = 1; k <= max_shell; ++k) {
    for (size_t i = 0; i < v.size(); ++i) v[i] = -k;
    while (true) {
      long long norm = 0;
      for (long long x : v) norm = std::max(norm, std::llabs(x));
      if (norm == k && accept(const_cast<const IVec&>(v))) return v;
      // next vector in lexicographic order over [-k, k]^n
      int i = n - 1;
      while (i >= 0 && v[static_cast<size_t>(i)] == k) {
        v[static_cast<size_t>(i)] = -k;
        --i;
      }
      if (i < 0) break;
      ++v[static_cast<size_t>(i)];
    }
  }
  return std::nullopt;
}

struct AbelianDiscriminator {
  IVec z;  // inner product with z defines the homomorphism to Z
};

inline AbelianDiscriminator abelian_discriminator(const std::vector<IVec>& vectors,
                                                  int max_shell = 1000) {
  if (vectors.empty()) return {{1}};
  int n = static_cast<int>(vectors[0].size());
  for (const auto& v : vectors) {
    if (static_cast<int>(v.size()) != n) throw error("vector dimension mismatch");
    if (is_zero_vec(v)) throw error("abelian_discriminator requires nonzero vectors");
  }
  auto ok = [&](const IVec& z) {
    for (const auto& v : vectors) {
      long long dot = 0;
      for (int i = 0; i < n; ++i) dot += z[static_cast<size_t>(i)] * v[static_cast<size_t>(i)];
      if (dot == 0) return false;
    }
    return true;
  };
  auto z = enumerate_shells(n, max_shell, ok);
  if (!z) throw error("abelian_discriminator: no z found within shell bound");
  return {*z};
}

// ---- stable kernels over a finite window --------------------------------

enum class StableVerdict { EventuallyTrivial, EventuallyNontrivial, UnstableInWindow };

struct StableReport {
  Word element;
  std::vector<bool> trivial;  // per index: image trivial?
  StableVerdict verdict;
};

inline std::vector<StableReport> stable_kernel_window(const std::vector<Hom>& fs,
                                                      const std::vector<Word>& xs) {
  if (fs.empty()) throw error("stable_kernel_window: empty sequence");
  for (const auto& f : fs) {
    if (f.domain().rank() != fs[0].domain().rank() || f.target_rank() != fs[0].target_rank())
      throw error("stable_kernel_window: homs must share domain and target rank");
  }
  std::vector<StableReport> out;
  size_t window = fs.size();
  size_t need = (window + 1) / 2;  // constant tail of length >= half the window
  for (const auto& x : xs) {
    StableReport rep{x, {}, StableVerdict::UnstableInWindow};
    for (const auto& f : fs) rep.trivial.push_back(f(x).empty());
    size_t tail = 1;
    while (tail < window && rep.trivial[window - 1 - tail] == rep.trivial[window - 1]) ++tail;
    if (tail >= need)
      rep.verdict = rep.trivial[window - 1] ? StableVerdict::EventuallyTrivial
                                            : StableVerdict::EventuallyNontrivial;
    out.push_back(std::move(rep));
  }
  return out;
}

// ---- file formats -------------------------------------------------------
// Presentation: `gens a b t` then `rel <word>` lines.
// Hom: `target_rank 2` then `image <gen> <word>` lines.

inline Presentation parse_presentation(std::istream& in) {
  Presentation p;
  std::string line;
  bool have_gens = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "gens") {
      std::string g;
      while (ls >> g) p.generators.push_back(g);
      have_gens = true;
    } else if (key == "rel") {
      if (!have_gens) throw error("rel before gens");
      std::string rest;
      std::getline(ls, rest);
      p.relators.push_back(parse_word(rest, p.generators));
      if (p.relators.back().empty()) throw error("relator reduces to identity");
    } else {
      throw error("unknown line in presentation file: " + key);
    }
  }
  if (!have_gens) throw error("presentation file has no gens line");
  p.validate();
  return p;
}

inline void write_presentation(std::ostream& out, const Presentation& p) {
  out << "gens";
  for (const auto& g : p.generators) out << ' ' << g;
  out << '\n';
  for (const auto& r : p.relators) out << "rel " << format_word(r, p.generators) << '\n';
}

struct RawHom {
  int target_rank;
  std::vector<Word> images;  // aligned with the domain generators
};

// Reads the hom file without validating relators (validation depends on the
// caller's word problem for the target).
inline RawHom parse_hom_raw(std::istream& in, const Presentation& domain,
                            const Alphabet& target_names = {}) {
  int target_rank = 0;
  std::map<std::string, Word> images;
  std::string line;
  Alphabet tnames = target_names;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "target_rank") {
      ls >> target_rank;
      if (tnames.empty()) tnames = default_alphabet(target_rank);
    } else if (key == "image") {
      if (target_rank == 0) throw error("image before target_rank");
      std::string g, rest;
      ls >> g;
      std::getline(ls, rest);
      images[g] = parse_word(rest, tnames);
    } else {
      throw error("unknown line in hom file: " + key);
    }
  }
  if (target_rank == 0) throw error("hom file has no target_rank line");
  std::vector<Word> imgs;
  for (const auto& g : domain.generators) {
    auto it = images.find(g);
    if (it == images.end()) throw error("missing image for generator " + g);
    imgs.push_back(it->second);
  }
  return {target_rank, std::move(imgs)};
}

inline Hom parse_hom(std::istream& in, const Presentation& domain,
                     const Alphabet& target_names = {}) {
  RawHom raw = parse_hom_raw(in, domain, target_names);
  return Hom(domain, raw.target_rank, std::move(raw.images));
}

inline void write_hom(std::ostream& out, const Hom& f, const Alphabet& target_names = {}) {
  Alphabet tn = target_names.empty() ? default_alphabet(f.target_rank()) : target_names;
  out << "target_rank " << f.target_rank() << '\n';
  for (int i = 0; i < f.domain().rank(); ++i)
    out << "image " << f.domain().generators[static_cast<size_t>(i)] << ' '
        << format_word(f.images()[static_cast<size_t>(i)], tn) << '\n';
}

}  // namespace limtk
