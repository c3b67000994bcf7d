#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "limtk/hom.hpp"
#include "limtk/stallings.hpp"

using namespace limtk;

namespace {

Word w(const std::string& s) { return parse_word(s, default_alphabet(2)); }

Word random_product(std::mt19937_64& rng, const std::vector<Word>& gens, int len) {
  std::uniform_int_distribution<size_t> d(0, gens.size() - 1);
  std::uniform_int_distribution<int> s(0, 1);
  Word out(gens[0].rank());
  for (int i = 0; i < len; ++i) {
    const Word& g = gens[d(rng)];
    out = out * (s(rng) ? g : g.inverse());
  }
  return out;
}

}  // namespace

TEST_CASE("folded graphs have no foldable vertices and the right rank") {
  std::vector<Word> gens = {w("a a"), w("b"), w("a b a^-1")};
  FoldedGraph g(2, gens);
  REQUIRE_FALSE(g.has_foldable_vertex());
  REQUIRE(g.subgroup_rank() == 3);  // index-2 subgroup of F2: rank 3

  FoldedGraph whole(2, {w("a"), w("b")});
  REQUIRE(whole.subgroup_rank() == 2);

  FoldedGraph cyclic(2, {w("a b"), w("a b a b")});
  REQUIRE(cyclic.subgroup_rank() == 1);
}

TEST_CASE("membership in the index-2 subgroup of even a-length") {
  // <a^2, b, a b a^-1> = words with even total a-exponent
  std::vector<Word> gens = {w("a a"), w("b"), w("a b a^-1")};
  FoldedGraph g(2, gens);
  auto a_parity = [](const Word& x) {
    int s = 0;
    for (int v : x.letters())
      if (std::abs(v) == 1) s ^= 1;
    return s;
  };
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> d(1, 2);
  std::uniform_int_distribution<int> sg(0, 1);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<int> raw;
    for (int i = 0; i < trial % 12; ++i) raw.push_back(d(rng) * (sg(rng) ? 1 : -1));
    Word x = Word::reduce(2, raw);
    REQUIRE(g.member(x) == (a_parity(x) == 0));
  }
}

TEST_CASE("membership witnesses evaluate back to the word") {
  std::vector<Word> gens = {w("a a"), w("b a"), w("a b a^-1")};
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    Word x = random_product(rng, gens, trial % 8);
    Membership m = stallings_membership(gens, x);
    REQUIRE(m.member);
    // the witness is a word in the subgroup generators
    REQUIRE(substitute(m.witness, gens, 2) == x);
  }
}

TEST_CASE("non-members are rejected") {
  std::vector<Word> gens = {w("a a"), w("b b")};
  REQUIRE_FALSE(stallings_membership(gens, w("a")).member);
  REQUIRE_FALSE(stallings_membership(gens, w("a b")).member);
  REQUIRE_FALSE(stallings_membership(gens, w("b a a")).member);
  REQUIRE(stallings_membership(gens, w("a a b b a^-2")).member);
  REQUIRE(stallings_membership(gens, Word(2)).member);
}

TEST_CASE("membership agrees with brute-force enumeration on a small subgroup") {
  std::vector<Word> gens = {w("a b"), w("b a")};
  // enumerate all products of length <= 4 in the generators as ground truth
  std::vector<Word> in_subgroup = {Word(2)};
  std::vector<Word> frontier = {Word(2)};
  for (int depth = 0; depth < 4; ++depth) {
    std::vector<Word> next;
    for (const auto& u : frontier)
      for (const auto& g : gens)
        for (int sgn : {1, -1}) {
          Word v = u * (sgn > 0 ? g : g.inverse());
          next.push_back(v);
          in_subgroup.push_back(v);
        }
    frontier = std::move(next);
  }
  for (const auto& x : in_subgroup) REQUIRE(stallings_membership(gens, x).member);
  // short words definitely missed by the enumeration and not in the subgroup
  for (const auto& x : reduced_words_up_to(2, 2)) {
    if (x.empty()) continue;
    bool truth = false;
    for (const auto& y : in_subgroup) truth = truth || x == y;
    REQUIRE(stallings_membership(gens, x).member == truth);
  }
}
