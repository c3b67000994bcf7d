#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <random>
#include <sstream>

#include "limtk/gad.hpp"

using namespace limtk;

namespace {

std::string fixture(const std::string& name) { return std::string(FIXTURE_DIR) + "/" + name; }

Gad load_gad(const std::string& name) {
  std::ifstream in(fixture(name));
  REQUIRE(in.good());
  return parse_gad(in);
}

Word random_word(std::mt19937_64& rng, int rank, int maxlen) {
  std::uniform_int_distribution<int> len_d(0, maxlen);
  std::uniform_int_distribution<int> d(1, rank);
  std::uniform_int_distribution<int> s(0, 1);
  std::vector<int> out;
  int len = len_d(rng);
  for (int i = 0; i < len; ++i) out.push_back(d(rng) * (s(rng) ? 1 : -1));
  return Word::reduce(rank, out);
}

}  // namespace

TEST_CASE("surface vertices: presentation, boundary, Euler characteristic") {
  QhVertex genus2{2, true, 1};
  REQUIRE(genus2.euler_characteristic() == -3);
  REQUIRE(genus2.presentation().rank() == 4);
  auto bnd = genus2.boundary_words();
  REQUIRE(bnd.size() == 1);
  // last boundary is the inverse of the product of commutators
  Word prod(4);
  for (int i = 0; i < 2; ++i) {
    int a = 2 * i + 1, b = 2 * i + 2;
    prod = prod * word_from_letters(4, {a, b, -a, -b});
  }
  REQUIRE(bnd[0] == prod.inverse());

  QhVertex pants{0, true, 3};
  REQUIRE(pants.euler_characteristic() == -1);
  REQUIRE(pants.presentation().rank() == 2);
  auto pb = pants.boundary_words();
  REQUIRE(pb.size() == 3);
  REQUIRE((pb[0] * pb[1] * pb[2]).empty());  // the boundaries multiply to the relator
  REQUIRE(pb[2] == (pb[0] * pb[1]).inverse());

  QhVertex nonor{2, false, 1};  // Klein-bottle-with-boundary style
  REQUIRE(nonor.euler_characteristic() == -1);
  REQUIRE(nonor.boundary_words()[0] ==
          (word_from_letters(2, {1, 1}) * word_from_letters(2, {2, 2})).inverse());

  QhVertex disc{0, true, 1};
  REQUIRE_THROWS_AS(disc.validate(), error);
  QhVertex nobnd{1, true, 0};
  REQUIRE_THROWS_AS(nobnd.validate(), error);
}

TEST_CASE("gad validation") {
  Gad g = load_gad("double.gad");
  REQUIRE_NOTHROW(g.validate());
  REQUIRE(g.vertices.size() == 2);
  REQUIRE(g.edges.size() == 1);

  // images that do not commute within one side are rejected for rank-2 edges
  Gad bad = g;
  bad.edges[0].rank = 2;
  bad.edges[0].img1 = {parse_word("a", {"a", "b"}), parse_word("b", {"a", "b"})};
  bad.edges[0].img2 = {parse_word("c", {"c", "d"}), parse_word("d", {"c", "d"})};
  REQUIRE_THROWS_AS(bad.validate(), error);

  Gad loose = g;
  loose.edges.clear();
  REQUIRE_THROWS_AS(loose.validate(), error);  // two vertices, disconnected
}

TEST_CASE("fundamental presentation of an amalgam") {
  Gad g = load_gad("double.gad");
  FundamentalLayout lay = fundamental_layout(g);
  REQUIRE(lay.pres.rank() == 4);
  REQUIRE(lay.pres.relators.size() == 1);
  // relator: [a,b] ([d,c])^-1 up to the layout's conventions; it must involve
  // generators from both vertices
  bool low = false, high = false;
  for (int v : lay.pres.relators[0].letters()) {
    if (std::abs(v) <= 2) low = true;
    if (std::abs(v) >= 3) high = true;
  }
  REQUIRE((low && high));
}

TEST_CASE("fundamental presentation of an HNN extension") {
  Gad g = load_gad("centext.gad");
  FundamentalLayout lay = fundamental_layout(g);
  REQUIRE(lay.pres.rank() == 3);
  REQUIRE(lay.stable_index.at("t") == 3);
  REQUIRE(lay.pres.relators.size() == 1);
}

TEST_CASE("amalgam normal forms") {
  Gad g = load_gad("double.gad");
  FundamentalLayout lay = fundamental_layout(g);
  Splitting s = splitting_from_gad(g, lay);
  REQUIRE_FALSE(s.hnn);
  const Alphabet& n = lay.pres.generators;

  Word rel = parse_word("a b a^-1 b^-1", n) * parse_word("d c d^-1 c^-1", n).inverse();
  REQUIRE(s.is_identity(rel));
  REQUIRE(s.is_identity(Word(4)));
  REQUIRE_FALSE(s.is_identity(parse_word("a", n)));
  REQUIRE_FALSE(s.is_identity(parse_word("a c", n)));
  REQUIRE_FALSE(s.is_identity(parse_word("a b a^-1 b^-1 c", n)));

  // pinching: an interior edge-group syllable converts across and merges
  Word w = parse_word("c a b a^-1 b^-1 c", n);
  NormalForm nf = s.normal_form(w);
  REQUIRE(nf.syllables.size() == 1);  // c [d,c] c, all on side 1

  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    Word x = random_word(rng, 4, 10);
    NormalForm f = s.normal_form(x);
    // the normal form evaluates back to the same group element
    REQUIRE(s.is_identity(s.evaluate_form(f) * x.inverse()));
    // alternation: consecutive syllables lie on different sides
    for (size_t i = 0; i + 1 < f.syllables.size(); ++i)
      REQUIRE(f.syllables[i].side != f.syllables[i + 1].side);
    // no interior syllable is an edge-group element
    for (size_t i = 1; i + 1 < f.syllables.size(); ++i)
      REQUIRE_FALSE(s.in_edge_subgroup(f.syllables[i].side, f.syllables[i].value, nullptr));
  }
}

TEST_CASE("Britton reduction for HNN extensions") {
  Gad g = load_gad("centext.gad");
  FundamentalLayout lay = fundamental_layout(g);
  Splitting s = splitting_from_gad(g, lay);
  REQUIRE(s.hnn);
  const Alphabet& n = lay.pres.generators;

  Word comm = parse_word("a b a^-1 b^-1", n);
  Word t = parse_word("t", n);
  REQUIRE(s.is_identity(t * comm * t.inverse() * comm.inverse()));
  REQUIRE_FALSE(s.is_identity(t * parse_word("a", n) * t.inverse() * parse_word("a^-1", n)));
  REQUIRE_FALSE(s.is_identity(t));

  // pinch t [a,b]^2 t^-1 -> [a,b]^2
  NormalForm nf = s.normal_form(t * comm * comm * t.inverse());
  REQUIRE(nf.crossings.empty());
  REQUIRE(nf.syllables.size() == 1);

  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 200; ++trial) {
    Word x = random_word(rng, 3, 10);
    NormalForm f = s.normal_form(x);
    REQUIRE(s.is_identity(s.evaluate_form(f) * x.inverse()));
    // Britton: no remaining pinchable pattern
    for (size_t i = 0; i + 1 < f.crossings.size(); ++i) {
      if (f.crossings[i] != -f.crossings[i + 1]) continue;
      REQUIRE_FALSE(
          s.in_edge_subgroup_images(f.syllables[i + 1].value, f.crossings[i] == 1, nullptr));
    }
  }
}

TEST_CASE("syllable extraction routes edge elements to the maximal abelian side") {
  Gad g = load_gad("double.gad");
  FundamentalLayout lay = fundamental_layout(g);
  Splitting s = splitting_from_gad(g, lay);
  const Alphabet& n = lay.pres.generators;
  // [a,b] is an edge element; it must land on exactly one side's set
  SyllableSets sets = syllables_of(s, {parse_word("a b a^-1 b^-1", n)});
  REQUIRE(sets.x1.size() + sets.x2.size() == 1);
  // mixed word contributes syllables on both sides
  SyllableSets mixed = syllables_of(s, {parse_word("a c", n)});
  REQUIRE(mixed.x1.size() == 1);
  REQUIRE(mixed.x2.size() == 1);
}

TEST_CASE("Dehn twists are verified automorphisms") {
  Gad g = load_gad("double.gad");
  FundamentalLayout lay = fundamental_layout(g);
  Splitting s = splitting_from_gad(g, lay);
  const Alphabet& n = lay.pres.generators;
  Word z = parse_word("a b a^-1 b^-1", n);

  ModAut tw = dehn_twist(s, z, 1);
  auto trivial = [&](const Word& w) { return s.is_identity(w); };
  REQUIRE(tw.verify_inverse(trivial));
  REQUIRE(tw.twist_edge == "e");
  REQUIRE(tw.inverted().twist_z == z.inverse());

  // twisting by z^k equals the k-th power of twisting by z, in the group
  ModAut tw3 = dehn_twist(s, z.pow(3), 1);
  for (int i = 1; i <= 4; ++i) {
    Word gword = word_from_letters(4, {i});
    Word lhs = tw.apply(tw.apply(tw.apply(gword)));
    REQUIRE(s.is_identity(lhs * tw3.apply(gword).inverse()));
  }

  // the twisting element must centralize the edge group
  REQUIRE_THROWS_AS(dehn_twist(s, parse_word("a", n), 1), error);
  // and must be supported on one side
  REQUIRE_THROWS_AS(dehn_twist(s, parse_word("a c", n), 1), error);
}

TEST_CASE("HNN twist moves the stable letter") {
  Gad g = load_gad("centext.gad");
  FundamentalLayout lay = fundamental_layout(g);
  Splitting s = splitting_from_gad(g, lay);
  const Alphabet& n = lay.pres.generators;
  Word z = parse_word("a b a^-1 b^-1", n);
  ModAut tw = dehn_twist(s, z);
  REQUIRE(tw.apply(parse_word("t", n)) == parse_word("t", n) * z);
  REQUIRE(tw.apply(parse_word("a", n)) == parse_word("a", n));
  REQUIRE(tw.verify_inverse([&](const Word& w) { return s.is_identity(w); }));
  REQUIRE_THROWS_AS(dehn_twist(s, parse_word("t", n)), error);
}

TEST_CASE("generalized Dehn twists on an abelian vertex") {
  Gad g;
  AbelianVertex av;
  av.rank = 2;
  av.names = {"a", "t"};
  av.peripheral = {{1, 0}};
  g.vertices.push_back({"V", av});
  FundamentalLayout lay = fundamental_layout(g);
  IMat m = {{1, 1}, {0, 1}};  // fixes (1,0), det 1
  ModAut tw = generalized_dehn_twist(g, lay, 0, m);
  auto trivial = [&](const Word& w) { return is_zero_vec(abelian_coords(w, 2)); };
  REQUIRE(tw.verify_inverse(trivial));
  // the twist acts on exponent vectors by m
  Word t = word_from_letters(2, {2});
  REQUIRE(abelian_coords(tw.apply(t), 2) == IVec{1, 1});

  REQUIRE_THROWS_AS(generalized_dehn_twist(g, lay, 0, IMat{{2, 0}, {0, 1}}), error);
  REQUIRE_THROWS_AS(generalized_dehn_twist(g, lay, 0, IMat{{1, 0}, {1, 1}}), error);  // moves (1,0)
}

TEST_CASE("inner and identity automorphisms") {
  Presentation p = free_presentation(2);
  Alphabet n = p.generators;
  ModAut inner = inner_aut(p, parse_word("a b", n));
  REQUIRE(inner.apply(parse_word("a", n)) == parse_word("a b a b^-1 a^-1", n));
  REQUIRE(inner.verify_inverse([](const Word& w) { return w.empty(); }));
  ModAut id = identity_aut(p);
  REQUIRE(id.apply(parse_word("a b", n)) == parse_word("a b", n));
  ModAut comp = inner.then(inner.inverted());
  for (int i = 1; i <= 2; ++i)
    REQUIRE(comp.apply(word_from_letters(2, {i})) == word_from_letters(2, {i}));
}

TEST_CASE("automorphisms act on homs by precomposition") {
  Gad g = load_gad("double.gad");
  FundamentalLayout lay = fundamental_layout(g);
  Splitting s = splitting_from_gad(g, lay);
  const Alphabet& n = lay.pres.generators;
  Hom f(lay.pres, 2,
        {parse_word("a", default_alphabet(2)), parse_word("b", default_alphabet(2)),
         parse_word("b", default_alphabet(2)), parse_word("a", default_alphabet(2))});
  ModAut tw = dehn_twist(s, parse_word("a b a^-1 b^-1", n), 1);
  Hom g2 = apply_aut(tw, f);
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    Word x = random_word(rng, 4, 8);
    REQUIRE(g2(x) == f(tw.apply(x)));
  }
}

TEST_CASE("dotted words and mod-aut serialization") {
  Alphabet n = {"a", "b"};
  REQUIRE(parse_dotted_word("a.b.a^-1", n) == parse_word("a b a^-1", n));
  Presentation p = free_presentation(2);
  std::ostringstream out;
  write_mod_aut(out, inner_aut(p, parse_word("a", n)));
  REQUIRE(out.str().find("aut a ") != std::string::npos);
  REQUIRE(out.str().find("# tag: inner") != std::string::npos);
}
