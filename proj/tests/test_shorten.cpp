#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "limtk/clg.hpp"
#include "limtk/shorten.hpp"

using namespace limtk;

namespace {

std::string fixture(const std::string& name) { return std::string(FIXTURE_DIR) + "/" + name; }

struct DoubleSetup {
  Clg clg;
  std::vector<ModAut> gens;
  Hom base;
};

DoubleSetup double_setup() {
  Clg c = parse_clg_file(fixture("double.clg"));
  std::vector<ModAut> gens;
  const Splitting& s = *c.split;
  for (int side = 0; side < 2; ++side)
    for (const auto& img : s.side[side].edge_images)
      gens.push_back(dehn_twist(s, s.to_global(side, img), side));
  Hom base(c.pres, 2, c.rho);
  return {std::move(c), std::move(gens), std::move(base)};
}

}  // namespace

TEST_CASE("optimal conjugation strips a common conjugator") {
  Alphabet f2 = default_alphabet(2);
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> d(1, 2);
  std::uniform_int_distribution<int> s(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> raw;
    for (int i = 0; i < 6; ++i) raw.push_back(d(rng) * (s(rng) ? 1 : -1));
    Word u = Word::reduce(2, raw);
    std::vector<Word> images = {u * parse_word("a", f2) * u.inverse(),
                                u * parse_word("b a", f2) * u.inverse()};
    Hom f(free_presentation(2), 2, images);
    Word conj;
    Hom g = optimal_conjugation(f, &conj);
    REQUIRE(hom_length(g) <= 2);
    // conjugator consistency: conj^-1 f(.) conj equals g
    for (size_t i = 0; i < images.size(); ++i)
      REQUIRE(conj.inverse() * f.images()[i] * conj == g.images()[i]);
    // stationarity under single-letter conjugation
    for (int v : {1, -1, 2, -2}) {
      Word x = word_from_letters(2, {v});
      std::vector<Word> moved;
      for (const auto& im : g.images()) moved.push_back(x.inverse() * im * x);
      Hom cand(free_presentation(2), 2, moved);
      REQUIRE(length_key(cand) >= length_key(g));
    }
  }
}

TEST_CASE("shortening undoes twist perturbations on the double") {
  DoubleSetup st = double_setup();
  REQUIRE(hom_length(st.base) == 1);
  Hom f = st.base;
  for (int i = 0; i < 4; ++i) f = apply_aut(st.gens[0], f);
  REQUIRE(hom_length(f) > 1);
  ShorteningResult r = shorten({f, st.gens, true});
  REQUIRE(hom_length(r.f_short) == 1);
  REQUIRE_FALSE(r.applied.empty());
}

TEST_CASE("move replay reproduces the shortened hom exactly") {
  DoubleSetup st = double_setup();
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<size_t> gd(0, st.gens.size() - 1);
  std::uniform_int_distribution<int> sd(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    Hom f = st.base;
    for (int i = 0; i < trial % 5; ++i) {
      const ModAut& g = st.gens[gd(rng)];
      f = apply_aut(sd(rng) ? g : g.inverted(), f);
    }
    ShorteningResult r = shorten({f, st.gens, true});
    Hom replayed = replay_moves(f, st.gens, r.applied);
    REQUIRE(replayed.images() == r.f_short.images());
  }
}

TEST_CASE("descent never increases the length key") {
  DoubleSetup st = double_setup();
  std::mt19937_64 rng(43);
  std::uniform_int_distribution<size_t> gd(0, st.gens.size() - 1);
  std::uniform_int_distribution<int> sd(0, 1);
  for (int trial = 0; trial < 30; ++trial) {
    Hom f = st.base;
    for (int i = 0; i < trial % 6; ++i) {
      const ModAut& g = st.gens[gd(rng)];
      f = apply_aut(sd(rng) ? g : g.inverted(), f);
    }
    ShorteningResult r = shorten({f, st.gens, true});
    REQUIRE(length_key(r.f_short) <= length_key(f));
    // stationary under every single generator move followed by conjugation
    for (const auto& g : st.gens) {
      REQUIRE(hom_length(optimal_conjugation(apply_aut(g, r.f_short))) >=
              hom_length(r.f_short));
      REQUIRE(hom_length(optimal_conjugation(apply_aut(g.inverted(), r.f_short))) >=
              hom_length(r.f_short));
    }
  }
}

TEST_CASE("local-minimality certificates") {
  DoubleSetup st = double_setup();
  ShorteningResult r = shorten({st.base, st.gens, true});
  REQUIRE(certify_local_min(r.f_short, st.gens, 1));
  REQUIRE(certify_local_min(r.f_short, st.gens, 2));
  REQUIRE_THROWS_AS(certify_local_min(r.f_short, st.gens, -1), error);
  // a visibly perturbed hom is not a local minimum
  Hom f = apply_aut(st.gens[0], apply_aut(st.gens[0], st.base));
  REQUIRE_FALSE(certify_local_min(f, st.gens, 2));
}

TEST_CASE("rationals reduce and reject zero denominators") {
  Rational r = make_rational(6, -4);
  REQUIRE(r.num == -3);
  REQUIRE(r.den == 2);
  REQUIRE_THROWS_AS(make_rational(1, 0), error);
  Rational z = make_rational(0, 7);
  REQUIRE(z.num == 0);
  REQUIRE(z.den == 1);
}

TEST_CASE("rescaled length tables divide by the hom length") {
  Hom f = embed_free_into_rank2(2);  // lengths 3 and 5 -> hom_length 5
  Alphabet dn = f.domain().generators;
  std::vector<Word> elems = {parse_word("x1", dn), parse_word("x2", dn)};
  auto table = rescaled_length_table({f}, elems);
  REQUIRE(table.size() == 1);
  REQUIRE(table[0][0].num == 1);  // translation length of b a b^-1 is 1
  REQUIRE(table[0][0].den == 5);
  REQUIRE(table[0][1].num == 1);
  REQUIRE(table[0][1].den == 5);
  REQUIRE_THROWS_AS(rescaled_length_table({}, elems), error);
}

TEST_CASE("move serialization") {
  DoubleSetup st = double_setup();
  Hom f = apply_aut(st.gens[0], apply_aut(st.gens[0], st.base));
  ShorteningResult r = shorten({f, st.gens, true});
  std::ostringstream out;
  write_moves(out, r.applied, st.clg.pres.generators, default_alphabet(2));
  REQUIRE(out.str().find("move twist e ") != std::string::npos);
}
