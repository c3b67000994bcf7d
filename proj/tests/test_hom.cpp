#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "limtk/hom.hpp"

using namespace limtk;

namespace {

Word random_word(std::mt19937_64& rng, int rank, int maxlen) {
  std::uniform_int_distribution<int> len_d(0, maxlen);
  std::uniform_int_distribution<int> d(1, rank);
  std::uniform_int_distribution<int> s(0, 1);
  std::vector<int> out;
  int len = len_d(rng);
  for (int i = 0; i < len; ++i) out.push_back(d(rng) * (s(rng) ? 1 : -1));
  return Word::reduce(rank, out);
}

Presentation z2_presentation() {
  Presentation p;
  p.generators = {"a", "t"};
  p.relators.push_back(parse_word("a t a^-1 t^-1", p.generators));
  return p;
}

}  // namespace

TEST_CASE("hom construction checks relators") {
  Presentation p = z2_presentation();
  // both generators to powers of the same element: relator survives
  REQUIRE_NOTHROW(Hom(p, 2, {parse_word("a a", default_alphabet(2)),
                             parse_word("a^-1", default_alphabet(2))}));
  REQUIRE_THROWS_AS(Hom(p, 2, {parse_word("a", default_alphabet(2)),
                               parse_word("b", default_alphabet(2))}),
                    error);
  REQUIRE_THROWS_AS(Hom(p, 2, {parse_word("a", default_alphabet(2))}), error);
}

TEST_CASE("homs are multiplicative") {
  std::mt19937_64 rng(7);
  Hom f = embed_free_into_rank2(3);
  for (int trial = 0; trial < 200; ++trial) {
    Word u = random_word(rng, 3, 8), v = random_word(rng, 3, 8);
    REQUIRE(f(u * v) == f(u) * f(v));
    REQUIRE(f(u.inverse()) == f(u).inverse());
  }
}

TEST_CASE("hom length measures") {
  Hom f = embed_free_into_rank2(3);
  REQUIRE(hom_length(f) == 7);        // b^3 a b^-3
  REQUIRE(hom_total_length(f) == 15);  // 3 + 5 + 7
  REQUIRE(hom_length(identity_hom(2)) == 1);
}

TEST_CASE("free-factor embedding is injective on a ball") {
  Hom f = embed_free_into_rank2(4);
  std::vector<Word> ball;
  for (const auto& w : reduced_words_up_to(4, 2)) ball.push_back(w);
  REQUIRE(injective_on(f, ball));
  REQUIRE_THROWS_AS(embed_free_into_rank2(0), error);
}

TEST_CASE("nontrivial_on and injective_on") {
  Hom f = identity_hom(2);
  std::vector<Word> xs = {parse_word("a", default_alphabet(2)),
                          parse_word("b a", default_alphabet(2))};
  REQUIRE(nontrivial_on(f, xs));
  REQUIRE(injective_on(f, xs));
  // collapse b: a b a^-1 and a now collide
  Hom g(free_presentation(2), 2,
        {parse_word("a", default_alphabet(2)), Word(2)});
  REQUIRE_FALSE(nontrivial_on(g, {parse_word("b", default_alphabet(2))}));
  REQUIRE_FALSE(injective_on(g, {parse_word("a", default_alphabet(2)),
                                 parse_word("b a", default_alphabet(2))}));
}

TEST_CASE("shell enumeration visits each shell completely") {
  int count = 0;
  auto never = [&](const IVec&) {
    ++count;
    return false;
  };
  REQUIRE_FALSE(enumerate_shells(2, 2, never).has_value());
  REQUIRE(count == 8 + 16);  // 3^2-1 and 5^2-3^2
  auto hit = enumerate_shells(2, 5, [](const IVec& v) { return v[0] == 1 && v[1] == -1; });
  REQUIRE(hit.has_value());
  REQUIRE((*hit)[0] == 1);
}

TEST_CASE("abelian discriminator finds a minimal-shell functional") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<long long> d(-5, 5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<IVec> vecs;
    for (int i = 0; i < 6; ++i) {
      IVec v = {d(rng), d(rng)};
      if (v[0] == 0 && v[1] == 0) v[0] = 1;
      vecs.push_back(v);
    }
    AbelianDiscriminator ad = abelian_discriminator(vecs);
    long long got = std::max(std::llabs(ad.z[0]), std::llabs(ad.z[1]));
    for (const auto& v : vecs) REQUIRE(ad.z[0] * v[0] + ad.z[1] * v[1] != 0);
    // minimality oracle: no vector of strictly smaller max-norm works
    for (long long x = -(got - 1); x < got; ++x)
      for (long long y = -(got - 1); y < got; ++y) {
        bool all = true;
        for (const auto& v : vecs) all = all && (x * v[0] + y * v[1] != 0);
        REQUIRE_FALSE(all);
      }
  }
  REQUIRE_THROWS_AS(abelian_discriminator({{0, 0}}), error);
}

TEST_CASE("stable kernel window verdicts") {
  Presentation p = free_presentation(2);
  Alphabet n = default_alphabet(2);
  Hom keep(p, 2, {parse_word("a", n), parse_word("b", n)});
  Hom killb(p, 2, {parse_word("a", n), Word(2)});
  std::vector<Word> xs = {parse_word("b", n), parse_word("a", n)};

  auto r1 = stable_kernel_window({keep, killb, killb, killb}, xs);
  REQUIRE(r1[0].verdict == StableVerdict::EventuallyTrivial);
  REQUIRE(r1[1].verdict == StableVerdict::EventuallyNontrivial);

  auto r2 = stable_kernel_window({keep, killb, keep, killb}, xs);
  REQUIRE(r2[0].verdict == StableVerdict::UnstableInWindow);
  REQUIRE(r2[0].trivial == std::vector<bool>{false, true, false, true});

  REQUIRE_THROWS_AS(stable_kernel_window({}, xs), error);
}

TEST_CASE("presentation files round trip") {
  Presentation p = z2_presentation();
  std::ostringstream out;
  write_presentation(out, p);
  std::istringstream in(out.str());
  Presentation q = parse_presentation(in);
  REQUIRE(q.generators == p.generators);
  REQUIRE(q.relators == p.relators);

  std::istringstream bad1("rel a\ngens a\n");
  REQUIRE_THROWS_AS(parse_presentation(bad1), error);
  std::istringstream bad2("gens a a\n");
  REQUIRE_THROWS_AS(parse_presentation(bad2), error);
  std::istringstream bad3("gens a\nrel a a^-1\n");
  REQUIRE_THROWS_AS(parse_presentation(bad3), error);
}

TEST_CASE("hom files round trip") {
  Presentation p = z2_presentation();
  Hom f(p, 2, {parse_word("a a", default_alphabet(2)), parse_word("a^-1", default_alphabet(2))});
  std::ostringstream out;
  write_hom(out, f);
  std::istringstream in(out.str());
  Hom g = parse_hom(in, p);
  REQUIRE(g.images() == f.images());
  REQUIRE(g.target_rank() == 2);

  std::istringstream missing("target_rank 2\nimage a a\n");
  REQUIRE_THROWS_AS(parse_hom(missing, p), error);
  std::istringstream before("image a a\ntarget_rank 2\n");
  REQUIRE_THROWS_AS(parse_hom(before, p), error);
}
