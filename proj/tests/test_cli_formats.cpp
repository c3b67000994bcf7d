#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "limtk/clg.hpp"
#include "limtk/shorten.hpp"

using namespace limtk;

namespace {

std::string fixture(const std::string& name) { return std::string(FIXTURE_DIR) + "/" + name; }

}  // namespace

TEST_CASE("gad files parse into validated decompositions") {
  std::ifstream in(fixture("double.gad"));
  REQUIRE(in.good());
  Gad g = parse_gad(in);
  REQUIRE_NOTHROW(g.validate());
  REQUIRE(g.vertices[0].id == "A");
  REQUIRE(g.vertices[0].is_rigid());
  REQUIRE(g.edges[0].id == "e");
  REQUIRE(g.edges[0].tree);
  REQUIRE(g.edges[0].img1[0] == parse_word("a b a^-1 b^-1", {"a", "b"}));

  std::ifstream hin(fixture("centext.gad"));
  Gad h = parse_gad(hin);
  REQUIRE_FALSE(h.edges[0].tree);
  REQUIRE(h.edges[0].stable == "t");

  std::ifstream zin(fixture("z2.gad"));
  Gad z = parse_gad(zin);
  REQUIRE(z.vertices[0].is_abelian());
  REQUIRE(z.edges.empty());

  std::istringstream bad("vertex V kind=weird\n");
  REQUIRE_THROWS_AS(parse_gad(bad), error);
}

TEST_CASE("clg files wire up the recursion") {
  Clg f1 = parse_clg_file(fixture("f1.clg"));
  REQUIRE(f1.form == Clg::Form::Free);
  REQUIRE(f1.pres.generators == Alphabet{"c"});

  Clg z2 = parse_clg_file(fixture("z2.clg"));
  REQUIRE(z2.form == Clg::Form::Indec);
  REQUIRE(z2.level == 1);
  REQUIRE(z2.rho.size() == 2);
  REQUIRE(z2.lower->rank() == 1);

  Clg dbl = parse_clg_file(fixture("double.clg"));
  REQUIRE(dbl.split != nullptr);
  REQUIRE_FALSE(dbl.split->hnn);

  Clg ce = parse_clg_file(fixture("centext.clg"));
  REQUIRE(ce.split != nullptr);
  REQUIRE(ce.split->hnn);
}

TEST_CASE("hom files round trip through the clg presentation") {
  Clg z2 = parse_clg_file(fixture("z2.clg"));
  Hom f(z2.pres, 2,
        {parse_word("a a", default_alphabet(2)), parse_word("a^-1", default_alphabet(2))});
  std::ostringstream out;
  write_hom(out, f);
  std::istringstream in(out.str());
  Hom g = parse_hom(in, z2.pres);
  REQUIRE(g.images() == f.images());
}

TEST_CASE("trace files record the discrimination steps") {
  Clg ce = parse_clg_file(fixture("centext.clg"));
  const Alphabet& n = ce.pres.generators;
  Discrimination d = discriminate(ce, {parse_word("a", n), parse_word("t", n)},
                                  DiscriminationMode::Nontrivial);
  std::ostringstream out;
  write_trace(out, d, n);
  std::istringstream in(out.str());
  std::string line;
  int steps = 0;
  while (std::getline(in, line)) {
    REQUIRE(line.rfind("step edge=", 0) == 0);
    REQUIRE(line.find("zeta=") != std::string::npos);
    REQUIRE(line.find("k=") != std::string::npos);
    ++steps;
  }
  REQUIRE(steps == static_cast<int>(d.trace.size()));
}

TEST_CASE("move files list twists and conjugations") {
  Clg dbl = parse_clg_file(fixture("double.clg"));
  const Splitting& s = *dbl.split;
  ModAut tw = dehn_twist(s, s.to_global(0, s.side[0].edge_images[0]), 0);
  std::vector<Move> moves = {{Move::Twist, 0, -1, tw.twist_edge, tw.twist_z},
                             {Move::Conj, 0, +1, "", parse_word("a", default_alphabet(2))}};
  std::ostringstream out;
  write_moves(out, moves, dbl.pres.generators, default_alphabet(2));
  std::istringstream in(out.str());
  std::string l1, l2;
  std::getline(in, l1);
  std::getline(in, l2);
  REQUIRE(l1.rfind("move twist e ", 0) == 0);
  REQUIRE(l1.find(" -1") != std::string::npos);
  REQUIRE(l2 == "move conj a");
}

TEST_CASE("mod-aut serialization lists images and inverses") {
  Clg dbl = parse_clg_file(fixture("double.clg"));
  const Splitting& s = *dbl.split;
  ModAut tw = dehn_twist(s, s.to_global(1, s.side[1].edge_images[0]), 1);
  std::ostringstream out;
  write_mod_aut(out, tw);
  std::string text = out.str();
  REQUIRE(text.find("twist(e") != std::string::npos);
  REQUIRE(text.find("aut a ") != std::string::npos);
}
