// Batch command-line front end: file-in/file-out wrappers around the
// library.  Exit codes: 0 success, 1 verified negative, 2 malformed input.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "limtk/clg.hpp"
#include "limtk/lamination.hpp"
#include "limtk/rep.hpp"
#include "limtk/shorten.hpp"

namespace {

using namespace limtk;

std::vector<Word> read_words_file(const std::string& path, const Alphabet& names) {
  std::ifstream in(path);
  if (!in) throw error("cannot open words file: " + path);
  std::vector<Word> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    out.push_back(parse_word(line, names));
  }
  return out;
}

std::vector<ModAut> modular_generators(const Clg& c) {
  std::vector<ModAut> gens;
  if (c.form == Clg::Form::Indec && c.split) {
    const Splitting& s = *c.split;
    for (const auto& img : s.side[0].edge_images)
      if (!img.empty()) gens.push_back(dehn_twist(s, s.to_global(0, img), 1));
  }
  return gens;
}

int cmd_discriminate(const std::string& clg_path, const std::string& elements_path,
                     const std::string& mode_name, const std::string& out_path,
                     const std::string& trace_path) {
  Clg c = parse_clg_file(clg_path);
  std::vector<Word> X = read_words_file(elements_path, c.pres.generators);
  DiscriminationMode mode = mode_name == "injective" ? DiscriminationMode::Injective
                                                     : DiscriminationMode::Nontrivial;
  std::unique_ptr<Discrimination> dp;
  try {
    dp = std::make_unique<Discrimination>(discriminate(c, X, mode));
  } catch (const error& e) {
    std::cerr << "discriminate: " << e.what() << '\n';
    return 1;
  }
  const Discrimination& d = *dp;
  std::ofstream out(out_path);
  write_hom(out, d.h);
  out << "# mode " << mode_name << " verified on " << X.size() << " elements\n";
  for (const auto& st : d.trace)
    out << "# step edge=" << st.place << " zeta=" << format_word(st.zeta, c.pres.generators)
        << " k=" << st.k << '\n';
  if (!trace_path.empty()) {
    std::ofstream tr(trace_path);
    write_trace(tr, d, c.pres.generators);
  }
  return 0;
}

int cmd_shorten(const std::string& clg_path, const std::string& hom_path,
                const std::string& out_path, const std::string& moves_path, int radius) {
  Clg c = parse_clg_file(clg_path);
  std::ifstream hin(hom_path);
  if (!hin) throw error("cannot open hom file: " + hom_path);
  Hom f = parse_hom(hin, c.pres);
  ShorteningProblem p{f, modular_generators(c), true};
  ShorteningResult r = shorten(p);
  if (radius > 0 && certify_local_min(r.f_short, p.mod_generators, radius))
    r.certified_radius = radius;
  std::ofstream out(out_path);
  write_hom(out, r.f_short);
  out << "# hom_length " << hom_length(r.f_short) << " certified_radius " << r.certified_radius
      << '\n';
  if (!moves_path.empty()) {
    std::ofstream mv(moves_path);
    write_moves(mv, r.applied, c.pres.generators, default_alphabet(f.target_rank()));
  }
  return 0;
}

int cmd_embed(const std::string& clg_path, const std::string& elements_path,
              const std::string& target_name, const std::string& out_path, bool numeric,
              double tol, int attempts, unsigned long long seed) {
  Clg c = parse_clg_file(clg_path);
  std::vector<Word> X = read_words_file(elements_path, c.pres.generators);
  std::ofstream out(out_path);
  if (numeric) {
    NumericRep rep = numeric_solve(c.pres, X, attempts, tol, seed);
    write_numeric_rep(out, rep);
    return rep.success ? 0 : 1;
  }
  MatrixTarget target = target_name == "so3" ? MatrixTarget::SO3 : MatrixTarget::SL2;
  std::unique_ptr<EmbedResult> rp;
  try {
    rp = std::make_unique<EmbedResult>(embed_clg(c, X, target));
  } catch (const error& e) {
    std::cerr << "embed: " << e.what() << '\n';
    return 1;
  }
  const EmbedResult& res = *rp;
  if (target == MatrixTarget::SL2) {
    for (size_t i = 0; i < res.sl2_generators.size(); ++i) {
      out << "gen " << c.pres.generators[i] << ' ';
      write_mat2(out, res.sl2_generators[i]);
    }
  }
  for (const auto& e : res.report)
    out << "# " << format_word(e.element, c.pres.generators) << ' '
        << (e.non_identity ? "nontrivial" : "TRIVIAL") << ' ' << isometry_name(e.cls) << '\n';
  return res.ok ? 0 : 1;
}

int cmd_lam_validate(const std::string& complex_path, const std::string& weights_path,
                     double tol) {
  std::ifstream kin(complex_path);
  if (!kin) throw error("cannot open complex file: " + complex_path);
  Complex2 k = parse_complex(kin);
  std::ifstream win(weights_path);
  if (!win) throw error("cannot open weights file: " + weights_path);
  Weights w = parse_weights(win, k);
  bool ok = validate(k, w, tol);
  std::cout << (ok ? "valid" : "invalid") << '\n';
  return ok ? 0 : 1;
}

int cmd_check(const std::string& clg_path, int radius) {
  Clg c = parse_clg_file(clg_path);
  ValidationReport rep = validate_clg(c, radius);
  for (const auto& ch : rep.checks) {
    const char* st = ch.status == CheckStatus::Pass
                         ? "pass"
                         : ch.status == CheckStatus::Fail ? "fail" : "approximate";
    std::cout << ch.name << ' ' << st;
    if (!ch.detail.empty()) std::cout << " # " << ch.detail;
    std::cout << '\n';
  }
  return rep.ok() ? 0 : 1;
}

int cmd_criterion(const std::string& z_text, const std::string& a_text,
                  const std::string& exp_text, int rank) {
  Alphabet names = default_alphabet(rank);
  Word z = parse_word(z_text, names);
  std::vector<Word> a;
  for (const auto& part : split_list(a_text, '|')) a.push_back(parse_word(part, names));
  std::vector<long long> exps;
  for (const auto& e : split_list(exp_text, ',')) exps.push_back(std::stoll(e));
  CriterionInstance inst = make_criterion_instance(z, a, exps);
  bool nt = criterion_nontrivial(inst);
  std::cout << "nontrivial " << (nt ? "true" : "false") << " bound "
            << sufficient_exponent(inst.z, inst.a) << '\n';
  return nt ? 0 : 1;
}

int cmd_stable(const std::string& pres_path, const std::string& homs_list,
               const std::string& elements_path) {
  std::ifstream pin(pres_path);
  if (!pin) throw error("cannot open presentation file: " + pres_path);
  Presentation p = parse_presentation(pin);
  std::vector<Hom> fs;
  for (const auto& hp : split_list(homs_list, ',')) {
    std::ifstream hin(hp);
    if (!hin) throw error("cannot open hom file: " + hp);
    fs.push_back(parse_hom(hin, p));
  }
  std::vector<Word> X = read_words_file(elements_path, p.generators);
  auto reports = stable_kernel_window(fs, X);
  for (const auto& r : reports) {
    std::cout << "element " << format_word(r.element, p.generators) << " pattern ";
    for (bool b : r.trivial) std::cout << (b ? '1' : '0');
    const char* v = r.verdict == StableVerdict::EventuallyTrivial
                        ? "eventually-trivial"
                        : r.verdict == StableVerdict::EventuallyNontrivial
                              ? "eventually-nontrivial"
                              : "unstable-in-window";
    std::cout << " verdict " << v << " (heuristic window verdict)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"limit-group toolkit"};
  app.require_subcommand(1);

  std::string clg_path, elements_path, out_path, trace_path, hom_path, moves_path;
  std::string complex_path, weights_path, pres_path, homs_list;
  std::string mode_name = "nontrivial", target_name = "sl2";
  std::string z_text, a_text, exp_text;
  int radius = 2, rank = 2, attempts = 50, jobs = 1, depth = 8;
  double tol = 1e-9;
  unsigned long long seed = 0;
  bool numeric = false;

  auto* disc = app.add_subcommand("discriminate", "find a discriminating hom into rank 2");
  disc->add_option("--clg", clg_path)->required();
  disc->add_option("--elements", elements_path)->required();
  disc->add_option("--mode", mode_name)->check(CLI::IsMember({"nontrivial", "injective"}));
  disc->add_option("--out", out_path)->required();
  disc->add_option("--trace", trace_path);
  disc->add_option("--seed", seed);

  auto* sh = app.add_subcommand("shorten", "shorten a homomorphism");
  sh->add_option("--clg", clg_path)->required();
  sh->add_option("--hom", hom_path)->required();
  sh->add_option("--out", out_path)->required();
  sh->add_option("--moves", moves_path);
  sh->add_option("--radius", radius);
  sh->add_option("--seed", seed);

  auto* em = app.add_subcommand("embed", "matrix embedding of a CLG");
  em->add_option("--clg", clg_path)->required();
  em->add_option("--elements", elements_path)->required();
  em->add_option("--target", target_name)->check(CLI::IsMember({"sl2", "so3"}));
  em->add_option("--out", out_path)->required();
  em->add_flag("--numeric", numeric);
  em->add_option("--tol", tol);
  em->add_option("--attempts", attempts);
  em->add_option("--seed", seed);
  em->add_option("--depth", depth);

  auto* lam = app.add_subcommand("lam-validate", "validate a measured lamination");
  lam->add_option("--complex", complex_path)->required();
  lam->add_option("--weights", weights_path)->required();
  lam->add_option("--tol", tol)->default_val(0.0);

  auto* chk = app.add_subcommand("check", "validate a CLG recursion");
  chk->add_option("--clg", clg_path)->required();
  chk->add_option("--radius", radius);

  auto* cr = app.add_subcommand("criterion", "free-group nontriviality criterion");
  cr->add_option("--z", z_text)->required();
  cr->add_option("--a", a_text)->required();
  cr->add_option("--exp", exp_text)->required();
  cr->add_option("--rank", rank);

  auto* st = app.add_subcommand("stable", "windowed stable-kernel verdicts");
  st->add_option("--presentation", pres_path)->required();
  st->add_option("--homs", homs_list)->required();
  st->add_option("--elements", elements_path)->required();

  app.add_option("--jobs", jobs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 2 : 0;
  }

  try {
    if (disc->parsed())
      return cmd_discriminate(clg_path, elements_path, mode_name, out_path, trace_path);
    if (sh->parsed()) return cmd_shorten(clg_path, hom_path, out_path, moves_path, radius);
    if (em->parsed())
      return cmd_embed(clg_path, elements_path, target_name, out_path, numeric, tol, attempts,
                       seed);
    if (lam->parsed()) return cmd_lam_validate(complex_path, weights_path, tol);
    if (chk->parsed()) return cmd_check(clg_path, radius);
    if (cr->parsed()) return cmd_criterion(z_text, a_text, exp_text, rank);
    if (st->parsed()) return cmd_stable(pres_path, homs_list, elements_path);
  } catch (const limtk::error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
