#pragma once

// Exact arithmetic for elements of a finitely generated free group,
// represented as freely reduced words over signed generator indices.

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace limtk {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A letter is a nonzero signed index: +i is the i-th generator, -i its inverse.
struct Letter {
  int index;  // 1..rank
  int sign;   // +1 or -1

  int packed() const { return sign * index; }
  static Letter from_packed(int v) { return {std::abs(v), v < 0 ? -1 : 1}; }
};

class Word {
 public:
  Word() : rank_(1) {}
  explicit Word(int rank) : rank_(rank) {
    if (rank < 1) throw error("word rank must be positive");
  }

  // Free reduction of a raw letter sequence (packed signed indices).
  static Word reduce(int rank, const std::vector<int>& raw) {
    Word w(rank);
    for (int v : raw) w.push(v);
    return w;
  }

  int rank() const { return rank_; }
  int length() const { return static_cast<int>(ls_.size()); }
  bool empty() const { return ls_.empty(); }
  const std::vector<int>& letters() const { return ls_; }
  int letter(int i) const { return ls_[static_cast<size_t>(i)]; }

  // Appends one letter, cancelling against the current last letter.
  void push(int v) {
    if (v == 0 || std::abs(v) > rank_)
      throw error("letter index out of rank: " + std::to_string(v));
    if (!ls_.empty() && ls_.back() == -v)
      ls_.pop_back();
    else
      ls_.push_back(v);
  }

  Word inverse() const {
    Word r(rank_);
    r.ls_.reserve(ls_.size());
    for (auto it = ls_.rbegin(); it != ls_.rend(); ++it) r.ls_.push_back(-*it);
    return r;
  }

  friend Word operator*(const Word& a, const Word& b) {
    if (a.rank_ != b.rank_) throw error("word rank mismatch in product");
    Word r = a;
    for (int v : b.ls_) r.push(v);
    return r;
  }

  friend bool operator==(const Word& a, const Word& b) {
    return a.rank_ == b.rank_ && a.ls_ == b.ls_;
  }
  friend bool operator!=(const Word& a, const Word& b) { return !(a == b); }
  friend bool operator<(const Word& a, const Word& b) {  // shortlex
    if (a.ls_.size() != b.ls_.size()) return a.ls_.size() < b.ls_.size();
    return std::lexicographical_compare(a.ls_.begin(), a.ls_.end(),
                                        b.ls_.begin(), b.ls_.end(),
                                        [](int x, int y) {
                                          // a < a^-1 < b < b^-1 < ...
                                          int kx = 2 * std::abs(x) + (x < 0);
                                          int ky = 2 * std::abs(y) + (y < 0);
                                          return kx < ky;
                                        });
  }

  Word pow(long long e) const {
    Word base = e < 0 ? inverse() : *this;
    long long n = e < 0 ? -e : e;
    Word r(rank_);
    for (long long i = 0; i < n; ++i) r = r * base;
    return r;
  }

 private:
  int rank_;
  std::vector<int> ls_;
};

inline Word word_from_letters(int rank, std::initializer_list<int> raw) {
  return Word::reduce(rank, std::vector<int>(raw));
}

// w = conjugator * core * conjugator^-1 with core cyclically reduced.
struct CyclicForm {
  Word conjugator;
  Word core;
};

inline CyclicForm cyclic_reduce(const Word& w) {
  const auto& ls = w.letters();
  int lo = 0, hi = static_cast<int>(ls.size());
  while (hi - lo >= 2 && ls[static_cast<size_t>(lo)] == -ls[static_cast<size_t>(hi - 1)]) {
    ++lo;
    --hi;
  }
  Word conj(w.rank()), core(w.rank());
  for (int i = 0; i < lo; ++i) conj.push(ls[static_cast<size_t>(i)]);
  for (int i = lo; i < hi; ++i) core.push(ls[static_cast<size_t>(i)]);
  return {conj, core};
}

inline int translation_length(const Word& w) { return cyclic_reduce(w).core.length(); }

// Maximal-exponent root: w = root^exp. Uses the string period of the cyclic
// core (a cyclically reduced word equals u^k as a string iff it does in the group).
struct RootPower {
  Word root;
  int exponent;
};

inline RootPower primitive_root(const Word& w) {
  if (w.empty()) throw error("primitive_root of the identity");
  CyclicForm cf = cyclic_reduce(w);
  const auto& s = cf.core.letters();
  int n = static_cast<int>(s.size());
  // failure function border method
  std::vector<int> f(static_cast<size_t>(n), 0);
  for (int i = 1; i < n; ++i) {
    int k = f[static_cast<size_t>(i - 1)];
    while (k > 0 && s[static_cast<size_t>(i)] != s[static_cast<size_t>(k)]) k = f[static_cast<size_t>(k - 1)];
    if (s[static_cast<size_t>(i)] == s[static_cast<size_t>(k)]) ++k;
    f[static_cast<size_t>(i)] = k;
  }
  int period = n - f[static_cast<size_t>(n - 1)];
  int exp = (n % period == 0) ? n / period : 1;
  if (exp == 1) period = n;
  Word root(w.rank());
  for (int i = 0; i < period; ++i) root.push(s[static_cast<size_t>(i)]);
  Word conjugated = cf.conjugator * root * cf.conjugator.inverse();
  return {conjugated, exp};
}

inline bool commutes(const Word& a, const Word& b) {
  if (a.rank() != b.rank()) throw error("word rank mismatch in commutes");
  return a * b == b * a;
}

// All freely reduced words of length <= maxlen (including the identity),
// in length-then-lexicographic order of the letter sequences.
inline std::vector<Word> reduced_words_up_to(int rank, int maxlen) {
  std::vector<Word> out;
  std::vector<std::vector<int>> layer = {{}};
  out.push_back(Word(rank));
  for (int len = 1; len <= maxlen; ++len) {
    std::vector<std::vector<int>> next;
    for (const auto& seq : layer) {
      for (int i = 1; i <= rank; ++i) {
        for (int v : {i, -i}) {
          if (!seq.empty() && seq.back() == -v) continue;
          auto s = seq;
          s.push_back(v);
          out.push_back(Word::reduce(rank, s));
          next.push_back(std::move(s));
        }
      }
    }
    layer = std::move(next);
  }
  return out;
}

// ---- text form ----------------------------------------------------------
// Tokens: `g`, `g^-1`, `g^k` (nonzero k); `1` denotes the identity.

using Alphabet = std::vector<std::string>;

inline Alphabet default_alphabet(int rank) {
  Alphabet a;
  if (rank <= 26) {
    for (int i = 0; i < rank; ++i) a.push_back(std::string(1, static_cast<char>('a' + i)));
  } else {
    for (int i = 1; i <= rank; ++i) a.push_back("x" + std::to_string(i));
  }
  return a;
}

inline int alphabet_index(const Alphabet& names, const std::string& g) {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == g) return static_cast<int>(i) + 1;
  return 0;
}

inline Word parse_word(const std::string& text, const Alphabet& names) {
  Word w(static_cast<int>(names.size()) ? static_cast<int>(names.size()) : 1);
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    if (tok == "1") continue;
    std::string g = tok;
    long long e = 1;
    auto caret = tok.find('^');
    if (caret != std::string::npos) {
      g = tok.substr(0, caret);
      try {
        e = std::stoll(tok.substr(caret + 1));
      } catch (const std::exception&) {
        throw error("bad exponent in token: " + tok);
      }
      if (e == 0) throw error("zero exponent in token: " + tok);
    }
    int idx = alphabet_index(names, g);
    if (idx == 0) throw error("unknown generator: " + g);
    int step = e < 0 ? -idx : idx;
    for (long long i = 0; i < (e < 0 ? -e : e); ++i) w.push(step);
  }
  return w;
}

inline std::string format_word(const Word& w, const Alphabet& names) {
  if (w.empty()) return "1";
  std::ostringstream out;
  const auto& ls = w.letters();
  size_t i = 0;
  bool first = true;
  while (i < ls.size()) {
    size_t j = i;
    while (j < ls.size() && ls[j] == ls[i]) ++j;
    long long run = static_cast<long long>(j - i);
    int v = ls[i];
    long long e = v < 0 ? -run : run;
    if (!first) out << ' ';
    first = false;
    out << names[static_cast<size_t>(std::abs(v)) - 1];
    if (e != 1) out << '^' << e;
    i = j;
  }
  return out.str();
}

}  // namespace limtk
