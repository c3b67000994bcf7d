#pragma once

// Stallings folding for finitely generated subgroups of free groups:
// membership, subgroup rank, and membership witnesses. The witness is
// recovered by lifting the accepted path backwards through the fold history
// into the original wedge of generator loops.

#include <cstdlib>
#include <map>
#include <vector>

#include "limtk/word.hpp"

namespace limtk {

class FoldedGraph {
 public:
  FoldedGraph(int rank, const std::vector<Word>& generators) : rank_(rank) {
    for (const auto& g : generators)
      if (g.rank() != rank) throw error("subgroup generator rank mismatch");
    base_ = new_vertex();
    for (size_t gi = 0; gi < generators.size(); ++gi) {
      const Word& g = generators[gi];
      if (g.empty()) {
        petal_edges_.push_back({});
        continue;
      }
      std::vector<int> petal;
      int prev = base_;
      for (int i = 0; i < g.length(); ++i) {
        int next = (i + 1 == g.length()) ? base_ : new_vertex();
        int v = g.letter(i);
        int e;
        if (v > 0)
          e = new_edge(prev, next, v);
        else
          e = new_edge(next, prev, -v);
        petal.push_back(v > 0 ? (e + 1) : -(e + 1));  // signed edge ref
        prev = next;
      }
      petal_edges_.push_back(petal);
    }
    fold();
  }

  int rank() const { return rank_; }
  int base() const { return find(base_); }

  int subgroup_rank() const {
    int v = 0, e = 0;
    std::vector<bool> seen(parent_.size(), false);
    for (size_t i = 0; i < parent_.size(); ++i) {
      int r = find(static_cast<int>(i));
      if (!seen[static_cast<size_t>(r)]) {
        seen[static_cast<size_t>(r)] = true;
        ++v;
      }
    }
    for (const auto& ed : edges_)
      if (ed.alive) ++e;
    return e - v + 1;
  }

  bool has_foldable_vertex() const {
    for (size_t u = 0; u < parent_.size(); ++u) {
      if (find(static_cast<int>(u)) != static_cast<int>(u)) continue;
      std::map<int, int> out;
      for (size_t ei = 0; ei < edges_.size(); ++ei) {
        const Edge& ed = edges_[ei];
        if (!ed.alive) continue;
        if (find(ed.from) == static_cast<int>(u)) {
          if (out.count(ed.label) && out[ed.label] != static_cast<int>(ei)) return true;
          out[ed.label] = static_cast<int>(ei);
        }
        if (find(ed.to) == static_cast<int>(u)) {
          if (out.count(-ed.label) && out[-ed.label] != static_cast<int>(ei)) return true;
          out[-ed.label] = static_cast<int>(ei);
        }
      }
    }
    return false;
  }

  // Traces w from the base vertex; member iff the trace exists and closes up.
  bool member(const Word& w) const {
    std::vector<int> path;
    return trace(w, &path);
  }

  // Expression of w in the subgroup generators (as a word in y_1..y_m),
  // valid only when member(w).
  bool member_with_witness(const Word& w, Word* witness) const {
    std::vector<int> path;  // signed edge refs
    if (!trace(w, &path)) return false;
    // Roll the unions back, patching the path at each undone fold.
    std::vector<int> par = parent_;
    auto pfind = [&par](int x) {
      while (par[static_cast<size_t>(x)] != x) x = par[static_cast<size_t>(x)];
      return x;
    };
    for (auto it = history_.rbegin(); it != history_.rend(); ++it) {
      par[static_cast<size_t>(it->merged_root)] = it->merged_root;
      int kept = pfind(it->kept_root);
      int gone = it->merged_root;
      // detour between the two classes through the shared vertex; edge
      // orientations depend on whether the fold was on outgoing or incoming
      // edges of that vertex
      std::vector<int> to_gone, to_kept;
      if (it->lab_sign > 0) {
        to_gone = {-(it->kept_edge + 1), (it->removed_edge + 1)};
        to_kept = {-(it->removed_edge + 1), (it->kept_edge + 1)};
      } else {
        to_gone = {(it->kept_edge + 1), -(it->removed_edge + 1)};
        to_kept = {(it->removed_edge + 1), -(it->kept_edge + 1)};
      }
      std::vector<int> fixed;
      int at = pfind(base_);
      auto hop = [&](int ref) {
        const Edge& ed = edges_[static_cast<size_t>(std::abs(ref)) - 1];
        int from = ref > 0 ? pfind(ed.from) : pfind(ed.to);
        int to = ref > 0 ? pfind(ed.to) : pfind(ed.from);
        if (at != from) {
          if (at == kept && from == gone)
            fixed.insert(fixed.end(), to_gone.begin(), to_gone.end());
          else if (at == gone && from == kept)
            fixed.insert(fixed.end(), to_kept.begin(), to_kept.end());
          else
            throw error("internal: fold rollback mismatch");
        }
        fixed.push_back(ref);
        at = to;
      };
      for (int ref : path) hop(ref);
      int end = pfind(base_);
      if (at != end) {
        if (at == kept && end == gone)
          fixed.insert(fixed.end(), to_gone.begin(), to_gone.end());
        else if (at == gone && end == kept)
          fixed.insert(fixed.end(), to_kept.begin(), to_kept.end());
        else
          throw error("internal: fold rollback mismatch at end");
      }
      path.swap(fixed);
    }
    // Free-reduce the edge path, then read off full petal traversals.
    std::vector<int> red;
    for (int ref : path) {
      if (!red.empty() && red.back() == -ref)
        red.pop_back();
      else
        red.push_back(ref);
    }
    // Map each edge to (petal, position).
    std::vector<std::pair<int, int>> where(edges_.size(), {-1, -1});
    for (size_t pi = 0; pi < petal_edges_.size(); ++pi)
      for (size_t k = 0; k < petal_edges_[pi].size(); ++k)
        where[static_cast<size_t>(std::abs(petal_edges_[pi][k])) - 1] = {static_cast<int>(pi),
                                                                         static_cast<int>(k)};
    Word wit(std::max<int>(1, static_cast<int>(petal_edges_.size())));
    size_t i = 0;
    while (i < red.size()) {
      int ref = red[i];
      auto [pi, pos] = where[static_cast<size_t>(std::abs(ref)) - 1];
      const auto& petal = petal_edges_[static_cast<size_t>(pi)];
      int len = static_cast<int>(petal.size());
      bool forward = (ref == petal[static_cast<size_t>(pos)]);
      if (forward) {
        if (pos != 0) throw error("internal: petal decode misaligned");
        for (int k = 0; k < len; ++k) {
          if (i + static_cast<size_t>(k) >= red.size() ||
              red[i + static_cast<size_t>(k)] != petal[static_cast<size_t>(k)])
            throw error("internal: partial petal traversal");
        }
        wit.push(pi + 1);
        i += static_cast<size_t>(len);
      } else {
        if (pos != len - 1) throw error("internal: petal decode misaligned");
        for (int k = 0; k < len; ++k) {
          if (i + static_cast<size_t>(k) >= red.size() ||
              red[i + static_cast<size_t>(k)] != -petal[static_cast<size_t>(len - 1 - k)])
            throw error("internal: partial petal traversal");
        }
        wit.push(-(pi + 1));
        i += static_cast<size_t>(len);
      }
    }
    if (witness) *witness = wit;
    return true;
  }

 private:
  struct Edge {
    int from, to, label;  // label > 0; traversing from->to reads the label
    bool alive = true;
  };
  struct FoldEvent {
    int kept_edge, removed_edge;
    int kept_root, merged_root;
    int lab_sign;  // +1: both edges leave the shared vertex; -1: both enter it
  };

  int rank_;
  int base_;
  std::vector<int> parent_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> petal_edges_;
  std::vector<FoldEvent> history_;

  int new_vertex() {
    parent_.push_back(static_cast<int>(parent_.size()));
    return static_cast<int>(parent_.size()) - 1;
  }
  int new_edge(int from, int to, int label) {
    edges_.push_back({from, to, label, true});
    return static_cast<int>(edges_.size()) - 1;
  }
  int find(int x) const {
    while (parent_[static_cast<size_t>(x)] != x) x = parent_[static_cast<size_t>(x)];
    return x;
  }

  void fold() {
    bool changed = true;
    while (changed) {
      changed = false;
      std::map<std::pair<int, int>, int> out;  // (vertex, signed label) -> edge
      for (size_t ei = 0; ei < edges_.size() && !changed; ++ei) {
        Edge& ed = edges_[ei];
        if (!ed.alive) continue;
        for (int dir : {+1, -1}) {
          int u = dir > 0 ? find(ed.from) : find(ed.to);
          int lab = dir * ed.label;
          auto key = std::make_pair(u, lab);
          auto it = out.find(key);
          if (it == out.end()) {
            out[key] = static_cast<int>(ei);
            continue;
          }
          int ej = it->second;
          if (ej == static_cast<int>(ei)) continue;
          // fold ei into ej: identify far endpoints, drop ei
          const Edge& keep = edges_[static_cast<size_t>(ej)];
          int far_k = (lab > 0) ? find(keep.to) : find(keep.from);
          int far_r = (dir > 0) ? find(ed.to) : find(ed.from);
          ed.alive = false;
          if (far_k != far_r) {
            parent_[static_cast<size_t>(far_r)] = far_k;
            history_.push_back({ej, static_cast<int>(ei), far_k, far_r, lab > 0 ? 1 : -1});
          } else {
            history_.push_back({ej, static_cast<int>(ei), far_k, far_k, lab > 0 ? 1 : -1});
          }
          changed = true;
          break;
        }
      }
    }
  }

  bool trace(const Word& w, std::vector<int>* path) const {
    if (w.rank() != rank_) throw error("membership query rank mismatch");
    // adjacency of the folded graph
    std::map<std::pair<int, int>, int> out;
    for (size_t ei = 0; ei < edges_.size(); ++ei) {
      const Edge& ed = edges_[ei];
      if (!ed.alive) continue;
      out[{find(ed.from), ed.label}] = static_cast<int>(ei) + 1;
      out[{find(ed.to), -ed.label}] = -(static_cast<int>(ei) + 1);
    }
    int at = find(base_);
    path->clear();
    for (int v : w.letters()) {
      auto it = out.find({at, v});
      if (it == out.end()) return false;
      int ref = it->second;
      path->push_back(ref);
      const Edge& ed = edges_[static_cast<size_t>(std::abs(ref)) - 1];
      at = ref > 0 ? find(ed.to) : find(ed.from);
    }
    return at == find(base_);
  }
};

struct Membership {
  bool member;
  Word witness;  // expression in the subgroup generators, when member
};

inline Membership stallings_membership(const std::vector<Word>& subgroup_gens, const Word& w) {
  int rank = w.rank();
  for (const auto& g : subgroup_gens) rank = g.rank();
  FoldedGraph graph(rank, subgroup_gens);
  Word wit;
  if (graph.member_with_witness(w, &wit)) return {true, wit};
  return {false, Word(std::max<int>(1, static_cast<int>(subgroup_gens.size())))};
}

}  // namespace limtk
