#pragma once

#include "map.hpp"
#include "whitehead_graph.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace ttmap {

// Unordered pair of directions at a common vertex, stored with first <= second.
using Turn = std::pair<Dir, Dir>;

inline Turn make_turn(Dir a, Dir b) { return a < b ? Turn{a, b} : Turn{b, a}; }
inline bool degenerate(const Turn& t) { return t.first == t.second; }

inline std::string turn_str(const MarkedGraph& g, const Turn& t) {
  return "{" + g.label(t.first) + "," + g.label(t.second) + "}";
}

// Turn taken by a path at its i-th interior vertex (between p[i] and p[i+1]).
inline Turn turn_at(const Path& p, size_t i) { return make_turn(rev(p[i]), p[i + 1]); }

// Orbit data of Dg on the finite direction set.
struct DirectionDynamics {
  std::vector<Dir> next;
  std::vector<bool> periodic;
  std::vector<int> period;     // 0 for nonperiodic directions
  std::vector<int> preperiod;  // steps until the orbit enters its cycle
  std::vector<Dir> eventual;   // Dg^N(d) for N = number of directions
};

inline DirectionDynamics direction_dynamics(const GraphSelfMap& f) {
  int n = f.graph.num_dirs();
  DirectionDynamics dd;
  dd.next.resize(n);
  for (Dir d = 0; d < n; ++d) dd.next[d] = f.Dg(d);
  dd.periodic.assign(n, false);
  dd.period.assign(n, 0);
  dd.preperiod.assign(n, 0);
  dd.eventual.resize(n);
  for (Dir d = 0; d < n; ++d) {
    // Floyd cycle detection
    Dir slow = dd.next[d], fast = dd.next[dd.next[d]];
    while (slow != fast) slow = dd.next[slow], fast = dd.next[dd.next[fast]];
    int mu = 0;
    slow = d;
    while (slow != fast) slow = dd.next[slow], fast = dd.next[fast], ++mu;
    int lam = 1;
    fast = dd.next[slow];
    while (slow != fast) fast = dd.next[fast], ++lam;
    dd.preperiod[d] = mu;
    if (mu == 0) dd.periodic[d] = true, dd.period[d] = lam;
    Dir e = d;
    for (int i = 0; i < n; ++i) e = dd.next[e];
    dd.eventual[d] = e;
  }
  return dd;
}

struct GateStructure {
  DirectionDynamics dynamics;
  std::vector<int> gate_of;              // direction -> gate id
  std::vector<std::vector<Dir>> gates;   // gate id -> directions, increasing
  std::vector<int> gate_vertex;          // gate id -> vertex

  bool same_gate(Dir a, Dir b) const { return gate_of[a] == gate_of[b]; }
  bool legal(const Turn& t) const { return !same_gate(t.first, t.second); }
  std::vector<std::vector<Dir>> gates_at(int v) const {
    std::vector<std::vector<Dir>> out;
    for (size_t i = 0; i < gates.size(); ++i)
      if (gate_vertex[i] == v) out.push_back(gates[i]);
    return out;
  }
  int num_gates(int v) const {
    return static_cast<int>(std::count(gate_vertex.begin(), gate_vertex.end(), v));
  }
};

inline GateStructure gates(const GraphSelfMap& f) {
  const MarkedGraph& g = f.graph;
  GateStructure gs;
  gs.dynamics = direction_dynamics(f);
  gs.gate_of.assign(g.num_dirs(), -1);
  for (int v = 0; v < g.num_vertices(); ++v) {
    std::map<Dir, int> by_eventual;
    for (Dir d : g.directions_at(v)) {
      Dir e = gs.dynamics.eventual[d];
      auto it = by_eventual.find(e);
      if (it == by_eventual.end()) {
        int id = static_cast<int>(gs.gates.size());
        by_eventual[e] = id;
        gs.gates.push_back({});
        gs.gate_vertex.push_back(v);
        it = by_eventual.find(e);
      }
      gs.gate_of[d] = it->second;
      gs.gates[it->second].push_back(d);
    }
  }
  for (auto& gt : gs.gates) std::sort(gt.begin(), gt.end());
  return gs;
}

inline std::set<Turn> illegal_turns(const GraphSelfMap& f) {
  GateStructure gs = gates(f);
  std::set<Turn> out;
  for (auto& gt : gs.gates)
    for (size_t i = 0; i < gt.size(); ++i)
      for (size_t j = i + 1; j < gt.size(); ++j) out.insert(make_turn(gt[i], gt[j]));
  return out;
}

struct TrainTrackVerdict {
  bool train_track = true;
  int edge = -1;     // offending edge
  int index = -1;    // turn between image letters index and index+1
  Turn turn{-1, -1};
};

inline TrainTrackVerdict is_train_track(const GraphSelfMap& f) {
  GateStructure gs = gates(f);
  TrainTrackVerdict v;
  for (int e = 0; e < f.graph.num_edges(); ++e) {
    const Path& p = f.emap[e];
    for (size_t i = 0; i + 1 < p.size(); ++i) {
      Turn t = turn_at(p, i);
      if (degenerate(t) || !gs.legal(t)) {
        v.train_track = false;
        v.edge = e;
        v.index = static_cast<int>(i);
        v.turn = t;
        return v;
      }
    }
  }
  return v;
}

inline void require_train_track(const GraphSelfMap& f) {
  auto v = is_train_track(f);
  if (!v.train_track)
    throw precondition_error("not a train track map: image of " + f.graph.edges[v.edge].label + " takes illegal turn " +
                             turn_str(f.graph, v.turn));
}

// Every turn taken by some g^k(E), with the least such k. Seeds are the turns
// inside edge images (k = 1), closed under Dg.
inline std::map<Turn, int> taken_turns(const GraphSelfMap& f) {
  require_train_track(f);
  std::map<Turn, int> level;
  std::vector<Turn> frontier;
  for (auto& p : f.emap)
    for (size_t i = 0; i + 1 < p.size(); ++i) {
      Turn t = turn_at(p, i);
      if (level.emplace(t, 1).second) frontier.push_back(t);
    }
  int k = 1;
  while (!frontier.empty()) {
    ++k;
    std::vector<Turn> nxt;
    for (auto& t : frontier) {
      Turn u = make_turn(f.Dg(t.first), f.Dg(t.second));
      if (degenerate(u)) throw std::logic_error("taken turn maps to a degenerate turn");
      if (level.emplace(u, k).second) nxt.push_back(u);
    }
    frontier = std::move(nxt);
  }
  return level;
}

// W(v) with direction labels as vertex names.
inline WhiteheadGraph local_whitehead_graph(const GraphSelfMap& f, int v, std::map<Turn, int>* levels = nullptr) {
  if (v < 0 || v >= f.graph.num_vertices()) throw std::out_of_range("unknown vertex");
  auto taken = taken_turns(f);
  WhiteheadGraph w;
  std::map<Dir, int> idx;
  for (Dir d : f.graph.directions_at(v)) idx[d] = w.add_vertex(f.graph.label(d));
  for (auto& [t, k] : taken) {
    if (!idx.count(t.first) || !idx.count(t.second)) continue;
    w.add_edge(idx[t.first], idx[t.second]);
    if (levels) (*levels)[t] = k;
  }
  return w;
}

// W(x) for x interior to edge e: directions "e" and "~e", joined when some
// edge image crosses e.
inline WhiteheadGraph local_whitehead_graph_interior(const GraphSelfMap& f, int e) {
  require_train_track(f);
  WhiteheadGraph w;
  int a = w.add_vertex(f.graph.label(2 * e)), b = w.add_vertex(f.graph.label(2 * e + 1));
  for (auto& p : f.emap)
    for (Dir d : p)
      if (edge_of(d) == e) {
        w.add_edge(a, b);
        return w;
      }
  return w;
}

inline std::vector<bool> periodic_vertices(const GraphSelfMap& f) {
  int n = f.graph.num_vertices();
  std::vector<bool> out(n, false);
  for (int v = 0; v < n; ++v) {
    int x = v;
    for (int i = 0; i < n; ++i) {
      x = f.vmap[x];
      if (x == v) {
        out[v] = true;
        break;
      }
    }
  }
  return out;
}

inline std::vector<Dir> periodic_directions(const GraphSelfMap& f, int v) {
  auto dd = direction_dynamics(f);
  std::vector<Dir> out;
  for (Dir d : f.graph.directions_at(v))
    if (dd.periodic[d]) out.push_back(d);
  return out;
}

inline std::vector<Dir> fixed_directions(const GraphSelfMap& f, int v) {
  std::vector<Dir> out;
  for (Dir d : f.graph.directions_at(v))
    if (f.Dg(d) == d) out.push_back(d);
  return out;
}

// SW(v): W(v) restricted to periodic directions.
inline WhiteheadGraph stable_whitehead_graph(const GraphSelfMap& f, int v) {
  if (!periodic_vertices(f)[v]) throw precondition_error("vertex " + f.graph.vertices[v] + " is not periodic");
  WhiteheadGraph w = local_whitehead_graph(f, v);
  auto per = periodic_directions(f, v);
  std::vector<int> keep;
  for (Dir d : per) keep.push_back(w.index(f.graph.label(d)));
  std::sort(keep.begin(), keep.end());
  return w.induced(keep);
}

// Principal vertices given the vertices that are endpoints of periodic iNps.
inline std::vector<int> principal_vertices(const GraphSelfMap& f, const std::set<int>& inp_endpoints) {
  auto per = periodic_vertices(f);
  std::vector<int> out;
  for (int v = 0; v < f.graph.num_vertices(); ++v) {
    if (!per[v]) continue;
    if (periodic_directions(f, v).size() >= 3 || inp_endpoints.count(v)) out.push_back(v);
  }
  return out;
}

inline bool is_rotationless(const GraphSelfMap& f, const std::vector<int>& principal) {
  for (int v : principal) {
    if (f.vmap[v] != v) return false;
    for (Dir d : periodic_directions(f, v))
      if (f.Dg(d) != d) return false;
  }
  return true;
}

}  // namespace ttmap
