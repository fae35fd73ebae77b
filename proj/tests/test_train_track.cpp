#include <ttmap/io.hpp>
#include <ttmap/train_track.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace ttmap;

namespace {

GraphSelfMap load(const std::string& name) { return load_map(std::string(TTMAP_DATA_DIR "/") + name); }

std::set<std::string> gate_names(const GraphSelfMap& f, const GateStructure& gs, int v) {
  std::set<std::string> out;
  for (auto& gt : gs.gates_at(v)) {
    std::vector<std::string> n;
    for (Dir d : gt) n.push_back(f.graph.label(d));
    std::sort(n.begin(), n.end());
    std::string s;
    for (auto& x : n) s += (s.empty() ? "" : ",") + x;
    out.insert(s);
  }
  return out;
}

std::set<std::string> turn_names(const GraphSelfMap& f, const std::set<Turn>& ts) {
  std::set<std::string> out;
  for (auto& t : ts) {
    std::string a = f.graph.label(t.first), b = f.graph.label(t.second);
    if (b < a) std::swap(a, b);
    out.insert(a + "," + b);
  }
  return out;
}

std::set<std::string> edge_names(const WhiteheadGraph& w) {
  std::set<std::string> out;
  for (auto [a, b] : w.edges) {
    std::string x = w.names[a], y = w.names[b];
    if (y < x) std::swap(x, y);
    out.insert(x + "," + y);
  }
  return out;
}

}  // namespace

TEST(Gates, Example1) {
  GraphSelfMap f = load("example1.json");
  GateStructure gs = gates(f);
  EXPECT_EQ(gate_names(f, gs, 0), (std::set<std::string>{"a,b", "c", "~a,~b,~c"}));
  GraphSelfMap fs = load("example1_slid.json");
  EXPECT_EQ(gate_names(fs, gates(fs), 0), (std::set<std::string>{"a,b,c", "~a,~c", "~b"}));
}

TEST(Gates, IdentitySingletons) {
  GraphSelfMap f = identity_map(load("example2.json").graph);
  GateStructure gs = gates(f);
  for (auto& gt : gs.gates) EXPECT_EQ(gt.size(), 1u);
  EXPECT_TRUE(illegal_turns(f).empty());
  EXPECT_EQ(gs.num_gates(0), f.graph.valence(0));
}

TEST(Gates, DynamicsPeriods) {
  GraphSelfMap f = load("rank3.json");
  auto dd = direction_dynamics(f);
  int nonperiodic = 0;
  for (Dir d = 0; d < f.graph.num_dirs(); ++d)
    if (!dd.periodic[d]) {
      ++nonperiodic;
      EXPECT_EQ(f.graph.label(d), "~A");
      EXPECT_GT(dd.preperiod[d], 0);
    } else {
      EXPECT_EQ(dd.period[d], 1);
    }
  EXPECT_EQ(nonperiodic, 1);
}

TEST(IllegalTurns, WorkedExamples) {
  GraphSelfMap f = load("rank3.json");
  EXPECT_EQ(turn_names(f, illegal_turns(f)), (std::set<std::string>{"~A,~F"}));
  GraphSelfMap g = load("example2.json");
  EXPECT_EQ(turn_names(g, illegal_turns(g)), (std::set<std::string>{"D,E"}));
}

TEST(IllegalTurns, LegalityClosedUnderDg) {
  for (const char* n : {"rank3.json", "example1.json", "example1_slid.json", "example2.json"}) {
    GraphSelfMap f = load(n);
    GateStructure gs = gates(f);
    const MarkedGraph& g = f.graph;
    for (int v = 0; v < g.num_vertices(); ++v) {
      auto ds = g.directions_at(v);
      for (size_t i = 0; i < ds.size(); ++i)
        for (size_t j = i + 1; j < ds.size(); ++j) {
          Turn t = make_turn(ds[i], ds[j]);
          Turn u = make_turn(f.Dg(t.first), f.Dg(t.second));
          bool image_legal = !degenerate(u) && gs.legal(u);
          EXPECT_EQ(gs.legal(t), image_legal || !gs.same_gate(t.first, t.second)) << n;
          if (gs.legal(t)) EXPECT_TRUE(image_legal) << n;
        }
    }
  }
}

TEST(TrainTrack, Verdicts) {
  EXPECT_TRUE(is_train_track(load("rank3.json")).train_track);
  EXPECT_TRUE(is_train_track(load("example2.json")).train_track);
  EXPECT_TRUE(is_train_track(load("example1.json")).train_track);
  EXPECT_TRUE(is_train_track(load("example1_slid.json")).train_track);
}

TEST(TrainTrack, FailureWitness) {
  GraphSelfMap f = rose_map({"a", "b"}, {"ab", "~a"});
  f.validate();
  auto v = is_train_track(f);
  EXPECT_FALSE(v.train_track);
  EXPECT_EQ(f.graph.edges[v.edge].label, "a");
  EXPECT_EQ(v.index, 0);
  EXPECT_EQ(turn_str(f.graph, v.turn), "{~a,b}");
  EXPECT_THROW(local_whitehead_graph(f, 0), precondition_error);
}

TEST(TrainTrack, SwapRoseIsTrainTrack) {
  // a -> b, b -> ba is positive, hence a train track map
  EXPECT_TRUE(is_train_track(rose_map({"a", "b"}, {"b", "ba"})).train_track);
}

TEST(Whitehead, Rank3Local) {
  GraphSelfMap f = load("rank3.json");
  std::map<Turn, int> levels;
  WhiteheadGraph w = local_whitehead_graph(f, 0, &levels);
  EXPECT_EQ(w.num_vertices(), 6);
  EXPECT_EQ(edge_names(w), (std::set<std::string>{"A,~F", "G,~F", "F,~F", "F,~A", "F,~G"}));
  for (auto& [t, k] : levels) {
    std::string s = turn_str(f.graph, t);
    if (s == "{F,~F}") EXPECT_EQ(k, 2);
    else EXPECT_EQ(k, 1) << s;
  }
  EXPECT_TRUE(w.connected());
}

TEST(Whitehead, Rank3Stable) {
  GraphSelfMap f = load("rank3.json");
  WhiteheadGraph sw = stable_whitehead_graph(f, 0);
  EXPECT_EQ(sw.num_vertices(), 5);
  EXPECT_EQ(sw.num_edges(), 4);
  EXPECT_EQ(sw.index("~A"), -1);
  EXPECT_EQ(sw.valences(), (std::vector<int>{3, 2, 1, 1, 1}));
  EXPECT_TRUE(sw.connected());
  EXPECT_EQ(sw.blocks().size(), 4u);
  EXPECT_EQ(sw.cut_vertices().size(), 2u);
}

TEST(Whitehead, Example2Local) {
  GraphSelfMap f = load("example2.json");
  const MarkedGraph& g = f.graph;
  std::map<Turn, int> levels;
  WhiteheadGraph wp = local_whitehead_graph(f, g.find_vertex("p"), &levels);
  EXPECT_EQ(edge_names(wp), (std::set<std::string>{"F,~A", "F,~D"}));
  WhiteheadGraph wq = local_whitehead_graph(f, g.find_vertex("q"), &levels);
  EXPECT_EQ(edge_names(wq), (std::set<std::string>{"A,~F", "D,~F", "D,~E", "E,~F"}));
  std::set<Turn> first;
  for (auto& [t, k] : levels)
    if (k == 1) first.insert(t);
  EXPECT_EQ(turn_names(f, first), (std::set<std::string>{"F,~A", "F,~D", "A,~F", "D,~F", "E,~F"}));
  std::set<std::string> cuts;
  for (int c : wq.cut_vertices()) cuts.insert(wq.names[c]);
  EXPECT_TRUE(cuts.count("D"));
  EXPECT_THROW(stable_whitehead_graph(f, g.find_vertex("p")), precondition_error);
}

TEST(Whitehead, InteriorPoint) {
  GraphSelfMap f = load("rank3.json");
  WhiteheadGraph w = local_whitehead_graph_interior(f, 1);
  EXPECT_EQ(w.num_vertices(), 2);
  EXPECT_EQ(w.num_edges(), 1);
}

TEST(Whitehead, SimplicialUnderDg) {
  for (const char* n : {"rank3.json", "example2.json", "example1.json"}) {
    GraphSelfMap f = load(n);
    auto taken = taken_turns(f);
    for (auto& [t, k] : taken) {
      Turn u = make_turn(f.Dg(t.first), f.Dg(t.second));
      EXPECT_TRUE(taken.count(u)) << n;
    }
  }
}

TEST(Whitehead, IdentityStableEqualsLocal) {
  GraphSelfMap f = identity_map(load("rank3.json").graph);
  WhiteheadGraph w = local_whitehead_graph(f, 0), sw = stable_whitehead_graph(f, 0);
  EXPECT_EQ(w.names, sw.names);
  EXPECT_EQ(w.edges, sw.edges);
}

TEST(Principal, Rank3) {
  GraphSelfMap f = load("rank3.json");
  auto pv = principal_vertices(f, {});
  EXPECT_EQ(pv, (std::vector<int>{0}));
  EXPECT_TRUE(is_rotationless(f, pv));
}

TEST(Principal, SwapNotRotationless) {
  GraphSelfMap f = rose_map({"a", "b"}, {"b", "a"});
  auto pv = principal_vertices(f, {});
  EXPECT_EQ(pv.size(), 1u);
  EXPECT_FALSE(is_rotationless(f, pv));
}

TEST(WhiteheadGraph, BlocksAndIsomorphism) {
  WhiteheadGraph c;
  for (int i = 0; i < 5; ++i) c.add_vertex("v" + std::to_string(i));
  for (int i = 0; i < 5; ++i) c.add_edge(i, (i + 1) % 5);
  EXPECT_EQ(c.blocks().size(), 1u);
  EXPECT_TRUE(c.cut_vertices().empty());

  WhiteheadGraph bow;
  for (int i = 0; i < 5; ++i) bow.add_vertex("w" + std::to_string(i));
  bow.add_edge(0, 1), bow.add_edge(1, 2), bow.add_edge(2, 0);
  bow.add_edge(2, 3), bow.add_edge(3, 4), bow.add_edge(4, 2);
  auto b = bow.blocks();
  ASSERT_EQ(b.size(), 2u);
  for (auto& x : b) EXPECT_EQ(x.num_edges(), 3);
  EXPECT_EQ(bow.cut_vertices(), (std::set<int>{2}));

  WhiteheadGraph disc;
  disc.add_vertex("x"), disc.add_vertex("y");
  EXPECT_THROW(disc.blocks(), std::invalid_argument);

  // relabelled copy is isomorphic; a path is not isomorphic to a star
  std::mt19937 rng(5);
  std::vector<int> perm{0, 1, 2, 3, 4};
  std::shuffle(perm.begin(), perm.end(), rng);
  WhiteheadGraph bow2;
  for (int i = 0; i < 5; ++i) bow2.add_vertex("u" + std::to_string(i));
  for (auto [x, y] : bow.edges) bow2.add_edge(perm[x], perm[y]);
  EXPECT_TRUE(isomorphic(bow, bow2));
  WhiteheadGraph path, star;
  for (int i = 0; i < 4; ++i) path.add_vertex(std::to_string(i)), star.add_vertex(std::to_string(i));
  path.add_edge(0, 1), path.add_edge(1, 2), path.add_edge(2, 3);
  star.add_edge(0, 1), star.add_edge(0, 2), star.add_edge(0, 3);
  EXPECT_FALSE(isomorphic(path, star));
  EXPECT_NE(bow.dot().find("\"w0\" -- \"w1\""), std::string::npos);
}
