#include <ttmap/fold_line.hpp>
#include <ttmap/ideal_whitehead.hpp>
#include <ttmap/io.hpp>
#include <ttmap/moves.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

using namespace ttmap;

namespace {

enum Exit { kOk = 0, kError = 1, kParse = 2, kPrecondition = 3, kFound = 10 };

struct Options {
  std::string input, out, format = "json", periods = "1,2", classes, inverse;
  std::string d1, d2, vertex, side1, side2;
  double tol = 1e-12;
  int samples = 100;
  unsigned seed = 1;
  bool maximal = false;
};

std::vector<int> parse_periods(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      size_t used = 0;
      int p = std::stoi(tok, &used);
      if (used != tok.size() || p < 1) throw std::invalid_argument(tok);
      out.push_back(p);
    } catch (const std::logic_error&) {
      throw parse_error("bad period list: " + s);
    }
  }
  if (out.empty()) throw parse_error("empty period list");
  return out;
}

GraphSelfMap affine(const GraphSelfMap& f) { return affine_stretch(f) ? f : affine_normalize(f); }

std::vector<Dir> parse_dirs(const MarkedGraph& g, const std::string& s) {
  std::vector<std::string> names;
  std::stringstream ss(s);
  std::string tok;
  while (ss >> tok) names.push_back(tok);
  return g.path(names);
}

json dirs_json(const MarkedGraph& g, const std::vector<Dir>& ds) {
  json a = json::array();
  for (Dir d : ds) a.push_back(g.label(d));
  return a;
}

json turn_json(const MarkedGraph& g, const Turn& t) { return json::array({g.label(t.first), g.label(t.second)}); }

json whitehead_json(const WhiteheadGraph& w) {
  json e = json::array();
  for (auto [a, b] : w.edges) e.push_back(json::array({w.names[a], w.names[b]}));
  return {{"vertices", w.names}, {"edges", e}};
}

json inp_json(const MarkedGraph& g, const NielsenPath& np) {
  return {{"alpha", path_json(g, np.alpha)}, {"beta", path_json(g, np.beta)}, {"period", np.period},
          {"illegal_turn", turn_json(g, np.turn())}};
}

json rational_json(const Rational& q) { return q.get_str(); }

json check(const GraphSelfMap& f) {
  const MarkedGraph& g = f.graph;
  TrainTrackVerdict v = is_train_track(f);
  json j{{"train_track", v.train_track}};
  json turns = json::array();
  for (auto& t : illegal_turns(f)) turns.push_back(turn_json(g, t));
  j["illegal_turns"] = turns;
  if (!v.train_track) j["witness"] = {{"edge", g.edges[v.edge].label}, {"index", v.index}, {"turn", turn_json(g, v.turn)}};
  return j;
}

json pf(const GraphSelfMap& f, double tol) {
  PFData d = pf_eigenvalue(f, tol);
  json cp = json::array();
  for (auto& c : d.charpoly.coeffs()) cp.push_back(rational_json(c));
  json ab = json::array();
  for (auto z : complex_roots(characteristic_polynomial(abelianization(f)))) ab.push_back({{"re", z.real()}, {"im", z.imag()}});
  IrreducibilityReport ir = irreducibility_report(f);
  return {{"lambda", d.lambda},
          {"interval", {rational_json(d.root.lo), rational_json(d.root.hi)}},
          {"characteristic_polynomial", cp},
          {"right_eigenvector", d.right},
          {"left_eigenvector", d.left},
          {"abelianization_eigenvalues", ab},
          {"irreducible", ir.matrix_irreducible},
          {"primitive", ir.matrix_primitive},
          {"cyclotomic_factors", ir.cyclotomic_indices}};
}

json gates_json(const GraphSelfMap& f) {
  const MarkedGraph& g = f.graph;
  GateStructure gs = gates(f);
  json j = json::object();
  for (int v = 0; v < g.num_vertices(); ++v) {
    json a = json::array();
    for (auto& gate : gs.gates_at(v)) a.push_back(dirs_json(g, gate));
    j[g.vertices[v]] = a;
  }
  return j;
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty() || o.out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(o.out);
  if (!os) throw std::runtime_error("cannot write " + o.out);
  os << text;
}

void emit(const Options& o, const json& j) { emit(o, j.dump(2) + "\n"); }

std::vector<Word> read_classes(const Options& o, const MarkedGraph& g) {
  std::vector<Word> out;
  if (o.classes.empty()) {
    std::mt19937 rng(o.seed);
    while (out.size() < 50) {
      Word w;
      int n = 1 + static_cast<int>(rng() % 8);
      for (int i = 0; i < n; ++i) {
        int a = 1 + static_cast<int>(rng() % g.rank());
        w.push_back(rng() % 2 ? a : -a);
      }
      w = cyclic_reduce_word(w);
      if (!w.empty()) out.push_back(w);
    }
    return out;
  }
  std::ifstream is(o.classes);
  if (!is) throw parse_error("cannot read " + o.classes);
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    out.push_back(parse_word(g.generators, line));
  }
  return out;
}

int run(const std::string& verb, const Options& o) {
  if (o.format != "json" && o.format != "dot" && o.format != "csv") throw parse_error("unknown format " + o.format);
  GraphSelfMap f = load_map(o.input);
  const MarkedGraph& g = f.graph;

  if (verb == "check") return emit(o, check(f)), kOk;
  if (verb == "pf") return emit(o, pf(f, o.tol)), kOk;
  if (verb == "gates") return emit(o, gates_json(f)), kOk;

  if (verb == "whitehead") {
    require_train_track(f);
    std::string dot;
    json j = json::object();
    for (int v = 0; v < g.num_vertices(); ++v) {
      WhiteheadGraph lw = local_whitehead_graph(f, v);
      j[g.vertices[v]] = whitehead_json(lw);
      dot += lw.dot("W(" + g.vertices[v] + ")");
    }
    return o.format == "dot" ? emit(o, dot) : emit(o, j), kOk;
  }

  if (verb == "nielsen") {
    GraphSelfMap n = affine(f);
    InpSearch s = find_inps(n, parse_periods(o.periods));
    json a = json::array();
    for (auto& np : s.all()) a.push_back(inp_json(s.map.graph, np));
    json j{{"inps", a}, {"found", !a.empty()}};
    if (!a.empty()) j["map"] = map_json(s.map);
    emit(o, j);
    return a.empty() ? kOk : kFound;
  }

  if (verb == "ideal-whitehead" || verb == "index") {
    IdealWhiteheadGraph iw = ideal_whitehead_graph(affine(f));
    if (verb == "index") {
      IndexReport r = index_type(iw, g.rank());
      json it = json::array();
      for (auto& q : r.index_type) it.push_back(rational_json(q));
      return emit(o, json{{"index_type", it},
                          {"total", rational_json(r.total)},
                          {"bound", rational_json(r.bound)},
                          {"inequality", r.inequality_ok},
                          {"strict", r.strict},
                          {"parageometric", r.parageometric_label},
                          {"anomalous", r.anomalous}}),
             kOk;
    }
    json comps = json::array();
    std::string dot;
    int i = 0;
    for (auto& c : iw.components) {
      json pv = json::array();
      for (int v : c.principal) pv.push_back(iw.map.graph.vertices[v]);
      json blocks = json::array();
      for (auto& b : cut_point_decomposition(c.graph)) blocks.push_back(whitehead_json(b));
      comps.push_back({{"graph", whitehead_json(c.graph)},
                       {"index", rational_json(c.index)},
                       {"principal", pv},
                       {"blocks", blocks}});
      dot += c.graph.dot("C" + std::to_string(i++));
    }
    return o.format == "dot" ? emit(o, dot) : emit(o, json{{"components", comps}}), kOk;
  }

  if (verb == "evidence") {
    std::optional<GraphSelfMap> inv;
    if (!o.inverse.empty()) inv = load_map(o.inverse);
    NongeometricEvidence ev = nongeometric_evidence(f, inv);
    json j{{"verdict", ev.verdict}, {"no_periodic_inp", ev.no_periodic_inp}, {"periods_checked", ev.periods_checked},
           {"lambda", ev.lambda}};
    if (ev.expansion_factors_differ) {
      j["expansion_factors_differ"] = *ev.expansion_factors_differ;
      j["lambda_inverse"] = ev.lambda_inverse;
    }
    return emit(o, j), kOk;
  }

  if (verb == "fold") {
    if (o.d1.empty() || o.d2.empty()) throw parse_error("fold needs --d1 and --d2");
    Dir a = g.dir(o.d1), b = g.dir(o.d2);
    MapFold mf = o.maximal ? fold_maximal(f, a, b) : fold(f, a, b);
    return emit(o, map_json(mf.map)), kOk;
  }

  if (verb == "collapse") {
    NielsenData nd = nielsen_data(affine(f), {1});
    auto& ps = nd.search.by_period[1];
    if (ps.empty()) throw precondition_error("no Nielsen path of period one to collapse");
    CollapseRun run = reduce_and_collapse(nd.search.map, ps.front());
    return emit(o, json{{"steps", run.steps}, {"map", map_json(run.map)}}), kOk;
  }

  if (verb == "split") {
    int w = g.find_vertex(o.vertex);
    if (w < 0) throw parse_error("unknown vertex '" + o.vertex + "'");
    TTSplit s = tt_split(affine(f), w, parse_dirs(g, o.side1), parse_dirs(g, o.side2));
    json j{{"nielsen", s.nielsen}, {"w1", s.map.graph.vertices[s.w1]}, {"w2", s.map.graph.vertices[s.w2]},
           {"e1", s.map.graph.label(s.e1)}, {"e2", s.map.graph.label(s.e2)}, {"map", map_json(s.map)}};
    return emit(o, j), kOk;
  }

  if (verb == "finest") {
    FinestRun run = finest_decomposition(affine(f));
    return emit(o, json{{"steps", run.steps}, {"principal_counts", run.principal_counts}, {"bound", run.bound},
                        {"map", map_json(run.map)}}),
           kOk;
  }

  if (verb == "factorize") {
    FoldSequence fs = stallings_factorize(self_map_morphism(affine(f)));
    json j = fold_sequence_json(fs);
    j["combinatorial_length"] = combinatorial_length(self_map_morphism(affine(f)));
    return emit(o, j), kOk;
  }

  if (verb == "foldline") {
    if (o.samples < 1) throw parse_error("--samples must be positive");
    FoldLine line = periodic_fold_line(affine(f));
    std::vector<double> ts;
    for (int i = 0; i < o.samples; ++i) ts.push_back(line.log_lambda * i / o.samples);
    LengthTable tab = sample_lengths(line, ts, read_classes(o, g));
    if (o.format == "csv") return emit(o, length_table_csv(tab)), kOk;
    json rows = json::array();
    for (size_t i = 0; i < ts.size(); ++i) {
      json ls = json::array();
      for (auto& l : tab.lengths[i]) ls.push_back(l.to_double());
      rows.push_back({{"t", ts[i]}, {"graph_length", std::exp(-ts[i])}, {"lengths", ls}});
    }
    return emit(o, json{{"lambda", line.lambda.to_double()}, {"classes", tab.classes}, {"samples", rows},
                        {"folds", fold_sequence_json(line.folds)}}),
           kOk;
  }
  throw parse_error("unknown verb " + verb);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"train track maps: checks, invariants, moves and fold lines"};
  app.require_subcommand(1);
  Options o;
  const std::vector<std::pair<std::string, std::string>> verbs = {
      {"check", "train track check and illegal turns"},
      {"pf", "expansion factor and abelianization eigenvalues"},
      {"gates", "gates at each vertex"},
      {"whitehead", "local Whitehead graphs"},
      {"nielsen", "search for indivisible Nielsen paths (exit 10 if found)"},
      {"ideal-whitehead", "ideal Whitehead graph"},
      {"index", "index type and index inequality"},
      {"evidence", "sufficient conditions for nongeometricity"},
      {"fold", "fold two directions with equal images"},
      {"collapse", "fold and collapse a Nielsen path"},
      {"split", "split a vertex along a partition of its directions"},
      {"finest", "finest Nielsen decomposition driver"},
      {"factorize", "complete Stallings fold factorization of the map"},
      {"foldline", "sample translation lengths along the periodic fold line"},
  };
  for (auto& [name, help] : verbs) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--input,input", o.input, "map document")->required();
    sub->add_option("--out", o.out, "output file (stdout by default)");
    sub->add_option("--format", o.format, "json, dot or csv");
    sub->add_option("--period", o.periods, "comma separated iNp periods");
    sub->add_option("--tol", o.tol, "eigenvector tolerance");
    sub->add_option("--samples", o.samples, "number of samples per fundamental domain");
    sub->add_option("--seed", o.seed, "seed for the default conjugacy list");
    if (name == "fold") {
      sub->add_option("--d1", o.d1, "first direction");
      sub->add_option("--d2", o.d2, "second direction");
      sub->add_flag("--maximal", o.maximal, "subdivide and fold the maximal common segment");
    }
    if (name == "split") {
      sub->add_option("--vertex", o.vertex)->required();
      sub->add_option("--side1", o.side1, "directions of X1, space separated")->required();
      sub->add_option("--side2", o.side2, "directions of X2, space separated")->required();
    }
    if (name == "evidence") sub->add_option("--inverse", o.inverse, "map document for the inverse");
    if (name == "foldline") sub->add_option("--classes", o.classes, "conjugacy classes, one word per line");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParse;
  }
  std::string verb = app.get_subcommands().front()->get_name();
  try {
    return run(verb, o);
  } catch (const parse_error& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const json::exception& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const precondition_error& e) {
    std::cerr << "precondition: " << e.what() << "\n";
    return kPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
}
