#pragma once

#include "moves.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace ttmap {

// One fundamental domain of the fold line is the complete Stallings
// factorization of g : lambda G -> G.phi, scaled by 1/lambda.
struct FoldLine {
  GraphSelfMap map;  // Length(G) = 1
  Algebraic lambda;
  double log_lambda = 0;
  FoldSequence folds;
  std::vector<Length> lengths;  // Length of folds.graphs[j], unscaled
  std::vector<Word> phi, phi_inverse;
};

// A parameter t written as k log(lambda) + tau with 0 <= tau < log(lambda).
struct LinePoint {
  long k = 0;
  double tau = 0;
};

inline FoldLine periodic_fold_line(const GraphSelfMap& f) {
  Algebraic lam = require_affine(f);
  if (!(lam > Algebraic(1))) throw precondition_error("expansion factor must exceed 1");
  if (!is_train_track(f).train_track) throw precondition_error("fold line needs a train track map");
  FoldLine line;
  line.map = f;
  Length total = f.graph.total_length();
  for (auto& e : line.map.graph.edges) e.length = e.length / total;
  line.lambda = lam;
  line.log_lambda = std::log(lam.to_double());
  line.folds = stallings_factorize(self_map_morphism(line.map));
  for (auto& g : line.folds.graphs) line.lengths.push_back(g.total_length());
  line.phi = automorphism_words(line.map);
  line.phi_inverse = invert_automorphism(line.phi);
  return line;
}

inline LinePoint line_point(const FoldLine& line, double t) {
  LinePoint p;
  p.k = static_cast<long>(std::floor(t / line.log_lambda));
  p.tau = t - static_cast<double>(p.k) * line.log_lambda;
  if (p.tau < 0) p.tau = 0;
  if (p.tau >= line.log_lambda) ++p.k, p.tau = 0;
  return p;
}

// Marking m o Phi^k.
inline MarkedGraph translate_marking(const FoldLine& line, MarkedGraph g, long k) {
  const std::vector<Word>& step = k >= 0 ? line.phi : line.phi_inverse;
  std::vector<Word> w;
  for (int i = 0; i < g.rank(); ++i) w.push_back({i + 1});
  for (long i = 0; i < std::labs(k); ++i)
    for (auto& x : w) x = apply_words(step, x);
  std::vector<Path> m;
  for (auto& x : w) m.push_back(marking_loop(g, x));
  g.marking = m;
  return g;
}

// The graph inside the fundamental domain, unscaled: total length
// lambda e^-tau.
inline MarkedGraph domain_graph(const FoldLine& line, double tau) {
  const FoldSequence& fs = line.folds;
  if (tau <= 0) return fs.graphs.front();
  double want = line.lambda.to_double() * std::exp(-tau);
  for (size_t j = 0; j < fs.moves.size(); ++j) {
    Length after = line.lengths[j + 1];
    if (after.to_double() > want) continue;
    if (after.to_double() == want) return fs.graphs[j + 1];
    const MarkedGraph& g = fs.graphs[j];
    Length s = line.lengths[j] - Length(Rational(want));
    if (s.sign() <= 0) return g;
    if (s >= fs.moves[j].length) return fs.graphs[j + 1];
    return fold_graph(g, g.dir(fs.moves[j].d1), g.dir(fs.moves[j].d2), s).graph;
  }
  return fs.graphs.back();
}

inline MarkedGraph evaluate(const FoldLine& line, const LinePoint& p) {
  MarkedGraph g = domain_graph(line, p.tau);
  Length scale = line.lambda.pow(static_cast<int>(-(p.k + 1)));
  for (auto& e : g.edges) e.length = e.length * scale;
  return p.k ? translate_marking(line, g, p.k) : g;
}

inline MarkedGraph evaluate(const FoldLine& line, double t) { return evaluate(line, line_point(line, t)); }

struct LengthTable {
  std::vector<double> t;
  std::vector<std::string> classes;
  std::vector<std::vector<Length>> lengths;  // [t][class]
};

inline LengthTable sample_lengths(const FoldLine& line, const std::vector<double>& ts, const std::vector<Word>& classes) {
  if (classes.empty()) throw precondition_error("conjugacy list is empty");
  LengthTable tab;
  tab.t = ts;
  for (auto& w : classes) {
    if (cyclic_reduce_word(w).empty()) throw precondition_error("trivial conjugacy class");
    tab.classes.push_back(word_str(line.map.graph, w));
  }
  for (double t : ts) {
    MarkedGraph g = evaluate(line, t);
    std::vector<Length> row;
    for (auto& w : classes) row.push_back(translation_length(g, w));
    tab.lengths.push_back(row);
  }
  return tab;
}

inline std::string length_table_csv(const LengthTable& tab) {
  std::ostringstream out;
  out.precision(17);
  out << "t,class,length\n";
  for (size_t i = 0; i < tab.t.size(); ++i)
    for (size_t c = 0; c < tab.classes.size(); ++c)
      out << tab.t[i] << "," << tab.classes[c] << "," << tab.lengths[i][c].to_double() << "\n";
  return out.str();
}

}  // namespace ttmap
