#include <ttmap/fold_line.hpp>
#include <ttmap/io.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace ttmap;

namespace {

GraphSelfMap load_normalized(const std::string& name) {
  return affine_normalize(load_map(std::string(TTMAP_DATA_DIR "/") + name));
}

const FoldLine& rank3() {
  static FoldLine line = periodic_fold_line(load_normalized("rank3.json"));
  return line;
}

std::vector<Word> classes(int rank, unsigned seed) {
  std::mt19937 rng(seed);
  std::vector<Word> out;
  while (out.size() < 50) {
    int n = 1 + static_cast<int>(rng() % 8);
    Word w;
    for (int i = 0; i < n; ++i) {
      int a = 1 + static_cast<int>(rng() % rank);
      w.push_back(rng() % 2 ? a : -a);
    }
    w = cyclic_reduce_word(w);
    if (!w.empty()) out.push_back(w);
  }
  return out;
}

MarkedGraph scaled(MarkedGraph g, const Length& c) {
  for (auto& e : g.edges) e.length = e.length * c;
  return g;
}

}  // namespace

TEST(FoldLine, LengthIsExpMinusT) {
  const FoldLine& line = rank3();
  for (int i = 0; i < 100; ++i) {
    double t = -1.5 + 4.0 * i / 99.0;
    EXPECT_NEAR(evaluate(line, t).total_length().to_double(), std::exp(-t), 1e-9) << t;
  }
}

TEST(FoldLine, Endpoints) {
  const FoldLine& line = rank3();
  MarkedGraph g0 = evaluate(line, 0.0);
  EXPECT_EQ(graph_json(g0), graph_json(line.map.graph));
  EXPECT_TRUE(marked_isometric(g0, line.map.graph));
  // end of the first domain: lambda^-1 G.phi
  MarkedGraph end = scaled(line.folds.graphs.back(), Length(1) / line.lambda);
  MarkedGraph gphi = evaluate(line, LinePoint{1, 0});
  EXPECT_TRUE(marked_isometric(end, gphi));
  MarkedGraph img = scaled(line.map.graph, Length(1) / line.lambda);
  img.marking.clear();
  for (auto& m : line.map.graph.marking) img.marking.push_back(line.map.apply(m));
  img.base = line.map.vmap[line.map.graph.base];
  EXPECT_TRUE(marked_isometric(gphi, img));
  EXPECT_FALSE(marked_isometric(gphi, scaled(line.map.graph, Length(1) / line.lambda)));
}

TEST(FoldLine, Periodicity) {
  const FoldLine& line = rank3();
  MarkedGraph a = evaluate(line, LinePoint{2, 0});
  MarkedGraph b = translate_marking(line, scaled(line.map.graph, line.lambda.pow(-2)), 2);
  EXPECT_TRUE(marked_isometric(a, b));
  EXPECT_NEAR(evaluate(line, 2 * line.log_lambda).total_length().to_double(), std::pow(line.lambda.to_double(), -2), 1e-12);
}

TEST(FoldLine, EquivarianceIsExact) {
  const FoldLine& line = rank3();
  auto ws = classes(3, 5);
  Length inv = Length(1) / line.lambda;
  for (double tau : {0.0, 0.3, 0.9, line.log_lambda * 0.999}) {
    for (long k : {-1L, 0L, 1L}) {
      MarkedGraph here = evaluate(line, LinePoint{k, tau});
      MarkedGraph next = evaluate(line, LinePoint{k + 1, tau});
      for (auto& w : ws) {
        Word pw = cyclic_reduce_word(apply_words(line.phi, w));
        EXPECT_EQ(translation_length(next, w), inv * translation_length(here, pw));
      }
    }
  }
}

TEST(FoldLine, LegalCircuitAcrossDomain) {
  // A, F, G and AG are legal circuits for the rank 3 map
  const FoldLine& line = rank3();
  for (Word w : {Word{1}, Word{2}, Word{3}, Word{1, 3}}) {
    EXPECT_EQ(translation_length(evaluate(line, LinePoint{1, 0}), w), translation_length(evaluate(line, 0.0), w));
  }
}

TEST(FoldLine, MonotoneInsideDomain) {
  const FoldLine& line = rank3();
  auto ws = classes(3, 9);
  std::vector<double> ts;
  for (int i = 0; i <= 40; ++i) ts.push_back(line.log_lambda * i / 40.0 * 0.9999);
  LengthTable tab = sample_lengths(line, ts, ws);
  for (size_t i = 1; i < ts.size(); ++i) {
    double prev = 0, cur = 0;
    for (size_t c = 0; c < ws.size(); ++c) {
      EXPECT_LE(tab.lengths[i][c], tab.lengths[i - 1][c]);
      prev += tab.lengths[i - 1][c].to_double();
      cur += tab.lengths[i][c].to_double();
    }
    EXPECT_LE(cur, prev);
  }
  for (size_t i = 1; i < ts.size(); ++i)
    EXPECT_LT(evaluate(line, ts[i]).total_length(), evaluate(line, ts[i - 1]).total_length());
}

TEST(FoldLine, MidFoldVertex) {
  const FoldLine& line = rank3();
  const FoldSequence& fs = line.folds;
  ASSERT_FALSE(fs.moves.empty());
  for (size_t j = 0; j < fs.moves.size(); ++j) {
    double hi = std::log(line.lambda.to_double() / line.lengths[j].to_double());
    double lo = std::log(line.lambda.to_double() / line.lengths[j + 1].to_double());
    MarkedGraph mid = evaluate(line, 0.5 * (hi + lo));
    const MarkedGraph& g = fs.graphs[j];
    Dir d1 = g.dir(fs.moves[j].d1), d2 = g.dir(fs.moves[j].d2);
    int v = g.tail(d1);
    if (g.valence(v) < 4 || edge_of(d1) == edge_of(d2)) continue;
    // a new valence 3 fold point; no edge is used up
    EXPECT_EQ(mid.num_vertices(), g.num_vertices() + 1) << j;
    int three = 0;
    for (int u = 0; u < mid.num_vertices(); ++u) three += mid.valence(u) == 3;
    int before = 0;
    for (int u = 0; u < g.num_vertices(); ++u) before += g.valence(u) == 3;
    EXPECT_GE(three, before + 1) << j;
  }
}

TEST(FoldLine, SampleCsv) {
  const FoldLine& line = rank3();
  const MarkedGraph& g = line.map.graph;
  LengthTable tab = sample_lengths(line, {0.0, 0.5}, {parse_word(g.generators, "x1"), parse_word(g.generators, "x1 x2^-1")});
  std::string csv = length_table_csv(tab);
  EXPECT_EQ(csv.substr(0, 15), "t,class,length\n");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_THROW(sample_lengths(line, {0.0}, {Word{1, -1}}), precondition_error);
  EXPECT_THROW(sample_lengths(line, {0.0}, {}), precondition_error);
  EXPECT_THROW(parse_word(g.generators, "x9"), parse_error);
}

TEST(FoldLine, RejectsNonAffine) {
  GraphSelfMap f = load_map(std::string(TTMAP_DATA_DIR "/") + "rank3.json");
  f.graph.edges[0].length = Length(5);
  EXPECT_THROW(periodic_fold_line(f), precondition_error);
}
