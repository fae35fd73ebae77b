#include <ttmap/io.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace ttmap;

namespace {

MarkedGraph rose3() { return rose_map({"A", "F", "G"}, {"A", "F", "G"}).graph; }

std::vector<Word> sample_words(int rank, int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::vector<Word> out;
  while ((int)out.size() < count) {
    int len = 1 + rng() % 6;
    Word w;
    for (int i = 0; i < len; ++i) {
      int g = 1 + rng() % rank;
      w.push_back(rng() % 2 ? g : -g);
    }
    w = cyclic_reduce_word(w);
    if (!w.empty()) out.push_back(w);
  }
  return out;
}

}  // namespace

TEST(Tighten, Examples) {
  MarkedGraph g = rose3();
  EXPECT_EQ(g.path_str(tighten(g, g.path({"A", "F", "~F", "G"}))), "A G");
  EXPECT_TRUE(tighten(g, g.path({"A", "~A"})).empty());
  EXPECT_EQ(tighten(g, g.path({"A", "F"})), g.path({"A", "F"}));
}

TEST(Tighten, IdempotentAndShorter) {
  MarkedGraph g = rose3();
  std::mt19937 rng(7);
  for (int t = 0; t < 200; ++t) {
    Path p;
    int n = rng() % 12;
    for (int i = 0; i < n; ++i) p.push_back(rng() % g.num_dirs());
    Path q = tighten(g, p);
    EXPECT_EQ(tighten(g, q), q);
    EXPECT_LE(q.size(), p.size());
    EXPECT_TRUE(is_reduced(reversed(q)));
    EXPECT_TRUE(tighten(g, concat(p, reversed(p))).empty());
  }
}

TEST(Tighten, IncompatiblePathRejected) {
  MarkedGraph g = parse_graph(read_json_file(TTMAP_DATA_DIR "/example2.json"));
  EXPECT_THROW(tighten(g, g.path({"A", "A"})), malformed_path);
}

TEST(Subdivide, RoseEdgeAtOneThird) {
  MarkedGraph g = rose_map({"a", "b"}, {"a", "b"}).graph;
  Subdivision s = subdivide(g, 0, Length(Rational(1, 3)));
  const MarkedGraph& h = s.graph;
  EXPECT_EQ(h.num_edges(), 3);
  EXPECT_EQ(h.edges[0].label, "a.1");
  EXPECT_EQ(h.edges[2].label, "a.2");
  EXPECT_EQ(h.edges[0].length, Length(Rational(1, 3)));
  EXPECT_EQ(h.edges[2].length, Length(Rational(2, 3)));
  EXPECT_EQ(h.path_str(h.marking[0]), "a.1 a.2");
  EXPECT_EQ(circuit_length(h, circuit_of(h, {1})), Length(1));
  h.validate();
}

TEST(Subdivide, HalvesAndRangeErrors) {
  MarkedGraph g = rose3();
  Subdivision s = subdivide(g, 1, Length(Rational(1, 2)));
  EXPECT_EQ(s.graph.edges[1].length, Length(Rational(1, 2)));
  EXPECT_EQ(s.graph.edges[3].length, Length(Rational(1, 2)));
  EXPECT_THROW(subdivide(g, 1, Length(0)), std::domain_error);
  EXPECT_THROW(subdivide(g, 1, Length(1)), std::domain_error);
}

TEST(Subdivide, PreservesTranslationLengths) {
  MarkedGraph g = parse_graph(read_json_file(TTMAP_DATA_DIR "/example2.json"));
  auto words = sample_words(3, 50, 11);
  std::mt19937 rng(3);
  MarkedGraph h = g;
  for (int step = 0; step < 4; ++step) {
    int e = rng() % h.num_edges();
    Length t = h.edges[e].length * Length(Rational(1 + rng() % 5, 7));
    h = subdivide(h, e, t).graph;
  }
  h.validate();
  for (auto& w : words) EXPECT_EQ(translation_length(g, w), translation_length(h, w)) << word_str(g, w);
}

TEST(CircuitLength, Examples) {
  MarkedGraph g = rose_map({"a", "b"}, {"a", "b"}).graph;
  EXPECT_EQ(circuit_length(g, g.path({"a", "b"})), Length(2));
  EXPECT_THROW(circuit_length(g, {}), std::invalid_argument);
}

TEST(Graph, Validation) {
  MarkedGraph g = rose3();
  g.validate();
  g.edges[0].length = Length(0);
  EXPECT_THROW(g.validate(), precondition_error);
}

TEST(Graph, MarkingIsHomotopyEquivalence) {
  MarkedGraph g = parse_graph(read_json_file(TTMAP_DATA_DIR "/example2.json"));
  EXPECT_TRUE(marking_is_homotopy_equivalence(g));
  g.marking[2] = g.path({"A", "F", "A", "F"});
  EXPECT_FALSE(marking_is_homotopy_equivalence(g));
}

TEST(Json, RoundTrip) {
  for (const char* name : {"rank3.json", "example1.json", "example2.json"}) {
    json doc = read_json_file(std::string(TTMAP_DATA_DIR "/") + name);
    GraphSelfMap f = parse_map(doc);
    json again = map_json(f);
    GraphSelfMap f2 = parse_map(again);
    EXPECT_EQ(map_json(f2).dump(), again.dump()) << name;
  }
}

TEST(Json, AlgebraicLengthsRoundTrip) {
  GraphSelfMap f = affine_normalize(load_map(TTMAP_DATA_DIR "/rank3.json"));
  json doc = map_json(f);
  GraphSelfMap f2 = parse_map(doc);
  for (int e = 0; e < 3; ++e) EXPECT_NEAR(f2.graph.edges[e].length.to_double(), f.graph.edges[e].length.to_double(), 1e-15);
  EXPECT_EQ(map_json(f2).dump(), doc.dump());
}

TEST(Json, MalformedPathIsParseError) {
  json doc = read_json_file(TTMAP_DATA_DIR "/example2.json");
  doc["map"]["edge_images"]["A"] = {"A", "A"};
  EXPECT_THROW(parse_map(doc), parse_error);
  doc["map"]["edge_images"]["A"] = {"Q"};
  EXPECT_THROW(parse_map(doc), parse_error);
}

TEST(Words, ParseAndPrint) {
  MarkedGraph g = rose3();
  Word w = parse_word(g.generators, "AF~G");
  EXPECT_EQ(w, (Word{1, 2, -3}));
  EXPECT_THROW(translation_length(g, {1, 2, -2, -1}), std::invalid_argument);
}
