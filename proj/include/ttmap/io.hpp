#pragma once

#include "map.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>

namespace ttmap {

using json = nlohmann::json;

namespace detail {

inline bool natural_less(const std::string& a, const std::string& b) {
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (std::isdigit((unsigned char)a[i]) && std::isdigit((unsigned char)b[j])) {
      size_t i2 = i, j2 = j;
      while (i2 < a.size() && std::isdigit((unsigned char)a[i2])) ++i2;
      while (j2 < b.size() && std::isdigit((unsigned char)b[j2])) ++j2;
      std::string na = a.substr(i, i2 - i), nb = b.substr(j, j2 - j);
      if (na.size() != nb.size()) return na.size() < nb.size();
      if (na != nb) return na < nb;
      i = i2, j = j2;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i, ++j;
    }
  }
  return a.size() - i < b.size() - j;
}

inline Length parse_length(const json& j, const FieldPtr& field) {
  if (j.is_number_integer()) return Length(Rational(j.get<long>()));
  if (j.is_string()) return Length(parse_rational(j.get<std::string>()));
  if (j.is_array()) {
    if (!field) throw parse_error("algebraic length without a number_field block");
    std::vector<Rational> c;
    for (auto& x : j) c.push_back(parse_rational(x.get<std::string>()));
    return Length(field, Poly(c));
  }
  throw parse_error("length must be a \"p/q\" string");
}

inline json length_json(const Length& l) {
  if (l.is_rational()) return to_string(l.rational());
  json a = json::array();
  for (auto& c : l.poly().coeffs()) a.push_back(to_string(c));
  return a;
}

inline std::vector<std::string> tokens(const json& j) {
  if (!j.is_array()) throw parse_error("edge path must be an array of tokens");
  std::vector<std::string> t;
  for (auto& x : j) {
    if (!x.is_string()) throw parse_error("edge path token must be a string");
    t.push_back(x.get<std::string>());
  }
  return t;
}

inline Path parse_path(const MarkedGraph& g, const json& j) {
  try {
    return g.path(tokens(j));
  } catch (const std::out_of_range& e) {
    throw parse_error(e.what());
  }
}

}  // namespace detail

inline json path_json(const MarkedGraph& g, const Path& p) {
  json a = json::array();
  for (Dir d : p) a.push_back(g.label(d));
  return a;
}

inline FieldPtr document_field(const json& doc) {
  if (!doc.contains("number_field")) return nullptr;
  const json& nf = doc["number_field"];
  std::vector<Rational> c;
  for (auto& x : nf.at("polynomial")) c.push_back(parse_rational(x.get<std::string>()));
  RealRoot r{Poly(c), parse_rational(nf.at("interval").at(0).get<std::string>()),
             parse_rational(nf.at("interval").at(1).get<std::string>()), std::nullopt};
  if (r.lo == r.hi) r.exact = r.lo;
  return NumberField::make(r);
}

inline MarkedGraph parse_graph(const json& doc, FieldPtr field = nullptr) {
  try {
    if (!doc.is_object()) throw parse_error("graph document must be an object");
    if (!field) field = document_field(doc);
    MarkedGraph g;
    for (auto& v : doc.at("vertices")) g.vertices.push_back(v.get<std::string>());
    for (auto& e : doc.at("edges")) {
      Edge ed;
      ed.label = e.at("label").get<std::string>();
      ed.from = g.find_vertex(e.at("from").get<std::string>());
      ed.to = g.find_vertex(e.at("to").get<std::string>());
      if (ed.from < 0 || ed.to < 0) throw parse_error("edge " + ed.label + " has an unknown endpoint");
      ed.length = e.contains("length") ? detail::parse_length(e["length"], field) : Length(1);
      g.edges.push_back(ed);
    }
    if (doc.contains("marking")) {
      const json& m = doc["marking"];
      if (doc.contains("generators")) {
        for (auto& x : doc["generators"]) g.generators.push_back(x.get<std::string>());
      } else {
        for (auto it = m.begin(); it != m.end(); ++it) g.generators.push_back(it.key());
        std::sort(g.generators.begin(), g.generators.end(), detail::natural_less);
      }
      for (auto& name : g.generators) g.marking.push_back(detail::parse_path(g, m.at(name)));
      if (doc.contains("base")) g.base = g.find_vertex(doc["base"].get<std::string>());
      else if (!g.marking.empty() && !g.marking[0].empty()) g.base = g.tail(g.marking[0].front());
      if (g.base < 0) throw parse_error("unknown base vertex");
    }
    if (doc.contains("rank") && doc["rank"].get<int>() != g.rank())
      throw parse_error("rank field does not match the marking");
    return g;
  } catch (const json::exception& e) {
    throw parse_error(std::string("graph document: ") + e.what());
  }
}

inline GraphSelfMap parse_map(const json& doc) {
  try {
    FieldPtr field = document_field(doc);
    GraphSelfMap f;
    f.graph = parse_graph(doc, field);
    const json& m = doc.at("map");
    f.vmap.assign(f.graph.num_vertices(), -1);
    const json& vi = m.at("vertex_images");
    for (int v = 0; v < f.graph.num_vertices(); ++v) {
      std::string t = vi.at(f.graph.vertices[v]).get<std::string>();
      f.vmap[v] = f.graph.find_vertex(t);
      if (f.vmap[v] < 0) throw parse_error("unknown vertex image " + t);
    }
    const json& ei = m.at("edge_images");
    for (int e = 0; e < f.graph.num_edges(); ++e) f.emap.push_back(detail::parse_path(f.graph, ei.at(f.graph.edges[e].label)));
    for (auto& p : f.emap) {
      try {
        f.graph.check_path(p);
      } catch (const malformed_path& ex) {
        throw parse_error(ex.what());
      }
    }
    return f;
  } catch (const json::exception& e) {
    throw parse_error(std::string("map document: ") + e.what());
  }
}

inline json graph_json(const MarkedGraph& g) {
  json doc;
  doc["rank"] = g.rank();
  doc["vertices"] = g.vertices;
  json edges = json::array();
  FieldPtr field;
  for (auto& e : g.edges) {
    json je;
    je["label"] = e.label;
    je["from"] = g.vertices[e.from];
    je["to"] = g.vertices[e.to];
    je["length"] = detail::length_json(e.length);
    if (!e.length.is_rational()) field = e.length.field();
    edges.push_back(je);
  }
  doc["edges"] = edges;
  if (!g.generators.empty()) {
    json m = json::object();
    for (int i = 0; i < g.rank(); ++i) m[g.generators[i]] = path_json(g, g.marking[i]);
    doc["marking"] = m;
    doc["generators"] = g.generators;
    doc["base"] = g.vertices[g.base];
  }
  if (field) {
    RealRoot r = field->canonical();
    json nf;
    json c = json::array();
    for (auto& x : r.poly.coeffs()) c.push_back(to_string(x));
    nf["polynomial"] = c;
    nf["interval"] = {to_string(r.lo), to_string(r.hi)};
    doc["number_field"] = nf;
  }
  return doc;
}

inline json map_json(const GraphSelfMap& f) {
  json doc = graph_json(f.graph);
  json vi = json::object(), ei = json::object();
  for (int v = 0; v < f.graph.num_vertices(); ++v) vi[f.graph.vertices[v]] = f.graph.vertices[f.vmap[v]];
  for (int e = 0; e < f.graph.num_edges(); ++e) ei[f.graph.edges[e].label] = path_json(f.graph, f.emap[e]);
  doc["map"] = {{"vertex_images", vi}, {"edge_images", ei}};
  return doc;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw parse_error(path + ": " + e.what());
  }
}

inline GraphSelfMap load_map(const std::string& path) { return parse_map(read_json_file(path)); }

// Rose map from images written over single-character edge names, with "~"
// marking the reversal of the next letter ("b~a~b").
inline GraphSelfMap rose_map(const std::vector<std::string>& names, const std::vector<std::string>& images) {
  GraphSelfMap f;
  MarkedGraph& g = f.graph;
  g.vertices = {"v"};
  for (auto& n : names) {
    g.edges.push_back({n, 0, 0, Length(1)});
    g.generators.push_back(n);
  }
  for (int i = 0; i < (int)names.size(); ++i) g.marking.push_back({2 * i});
  f.vmap = {0};
  for (auto& im : images) {
    Path p;
    bool inv = false;
    for (char c : im) {
      if (c == '~') {
        inv = true;
        continue;
      }
      p.push_back(g.dir((inv ? "~" : "") + std::string(1, c)));
      inv = false;
    }
    f.emap.push_back(p);
  }
  return f;
}

}  // namespace ttmap
