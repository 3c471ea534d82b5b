#pragma once

#include "json.hpp"

#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cellspace/analysis.hpp"
#include "cellspace/laminar.hpp"
#include "cellspace/metrics.hpp"
#include "cellspace/quasisym.hpp"
#include "cellspace/rational.hpp"
#include "cellspace/spaces.hpp"

namespace cellspace {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kFormat = "cellspace-v1";

/// Everything a cellspace-v1 file can carry.
struct SpaceDoc {
  CellTree tree;
  std::optional<WeightFn> weight;
  std::optional<MeasureAtoms> measure;
  std::optional<IntervalEmbedding> embedding;
};

namespace detail {

inline Json integer_json(const Integer& v) {
  if (v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max())
    return v.convert_to<std::int64_t>();
  return v.str();
}

inline Integer integer_from_json(const Json& j) {
  if (j.is_number_integer()) return j.is_number_unsigned() ? Integer(j.get<std::uint64_t>()) : Integer(j.get<std::int64_t>());
  if (j.is_string()) return parse_integer(j.get<std::string>());
  throw Error(Errc::parse_error, "expected an integer, got " + j.dump());
}

inline Rational rational_from_json(const Json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(integer_from_json(j));
  // Shortest round-trip text of the double, read back exactly.
  if (j.is_number_float()) return parse_rational(j.dump());
  throw Error(Errc::parse_error, "expected a number, got " + j.dump());
}

inline const Json& member(const Json& j, std::string_view key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(Errc::parse_error, "missing \"" + std::string(key) + "\"");
  return *it;
}

inline Json node_json(const SpaceDoc& doc, CellId c) {
  const CellTree& t = doc.tree;
  Json node = Json::object();
  if (t.is_leaf(c)) {
    const PointIndex p = t.point_of(c);
    node["point"] = t.label(p);
    if (doc.measure) node["measure"] = to_string(doc.measure->atom(p));
    if (doc.embedding) {
      const Interval& iv = doc.embedding->leaves[p];
      node["interval"] = Json::array({integer_json(numerator_of(iv.left)), integer_json(denominator_of(iv.left)),
                                      integer_json(numerator_of(iv.right)), integer_json(denominator_of(iv.right))});
    }
  } else {
    node["children"] = Json::array();
  }
  if (doc.weight) node["weight"] = to_string((*doc.weight)(c));
  return node;
}

}  // namespace detail

/// Nested cellspace-v1 document. "points" records the point order so a
/// round trip preserves point indices.
inline Json space_to_json(const SpaceDoc& doc) {
  const CellTree& t = doc.tree;
  Json root;
  root["format"] = kFormat;
  root["points"] = Json(std::vector<std::string>(t.labels().begin(), t.labels().end()));
  if (doc.embedding && !doc.embedding->theta.empty()) {
    Json theta = Json::array();
    for (const auto& th : doc.embedding->theta) theta.push_back(to_string(th));
    root["theta"] = std::move(theta);
  }
  Json top = detail::node_json(doc, CellTree::root());
  for (auto& [k, v] : top.items()) root[k] = v;

  // Iterative preorder so deep trees do not exhaust the stack.
  std::vector<std::pair<CellId, Json*>> stack;
  if (!t.is_leaf(CellTree::root())) stack.emplace_back(CellTree::root(), &root);
  while (!stack.empty()) {
    auto [c, node] = stack.back();
    stack.pop_back();
    Json& kids = (*node)["children"];
    for (CellId k : t.children(c)) kids.push_back(detail::node_json(doc, k));
    for (std::size_t i = kids.size(); i-- > 0;)
      if (!t.is_leaf(t.children(c)[i])) stack.emplace_back(t.children(c)[i], &kids[i]);
  }
  return root;
}

inline std::string write_space(const SpaceDoc& doc) { return space_to_json(doc).dump(2) + "\n"; }

namespace detail {

inline SpaceDoc read_flat(const Json& j, BaseMode mode) {
  const Json& points = member(j, "points");
  const Json& cells = member(j, "cells");
  if (!points.is_array() || !cells.is_array()) throw Error(Errc::parse_error, "\"points\" and \"cells\" must be arrays");
  std::vector<std::string> labels;
  for (const auto& p : points) {
    if (!p.is_string()) throw Error(Errc::parse_error, "point labels must be strings");
    labels.push_back(p.get<std::string>());
  }
  check_labels(labels);
  std::unordered_map<std::string, PointIndex> where;
  for (PointIndex i = 0; i < labels.size(); ++i) where.emplace(labels[i], i);
  std::vector<std::vector<PointIndex>> subsets;
  for (const auto& cell : cells) {
    if (!cell.is_array()) throw Error(Errc::parse_error, "each cell must be an array of point labels");
    auto& subset = subsets.emplace_back();
    for (const auto& p : cell) {
      if (!p.is_string()) throw Error(Errc::parse_error, "cell members must be point labels");
      auto it = where.find(p.get<std::string>());
      if (it == where.end()) throw Error(Errc::parse_error, "unknown point '" + p.get<std::string>() + "'");
      subset.push_back(it->second);
    }
  }
  SpaceDoc doc{validate_family(std::move(labels), std::move(subsets), mode), {}, {}, {}};
  if (auto m = j.find("measure"); m != j.end()) {
    if (!m->is_array() || m->size() != doc.tree.point_count())
      throw Error(Errc::parse_error, "\"measure\" must list one atom per point");
    std::vector<Rational> atoms;
    for (const auto& a : *m) atoms.push_back(rational_from_json(a));
    doc.measure = MeasureAtoms::make(std::move(atoms));
  }
  return doc;
}

inline SpaceDoc read_nested(const Json& j) {
  AbstractTree tree;
  std::vector<const Json*> nodes;
  std::vector<std::pair<const Json*, std::size_t>> stack{{&j, tree.add_vertex()}};
  nodes.push_back(&j);
  while (!stack.empty()) {
    auto [node, v] = stack.back();
    stack.pop_back();
    if (!node->is_object()) throw Error(Errc::parse_error, "tree nodes must be objects");
    const bool has_point = node->contains("point");
    const bool has_children = node->contains("children");
    if (has_point == has_children) throw Error(Errc::parse_error, "a node needs exactly one of \"point\" or \"children\"");
    if (has_point) {
      const Json& p = (*node)["point"];
      if (!p.is_string()) throw Error(Errc::parse_error, "point labels must be strings");
      tree.labels[v] = p.get<std::string>();
      continue;
    }
    const Json& kids = (*node)["children"];
    if (!kids.is_array() || kids.empty()) throw Error(Errc::parse_error, "\"children\" must be a nonempty array");
    for (const auto& k : kids) {
      const std::size_t child = tree.add_vertex();
      nodes.push_back(&k);
      tree.add_edge(v, child);
    }
    for (std::size_t i = kids.size(); i-- > 0;) stack.emplace_back(&kids[i], tree.children[v][i]);
  }

  auto [raw, leaves] = raw_from_abstract(tree);
  std::vector<std::string> labels;
  if (auto pts = j.find("points"); pts != j.end()) {
    if (!pts->is_array()) throw Error(Errc::parse_error, "\"points\" must be an array");
    for (const auto& p : *pts) {
      if (!p.is_string()) throw Error(Errc::parse_error, "point labels must be strings");
      labels.push_back(p.get<std::string>());
    }
  } else {
    std::unordered_map<std::string_view, std::size_t> first;
    for (std::size_t v : leaves) {
      if (auto [it, fresh] = first.emplace(*tree.labels[v], v); !fresh)
        throw Error(Errc::duplicate_leaf_label, "leaf label '" + *tree.labels[v] + "' appears twice", {it->second, v});
      labels.push_back(*tree.labels[v]);
    }
  }
  check_labels(labels);
  if (labels.size() != leaves.size())
    throw Error(Errc::point_set_mismatch, std::to_string(labels.size()) + " points listed but " +
                                              std::to_string(leaves.size()) + " leaves in the tree");
  std::unordered_map<std::string_view, PointIndex> where;
  for (PointIndex i = 0; i < labels.size(); ++i) where.emplace(labels[i], i);
  std::vector<std::uint8_t> used(labels.size(), 0);
  for (std::size_t v : leaves) {
    auto it = where.find(*tree.labels[v]);
    if (it == where.end()) throw Error(Errc::point_set_mismatch, "leaf '" + *tree.labels[v] + "' is not a listed point");
    if (used[it->second]++) throw Error(Errc::duplicate_leaf_label, "leaf label '" + *tree.labels[v] + "' appears twice", {it->second});
    raw.point[v] = static_cast<std::uint32_t>(it->second);
  }
  SpaceDoc doc{build_canonical(labels, raw), {}, {}, {}};
  const CellTree& t = doc.tree;

  // Cell of each vertex: the meet of its children, so unary chains share one.
  std::vector<CellId> cell(tree.vertex_count());
  for (std::size_t v = tree.vertex_count(); v-- > 0;) {
    if (tree.children[v].empty()) {
      cell[v] = t.leaf(raw.point[v]);
      continue;
    }
    cell[v] = cell[tree.children[v].front()];
    for (std::size_t k : tree.children[v]) cell[v] = t.meet(cell[v], cell[k]);
  }

  auto collect = [&](std::string_view key, bool leaves_only) {
    std::vector<std::optional<Rational>> values(t.cell_count());
    std::size_t seen = 0;
    std::size_t eligible = 0;
    for (std::size_t v = 0; v < tree.vertex_count(); ++v) {
      if (leaves_only && !tree.children[v].empty()) continue;
      ++eligible;
      auto it = nodes[v]->find(key);
      if (it == nodes[v]->end()) continue;
      ++seen;
      Rational value = rational_from_json(*it);
      auto& slot = values[index(cell[v])];
      if (slot && *slot != value)
        throw Error(Errc::parse_error, "conflicting \"" + std::string(key) + "\" values on " + describe(t, cell[v]));
      slot = std::move(value);
    }
    if (seen != 0 && seen != eligible)
      throw Error(Errc::parse_error, "\"" + std::string(key) + "\" is given on some nodes but not all");
    return std::make_pair(seen != 0, std::move(values));
  };

  if (auto [present, values] = collect("weight", false); present) {
    std::vector<Rational> w;
    for (auto& v : values) w.push_back(std::move(*v));
    doc.weight = WeightFn::make(t, std::move(w));
  }
  if (auto [present, values] = collect("measure", true); present) {
    std::vector<Rational> atoms(t.point_count());
    for (PointIndex p = 0; p < t.point_count(); ++p) atoms[p] = *values[index(t.leaf(p))];
    doc.measure = MeasureAtoms::make(std::move(atoms));
  }

  std::size_t intervals = 0;
  IntervalEmbedding e;
  e.leaves.resize(t.point_count());
  for (std::size_t v : leaves) {
    auto it = nodes[v]->find("interval");
    if (it == nodes[v]->end()) continue;
    ++intervals;
    if (!it->is_array() || it->size() != 4) throw Error(Errc::parse_error, "\"interval\" must be [num, den, num, den]");
    const Integer q[4] = {integer_from_json((*it)[0]), integer_from_json((*it)[1]), integer_from_json((*it)[2]),
                          integer_from_json((*it)[3])};
    if (q[1] == 0 || q[3] == 0) throw Error(Errc::parse_error, "zero denominator in \"interval\"");
    e.leaves[raw.point[v]] = {Rational(q[0], q[1]), Rational(q[2], q[3])};
  }
  if (intervals != 0) {
    if (intervals != leaves.size()) throw Error(Errc::parse_error, "\"interval\" is given on some leaves but not all");
    if (auto th = j.find("theta"); th != j.end()) {
      if (!th->is_array()) throw Error(Errc::parse_error, "\"theta\" must be an array");
      for (const auto& x : *th) e.theta.push_back(rational_from_json(x));
    }
    validate_embedding(t, e);
    doc.embedding = std::move(e);
  }
  return doc;
}

}  // namespace detail

/// Reads either the nested form or the flat {"points", "cells"} form.
/// Structural problems raise ParseError; laminarity problems raise the
/// corresponding validation error.
inline SpaceDoc read_space(std::string_view text, BaseMode mode = BaseMode::strict) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, e.what());
  }
  if (!j.is_object()) throw Error(Errc::parse_error, "top level must be an object");
  if (auto f = j.find("format"); f != j.end() && *f != kFormat)
    throw Error(Errc::parse_error, "unsupported format " + f->dump());
  try {
    if (j.contains("cells")) return detail::read_flat(j, mode);
    return detail::read_nested(j);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, e.what());
  }
}

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (ch != '\r') {
      field += ch;
    }
  }
  out.push_back(std::move(field));
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

}  // namespace detail

/// Square CSV: the first row is an empty corner then the labels, each further
/// row a label then its distances ("p/q" or decimals, read exactly).
inline MetricTable read_metric_csv(std::string_view text, const Rational& tolerance = 0) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    rows.push_back(detail::split_csv_line(line));
  }
  if (rows.empty()) throw Error(Errc::parse_error, "empty metric file");
  std::vector<std::string> labels(rows[0].begin() + 1, rows[0].end());
  const std::size_t n = labels.size();
  if (rows.size() != n + 1) throw Error(Errc::parse_error, "expected " + std::to_string(n) + " rows of distances");
  std::vector<Rational> entries(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = rows[i + 1];
    if (row.size() != n + 1) throw Error(Errc::parse_error, "row " + std::to_string(i + 1) + " has the wrong length");
    if (row[0] != labels[i]) throw Error(Errc::parse_error, "row " + std::to_string(i + 1) + " is labelled '" + row[0] + "', expected '" + labels[i] + "'");
    for (std::size_t k = 0; k < n; ++k) entries[i * n + k] = parse_rational(row[k + 1]);
  }
  return MetricTable::from_dense(std::move(labels), entries, tolerance);
}

inline std::string write_metric_csv(const MetricTable& m) {
  std::string out;
  for (const auto& l : m.labels()) out += "," + detail::csv_field(l);
  out += "\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    out += detail::csv_field(m.labels()[i]);
    for (std::size_t k = 0; k < m.size(); ++k) out += "," + to_string(m.at(i, k));
    out += "\n";
  }
  return out;
}

/// r,s,count,x,y,z with point labels for the witness triple.
inline std::string write_profile_csv(const DistortionProfile& p, std::span<const std::string> labels) {
  std::string out = "r,s,count,x,y,z\n";
  for (const auto& pt : p.points)
    out += to_string(pt.r) + "," + to_string(pt.s) + "," + std::to_string(pt.count) + "," +
           detail::csv_field(labels[pt.witness[0]]) + "," + detail::csv_field(labels[pt.witness[1]]) + "," +
           detail::csv_field(labels[pt.witness[2]]) + "\n";
  return out;
}

/// t,H with an empty H where no ratio is <= t.
inline std::string write_envelope_csv(std::span<const EnvelopeValue> values) {
  std::string out = "t,H\n";
  for (const auto& v : values) out += to_string(v.t) + "," + (v.h ? to_string(*v.h) : std::string()) + "\n";
  return out;
}

}  // namespace cellspace
