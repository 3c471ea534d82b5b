#pragma once

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cellspace/analysis.hpp"
#include "cellspace/io.hpp"
#include "cellspace/laminar.hpp"
#include "cellspace/metrics.hpp"
#include "cellspace/quasisym.hpp"
#include "cellspace/spaces.hpp"

namespace cellspace::cli {

/// Process exit codes.
enum Status : int { kPass = 0, kViolation = 1, kInputError = 2 };

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::invalid_argument, "cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Error(Errc::invalid_argument, "cannot write '" + path.string() + "'");
}

// Problems with the input itself (as opposed to a property it violates).
inline bool is_input_error(Errc c) {
  return c == Errc::parse_error || c == Errc::invalid_argument || c == Errc::point_set_mismatch;
}

inline std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.emplace_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<Rational> rational_list(std::string_view text) {
  std::vector<Rational> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_rational(item));
  return out;
}

struct Formatter {
  std::optional<int> decimals;
  [[nodiscard]] std::string operator()(const Rational& q) const { return decimals ? to_decimal(q, *decimals) : to_string(q); }
};

inline std::string triple_text(const TripleViolation& v, std::span<const std::string> labels, const Formatter& fmt) {
  return "(" + labels[v.a] + ", " + labels[v.b] + ", " + labels[v.via] + ") slack " + fmt(v.slack);
}

// Rooted tree for `ray_space`: objects with an optional "children" array.
inline AbstractTree abstract_tree_from_json(const Json& j) {
  AbstractTree tree;
  std::vector<std::pair<const Json*, std::size_t>> stack{{&j, tree.add_vertex()}};
  while (!stack.empty()) {
    auto [node, v] = stack.back();
    stack.pop_back();
    if (!node->is_object()) throw Error(Errc::parse_error, "tree nodes must be objects");
    auto it = node->find("children");
    if (it == node->end()) continue;
    if (!it->is_array()) throw Error(Errc::parse_error, "\"children\" must be an array");
    for (const auto& k : *it) {
      const std::size_t child = tree.add_vertex();
      tree.add_edge(v, child);
      stack.emplace_back(&k, child);
    }
  }
  return tree;
}

inline Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, e.what());
  }
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string kind;
  std::vector<std::size_t> sizes;
  std::size_t depth = 0;
  std::string theta;
  std::uint64_t seed = 0;
  std::size_t points = 16;
  std::size_t branch = 3;
  std::size_t max_depth = 4;
  std::size_t arity = 0;
  std::string tree;
  std::string beta;
  std::string rho;
  std::string measure;
  std::string level_weights;
  std::string out;
};

inline SpaceDoc generate_space(const GenerateArgs& a) {
  auto need_depth = [&] {
    if (a.depth == 0) throw Error(Errc::invalid_argument, "--depth must be at least 1");
    return a.depth;
  };
  if (a.kind == "product") {
    if (a.sizes.empty()) throw Error(Errc::invalid_argument, "product needs --sizes");
    return {product_space({a.sizes}), {}, {}, {}};
  }
  if (a.kind == "cantor" || a.kind == "fat-cantor") {
    const std::size_t depth = need_depth();
    EmbeddedSpace s = a.kind == "cantor" ? cantor(depth)
                      : a.theta.empty()  ? fat_cantor(depth)
                                         : fat_cantor(depth, rational_list(a.theta));
    return {std::move(s.tree), {}, {}, std::move(s.embedding)};
  }
  if (a.kind == "random") {
    return {random_laminar({a.seed, a.branch, a.max_depth, a.points}), {}, {}, {}};
  }
  if (a.kind == "ray") {
    if (!a.tree.empty()) return {ray_space(abstract_tree_from_json(parse_json(read_file(a.tree)))), {}, {}, {}};
    if (a.arity < 1) throw Error(Errc::invalid_argument, "ray needs --arity and --depth, or --tree");
    return {ray_space(complete_tree(a.arity, need_depth())), {}, {}, {}};
  }
  throw Error(Errc::invalid_argument, "unknown kind '" + a.kind + "'");
}

inline int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
  SpaceDoc doc = generate_space(a);
  if (!a.beta.empty() && !a.rho.empty()) throw Error(Errc::invalid_argument, "--beta and --rho are exclusive");
  if (!a.beta.empty()) doc.weight = synthesize_regular_weight(doc.tree, parse_rational(a.beta));
  if (!a.rho.empty()) {
    const auto rho = rational_list(a.rho);
    doc.weight = weight_from_sequence(doc.tree, rho);
  }
  if (!a.measure.empty() && !a.level_weights.empty())
    throw Error(Errc::invalid_argument, "--measure and --level-weights are exclusive");
  if (!a.measure.empty()) {
    if (a.measure != "uniform") throw Error(Errc::invalid_argument, "--measure accepts only 'uniform'");
    doc.measure = MeasureAtoms::uniform(doc.tree.point_count());
  }
  if (!a.level_weights.empty()) {
    if (a.kind != "product") throw Error(Errc::invalid_argument, "--level-weights applies to product spaces");
    std::vector<std::vector<Rational>> levels;
    for (const auto& level : split(a.level_weights, ';')) levels.push_back(rational_list(level));
    doc.measure = product_measure({a.sizes}, levels);
  }

  const std::string text = write_space(doc);
  const std::string counts =
      "points: " + std::to_string(doc.tree.point_count()) + " cells: " + std::to_string(doc.tree.cell_count()) + "\n";
  if (a.out.empty()) {
    out << text;
    err << counts;
  } else {
    write_file(a.out, text);
    out << counts;
  }
  return kPass;
}

// ---------------------------------------------------------------- validate

struct ValidateArgs {
  std::string file;
  bool strict_base = false;
  std::string metric;
  std::string tol = "0";
};

inline constexpr std::size_t kTripleScanLimit = 512;

inline int cmd_validate(const ValidateArgs& a, std::ostream& out) {
  const std::string text = read_file(a.file);
  const Rational tol = parse_rational(a.tol);
  if (tol < 0) throw Error(Errc::invalid_argument, "--tol must be nonnegative");
  std::optional<SpaceDoc> doc;
  try {
    doc = read_space(text, a.strict_base ? BaseMode::strict : BaseMode::lenient);
  } catch (const Error& e) {
    if (is_input_error(e.code())) throw;
    out << "structure: FAIL " << e.what();
    if (!e.witness().empty()) {
      out << " [witness";
      for (auto w : e.witness()) out << ' ' << w;
      out << ']';
    }
    out << "\n";
    return kViolation;
  }
  const CellTree& t = doc->tree;
  const auto labels = t.labels();
  const Formatter fmt;
  out << "structure: ok (" << t.point_count() << " points, " << t.cell_count() << " cells)\n";
  bool ok = true;

  auto check_table = [&](const std::string& name, const MetricTable& m, bool triangle) {
    if (m.size() > kTripleScanLimit) {
      out << name << " triple scan: skipped (more than " << kTripleScanLimit << " points)\n";
    } else {
      if (triangle) {
        const auto v = validate_metric(m, tol);
        out << name << " triangle inequality: " << (v.ok ? "ok" : "FAIL " + triple_text(*v.witness, labels, fmt)) << "\n";
        ok = ok && v.ok;
      }
      const auto u = validate_ultrametric(m, tol);
      out << name << " ultrametric inequality: " << (u.ok ? "ok" : "FAIL " + triple_text(*u.witness, labels, fmt)) << "\n";
      ok = ok && u.ok;
    }
    const auto b = balls_equal_cells(t, m);
    out << name << " balls are cells: ";
    if (b.ok) {
      out << "ok\n";
    } else {
      out << "FAIL";
      if (b.cell_witness)
        out << " cell " << describe(t, b.cell_witness->first) << " is not the ball around " << labels[b.cell_witness->second];
      if (b.ball_witness)
        out << " ball around " << labels[b.ball_witness->first] << " of radius " << fmt(b.ball_witness->second)
            << " is not a cell";
      out << "\n";
    }
    ok = ok && b.ok;
  };

  if (doc->weight) check_table("weight metric", ultrametric_from_weight(t, *doc->weight), false);
  if (doc->embedding) out << "interval embedding: ok\n";
  if (!a.metric.empty()) {
    const MetricTable m = read_metric_csv(read_file(a.metric), tol).reordered(labels);
    check_table("metric", m, true);
  }
  return ok ? kPass : kViolation;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string file;
  std::string metric;
  std::string tol = "0";
  std::string geometry = "auto";
  std::string measure;
  std::string format = "table";
  std::optional<int> decimals;
};

inline Json analyze_report(const AnalyzeArgs& a) {
  SpaceDoc doc = read_space(read_file(a.file), BaseMode::lenient);
  const CellTree& t = doc.tree;
  const Formatter fmt{a.decimals};
  if (!a.measure.empty()) {
    if (a.measure != "uniform") throw Error(Errc::invalid_argument, "--measure accepts only 'uniform'");
    if (!doc.measure) doc.measure = MeasureAtoms::uniform(t.point_count());
  }

  std::string kind = a.geometry;
  if (kind == "auto") {
    kind = !a.metric.empty() ? "metric" : doc.weight ? "weight" : doc.embedding ? "interval" : "none";
  }
  std::optional<Geometry> g;
  if (kind == "metric") {
    if (a.metric.empty()) throw Error(Errc::invalid_argument, "--geometry metric needs --metric");
    const Rational tol = parse_rational(a.tol);
    MetricTable m = read_metric_csv(read_file(a.metric), tol);
    if (const auto v = validate_metric(m, tol); !v.ok)
      throw Error(Errc::invalid_metric, "triangle inequality fails at " + triple_text(*v.witness, m.labels(), fmt));
    g = Geometry::from_table(t, std::move(m));
  } else if (kind == "weight") {
    if (!doc.weight) throw Error(Errc::invalid_argument, "the space carries no weights");
    g = Geometry::from_weight(t, *doc.weight);
  } else if (kind == "interval") {
    if (!doc.embedding) throw Error(Errc::invalid_argument, "the space carries no intervals");
    g = Geometry::from_intervals(t, *doc.embedding);
  } else if (kind != "none") {
    throw Error(Errc::invalid_argument, "unknown geometry '" + kind + "'");
  }

  Json report;
  Json witnesses = Json::array();
  auto witness = [&](const char* quantity, std::initializer_list<CellId> cells) {
    Json list = Json::array();
    for (CellId c : cells) list.push_back(describe(t, c));
    witnesses.push_back(Json{{"quantity", quantity}, {"cells", std::move(list)}});
  };
  auto opt = [&](const std::optional<Rational>& q) { return q ? Json(fmt(*q)) : Json(nullptr); };

  report["points"] = t.point_count();
  report["cells"] = t.cell_count();
  report["height"] = t.height();
  const auto k1 = cell_doubling_constant(t);
  report["k1"] = k1.k1;
  if (k1.witness) witness("k1", {*k1.witness});
  if (doc.measure) {
    const auto k2 = measure_cell_doubling(t, *doc.measure);
    report["k2"] = fmt(k2.k2);
    if (k2.witness) witness("k2", {k2.witness->first, k2.witness->second});
  }
  report["geometry"] = kind;
  if (g) {
    const auto reg = metric_regularity(*g);
    report["alpha"] = opt(reg.alpha);
    report["beta"] = opt(reg.beta);
    report["gamma"] = opt(reg.gamma);
    report["sibling_ratio"] = opt(reg.sibling_ratio);
    report["regular"] = reg.pass;
    if (reg.alpha_witness) witness("alpha", {reg.alpha_witness->first, reg.alpha_witness->second});
    if (reg.beta_witness) witness("beta", {reg.beta_witness->first, reg.beta_witness->second});
    if (reg.gamma_witness) witness("gamma", {reg.gamma_witness->first, reg.gamma_witness->second});
    if (reg.sibling_witness) witness("sibling_ratio", {reg.sibling_witness->first, reg.sibling_witness->second});
    const auto md = metric_doubling_constant(*g);
    report["metric_doubling"] = Json{{"value", md.value},
                                     {"exact", md.exact},
                                     {"center", t.label(md.center)},
                                     {"radius", fmt(md.radius)}};
    if (doc.measure) {
      const auto mm = measure_metric_doubling(*g, *doc.measure);
      report["measure_doubling"] =
          Json{{"value", fmt(mm.value)}, {"center", t.label(mm.center)}, {"radius", fmt(mm.radius)}};
    }
  }
  report["witnesses"] = std::move(witnesses);
  return report;
}

inline void print_table(const Json& report, std::ostream& out) {
  auto scalar = [](const Json& v) { return v.is_string() ? v.get<std::string>() : v.is_null() ? std::string("-") : v.dump(); };
  for (const auto& [key, value] : report.items()) {
    if (key == "witnesses") continue;
    if (value.is_object()) {
      for (const auto& [sub, v] : value.items()) out << key << '.' << sub << ": " << scalar(v) << "\n";
      continue;
    }
    out << key << ": " << scalar(value) << "\n";
  }
  for (const auto& w : report["witnesses"]) {
    out << "witness " << w["quantity"].get<std::string>() << ":";
    for (const auto& c : w["cells"]) out << ' ' << c.get<std::string>();
    out << "\n";
  }
}

inline int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const Json report = analyze_report(a);
  if (a.format == "json") {
    out << report.dump(2) << "\n";
  } else if (a.format == "table") {
    print_table(report, out);
  } else {
    throw Error(Errc::invalid_argument, "unknown format '" + a.format + "'");
  }
  return kPass;
}

// ---------------------------------------------------------------- distortion

struct DistortionArgs {
  std::vector<std::string> spaces;
  std::string metric_a;
  std::string metric_b;
  std::vector<std::size_t> depths;
  std::string grid = "pow2:12";
  std::string tol = "1/1000000";
  std::string out;
  std::uint64_t seed = 0;
  std::uint64_t max_exact_pairs = ProfileOptions{}.max_exact_pairs;
  std::optional<int> decimals;
};

inline std::vector<Rational> parse_grid(const std::string& spec) {
  if (spec.rfind("pow2:", 0) == 0) {
    const auto k = std::stoul(spec.substr(5));
    if (k == 0 || k > 200) throw Error(Errc::invalid_argument, "pow2 grid exponent must be in 1..200");
    return pow2_grid(k);
  }
  return rational_list(spec);
}

inline std::vector<SpaceDoc> distortion_spaces(const DistortionArgs& a) {
  std::vector<SpaceDoc> docs;
  const bool generated = a.spaces.size() == 1 && (a.spaces[0].rfind("product:", 0) == 0 || a.spaces[0] == "cantor" ||
                                                  a.spaces[0] == "fat-cantor");
  if (generated) {
    if (a.depths.size() < 2) throw Error(Errc::invalid_argument, "--depths needs at least two depths");
    for (std::size_t depth : a.depths) {
      GenerateArgs g;
      g.depth = depth;
      if (a.spaces[0].rfind("product:", 0) == 0) {
        g.kind = "product";
        g.sizes.assign(depth, std::stoul(a.spaces[0].substr(8)));
      } else {
        g.kind = a.spaces[0];
      }
      docs.push_back(generate_space(g));
    }
  } else {
    if (!a.depths.empty()) throw Error(Errc::invalid_argument, "--depths applies to generated spaces only");
    for (const auto& path : a.spaces) docs.push_back(read_space(read_file(path), BaseMode::lenient));
  }
  if (docs.size() < 2) throw Error(Errc::invalid_argument, "distortion needs spaces at two or more depths");
  return docs;
}

inline MetricTable distortion_metric(const std::string& spec, const SpaceDoc& doc, std::size_t which) {
  const CellTree& t = doc.tree;
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
  if (head == "regular") return ultrametric_from_weight(t, synthesize_regular_weight(t, parse_rational(arg)));
  if (head == "geometric") {
    const Rational q = parse_rational(arg);
    std::vector<Rational> rho{Rational(1)};
    for (std::size_t i = 1; i < t.height(); ++i) rho.push_back(rho.back() * q);
    return ultrametric_from_weight(t, weight_from_sequence(t, rho));
  }
  if (head == "sequence") return ultrametric_from_weight(t, weight_from_sequence(t, rational_list(arg)));
  if (head == "euclidean") {
    if (!doc.embedding) throw Error(Errc::invalid_argument, "euclidean metric needs an interval embedding");
    return euclidean_table(t, *doc.embedding);
  }
  if (head == "weights") {
    if (!doc.weight) throw Error(Errc::invalid_argument, "the space carries no weights");
    return ultrametric_from_weight(t, *doc.weight);
  }
  if (head == "csv") {
    const auto paths = split(arg, ',');
    if (which >= paths.size()) throw Error(Errc::invalid_argument, "csv metric needs one file per space");
    MetricTable m = read_metric_csv(read_file(paths[which]));
    if (const auto v = validate_metric(m); !v.ok) throw Error(Errc::invalid_metric, paths[which] + " violates the triangle inequality");
    return m.reordered(t.labels());
  }
  throw Error(Errc::invalid_argument, "unknown metric '" + spec + "'");
}

inline int cmd_distortion(const DistortionArgs& a, std::ostream& out) {
  const auto docs = distortion_spaces(a);
  const auto grid = parse_grid(a.grid);
  const Rational tol = parse_rational(a.tol);
  const Formatter fmt{a.decimals};

  std::vector<DistortionProfile> profiles;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    ProfileOptions options;
    options.seed = a.seed;
    options.max_exact_pairs = a.max_exact_pairs;
    options.levels = docs[i].tree;
    profiles.push_back(
        distortion_profile(distortion_metric(a.metric_a, docs[i], i), distortion_metric(a.metric_b, docs[i], i), options));
  }
  const QsVerdict verdict = qs_verdict(profiles, grid, tol);
  const auto labels = docs.back().tree.labels();

  Json summary;
  summary["pass"] = verdict.pass;
  summary["reason"] = verdict.reason;
  summary["t"] = verdict.offending_t ? Json(fmt(*verdict.offending_t)) : Json(nullptr);
  if (verdict.witness) {
    const auto& w = *verdict.witness;
    summary["witness"] = Json::array({labels[w[0]], labels[w[1]], labels[w[2]]});
  } else {
    summary["witness"] = nullptr;
  }
  summary["r"] = verdict.witness_r ? Json(fmt(*verdict.witness_r)) : Json(nullptr);
  summary["s"] = verdict.witness_s ? Json(fmt(*verdict.witness_s)) : Json(nullptr);
  Json depths = Json::array();
  for (std::size_t i = 0; i < docs.size(); ++i)
    depths.push_back(Json{{"depth", docs[i].tree.height()},
                          {"points", docs[i].tree.point_count()},
                          {"pairs", profiles[i].points.size()},
                          {"triples", profiles[i].triples},
                          {"sampled", profiles[i].sampled}});
  summary["depths"] = std::move(depths);
  Json eta = Json::array();
  for (const auto& v : verdict.eta) eta.push_back(Json::array({fmt(v.t), v.h ? Json(fmt(*v.h)) : Json(nullptr)}));
  summary["eta"] = std::move(eta);

  out << "verdict: " << (verdict.pass ? "PASS" : "FAIL") << "\n";
  if (!verdict.pass) {
    out << "reason: " << verdict.reason << "\n";
    if (verdict.offending_t) out << "t: " << fmt(*verdict.offending_t) << "\n";
    if (verdict.witness) {
      const auto& w = *verdict.witness;
      out << "witness: " << labels[w[0]] << ' ' << labels[w[1]] << ' ' << labels[w[2]] << "\n";
    }
    if (verdict.witness_r) out << "r: " << fmt(*verdict.witness_r) << " s: " << fmt(*verdict.witness_s) << "\n";
  }
  for (const auto& d : summary["depths"])
    out << "depth " << d["depth"].dump() << ": " << d["points"].dump() << " points, " << d["pairs"].dump()
        << " ratio pairs" << (d["sampled"].get<bool>() ? " (sampled)" : "") << "\n";
  out << "eta:\n";
  for (const auto& v : verdict.eta) out << "  " << fmt(v.t) << " " << (v.h ? fmt(*v.h) : std::string("-")) << "\n";

  if (!a.out.empty()) {
    const std::filesystem::path dir(a.out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(Errc::invalid_argument, "cannot create '" + a.out + "'");
    for (std::size_t i = 0; i < docs.size(); ++i) {
      const std::string tag = std::to_string(i) + "_depth" + std::to_string(docs[i].tree.height());
      write_file(dir / ("profile_" + tag + ".csv"), write_profile_csv(profiles[i], docs[i].tree.labels()));
      write_file(dir / ("envelope_" + tag + ".csv"), write_envelope_csv(envelope_eval(profiles[i], grid)));
    }
    write_file(dir / "verdict.json", summary.dump(2) + "\n");
  }
  return verdict.pass ? kPass : kViolation;
}

}  // namespace detail

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Build, validate, and analyze finite cellular spaces", "cellspace"};
  app.require_subcommand(1);

  detail::GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a generated space as cellspace-v1 JSON");
  generate->add_option("kind", gen.kind, "product | cantor | fat-cantor | random | ray")->required();
  generate->add_option("--sizes", gen.sizes, "Alphabet size per level (product)")->delimiter(',');
  generate->add_option("--depth", gen.depth, "Depth (cantor, fat-cantor, ray)");
  generate->add_option("--theta", gen.theta, "Stage gap proportions, comma separated (fat-cantor)");
  generate->add_option("--seed", gen.seed, "Seed (random)");
  generate->add_option("--points", gen.points, "Point count (random)");
  generate->add_option("--branch", gen.branch, "Maximum children per cell (random)");
  generate->add_option("--max-depth", gen.max_depth, "Maximum depth (random)");
  generate->add_option("--arity", gen.arity, "Arity of the complete tree (ray)");
  generate->add_option("--tree", gen.tree, "JSON rooted tree whose rays become points (ray)");
  generate->add_option("--beta", gen.beta, "Attach weights beta^depth");
  generate->add_option("--rho", gen.rho, "Attach weights from a sequence 1 > rho_1 > ...");
  generate->add_option("--measure", gen.measure, "Attach a measure: uniform");
  generate->add_option("--level-weights", gen.level_weights, "Product measure, e.g. '3/4,1/4;1/2,1/2'");
  generate->add_option("--out", gen.out, "Output file (default: stdout)");

  detail::ValidateArgs val;
  auto* validate = app.add_subcommand("validate", "Check a space file and optional metric");
  validate->add_option("file", val.file, "cellspace-v1 JSON")->required();
  validate->add_flag("--strict-base", val.strict_base, "Reject families missing a singleton");
  validate->add_option("--metric", val.metric, "Distance matrix CSV");
  validate->add_option("--tol", val.tol, "Tolerance for imported distances");

  detail::AnalyzeArgs ana;
  auto* analyze = app.add_subcommand("analyze", "Doubling and regularity constants");
  analyze->add_option("file", ana.file, "cellspace-v1 JSON")->required();
  analyze->add_option("--metric", ana.metric, "Distance matrix CSV");
  analyze->add_option("--tol", ana.tol, "Tolerance for imported distances");
  analyze->add_option("--geometry", ana.geometry, "auto | weight | interval | metric | none");
  analyze->add_option("--measure", ana.measure, "Use uniform atoms when the file has none: uniform");
  analyze->add_option("--format", ana.format, "table | json");
  analyze->add_option("--decimals", ana.decimals, "Print decimals with this many significant digits");

  detail::DistortionArgs dis;
  auto* distortion = app.add_subcommand("distortion", "Quasisymmetric distortion verdict across depths");
  distortion->add_option("spaces", dis.spaces, "product:N | cantor | fat-cantor, or one file per depth")->required();
  distortion->add_option("--metric-a", dis.metric_a, "regular:B | geometric:Q | sequence:... | euclidean | weights | csv:...")
      ->required();
  distortion->add_option("--metric-b", dis.metric_b, "Second metric, same forms")->required();
  distortion->add_option("--depths", dis.depths, "Depths for generated spaces")->delimiter(',');
  distortion->add_option("--grid", dis.grid, "pow2:K or comma-separated t values");
  distortion->add_option("--tol", dis.tol, "Cross-depth envelope tolerance");
  distortion->add_option("--out", dis.out, "Directory for profile/envelope CSVs and verdict.json");
  distortion->add_option("--seed", dis.seed, "Seed for sampled profiles");
  distortion->add_option("--max-exact-pairs", dis.max_exact_pairs, "Budget for exact triple enumeration");
  distortion->add_option("--decimals", dis.decimals, "Print decimals with this many significant digits");

  std::vector<std::string> argv_store{"cellspace"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kInputError;
  }

  try {
    if (*generate) return detail::cmd_generate(gen, out, err);
    if (*validate) return detail::cmd_validate(val, out);
    if (*analyze) return detail::cmd_analyze(ana, out);
    if (*distortion) return detail::cmd_distortion(dis, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace cellspace::cli
