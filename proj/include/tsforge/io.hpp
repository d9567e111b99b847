#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsforge/anomaly.hpp"
#include "tsforge/dsl.hpp"
#include "tsforge/engine.hpp"
#include "tsforge/errors.hpp"
#include "tsforge/graph.hpp"
#include "tsforge/params.hpp"

namespace tsforge {

using json = nlohmann::json;

// ----------------------------------------------------------------------------
// Config documents
// ----------------------------------------------------------------------------

struct ManualAnomaly {
  int var = 0;
  std::int64_t start = 0;
  std::int64_t end = 0;
  std::string equation;
};

struct PropagationOverride {
  int src = 0;
  int dst = 0;
  bool propagates = true;
};

// Manual mode: the user supplies every generative equation plus explicit
// anomaly windows; only the noise draws remain random.
struct ManualSpec {
  int d = 0;
  std::vector<std::string> equations;
  std::vector<ManualAnomaly> anomalies;
  std::vector<PropagationOverride> propagation;
  std::int64_t train_length = 0;
  std::int64_t test_length = 0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

using LoadedConfig = std::variant<GenerationParams, ManualSpec>;

namespace detail {

inline const json& require_key(const json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end()) throw ConfigError(key, "missing required key");
  return *it;
}

inline std::int64_t as_int(const json& v, const std::string& field) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    throw ConfigError(field, "expected an integer");
  }
  return v.get<std::int64_t>();
}

inline double as_double(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  return v.get<double>();
}

inline bool as_bool(const json& v, const std::string& field) {
  if (!v.is_boolean()) throw ConfigError(field, "expected a boolean");
  return v.get<bool>();
}

inline std::uint64_t as_seed(const json& v, const std::string& field) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  throw ConfigError(field, "expected a non-negative integer");
}

inline int as_bounded_int(const json& v, const std::string& field) {
  const std::int64_t x = as_int(v, field);
  if (x < INT32_MIN || x > INT32_MAX) {
    throw ConfigError(field, "out of range");
  }
  return static_cast<int>(x);
}

inline const std::set<std::string>& automatic_keys() {
  static const std::set<std::string> keys = {
      "mode",           "d",
      "num_communities", "max_indegree",
      "link_communities", "nb_links",
      "train_length",   "test_length",
      "contamination_ratio", "num_anomalies",
      "max_lag",        "n_const",
      "propagation_prob", "noise_sigma",
      "enable_window_agg", "seed"};
  return keys;
}

inline const std::set<std::string>& manual_keys() {
  static const std::set<std::string> keys = {
      "mode",        "d",           "equations", "anomalies", "propagation",
      "train_length", "test_length", "noise_sigma", "seed"};
  return keys;
}

inline void check_keys(const json& doc, const std::set<std::string>& allowed,
                       const std::set<std::string>& other_mode,
                       const char* mode) {
  for (const auto& item : doc.items()) {
    if (allowed.count(item.key())) continue;
    if (other_mode.count(item.key())) {
      throw ConfigError(item.key(),
                        std::string("does not apply in ") + mode + " mode");
    }
    throw ConfigError(item.key(), "unknown key");
  }
}

inline GenerationParams parse_automatic(const json& doc) {
  check_keys(doc, automatic_keys(), manual_keys(), "automatic");
  GenerationParams p;
  p.d = as_bounded_int(require_key(doc, "d"), "d");
  p.num_communities =
      as_bounded_int(require_key(doc, "num_communities"), "num_communities");
  p.max_indegree =
      as_bounded_int(require_key(doc, "max_indegree"), "max_indegree");
  p.link_communities =
      as_bool(require_key(doc, "link_communities"), "link_communities");
  p.nb_links = as_bounded_int(require_key(doc, "nb_links"), "nb_links");
  p.train_length = as_int(require_key(doc, "train_length"), "train_length");
  p.test_length = as_int(require_key(doc, "test_length"), "test_length");
  p.contamination_ratio = as_double(require_key(doc, "contamination_ratio"),
                                    "contamination_ratio");
  p.seed = as_seed(require_key(doc, "seed"), "seed");

  if (doc.contains("num_anomalies")) {
    p.num_anomalies = as_bounded_int(doc["num_anomalies"], "num_anomalies");
  }
  if (doc.contains("max_lag")) {
    p.max_lag = as_bounded_int(doc["max_lag"], "max_lag");
  }
  if (doc.contains("n_const")) {
    p.n_const = as_bounded_int(doc["n_const"], "n_const");
  }
  if (doc.contains("propagation_prob")) {
    p.propagation_prob = as_double(doc["propagation_prob"], "propagation_prob");
  }
  if (doc.contains("noise_sigma")) {
    p.noise_sigma = as_double(doc["noise_sigma"], "noise_sigma");
  }
  if (doc.contains("enable_window_agg")) {
    p.enable_window_agg =
        as_bool(doc["enable_window_agg"], "enable_window_agg");
  }
  validate_params(p);
  return p;
}

inline ManualSpec parse_manual(const json& doc) {
  check_keys(doc, manual_keys(), automatic_keys(), "manual");
  ManualSpec spec;

  const json& eqs = require_key(doc, "equations");
  if (!eqs.is_array() || eqs.empty()) {
    throw ConfigError("equations", "expected a non-empty array of strings");
  }
  for (const auto& e : eqs) {
    if (!e.is_string()) {
      throw ConfigError("equations", "expected a non-empty array of strings");
    }
    spec.equations.push_back(e.get<std::string>());
  }
  spec.d = static_cast<int>(spec.equations.size());
  if (doc.contains("d") &&
      as_bounded_int(doc["d"], "d") != spec.d) {
    throw ConfigError("d", "does not match the number of equations");
  }

  spec.train_length = as_int(require_key(doc, "train_length"), "train_length");
  spec.test_length = as_int(require_key(doc, "test_length"), "test_length");
  spec.seed = as_seed(require_key(doc, "seed"), "seed");
  if (doc.contains("noise_sigma")) {
    spec.noise_sigma = as_double(doc["noise_sigma"], "noise_sigma");
  }
  if (spec.train_length < 1) {
    throw ConfigError("train_length", "must be at least 1");
  }
  if (spec.test_length < 0) {
    throw ConfigError("test_length", "must not be negative");
  }
  if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma)) {
    throw ConfigError("noise_sigma", "must be a finite value >= 0");
  }

  if (doc.contains("anomalies")) {
    const json& arr = doc["anomalies"];
    if (!arr.is_array()) throw ConfigError("anomalies", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const json& a = arr[i];
      const std::string where = "anomalies[" + std::to_string(i) + "]";
      if (!a.is_object()) throw ConfigError(where, "expected an object");
      for (const auto& item : a.items()) {
        if (item.key() != "var" && item.key() != "start" &&
            item.key() != "end" && item.key() != "equation") {
          throw ConfigError(where + "." + item.key(), "unknown key");
        }
      }
      ManualAnomaly ma;
      ma.var = as_bounded_int(require_key(a, "var"), where + ".var");
      ma.start = as_int(require_key(a, "start"), where + ".start");
      ma.end = as_int(require_key(a, "end"), where + ".end");
      const json& eq = require_key(a, "equation");
      if (!eq.is_string()) {
        throw ConfigError(where + ".equation", "expected a string");
      }
      ma.equation = eq.get<std::string>();
      spec.anomalies.push_back(std::move(ma));
    }
  }

  if (doc.contains("propagation")) {
    const json& arr = doc["propagation"];
    if (!arr.is_array()) throw ConfigError("propagation", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const json& o = arr[i];
      const std::string where = "propagation[" + std::to_string(i) + "]";
      if (!o.is_object()) throw ConfigError(where, "expected an object");
      for (const auto& item : o.items()) {
        if (item.key() != "src" && item.key() != "dst" &&
            item.key() != "propagates") {
          throw ConfigError(where + "." + item.key(), "unknown key");
        }
      }
      PropagationOverride po;
      po.src = as_bounded_int(require_key(o, "src"), where + ".src");
      po.dst = as_bounded_int(require_key(o, "dst"), where + ".dst");
      po.propagates =
          as_bool(require_key(o, "propagates"), where + ".propagates");
      spec.propagation.push_back(po);
    }
  }
  return spec;
}

}  // namespace detail

// Mode is inferred from the presence of an `equations` block; an explicit
// `mode` key, when present, must agree.
inline LoadedConfig parse_config(const json& doc) {
  if (!doc.is_object()) {
    throw ConfigError("document", "top level must be a JSON object");
  }
  const bool manual = doc.contains("equations");
  if (doc.contains("mode")) {
    const json& m = doc["mode"];
    if (!m.is_string() ||
        (m.get<std::string>() != "automatic" &&
         m.get<std::string>() != "manual")) {
      throw ConfigError("mode", "expected \"automatic\" or \"manual\"");
    }
    if ((m.get<std::string>() == "manual") != manual) {
      throw ConfigError("mode",
                        "does not match the presence of an equations block");
    }
  }
  if (manual) return detail::parse_manual(doc);
  return detail::parse_automatic(doc);
}

inline LoadedConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError("document", e.what());
  }
  return parse_config(doc);
}

// ----------------------------------------------------------------------------
// Manual-mode resolution
// ----------------------------------------------------------------------------

namespace detail {

// Dependency graph implied by the equations: edge (p -> j) whenever x_j's
// function reads x_p at some lag. Communities are the weak components,
// numbered by their smallest member.
inline DependencyGraph derive_graph(const std::vector<ExprPtr>& equations) {
  const int d = static_cast<int>(equations.size());
  DependencyGraph g;
  g.d = d;
  for (int j = 0; j < d; ++j) {
    for (const auto& [parent, lags] :
         lag_reads(*equations[static_cast<std::size_t>(j)])) {
      g.edges.push_back({parent, j, true});
    }
  }

  UnionFind uf(d);
  for (const Edge& e : g.edges) uf.unite(e.src, e.dst);
  g.community.assign(static_cast<std::size_t>(d), -1);
  int next = 0;
  for (int v = 0; v < d; ++v) {
    const int root = uf.find(v);
    if (g.community[static_cast<std::size_t>(root)] == -1) {
      g.community[static_cast<std::size_t>(root)] = next++;
    }
    g.community[static_cast<std::size_t>(v)] =
        g.community[static_cast<std::size_t>(root)];
  }
  g.num_communities = next;

  g.exogenous.assign(static_cast<std::size_t>(d), 1);
  for (const Edge& e : g.edges) {
    g.exogenous[static_cast<std::size_t>(e.dst)] = 0;
  }
  return g;
}

}  // namespace detail

// Parses and cross-checks a manual config into a simulatable system.
inline SystemSpec resolve_manual(const ManualSpec& spec) {
  SystemSpec sys;
  sys.train_length = spec.train_length;
  sys.test_length = spec.test_length;
  sys.noise_sigma = spec.noise_sigma;
  sys.seed = spec.seed;

  for (std::size_t j = 0; j < spec.equations.size(); ++j) {
    try {
      sys.equations.push_back(parse_expression(spec.equations[j], spec.d));
    } catch (const ParseError& e) {
      throw ConfigError("equations[" + std::to_string(j) + "]", e.what());
    }
  }

  sys.graph = detail::derive_graph(sys.equations);

  for (const Edge& e : sys.graph.edges) {
    sys.propagation[{e.src, e.dst}] = true;
  }
  for (std::size_t i = 0; i < spec.propagation.size(); ++i) {
    const PropagationOverride& po = spec.propagation[i];
    const std::string where = "propagation[" + std::to_string(i) + "]";
    const auto it = sys.propagation.find({po.src, po.dst});
    if (it == sys.propagation.end()) {
      throw ConfigError(where, "no equation reads x" + std::to_string(po.dst) +
                                   " from x" + std::to_string(po.src) +
                                   "; no such edge");
    }
    if (po.src == po.dst && !po.propagates) {
      throw ConfigError(where,
                        "a self-loop always propagates; the variable reads "
                        "its own contaminated past");
    }
    it->second = po.propagates;
  }
  apply_propagation(sys.graph, sys.propagation);

  for (std::size_t i = 0; i < spec.anomalies.size(); ++i) {
    const ManualAnomaly& ma = spec.anomalies[i];
    const std::string where = "anomalies[" + std::to_string(i) + "]";
    if (ma.var < 0 || ma.var >= spec.d) {
      throw ConfigError(where + ".var", "variable out of range");
    }
    if (ma.end <= ma.start) {
      throw ConfigError(where, "window must have positive length");
    }
    if (ma.start < spec.train_length ||
        ma.end > spec.train_length + spec.test_length) {
      throw ConfigError(where, "window must lie inside the test segment");
    }
    for (const AnomalySpec& prev : sys.anomalies) {
      if (prev.var == ma.var && ma.start < prev.t_end &&
          prev.t_start < ma.end) {
        throw ConfigError(where,
                          "windows on one variable must not overlap");
      }
    }
    AnomalySpec a;
    a.var = ma.var;
    a.t_start = ma.start;
    a.t_end = ma.end;
    a.strategy = MutationStrategy::Manual;
    try {
      a.mutated = parse_expression(ma.equation, spec.d);
    } catch (const ParseError& e) {
      throw ConfigError(where + ".equation", e.what());
    }
    sys.anomalies.push_back(std::move(a));
  }
  return sys;
}

inline GenerationResult generate_dataset(const ManualSpec& spec) {
  GenerationResult result = run_system(resolve_manual(spec));
  result.manual = true;
  return result;
}

inline GenerationResult generate_dataset(const LoadedConfig& config) {
  if (std::holds_alternative<GenerationParams>(config)) {
    return generate_dataset(std::get<GenerationParams>(config));
  }
  return generate_dataset(std::get<ManualSpec>(config));
}

// ----------------------------------------------------------------------------
// Dataset serialization
// ----------------------------------------------------------------------------

inline constexpr int kManifestSchemaVersion = 1;

namespace detail {

inline void format_csv_double(double v, std::string& out) {
  char buf[64];
  const auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  (void)ec;
  out.append(buf, ptr);
}

inline void write_atomic(const std::filesystem::path& path,
                         const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

inline std::string csv_header(int d) {
  std::string header = "t";
  for (int j = 0; j < d; ++j) header += ",x" + std::to_string(j);
  header += "\n";
  return header;
}

inline std::string series_csv(const SeriesMatrix& m, std::int64_t t0) {
  std::string out = csv_header(m.d);
  for (std::int64_t r = 0; r < m.rows; ++r) {
    out += std::to_string(t0 + r);
    for (int j = 0; j < m.d; ++j) {
      out.push_back(',');
      format_csv_double(m.at(r, j), out);
    }
    out.push_back('\n');
  }
  return out;
}

inline std::string labels_csv(const LabelMatrix& m, std::int64_t t0) {
  std::string out = csv_header(m.d);
  for (std::int64_t r = 0; r < m.rows; ++r) {
    out += std::to_string(t0 + r);
    for (int j = 0; j < m.d; ++j) {
      out.push_back(',');
      out += std::to_string(static_cast<int>(m.at(r, j)));
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace detail

inline json build_manifest(const GenerationResult& result) {
  const SystemSpec& sys = result.system;
  json manifest;
  manifest["schema_version"] = kManifestSchemaVersion;
  manifest["mode"] = result.manual ? "manual" : "automatic";

  json params;
  if (result.manual) {
    params["d"] = sys.graph.d;
    params["train_length"] = sys.train_length;
    params["test_length"] = sys.test_length;
    params["noise_sigma"] = sys.noise_sigma;
    params["seed"] = sys.seed;
  } else {
    const GenerationParams& p = result.params;
    params["d"] = p.d;
    params["num_communities"] = p.num_communities;
    params["max_indegree"] = p.max_indegree;
    params["link_communities"] = p.link_communities;
    params["nb_links"] = p.nb_links;
    params["train_length"] = p.train_length;
    params["test_length"] = p.test_length;
    params["contamination_ratio"] = p.contamination_ratio;
    params["num_anomalies"] = p.num_anomalies;
    params["max_lag"] = p.max_lag;
    params["n_const"] = p.n_const;
    params["propagation_prob"] = p.propagation_prob;
    params["noise_sigma"] = p.noise_sigma;
    params["enable_window_agg"] = p.enable_window_agg;
    params["seed"] = p.seed;
  }
  manifest["params"] = std::move(params);

  manifest["engine_constants"] = {
      {"value_clamp", kValueClamp},
      {"guard_epsilon", kGuardEpsilon},
      {"effect_tolerance", kEffectTolerance},
      {"warmup_steps", result.warmup},
  };

  json columns = json::array();
  for (int j = 0; j < sys.graph.d; ++j) {
    columns.push_back("x" + std::to_string(j));
  }
  manifest["layout"] = {
      {"train_rows", sys.train_length},
      {"test_rows", sys.test_length},
      {"t_test_start", sys.train_length},
      {"columns", std::move(columns)},
  };

  json nodes = json::array();
  for (int v = 0; v < sys.graph.d; ++v) {
    nodes.push_back({
        {"id", v},
        {"community", sys.graph.community[static_cast<std::size_t>(v)]},
        {"exogenous",
         sys.graph.exogenous[static_cast<std::size_t>(v)] != 0},
    });
  }
  json edges = json::array();
  for (const Edge& e : sys.graph.edges) {
    edges.push_back({
        {"src", e.src},
        {"dst", e.dst},
        {"propagates", e.propagates},
    });
  }
  manifest["graph"] = {
      {"num_communities", sys.graph.num_communities},
      {"nodes", std::move(nodes)},
      {"edges", std::move(edges)},
  };

  json equations = json::array();
  for (const ExprPtr& e : sys.equations) equations.push_back(to_string(e));
  manifest["equations"] = std::move(equations);

  json anomalies = json::array();
  for (const AnomalySpec& a : sys.anomalies) {
    anomalies.push_back({
        {"var", a.var},
        {"t_start", a.t_start},
        {"t_end", a.t_end},
        {"strategy", strategy_name(a.strategy)},
        {"mutated_equation", to_string(a.mutated)},
    });
  }
  manifest["anomalies"] = std::move(anomalies);
  return manifest;
}

// Writes train/test/label CSVs plus the metadata manifest into out_dir and
// returns the manifest path. All writes are temp-file + rename.
inline std::filesystem::path write_dataset(const GenerationResult& result,
                                           const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory " + out_dir.string() +
                  ": " + ec.message());
  }

  const std::int64_t t_test = result.system.train_length;
  detail::write_atomic(out_dir / "train.csv",
                       detail::series_csv(result.train, 0));
  detail::write_atomic(out_dir / "test.csv",
                       detail::series_csv(result.test, t_test));
  detail::write_atomic(out_dir / "labels_rich.csv",
                       detail::labels_csv(result.labels, t_test));
  detail::write_atomic(out_dir / "labels_binary.csv",
                       detail::labels_csv(result.binary_labels(), t_test));

  const json manifest = build_manifest(result);
  detail::write_atomic(out_dir / "metadata.json", manifest.dump(2) + "\n");
  return out_dir / "metadata.json";
}

// ----------------------------------------------------------------------------
// Manifest round-trip
// ----------------------------------------------------------------------------

// Reconstructs a manual spec from a written manifest. Rerunning it with the
// recorded seed reproduces test.csv byte for byte, whichever mode produced
// the manifest.
inline ManualSpec manual_spec_from_manifest(const json& manifest) {
  ManualSpec spec;
  const json& layout = detail::require_key(manifest, "layout");
  spec.train_length =
      detail::as_int(detail::require_key(layout, "train_rows"),
                     "layout.train_rows");
  spec.test_length = detail::as_int(detail::require_key(layout, "test_rows"),
                                    "layout.test_rows");
  const json& params = detail::require_key(manifest, "params");
  spec.noise_sigma = detail::as_double(
      detail::require_key(params, "noise_sigma"), "params.noise_sigma");
  spec.seed =
      detail::as_seed(detail::require_key(params, "seed"), "params.seed");

  for (const auto& e : detail::require_key(manifest, "equations")) {
    spec.equations.push_back(e.get<std::string>());
  }
  spec.d = static_cast<int>(spec.equations.size());

  for (const auto& a : detail::require_key(manifest, "anomalies")) {
    ManualAnomaly ma;
    ma.var = detail::as_bounded_int(detail::require_key(a, "var"),
                                    "anomalies.var");
    ma.start = detail::as_int(detail::require_key(a, "t_start"),
                              "anomalies.t_start");
    ma.end =
        detail::as_int(detail::require_key(a, "t_end"), "anomalies.t_end");
    ma.equation = detail::require_key(a, "mutated_equation").get<std::string>();
    spec.anomalies.push_back(std::move(ma));
  }

  const json& graph = detail::require_key(manifest, "graph");
  for (const auto& e : detail::require_key(graph, "edges")) {
    PropagationOverride po;
    po.src = detail::as_bounded_int(detail::require_key(e, "src"),
                                    "graph.edges.src");
    po.dst = detail::as_bounded_int(detail::require_key(e, "dst"),
                                    "graph.edges.dst");
    po.propagates = detail::as_bool(detail::require_key(e, "propagates"),
                                    "graph.edges.propagates");
    spec.propagation.push_back(po);
  }
  return spec;
}

inline json load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError("manifest", e.what());
  }
  return doc;
}

// ----------------------------------------------------------------------------
// Inspection
// ----------------------------------------------------------------------------

// Human-readable summary of a written manifest: layout, graph, equations,
// anomaly table.
inline std::string render_inspect(const json& manifest) {
  std::ostringstream out;
  const json& params = detail::require_key(manifest, "params");
  const json& layout = detail::require_key(manifest, "layout");
  const json& graph = detail::require_key(manifest, "graph");

  out << "mode: " << detail::require_key(manifest, "mode").get<std::string>()
      << "\n";
  out << "variables: " << params["d"].get<int>()
      << "  train: " << layout["train_rows"].get<std::int64_t>()
      << "  test: " << layout["test_rows"].get<std::int64_t>()
      << "  seed: " << params["seed"].get<std::uint64_t>() << "\n\n";

  const json& nodes = detail::require_key(graph, "nodes");
  const int k = graph["num_communities"].get<int>();
  out << "graph: " << k << (k == 1 ? " community, " : " communities, ")
      << detail::require_key(graph, "edges").size() << " edges\n";
  for (int c = 0; c < k; ++c) {
    out << "  community " << c << ":";
    for (const auto& n : nodes) {
      if (n["community"].get<int>() == c) {
        out << " x" << n["id"].get<int>();
        if (n["exogenous"].get<bool>()) out << "*";
      }
    }
    out << "\n";
  }
  out << "  (* = exogenous)\n";
  for (const auto& e : graph["edges"]) {
    out << "  x" << e["src"].get<int>() << " -> x" << e["dst"].get<int>()
        << (e["propagates"].get<bool>() ? "  [propagates]" : "  [blocked]")
        << "\n";
  }

  out << "\nequations:\n";
  const json& equations = detail::require_key(manifest, "equations");
  for (std::size_t j = 0; j < equations.size(); ++j) {
    out << "  x" << j << " = " << equations[j].get<std::string>() << "\n";
  }

  const json& anomalies = detail::require_key(manifest, "anomalies");
  if (anomalies.empty()) {
    out << "\nanomalies: none\n";
  } else {
    out << "\nanomalies:\n";
    for (const auto& a : anomalies) {
      out << "  x" << a["var"].get<int>() << "  [" << a["t_start"].get<std::int64_t>()
          << ", " << a["t_end"].get<std::int64_t>() << ")  "
          << a["strategy"].get<std::string>() << "  "
          << a["mutated_equation"].get<std::string>() << "\n";
    }
  }
  return out.str();
}

}  // namespace tsforge
