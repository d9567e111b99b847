#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <tsforge/io.hpp>
#include <tsforge/plot.hpp>

#include "support/schema_check.hpp"

using namespace tsforge;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "tsforge_io_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::vector<double>> read_csv_values(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::string line;
  REQUIRE(std::getline(in, line));  // header
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::size_t from = 0;
    while (from <= line.size()) {
      const std::size_t to = line.find(',', from);
      const std::string cell =
          line.substr(from, to == std::string::npos ? to : to - from);
      row.push_back(std::strtod(cell.c_str(), nullptr));
      if (to == std::string::npos) break;
      from = to + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json minimal_auto_config() {
  return json{{"d", 4},
              {"num_communities", 1},
              {"max_indegree", 2},
              {"link_communities", false},
              {"nb_links", 0},
              {"train_length", 50},
              {"test_length", 100},
              {"contamination_ratio", 0.05},
              {"seed", 7}};
}

json manual_example_config() {
  return json{
      {"mode", "manual"},
      {"d", 5},
      {"train_length", 100},
      {"test_length", 400},
      {"seed", 1},
      {"equations",
       {"cos((t-2)*x1[t-3])", "cos(9*(t-4))/sin(9)",
        "(cos((t-2)*x4[t-2])+2*x4[t-4]-x3[t-3]/4)/10",
        "sin(t-3)-integral(x2,3,1)+x3[t-3]/2",
        "sin(6*(t-4))+(3*cos(t-1)-2)^2"}},
      {"anomalies",
       {{{"var", 3},
         {"start", 106},
         {"end", 137},
         {"equation", "sin(t-3)-integral(x2,3,1)+x3[t-3]/5"}}}}};
}

}  // namespace

TEST_CASE("automatic config fills defaults and validates") {
  const LoadedConfig config = parse_config(minimal_auto_config());
  REQUIRE(std::holds_alternative<GenerationParams>(config));
  const auto& p = std::get<GenerationParams>(config);
  CHECK(p.d == 4);
  CHECK(p.max_lag == 5);
  CHECK(p.n_const == 2);
  CHECK(p.num_anomalies == 0);
  CHECK(p.propagation_prob == 0.5);
  CHECK(p.noise_sigma == 0.0);
  CHECK_FALSE(p.enable_window_agg);
  CHECK(p.seed == 7);
}

TEST_CASE("config rejection: unknown, misplaced, missing, and bad keys") {
  const auto expect_config_error = [](json doc, const std::string& needle) {
    try {
      parse_config(doc);
      FAIL("expected rejection; needle: " << needle);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  json unknown = minimal_auto_config();
  unknown["banana"] = 1;
  expect_config_error(unknown, "banana");

  json misplaced = minimal_auto_config();
  misplaced["anomalies"] = json::array();
  expect_config_error(misplaced, "does not apply in automatic mode");

  json manual_misplaced = manual_example_config();
  manual_misplaced["max_indegree"] = 3;
  expect_config_error(manual_misplaced, "does not apply in manual mode");

  json missing = minimal_auto_config();
  missing.erase("seed");
  expect_config_error(missing, "seed");

  json bad_type = minimal_auto_config();
  bad_type["d"] = "five";
  expect_config_error(bad_type, "expected an integer");

  json bad_bool = minimal_auto_config();
  bad_bool["link_communities"] = 1;
  expect_config_error(bad_bool, "expected a boolean");

  json bad_seed = minimal_auto_config();
  bad_seed["seed"] = -4;
  expect_config_error(bad_seed, "non-negative");

  json bad_ratio = minimal_auto_config();
  bad_ratio["contamination_ratio"] = 1.0;
  expect_config_error(bad_ratio, "contamination_ratio");

  json bad_mode = minimal_auto_config();
  bad_mode["mode"] = "assisted";
  expect_config_error(bad_mode, "mode");

  json mismatched_mode = minimal_auto_config();
  mismatched_mode["mode"] = "manual";
  expect_config_error(mismatched_mode, "equations");

  json bad_d = manual_example_config();
  bad_d["d"] = 7;
  expect_config_error(bad_d, "does not match");
}

TEST_CASE("manual resolution derives the dependency structure") {
  const LoadedConfig config = parse_config(manual_example_config());
  REQUIRE(std::holds_alternative<ManualSpec>(config));
  const SystemSpec sys = resolve_manual(std::get<ManualSpec>(config));

  const std::vector<Edge> expected = {{1, 0, true},
                                      {3, 2, true},
                                      {4, 2, true},
                                      {2, 3, true},
                                      {3, 3, true}};
  CHECK(sys.graph.edges == expected);
  CHECK(sys.graph.num_communities == 2);
  CHECK(sys.graph.community == std::vector<int>{0, 0, 1, 1, 1});
  CHECK(sys.graph.exogenous == std::vector<char>{0, 1, 0, 0, 1});

  REQUIRE(sys.anomalies.size() == 1);
  CHECK(sys.anomalies[0].var == 3);
  CHECK(sys.anomalies[0].t_start == 106);
  CHECK(sys.anomalies[0].t_end == 137);
  CHECK(sys.anomalies[0].strategy == MutationStrategy::Manual);
}

TEST_CASE("manual validation rejects inconsistent anomalies and overrides") {
  const auto expect_error = [](json doc, const std::string& needle) {
    try {
      resolve_manual(std::get<ManualSpec>(parse_config(doc)));
      FAIL("expected rejection; needle: " << needle);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  json bad_eq = manual_example_config();
  bad_eq["equations"][0] = "cos((t-2)*x9[t-3])";
  expect_error(bad_eq, "equations[0]");
  expect_error(bad_eq, "position");

  json bad_var = manual_example_config();
  bad_var["anomalies"][0]["var"] = 9;
  expect_error(bad_var, "out of range");

  json early = manual_example_config();
  early["anomalies"][0]["start"] = 50;
  expect_error(early, "test segment");

  json late = manual_example_config();
  late["anomalies"][0]["end"] = 501;
  expect_error(late, "test segment");

  json empty_window = manual_example_config();
  empty_window["anomalies"][0]["end"] = 106;
  expect_error(empty_window, "positive length");

  json overlapping = manual_example_config();
  overlapping["anomalies"].push_back(
      {{"var", 3}, {"start", 130}, {"end", 140}, {"equation", "1"}});
  expect_error(overlapping, "overlap");

  json bad_anomaly_eq = manual_example_config();
  bad_anomaly_eq["anomalies"][0]["equation"] = "sin(t-3)+";
  expect_error(bad_anomaly_eq, "anomalies[0].equation");

  json ghost_edge = manual_example_config();
  ghost_edge["propagation"] = {{{"src", 0}, {"dst", 2}, {"propagates", false}}};
  expect_error(ghost_edge, "no such edge");

  json blocked_self = manual_example_config();
  blocked_self["propagation"] = {{{"src", 3}, {"dst", 3}, {"propagates", false}}};
  expect_error(blocked_self, "self-loop");
}

TEST_CASE("propagation overrides land on the derived edges") {
  json doc = manual_example_config();
  doc["propagation"] = {{{"src", 1}, {"dst", 0}, {"propagates", false}}};
  const SystemSpec sys =
      resolve_manual(std::get<ManualSpec>(parse_config(doc)));
  CHECK_FALSE(sys.propagation.at({1, 0}));
  CHECK(sys.propagation.at({3, 2}));
  for (const Edge& e : sys.graph.edges) {
    CHECK(e.propagates == sys.propagation.at({e.src, e.dst}));
  }
}

TEST_CASE("dataset files carry aligned timestamps and faithful floats") {
  json doc = json{{"mode", "manual"},
                  {"train_length", 20},
                  {"test_length", 10},
                  {"seed", 2},
                  {"equations", {"sin(t)", "2*x0[t-1]"}},
                  {"anomalies",
                   {{{"var", 0},
                     {"start", 22},
                     {"end", 25},
                     {"equation", "sin(t)+5"}}}}};
  const GenerationResult r =
      generate_dataset(std::get<ManualSpec>(parse_config(doc)));
  const fs::path dir = temp_dir("files");
  const fs::path manifest_path = write_dataset(r, dir);

  CHECK(manifest_path == dir / "metadata.json");
  for (const char* name : {"train.csv", "test.csv", "labels_rich.csv",
                           "labels_binary.csv", "metadata.json"}) {
    CHECK(fs::exists(dir / name));
  }

  const std::string train_text = slurp(dir / "train.csv");
  CHECK(train_text.substr(0, train_text.find('\n')) == "t,x0,x1");
  CHECK(train_text.back() == '\n');

  const auto train_rows = read_csv_values(dir / "train.csv");
  REQUIRE(train_rows.size() == 20);
  CHECK(train_rows.front().at(0) == 0.0);
  CHECK(train_rows.back().at(0) == 19.0);

  const auto test_rows = read_csv_values(dir / "test.csv");
  REQUIRE(test_rows.size() == 10);
  CHECK(test_rows.front().at(0) == 20.0);
  for (std::size_t row = 0; row < 10; ++row) {
    for (int col = 0; col < 2; ++col) {
      // 17 significant digits reproduce the double exactly.
      CHECK(test_rows[row].at(1 + static_cast<std::size_t>(col)) ==
            r.test.at(static_cast<std::int64_t>(row), col));
    }
  }

  const auto rich_rows = read_csv_values(dir / "labels_rich.csv");
  const auto binary_rows = read_csv_values(dir / "labels_binary.csv");
  REQUIRE(rich_rows.size() == 10);
  for (std::size_t row = 0; row < 10; ++row) {
    const std::int64_t t = 20 + static_cast<std::int64_t>(row);
    const double rich0 = rich_rows[row].at(1);
    const double rich1 = rich_rows[row].at(2);
    CHECK(rich0 == ((t >= 22 && t < 25) ? 1.0 : 0.0));
    CHECK(rich1 == ((t >= 23 && t < 26) ? 3.0 : 0.0));
    CHECK(binary_rows[row].at(1) == (rich0 == 1.0 ? 1.0 : 0.0));
    CHECK(binary_rows[row].at(2) == (rich1 == 3.0 ? 1.0 : 0.0));
  }
}

TEST_CASE("manifest conforms to the published schema") {
  const GenerationResult r =
      generate_dataset(std::get<GenerationParams>(
          parse_config(minimal_auto_config())));
  const json manifest = build_manifest(r);

  std::ifstream schema_in(TSFORGE_SOURCE_DIR "/schema/metadata.schema.json");
  REQUIRE(schema_in);
  json schema;
  schema_in >> schema;

  const auto errors = testsupport::schema_errors(manifest, schema);
  for (const auto& e : errors) UNSCOPED_INFO(e);
  CHECK(errors.empty());

  CHECK(manifest["schema_version"] == 1);
  CHECK(manifest["mode"] == "automatic");
  CHECK(manifest["engine_constants"]["value_clamp"] == 1e12);
  CHECK(manifest["engine_constants"]["guard_epsilon"] == 1e-8);
  CHECK(manifest["engine_constants"]["effect_tolerance"] == 1e-6);
  CHECK(manifest["layout"]["t_test_start"] == 50);
  CHECK(manifest["params"]["contamination_ratio"] == 0.05);
  CHECK(manifest["graph"]["nodes"].size() == 4);
  CHECK(manifest["equations"].size() == 4);
}

TEST_CASE("a written manifest regenerates the dataset byte for byte") {
  json doc = minimal_auto_config();
  doc["noise_sigma"] = 0.2;
  doc["enable_window_agg"] = true;
  doc["train_length"] = 60;
  doc["test_length"] = 120;
  doc["seed"] = 5;

  const GenerationResult original = generate_dataset(parse_config(doc));
  const fs::path dir_a = temp_dir("regen_a");
  write_dataset(original, dir_a);

  const ManualSpec replay =
      manual_spec_from_manifest(load_manifest(dir_a / "metadata.json"));
  const GenerationResult regenerated = generate_dataset(replay);
  const fs::path dir_b = temp_dir("regen_b");
  write_dataset(regenerated, dir_b);

  for (const char* name :
       {"train.csv", "test.csv", "labels_rich.csv", "labels_binary.csv"}) {
    CHECK(slurp(dir_a / name) == slurp(dir_b / name));
  }
}

TEST_CASE("inspect renders the system summary") {
  const GenerationResult r =
      generate_dataset(std::get<ManualSpec>(parse_config(manual_example_config())));
  const std::string text = render_inspect(build_manifest(r));

  CHECK(text.find("mode: manual") != std::string::npos);
  CHECK(text.find("variables: 5") != std::string::npos);
  CHECK(text.find("x3 = sin(t-3)-integral(x2,3,1)+x3[t-3]/2") !=
        std::string::npos);
  CHECK(text.find("x1 = cos(9*(t-4))/sin(9)") != std::string::npos);
  CHECK(text.find("[106, 137)") != std::string::npos);
  CHECK(text.find("manual") != std::string::npos);
  CHECK(text.find("x3 -> x3") != std::string::npos);

  // One definition line per variable in the equations block; the exogenous
  // legend also contains " = ", so count only below the section header.
  const std::size_t eq_start = text.find("equations:");
  REQUIRE(eq_start != std::string::npos);
  std::size_t equation_lines = 0;
  for (std::size_t at = text.find(" = ", eq_start);
       at != std::string::npos; at = text.find(" = ", at + 1)) {
    ++equation_lines;
  }
  CHECK(equation_lines == 5);
}

TEST_CASE("config loading distinguishes I/O failures from bad content") {
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), IoError);

  const fs::path dir = temp_dir("load");
  const fs::path bad = dir / "bad.json";
  std::ofstream(bad) << "{ not json";
  CHECK_THROWS_AS(load_config(bad.string()), ConfigError);

  const fs::path good = dir / "good.json";
  std::ofstream(good) << minimal_auto_config().dump();
  CHECK(std::holds_alternative<GenerationParams>(load_config(good.string())));
}

TEST_CASE("plots render panels with shaded windows and a split line") {
  const GenerationResult r =
      generate_dataset(std::get<ManualSpec>(parse_config(manual_example_config())));
  const fs::path dir = temp_dir("plot");

  emit_plot(r, {}, dir / "all.svg");
  const std::string svg = slurp(dir / "all.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("class=\"anomaly\"") != std::string::npos);
  CHECK(svg.find("stroke-dasharray") != std::string::npos);
  std::size_t polylines = 0;
  for (std::size_t at = svg.find("<polyline"); at != std::string::npos;
       at = svg.find("<polyline", at + 1)) {
    ++polylines;
  }
  CHECK(polylines == 5);

  emit_plot(r, {0, 2}, dir / "some.svg");
  const std::string partial = slurp(dir / "some.svg");
  CHECK(partial.find(">x2<") != std::string::npos);
  CHECK(partial.find(">x3<") == std::string::npos);
  CHECK(partial.find("class=\"anomaly\"") == std::string::npos);

  CHECK_THROWS_AS(emit_plot(r, {99}, dir / "broken.svg"), ConfigError);
  CHECK_FALSE(fs::exists(dir / "broken.svg"));
}
