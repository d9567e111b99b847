#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <variant>

#include <CLI11.hpp>

#include <tsforge/tsforge.hpp>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitIo = 2;

struct SeedOverride {
  bool set = false;
  std::uint64_t value = 0;
};

void apply_seed(tsforge::LoadedConfig& config, const SeedOverride& seed) {
  if (!seed.set) return;
  if (auto* p = std::get_if<tsforge::GenerationParams>(&config)) {
    p->seed = seed.value;
  } else {
    std::get<tsforge::ManualSpec>(config).seed = seed.value;
  }
}

int run_generate(const std::string& config_path, const std::string& out_dir,
                 const SeedOverride& seed, bool plot) {
  tsforge::LoadedConfig config = tsforge::load_config(config_path);
  apply_seed(config, seed);
  const tsforge::GenerationResult result = tsforge::generate_dataset(config);
  const std::filesystem::path manifest =
      tsforge::write_dataset(result, out_dir);
  if (plot) {
    tsforge::emit_plot(result, {},
                       std::filesystem::path(out_dir) / "plot.svg");
  }
  std::printf("%s\n", manifest.string().c_str());
  return kExitOk;
}

// Dry run: everything up to (but not including) the simulation itself, so a
// bad config fails fast even for long requested series.
int run_validate(const std::string& config_path) {
  const tsforge::LoadedConfig config = tsforge::load_config(config_path);
  if (const auto* p = std::get_if<tsforge::GenerationParams>(&config)) {
    tsforge::Rng rng(p->seed);
    tsforge::Rng graph_rng = rng.substream(tsforge::substream::kGraph);
    const tsforge::DependencyGraph graph = tsforge::generate_graph(*p, graph_rng);
    const auto violations = tsforge::validate_graph(graph, *p);
    if (!violations.empty()) {
      throw tsforge::InfeasibleParams(violations.front().detail);
    }
    tsforge::Rng plan_rng = rng.substream(tsforge::substream::kAnomalyPlan);
    tsforge::plan_anomalies(*p, plan_rng);
    std::printf("OK: automatic mode, d=%d, %d communities, %zu edges\n", p->d,
                graph.num_communities, graph.edges.size());
  } else {
    const auto& spec = std::get<tsforge::ManualSpec>(config);
    const tsforge::SystemSpec sys = tsforge::resolve_manual(spec);
    std::printf("OK: manual mode, d=%d, %zu edges, %zu anomalies\n",
                sys.graph.d, sys.graph.edges.size(), sys.anomalies.size());
  }
  return kExitOk;
}

int run_inspect(const std::string& manifest_path) {
  const tsforge::json manifest = tsforge::load_manifest(manifest_path);
  std::fputs(tsforge::render_inspect(manifest).c_str(), stdout);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"configurable multivariate time-series generator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string manifest_path;
  SeedOverride seed;
  bool plot = false;

  CLI::App* generate =
      app.add_subcommand("generate", "generate a dataset from a config");
  generate->add_option("--config", config_path, "config file (JSON)")
      ->required();
  generate->add_option("--out", out_dir, "output directory")->required();
  generate
      ->add_option_function<std::uint64_t>(
          "--seed",
          [&seed](std::uint64_t v) {
            seed.set = true;
            seed.value = v;
          },
          "override the config seed")
      ->check(CLI::NonNegativeNumber);
  generate->add_flag("--plot", plot, "also write plot.svg");

  CLI::App* validate =
      app.add_subcommand("validate", "check a config without generating");
  validate->add_option("--config", config_path, "config file (JSON)")
      ->required();

  CLI::App* inspect =
      app.add_subcommand("inspect", "summarize a written dataset manifest");
  inspect->add_option("--manifest", manifest_path, "metadata.json path")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (generate->parsed()) {
      return run_generate(config_path, out_dir, seed, plot);
    }
    if (validate->parsed()) return run_validate(config_path);
    return run_inspect(manifest_path);
  } catch (const tsforge::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const tsforge::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvalid;
  }
}
