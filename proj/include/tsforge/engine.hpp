#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "tsforge/anomaly.hpp"
#include "tsforge/expr.hpp"
#include "tsforge/funcgen.hpp"
#include "tsforge/graph.hpp"
#include "tsforge/params.hpp"
#include "tsforge/rng.hpp"

namespace tsforge {

// Fixed substream ids: every stage of a run draws from its own stream, so a
// change in one stage never shifts the randomness of another.
namespace substream {
inline constexpr std::uint64_t kGraph = 1;
inline constexpr std::uint64_t kFunctions = 2;   // then .substream(variable)
inline constexpr std::uint64_t kAnomalyPlan = 3;
inline constexpr std::uint64_t kPropagation = 4;
inline constexpr std::uint64_t kMutation = 5;    // then .substream(anomaly)
inline constexpr std::uint64_t kNoise = 6;       // then .substream(column)
}  // namespace substream

struct SeriesMatrix {
  std::int64_t rows = 0;
  int d = 0;
  std::vector<double> values;

  SeriesMatrix() = default;
  SeriesMatrix(std::int64_t rows_, int d_)
      : rows(rows_), d(d_),
        values(static_cast<std::size_t>(rows_) * static_cast<std::size_t>(d_),
               0.0) {}

  double at(std::int64_t row, int col) const {
    return values[static_cast<std::size_t>(row) *
                      static_cast<std::size_t>(d) +
                  static_cast<std::size_t>(col)];
  }
  double& at(std::int64_t row, int col) {
    return values[static_cast<std::size_t>(row) *
                      static_cast<std::size_t>(d) +
                  static_cast<std::size_t>(col)];
  }
};

struct LabelMatrix {
  std::int64_t rows = 0;
  int d = 0;
  std::vector<std::uint8_t> values;

  LabelMatrix() = default;
  LabelMatrix(std::int64_t rows_, int d_)
      : rows(rows_), d(d_),
        values(static_cast<std::size_t>(rows_) * static_cast<std::size_t>(d_),
               0) {}

  std::uint8_t at(std::int64_t row, int col) const {
    return values[static_cast<std::size_t>(row) *
                      static_cast<std::size_t>(d) +
                  static_cast<std::size_t>(col)];
  }
  std::uint8_t& at(std::int64_t row, int col) {
    return values[static_cast<std::size_t>(row) *
                      static_cast<std::size_t>(d) +
                  static_cast<std::size_t>(col)];
  }
};

// Reads one value matrix whose row r holds timestep t = r; timesteps before
// 0 return the warm-up default.
class MatrixReader : public VarReader {
 public:
  explicit MatrixReader(const SeriesMatrix& m) : m_(&m) {}
  double at(int var, std::int64_t t) const override {
    if (t < 0 || t >= m_->rows) return 0.0;
    return m_->at(t, var);
  }

 private:
  const SeriesMatrix* m_;
};

// Read access for evaluating variable `child` on the contaminated track: a
// parent's contaminated value is visible only along a propagating edge, and
// a variable always sees its own contaminated past.
class TrackReader : public VarReader {
 public:
  TrackReader(const SeriesMatrix& clean, const SeriesMatrix& contaminated,
              std::vector<char> reads_contaminated)
      : clean_(&clean), contaminated_(&contaminated),
        reads_contaminated_(std::move(reads_contaminated)) {}

  double at(int var, std::int64_t t) const override {
    if (t < 0 || t >= clean_->rows) return 0.0;
    const SeriesMatrix* m =
        reads_contaminated_[static_cast<std::size_t>(var)] ? contaminated_
                                                           : clean_;
    return m->at(t, var);
  }

 private:
  const SeriesMatrix* clean_;
  const SeriesMatrix* contaminated_;
  std::vector<char> reads_contaminated_;
};

// A fully resolved system, ready to simulate: the same structure drives both
// automatic runs (where it is sampled) and manual runs (where it comes from
// the config).
struct SystemSpec {
  DependencyGraph graph;
  std::vector<ExprPtr> equations;
  std::vector<AnomalySpec> anomalies;
  PropagationMap propagation;
  std::int64_t train_length = 0;
  std::int64_t test_length = 0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct GenerationResult {
  SystemSpec system;
  bool manual = false;
  GenerationParams params;  // echo; meaningful for automatic runs
  std::int64_t warmup = 0;  // max lag any equation requires

  SeriesMatrix train;           // delivered train segment (noise applied)
  SeriesMatrix test;            // delivered test segment (noise applied)
  SeriesMatrix clean_test;      // nominal test values, noise-free
  SeriesMatrix test_pre_noise;  // contaminated test values, noise-free
  LabelMatrix labels;           // rich labels over the test segment

  LabelMatrix binary_labels() const {
    LabelMatrix out(labels.rows, labels.d);
    for (std::size_t i = 0; i < labels.values.size(); ++i) {
      out.values[i] =
          (labels.values[i] == 1 || labels.values[i] == 3) ? 1 : 0;
    }
    return out;
  }
};

// ----------------------------------------------------------------------------
// Core evaluation passes
// ----------------------------------------------------------------------------

namespace detail {

// Clean pass over [0, length): every variable from its nominal function, all
// reads on the single clean track.
inline SeriesMatrix evaluate_clean(const std::vector<ExprPtr>& equations,
                                   std::int64_t length) {
  const int d = static_cast<int>(equations.size());
  SeriesMatrix m(length, d);
  const MatrixReader reader(m);
  for (std::int64_t t = 0; t < length; ++t) {
    const EvalContext ctx{t, &reader};
    for (int j = 0; j < d; ++j) {
      m.at(t, j) = evaluate(*equations[static_cast<std::size_t>(j)], ctx);
    }
  }
  return m;
}

// Contaminated pass: starts as a copy of the clean track and recomputes the
// test segment, switching each variable to its mutated function inside its
// anomaly windows and resolving parent reads per edge propagation.
inline SeriesMatrix evaluate_contaminated(const SystemSpec& spec,
                                          const SeriesMatrix& clean) {
  const int d = spec.graph.d;
  SeriesMatrix contaminated = clean;

  // (variable, timestep) -> active mutated function, if any.
  std::vector<std::vector<const AnomalySpec*>> by_var(
      static_cast<std::size_t>(d));
  for (const AnomalySpec& a : spec.anomalies) {
    by_var[static_cast<std::size_t>(a.var)].push_back(&a);
  }

  std::vector<TrackReader> readers;
  readers.reserve(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    std::vector<char> reads_contaminated(static_cast<std::size_t>(d), 0);
    reads_contaminated[static_cast<std::size_t>(j)] = 1;
    for (const auto& [edge, propagates] : spec.propagation) {
      if (edge.second == j && propagates) {
        reads_contaminated[static_cast<std::size_t>(edge.first)] = 1;
      }
    }
    readers.emplace_back(clean, contaminated, std::move(reads_contaminated));
  }

  const std::int64_t end = spec.train_length + spec.test_length;
  for (std::int64_t t = spec.train_length; t < end; ++t) {
    for (int j = 0; j < d; ++j) {
      const ExprNode* f = spec.equations[static_cast<std::size_t>(j)].get();
      for (const AnomalySpec* a : by_var[static_cast<std::size_t>(j)]) {
        if (t >= a->t_start && t < a->t_end) {
          f = a->mutated.get();
          break;
        }
      }
      const EvalContext ctx{t, &readers[static_cast<std::size_t>(j)]};
      contaminated.at(t, j) = evaluate(*f, ctx);
    }
  }
  return contaminated;
}

}  // namespace detail

// ----------------------------------------------------------------------------
// Labels
// ----------------------------------------------------------------------------

// Rich labels over the test segment, derived from the anomaly schedule and
// the dependency structure alone:
//   1  the variable's own window is active;
//   3  a lag-referenced parent value was corrupted and flows in through a
//      propagating edge;
//   2  as 3 but the edge does not propagate, so the data stays clean;
//   0  otherwise. Precedence 1 > 3 > 2.
inline LabelMatrix compute_labels(const DependencyGraph& graph,
                                  const std::vector<ExprPtr>& equations,
                                  const std::vector<AnomalySpec>& anomalies,
                                  const PropagationMap& propagation,
                                  std::int64_t train_length,
                                  std::int64_t test_length) {
  const int d = graph.d;
  LabelMatrix labels(test_length, d);

  for (const AnomalySpec& a : anomalies) {
    for (std::int64_t t = a.t_start; t < a.t_end; ++t) {
      labels.at(t - train_length, a.var) = 1;
    }
  }

  // Per variable: the lags its function reads from each parent, and whether
  // that parent's edge propagates.
  struct ParentLags {
    int parent;
    bool propagates;
    std::vector<int> lags;
  };
  std::vector<std::vector<ParentLags>> feeds(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    const auto reads = lag_reads(*equations[static_cast<std::size_t>(j)]);
    for (const auto& [parent, lags] : reads) {
      const auto it = propagation.find({parent, j});
      const bool propagates = it != propagation.end() && it->second;
      feeds[static_cast<std::size_t>(j)].push_back(
          {parent, propagates, lags});
    }
  }

  for (std::int64_t t = train_length; t < train_length + test_length; ++t) {
    for (int j = 0; j < d; ++j) {
      if (labels.at(t - train_length, j) == 1) continue;
      bool propagated_hit = false;
      bool blocked_hit = false;
      for (const ParentLags& pl : feeds[static_cast<std::size_t>(j)]) {
        for (int k : pl.lags) {
          const std::int64_t tr = t - k;
          if (tr < train_length) continue;
          const std::uint8_t lb = labels.at(tr - train_length, pl.parent);
          if (lb == 1 || lb == 3) {
            (pl.propagates ? propagated_hit : blocked_hit) = true;
            break;
          }
        }
        if (propagated_hit) break;
      }
      if (propagated_hit) {
        labels.at(t - train_length, j) = 3;
      } else if (blocked_hit) {
        labels.at(t - train_length, j) = 2;
      }
    }
  }
  return labels;
}

// ----------------------------------------------------------------------------
// Noise
// ----------------------------------------------------------------------------

// Adds Gaussian measurement noise to the delivered train/test values, scaled
// per column by noise_sigma times the train-segment standard deviation.
// Labels and the noise-free reference tracks stay untouched; sigma 0 is a
// strict no-op. `rng` is the dedicated noise stream; each column derives its
// own substream from it.
inline void add_noise(GenerationResult& result, Rng rng) {
  const double sigma = result.system.noise_sigma;
  if (sigma == 0.0) return;
  const int d = result.train.d;
  for (int j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::int64_t t = 0; t < result.train.rows; ++t) {
      mean += result.train.at(t, j);
    }
    mean /= static_cast<double>(result.train.rows);
    double var = 0.0;
    for (std::int64_t t = 0; t < result.train.rows; ++t) {
      const double dev = result.train.at(t, j) - mean;
      var += dev * dev;
    }
    var /= static_cast<double>(result.train.rows);
    const double scale = sigma * std::sqrt(var);
    if (scale == 0.0) continue;

    Rng col = rng.substream(static_cast<std::uint64_t>(j));
    for (std::int64_t t = 0; t < result.train.rows; ++t) {
      result.train.at(t, j) += col.normal(0.0, scale);
    }
    for (std::int64_t t = 0; t < result.test.rows; ++t) {
      result.test.at(t, j) += col.normal(0.0, scale);
    }
  }
}

// ----------------------------------------------------------------------------
// Run pipeline
// ----------------------------------------------------------------------------

namespace detail {

inline SeriesMatrix slice(const SeriesMatrix& m, std::int64_t from,
                          std::int64_t count) {
  SeriesMatrix out(count, m.d);
  std::copy_n(m.values.begin() + static_cast<std::ptrdiff_t>(from * m.d),
              static_cast<std::size_t>(count) * static_cast<std::size_t>(m.d),
              out.values.begin());
  return out;
}

inline GenerationResult finish_run(SystemSpec spec, SeriesMatrix clean_full) {
  GenerationResult result;
  result.warmup = max_required_lag(spec.equations);

  SeriesMatrix contaminated = evaluate_contaminated(spec, clean_full);
  result.labels =
      compute_labels(spec.graph, spec.equations, spec.anomalies,
                     spec.propagation, spec.train_length, spec.test_length);

  result.train = slice(clean_full, 0, spec.train_length);
  result.clean_test = slice(clean_full, spec.train_length, spec.test_length);
  result.test_pre_noise =
      slice(contaminated, spec.train_length, spec.test_length);
  result.test = result.test_pre_noise;

  const Rng noise_rng = Rng(spec.seed).substream(substream::kNoise);
  result.system = std::move(spec);
  add_noise(result, noise_rng);
  return result;
}

}  // namespace detail

// Simulates a fully resolved system: clean track, contaminated track, labels,
// then delivery noise.
inline GenerationResult run_system(SystemSpec spec) {
  SeriesMatrix clean_full = detail::evaluate_clean(
      spec.equations, spec.train_length + spec.test_length);
  return detail::finish_run(std::move(spec), std::move(clean_full));
}

// The automatic pipeline: sample a graph, a function per variable, an
// anomaly schedule, per-edge propagation, and effect-validated mutations,
// then simulate.
inline GenerationResult generate_dataset(const GenerationParams& params) {
  validate_params(params);
  const Rng master(params.seed);

  Rng graph_rng = master.substream(substream::kGraph);
  DependencyGraph graph = generate_graph(params, graph_rng);

  std::vector<ExprPtr> equations;
  equations.reserve(static_cast<std::size_t>(params.d));
  const Rng func_rng = master.substream(substream::kFunctions);
  for (int j = 0; j < params.d; ++j) {
    Rng var_rng = func_rng.substream(static_cast<std::uint64_t>(j));
    const auto parents = graph.parents_of(j);
    equations.push_back(
        generate_function(parents, parents.empty(), params, var_rng));
  }

  Rng plan_rng = master.substream(substream::kAnomalyPlan);
  const std::vector<PlannedWindow> windows = plan_anomalies(params, plan_rng);

  Rng prop_rng = master.substream(substream::kPropagation);
  PropagationMap propagation =
      assign_propagation(graph, params.propagation_prob, prop_rng);
  apply_propagation(graph, propagation);

  SeriesMatrix clean_full = detail::evaluate_clean(
      equations, params.train_length + params.test_length);

  std::vector<AnomalySpec> anomalies;
  anomalies.reserve(windows.size());
  const MatrixReader clean_reader(clean_full);
  const Rng mut_rng = master.substream(substream::kMutation);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const PlannedWindow& w = windows[i];
    std::vector<int> vars = graph.parents_of(w.var);
    if (!std::binary_search(vars.begin(), vars.end(), w.var)) {
      vars.insert(std::lower_bound(vars.begin(), vars.end(), w.var), w.var);
    }
    Rng wrng = mut_rng.substream(i);
    ContaminationOutcome outcome =
        contaminate(equations[static_cast<std::size_t>(w.var)], vars, w,
                    clean_reader, params, wrng);
    anomalies.push_back({w.var, w.t_start, w.t_end, outcome.strategy,
                         std::move(outcome.mutated)});
  }

  SystemSpec spec{std::move(graph),         std::move(equations),
                  std::move(anomalies),     std::move(propagation),
                  params.train_length,      params.test_length,
                  params.noise_sigma,       params.seed};
  GenerationResult result =
      detail::finish_run(std::move(spec), std::move(clean_full));
  result.params = params;
  return result;
}

// ----------------------------------------------------------------------------
// Standalone views of the engine stages
// ----------------------------------------------------------------------------

// Clean values over [0, length): warm-up is implicit (reads before t = 0 see
// the zero-initialized regime) and never part of the output.
inline SeriesMatrix compute_values(const std::vector<ExprPtr>& equations,
                                   std::int64_t length) {
  return detail::evaluate_clean(equations, length);
}

// Clean and contaminated test-segment tracks, noise-free.
inline std::pair<SeriesMatrix, SeriesMatrix> compute_anomalies(
    const DependencyGraph& graph, const std::vector<ExprPtr>& equations,
    const std::vector<AnomalySpec>& anomalies,
    const PropagationMap& propagation, std::int64_t train_length,
    std::int64_t test_length) {
  SystemSpec spec{graph,        equations,  anomalies, propagation,
                  train_length, test_length, 0.0,      0};
  SeriesMatrix clean_full =
      detail::evaluate_clean(equations, train_length + test_length);
  SeriesMatrix contaminated = detail::evaluate_contaminated(spec, clean_full);
  return {detail::slice(clean_full, train_length, test_length),
          detail::slice(contaminated, train_length, test_length)};
}

}  // namespace tsforge
