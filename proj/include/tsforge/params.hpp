#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "tsforge/errors.hpp"

namespace tsforge {

// Knobs for automatic dataset generation. Field names match the JSON config
// keys one to one.
struct GenerationParams {
  int d = 5;
  int num_communities = 1;
  int max_indegree = 4;

  int max_lag = 5;
  int n_const = 2;
  bool enable_window_agg = false;

  bool link_communities = false;
  int nb_links = 1;

  std::int64_t train_length = 200;
  std::int64_t test_length = 400;

  double contamination_ratio = 0.05;
  // 0 derives the window count from the total anomalous step budget.
  int num_anomalies = 0;
  double propagation_prob = 0.5;

  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

inline void validate_params(const GenerationParams& p) {
  auto reject = [](const char* field, const std::string& reason) {
    throw ConfigError(field, reason);
  };

  if (p.d < 1) reject("d", "must be at least 1");
  if (p.num_communities < 1) reject("num_communities", "must be at least 1");
  if (p.num_communities > p.d) {
    reject("num_communities", "must not exceed d");
  }
  if (p.max_indegree < 1) reject("max_indegree", "must be at least 1");
  if (p.max_lag < 1) reject("max_lag", "must be at least 1");
  if (p.n_const < 0) reject("n_const", "must not be negative");
  if (p.nb_links < 0) reject("nb_links", "must not be negative");
  if (p.link_communities && p.nb_links > 0 && p.num_communities < 2) {
    reject("link_communities", "cross links need at least 2 communities");
  }
  if (p.train_length < 1) reject("train_length", "must be at least 1");
  if (p.test_length < 0) reject("test_length", "must not be negative");
  if (!(p.contamination_ratio >= 0.0 && p.contamination_ratio < 1.0)) {
    reject("contamination_ratio", "must lie in [0, 1)");
  }
  if (p.num_anomalies < 0) reject("num_anomalies", "must not be negative");
  if (!(p.propagation_prob >= 0.0 && p.propagation_prob <= 1.0)) {
    reject("propagation_prob", "must lie in [0, 1]");
  }
  if (!(p.noise_sigma >= 0.0) || !std::isfinite(p.noise_sigma)) {
    reject("noise_sigma", "must be a finite value >= 0");
  }
}

}  // namespace tsforge
