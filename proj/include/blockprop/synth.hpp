#pragma once

#include "blockprop/events.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace blockprop {

struct ScenarioConfig {
  std::size_t n_users = 5000;  // qualifying users (≥10 English posts)
  double background_ratio = 0.5;  // low-activity users per qualifying user
  double foreign_ratio = 0.05;    // non-English users with ≥10 posts
  std::string start = "2024-03-01T00:00:00Z";
  int days = 30;
  double activity_exponent = 1.5;  // Pareto tail index of per-user activity
  double activity_cap = 200;
  double activity_coupling = 1.0;   // log block rate per unit of planted activity score
  double toxicity_coupling = 0.0;   // log block rate per std of mean toxicity
  double extreme_fraction = 0.02;
  double extreme_boost = 2.5;       // log multiplier on planted rates of extreme users
  double block_base = 8;            // expected blocks at zero scores
  double dispersion = 5;            // negative-binomial shape
  std::optional<double> target_r2;  // overrides dispersion so the Bayes R² of the normalized target matches
  std::uint64_t seed = 1;
};

/// Throws ConfigError for invalid or infeasible settings.
void validate(const ScenarioConfig& config);

struct GroundTruth {
  std::vector<std::string> roster;                 // qualifying users, sorted
  std::map<std::string, std::uint64_t> blocks;     // block creates received, qualifying users
  std::map<std::string, double> expected_blocks;   // negative-binomial mean
  std::map<std::string, std::uint64_t> posts;      // created posts and replies
  std::vector<std::string> planted_features;
  std::map<std::string, std::string> signal;       // feature group -> planted | redundant | noise
  std::vector<std::string> extreme_users;
  double dispersion = 0;
  double bayes_r2_norm = 0;
  double bayes_r2_raw = 0;
};

struct SynthCorpus {
  std::string ndjson;
  GroundTruth truth;
  std::string mbfc_tsv;
  std::string quality_tsv;
};

SynthCorpus generate(const ScenarioConfig& config);

std::string ground_truth_json(const GroundTruth& truth, const ScenarioConfig& config);

/// Writes replay.ndjson, ground_truth.json, mbfc.tsv and quality.tsv.
void write_corpus(const SynthCorpus& corpus, const ScenarioConfig& config, const std::string& dir);

/// Bayes R² of y given its conditional mean m (NB with shape k), for y/scale.
double bayes_r2(const std::vector<double>& mean, const std::vector<double>& scale, double dispersion);

}  // namespace blockprop
