#ifndef LTSSL_CONFIG_HPP
#define LTSSL_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ltssl/dataset.hpp"
#include "ltssl/model.hpp"
#include "ltssl/train.hpp"

namespace ltssl {

inline constexpr const char* kToolVersion = "ltssl 0.1.0";

struct EvalConfig {
  std::vector<std::string> policies{"expert1", "expert2", "expert3", "cpe", "dea"};
  int test_per_class = 100;
  bool probe = true;
  std::uint64_t probe_seed = 0;
  bool cpe_mean_softmax = false;
  // upper_e reads ground-truth memberships; it must be switched on explicitly.
  bool oracle = false;
  // Optional partition override; all three or none.
  std::vector<int> head, medium, tail;
};

// One experiment: dataset, model, training, and evaluation settings plus the
// output directory. Files use a flat INI-style grammar ('[section]' headers,
// 'key = value' lines, '#' comments); sections mirror the module names and
// unknown sections or keys are rejected. Model input width and class count
// are derived from the dataset section.
struct ExperimentConfig {
  DatasetSpec dataset;
  ModelConfig model;
  TrainConfig train;
  EvalConfig eval;
  std::string output_dir = "runs/default";

  static ExperimentConfig parse_file(const std::string& path);
  static ExperimentConfig parse_string(const std::string& text);

  // Canonical resolved form: every key, fixed order, exact float formatting.
  // parse(serialize()) reproduces the config; serialize() is the hash input.
  std::string serialize() const;
  std::string hash() const;  // FNV-1a 64 of serialize(), hex

  IntervalPartition partition() const;  // eval override or the default for C
  void validate() const;
};

// Record of one command's outputs. Timestamps live here and nowhere else.
struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string config_hash;
  std::uint64_t dataset_seed = 0;
  std::uint64_t train_seed = 0;
  std::string created_at;
  std::map<std::string, std::string> artifacts;  // name -> path

  // Refuses to write if a referenced artifact does not exist.
  void save(const std::string& path) const;
  static RunManifest load(const std::string& path);
};

std::uint64_t fnv1a64(const std::string& text);

}  // namespace ltssl

#endif
