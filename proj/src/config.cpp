#include "ltssl/config.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ltssl/errors.hpp"
#include "ltssl/evaluate.hpp"

namespace ltssl {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> int_list(const std::string& key, const std::string& s) {
  std::vector<int> out;
  for (const auto& item : split_list(s)) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw std::invalid_argument(key + ": '" + item + "' is not an integer");
    }
  }
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  try {
    return std::stoi(v);
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": '" + v + "' is not an integer");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": '" + v + "' is not an unsigned integer");
  }
}

double to_f64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": '" + v + "' is not a number");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument(key + ": '" + v + "' is not a boolean (true|false)");
}

std::string join_int_list(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

std::string join_str_list(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += v[i];
  }
  return s;
}

void apply_key(ExperimentConfig& cfg, const std::string& section, const std::string& key,
               const std::string& value) {
  const std::string full = "[" + section + "] " + key;
  if (section == "dataset") {
    auto& d = cfg.dataset;
    if (key == "num_classes") d.num_classes = to_int(full, value);
    else if (key == "feature_dim") d.feature_dim = to_int(full, value);
    else if (key == "n1") d.n1 = to_int(full, value);
    else if (key == "m_anchor") d.m_anchor = to_int(full, value);
    else if (key == "gamma_l") d.gamma_l = to_f64(full, value);
    else if (key == "unlabeled_regime") d.unlabeled_regime = regime_from_string(value);
    else if (key == "blob_spread") d.blob_spread = to_f64(full, value);
    else if (key == "seed") d.seed = to_u64(full, value);
    else if (key == "weak_noise_sigma") d.augment.weak_noise_sigma = to_f64(full, value);
    else if (key == "strong_noise_sigma") d.augment.strong_noise_sigma = to_f64(full, value);
    else if (key == "strong_mask_fraction") d.augment.strong_mask_fraction = to_f64(full, value);
    else throw std::invalid_argument("unknown key " + full);
  } else if (section == "model") {
    auto& m = cfg.model;
    if (key == "layer_widths") m.encoder.layer_widths = int_list(full, value);
    else if (key == "tap_indices") {
      const auto taps = int_list(full, value);
      if (taps.size() != 3) throw std::invalid_argument(full + ": need exactly 3 indices");
      m.encoder.tap_indices = {taps[0], taps[1], taps[2]};
    } else if (key == "mff_strategy") m.mff.strategy = mff_strategy_from_string(value);
    else if (key == "fused_dim") m.mff.fused_dim = to_int(full, value);
    else if (key == "dea_hidden_widths") m.dea.hidden_widths = int_list(full, value);
    else if (key == "dea_detach_logits") m.dea.detach_logits = to_bool(full, value);
    else throw std::invalid_argument("unknown key " + full);
  } else if (section == "train") {
    auto& t = cfg.train;
    if (key == "epochs") t.epochs = to_int(full, value);
    else if (key == "warmup_epochs") t.warmup_epochs = to_int(full, value);
    else if (key == "batch_labeled") t.batch_labeled = to_int(full, value);
    else if (key == "batch_unlabeled") t.batch_unlabeled = to_int(full, value);
    else if (key == "threshold") t.threshold = to_f64(full, value);
    else if (key == "tau") {
      const auto parts = split_list(value);
      if (parts.size() != 3) throw std::invalid_argument(full + ": need exactly 3 values");
      for (int i = 0; i < 3; ++i)
        t.tau[static_cast<std::size_t>(i)] = to_f64(full, parts[static_cast<std::size_t>(i)]);
    } else if (key == "seed") t.seed = to_u64(full, value);
    else if (key == "eval_every") t.eval_every = to_int(full, value);
    else if (key == "checkpoint_every") t.checkpoint_every = to_int(full, value);
    else if (key == "learning_rate") t.learning_rate = to_f64(full, value);
    else if (key == "momentum") t.momentum = to_f64(full, value);
    else if (key == "weight_decay") t.weight_decay = to_f64(full, value);
    else throw std::invalid_argument("unknown key " + full);
  } else if (section == "eval") {
    auto& e = cfg.eval;
    if (key == "policies") e.policies = split_list(value);
    else if (key == "test_per_class") e.test_per_class = to_int(full, value);
    else if (key == "probe") e.probe = to_bool(full, value);
    else if (key == "probe_seed") e.probe_seed = to_u64(full, value);
    else if (key == "cpe_mean_softmax") e.cpe_mean_softmax = to_bool(full, value);
    else if (key == "oracle") e.oracle = to_bool(full, value);
    else if (key == "head") e.head = int_list(full, value);
    else if (key == "medium") e.medium = int_list(full, value);
    else if (key == "tail") e.tail = int_list(full, value);
    else throw std::invalid_argument("unknown key " + full);
  } else if (section == "output") {
    if (key == "dir") cfg.output_dir = value;
    else throw std::invalid_argument("unknown key " + full);
  } else {
    throw std::invalid_argument("unknown section [" + section + "]");
  }
}

}  // namespace

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

ExperimentConfig ExperimentConfig::parse_string(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": key outside any section");
    apply_key(cfg, section, key, value);
  }
  cfg.model.input_dim = cfg.dataset.feature_dim;
  cfg.model.num_classes = cfg.dataset.num_classes;
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

void ExperimentConfig::validate() const {
  dataset.validate();
  model.validate();
  train.validate();
  if (eval.test_per_class < 1) throw std::invalid_argument("test_per_class: must be >= 1");
  for (const auto& p : eval.policies) PolicyKind::parse(p);
  const bool any = !eval.head.empty() || !eval.medium.empty() || !eval.tail.empty();
  const bool all = !eval.head.empty() && !eval.medium.empty() && !eval.tail.empty();
  if (any && !all)
    throw std::invalid_argument("eval partition: head, medium, and tail must be set together");
  partition().validate(dataset.num_classes);
}

IntervalPartition ExperimentConfig::partition() const {
  if (!eval.head.empty() && !eval.medium.empty() && !eval.tail.empty()) {
    IntervalPartition p;
    p.head = eval.head;
    p.medium = eval.medium;
    p.tail = eval.tail;
    return p;
  }
  return IntervalPartition::default_for(dataset.num_classes);
}

std::string ExperimentConfig::serialize() const {
  std::string s;
  s += "[dataset]\n";
  s += "num_classes = " + std::to_string(dataset.num_classes) + "\n";
  s += "feature_dim = " + std::to_string(dataset.feature_dim) + "\n";
  s += "n1 = " + std::to_string(dataset.n1) + "\n";
  s += "m_anchor = " + std::to_string(dataset.m_anchor) + "\n";
  s += "gamma_l = " + fmt_f64(dataset.gamma_l) + "\n";
  s += "unlabeled_regime = " + to_string(dataset.unlabeled_regime) + "\n";
  s += "blob_spread = " + fmt_f64(dataset.blob_spread) + "\n";
  s += "seed = " + std::to_string(dataset.seed) + "\n";
  s += "weak_noise_sigma = " + fmt_f64(dataset.augment.weak_noise_sigma) + "\n";
  s += "strong_noise_sigma = " + fmt_f64(dataset.augment.strong_noise_sigma) + "\n";
  s += "strong_mask_fraction = " + fmt_f64(dataset.augment.strong_mask_fraction) + "\n";
  s += "\n[model]\n";
  s += "layer_widths = " + join_int_list(model.encoder.layer_widths) + "\n";
  s += "tap_indices = " + join_int_list({model.encoder.tap_indices[0], model.encoder.tap_indices[1],
                                         model.encoder.tap_indices[2]}) + "\n";
  s += "mff_strategy = " + to_string(model.mff.strategy) + "\n";
  s += "fused_dim = " + std::to_string(model.mff.fused_dim) + "\n";
  s += "dea_hidden_widths = " + join_int_list(model.dea.hidden_widths) + "\n";
  s += std::string("dea_detach_logits = ") + (model.dea.detach_logits ? "true" : "false") + "\n";
  s += "\n[train]\n";
  s += "epochs = " + std::to_string(train.epochs) + "\n";
  s += "warmup_epochs = " + std::to_string(train.warmup_epochs) + "\n";
  s += "batch_labeled = " + std::to_string(train.batch_labeled) + "\n";
  s += "batch_unlabeled = " + std::to_string(train.batch_unlabeled) + "\n";
  s += "threshold = " + fmt_f64(train.threshold) + "\n";
  s += "tau = " + fmt_f64(train.tau[0]) + "," + fmt_f64(train.tau[1]) + "," +
       fmt_f64(train.tau[2]) + "\n";
  s += "seed = " + std::to_string(train.seed) + "\n";
  s += "eval_every = " + std::to_string(train.eval_every) + "\n";
  s += "checkpoint_every = " + std::to_string(train.checkpoint_every) + "\n";
  s += "learning_rate = " + fmt_f64(train.learning_rate) + "\n";
  s += "momentum = " + fmt_f64(train.momentum) + "\n";
  s += "weight_decay = " + fmt_f64(train.weight_decay) + "\n";
  s += "\n[eval]\n";
  s += "policies = " + join_str_list(eval.policies) + "\n";
  s += "test_per_class = " + std::to_string(eval.test_per_class) + "\n";
  s += std::string("probe = ") + (eval.probe ? "true" : "false") + "\n";
  s += "probe_seed = " + std::to_string(eval.probe_seed) + "\n";
  s += std::string("cpe_mean_softmax = ") + (eval.cpe_mean_softmax ? "true" : "false") + "\n";
  s += std::string("oracle = ") + (eval.oracle ? "true" : "false") + "\n";
  const auto p = partition();
  s += "head = " + join_int_list(p.head) + "\n";
  s += "medium = " + join_int_list(p.medium) + "\n";
  s += "tail = " + join_int_list(p.tail) + "\n";
  s += "\n[output]\n";
  s += "dir = " + output_dir + "\n";
  return s;
}

std::string ExperimentConfig::hash() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(serialize())));
  return buf;
}

void RunManifest::save(const std::string& path) const {
  for (const auto& [name, p] : artifacts)
    if (!std::filesystem::exists(p))
      throw IoError("manifest: artifact '" + name + "' missing at " + p);
  ordered_json j;
  j["tool_version"] = tool_version;
  j["config_hash"] = config_hash;
  j["dataset_seed"] = dataset_seed;
  j["train_seed"] = train_seed;
  j["created_at"] = created_at;
  j["artifacts"] = artifacts;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest: " + path);
  out << j.dump(2) << "\n";
}

RunManifest RunManifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw IoError("malformed manifest " + path + ": " + e.what());
  }
  RunManifest m;
  m.tool_version = j.value("tool_version", "");
  m.config_hash = j.value("config_hash", "");
  m.dataset_seed = j.value("dataset_seed", 0ULL);
  m.train_seed = j.value("train_seed", 0ULL);
  m.created_at = j.value("created_at", "");
  if (j.contains("artifacts"))
    for (const auto& [k, v] : j["artifacts"].items()) m.artifacts[k] = v.get<std::string>();
  return m;
}

}  // namespace ltssl
