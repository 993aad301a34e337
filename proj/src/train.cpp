#include "ltssl/train.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "ltssl/errors.hpp"

namespace ltssl {

namespace {

using ordered_json = nlohmann::ordered_json;

// Substreams of TrainConfig.seed (model init is 4, see model.cpp).
constexpr std::uint64_t kStreamShuffle = 5;
constexpr std::uint64_t kStreamAugment = 6;

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

std::vector<int> split_ints(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

std::vector<std::uint64_t> pack_rng(const Rng& rng) {
  const auto st = rng.state();
  return {st.s[0], st.s[1], st.s[2], st.s[3], st.has_spare ? 1ULL : 0ULL,
          std::bit_cast<std::uint64_t>(st.spare)};
}

void unpack_rng(const std::vector<std::uint64_t>& v, Rng& rng) {
  if (v.size() != 6) throw IoError("checkpoint: malformed rng state");
  Rng::State st;
  st.s = {v[0], v[1], v[2], v[3]};
  st.has_spare = v[4] != 0;
  st.spare = std::bit_cast<double>(v[5]);
  rng.set_state(st);
}

std::string dataset_fingerprint(const DatasetSpec& spec) {
  return std::to_string(spec.num_classes) + "|" + std::to_string(spec.feature_dim) + "|" +
         std::to_string(spec.seed) + "|" + fmt_f64(spec.gamma_l) + "|" +
         to_string(spec.unlabeled_regime) + "|" + std::to_string(spec.n1) + "|" +
         std::to_string(spec.m_anchor) + "|" + fmt_f64(spec.blob_spread);
}

}  // namespace

std::string fmt_f64(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_f64(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("epochs: must be >= 0");
  if (warmup_epochs < 0 || warmup_epochs > epochs)
    throw std::invalid_argument("warmup_epochs: must be in [0, epochs]");
  if (batch_labeled < 1) throw std::invalid_argument("batch_labeled: must be >= 1");
  if (batch_unlabeled < 1) throw std::invalid_argument("batch_unlabeled: must be >= 1");
  if (threshold < 0.0 || threshold > 1.0)
    throw std::invalid_argument("threshold: must be in [0, 1]");
  if (eval_every < 0) throw std::invalid_argument("eval_every: must be >= 0");
  if (checkpoint_every < 0) throw std::invalid_argument("checkpoint_every: must be >= 0");
  if (learning_rate < 0.0) throw std::invalid_argument("learning_rate: must be >= 0");
  if (momentum < 0.0 || momentum >= 1.0) throw std::invalid_argument("momentum: must be in [0, 1)");
  if (weight_decay < 0.0) throw std::invalid_argument("weight_decay: must be >= 0");
}

Trainer::Trainer(TrainConfig cfg, SplitPair data, IntervalPartition partition, Model model)
    : cfg_(std::move(cfg)),
      data_(std::move(data)),
      partition_(std::move(partition)),
      model_(std::move(model)),
      opt_(cfg_.learning_rate, cfg_.momentum, cfg_.weight_decay),
      shuffle_rng_(cfg_.seed, kStreamShuffle),
      augment_rng_(cfg_.seed, kStreamAugment) {
  cfg_.validate();
  partition_.validate(data_.spec.num_classes);
  if (model_.config().input_dim != data_.spec.feature_dim)
    throw std::invalid_argument("trainer: model input_dim " +
                                std::to_string(model_.config().input_dim) +
                                " does not match feature_dim " +
                                std::to_string(data_.spec.feature_dim));
  if (model_.config().num_classes != data_.spec.num_classes)
    throw std::invalid_argument("trainer: model num_classes " +
                                std::to_string(model_.config().num_classes) +
                                " does not match dataset " +
                                std::to_string(data_.spec.num_classes));
}

int Trainer::steps_per_epoch() const {
  const int n = data_.n_labeled();
  return (n + cfg_.batch_labeled - 1) / cfg_.batch_labeled;
}

void Trainer::note_metric(double value) {
  if (state_.best_epoch < 0 || value > state_.best_metric) {
    state_.best_metric = value;
    state_.best_epoch = state_.epoch;
  }
}

void Trainer::begin_epoch() {
  labeled_perm_ = shuffle_rng_.permutation(static_cast<std::uint32_t>(data_.n_labeled()));
  state_.epoch_loss_sum = 0.0;
  state_.epoch_util_sum = 0.0;
}

std::vector<std::uint32_t> Trainer::next_unlabeled_batch() {
  const std::size_t m = static_cast<std::size_t>(data_.m_unlabeled());
  std::vector<std::uint32_t> batch;
  batch.reserve(static_cast<std::size_t>(cfg_.batch_unlabeled));
  while (batch.size() < static_cast<std::size_t>(cfg_.batch_unlabeled)) {
    if (unlabeled_cursor_ >= unlabeled_perm_.size()) {
      unlabeled_perm_ = shuffle_rng_.permutation(static_cast<std::uint32_t>(m));
      unlabeled_cursor_ = 0;
    }
    batch.push_back(unlabeled_perm_[unlabeled_cursor_++]);
  }
  return batch;
}

std::int64_t Trainer::run(std::ostream& metrics, std::int64_t max_steps) {
  std::int64_t executed = 0;
  while (!finished()) {
    if (state_.step_in_epoch == 0) begin_epoch();
    while (state_.step_in_epoch < steps_per_epoch()) {
      if (max_steps >= 0 && executed >= max_steps) return executed;
      step_once(metrics);
      ++executed;
    }
    end_epoch(metrics);
    ++state_.epoch;
    state_.step_in_epoch = 0;
  }
  return executed;
}

void Trainer::step_once(std::ostream& metrics) {
  const int d = data_.spec.feature_dim;
  const auto& policy = data_.spec.augment;
  const bool warmup = state_.epoch < cfg_.warmup_epochs;

  // Labeled batch from the epoch permutation; the final batch may be short.
  const int bl_start = state_.step_in_epoch * cfg_.batch_labeled;
  const int bl = std::min(cfg_.batch_labeled, data_.n_labeled() - bl_start);
  std::vector<double> xl;
  xl.reserve(static_cast<std::size_t>(bl) * d);
  std::vector<int> y(static_cast<std::size_t>(bl));
  for (int i = 0; i < bl; ++i) {
    const std::uint32_t idx = labeled_perm_[static_cast<std::size_t>(bl_start + i)];
    const auto v = augment(data_.labeled_x.data() + static_cast<std::size_t>(idx) * d, d, policy,
                           AugmentStrength::weak, augment_rng_);
    xl.insert(xl.end(), v.begin(), v.end());
    y[static_cast<std::size_t>(i)] = data_.labeled_y[idx];
  }

  const auto u_idx = next_unlabeled_batch();
  const int bu = static_cast<int>(u_idx.size());
  std::vector<double> xuw, xus;
  xuw.reserve(static_cast<std::size_t>(bu) * d);
  xus.reserve(static_cast<std::size_t>(bu) * d);
  for (const std::uint32_t idx : u_idx) {
    const auto v = augment(data_.unlabeled_x.data() + static_cast<std::size_t>(idx) * d, d, policy,
                           AugmentStrength::weak, augment_rng_);
    xuw.insert(xuw.end(), v.begin(), v.end());
  }
  for (const std::uint32_t idx : u_idx) {
    const auto v = augment(data_.unlabeled_x.data() + static_cast<std::size_t>(idx) * d, d, policy,
                           AugmentStrength::strong, augment_rng_);
    xus.insert(xus.end(), v.begin(), v.end());
  }

  const Tensor xl_weak = Tensor::from({bl, d}, std::move(xl));
  const Tensor xu_weak = Tensor::from({bu, d}, std::move(xuw));
  const Tensor xu_strong = Tensor::from({bu, d}, std::move(xus));

  Tape tape;
  const auto fl = model_.forward(tape, xl_weak, !warmup);

  // Pseudo-labels come from the weak view with no recording.
  Tape lookahead;
  lookahead.set_recording(false);
  const auto fu_w = model_.forward(lookahead, xu_weak, !warmup);
  std::array<PseudoLabelBatch, 3> expert_pl;
  for (int k = 0; k < 3; ++k)
    expert_pl[static_cast<std::size_t>(k)] = make_pseudo_labels(
        softmax(lookahead, fu_w.z[static_cast<std::size_t>(k)]), cfg_.threshold, k);

  const auto fu_s = model_.forward(tape, xu_strong, !warmup);

  BaseLossInputs base_in;
  base_in.z_labeled_weak = fl.z;
  base_in.y = y;
  base_in.z_unlabeled_strong = fu_s.z;
  base_in.expert_pseudo = expert_pl;
  base_in.pi = data_.pi;
  base_in.tau = cfg_.tau;
  const LossTerm base = base_loss(tape, base_in);

  LossTerm dea, meta;
  PseudoLabelBatch agg_pl;
  OverallLoss overall;
  if (!warmup) {
    agg_pl = make_pseudo_labels(fu_w.y_m, cfg_.threshold, kAggregatorLabeler);
    const MembershipTargets targets = make_membership_targets(y, agg_pl.y_hat, partition_);
    dea = dea_loss(tape, fl.w, targets.labeled, fu_s.w, targets.unlabeled, agg_pl.mask);
    meta = meta_loss(tape, fl.y_m, y, fu_s.y_m, agg_pl.y_hat, agg_pl.mask);
    overall = overall_loss(tape, base, &dea, &meta, false);
  } else {
    overall = overall_loss(tape, base, nullptr, nullptr, true);
  }

  LossReport& report = overall.report;
  if (warmup) {
    double rate = 0.0;
    for (const auto& pl : expert_pl)
      rate += static_cast<double>(pl.masked_in()) / static_cast<double>(bu);
    report.utilization = rate / 3.0;
  } else {
    report.utilization = static_cast<double>(agg_pl.masked_in()) / static_cast<double>(bu);
  }

  const double l_base_checked =
      state_.global_step == poison_step ? std::nan("") : report.l_base;
  const struct { const char* name; double v; } checks[] = {
      {"l_base", l_base_checked}, {"l_dea", report.l_dea}, {"l_meta", report.l_meta}};
  for (const auto& c : checks)
    if (!std::isfinite(c.v))
      throw NumericError(std::string("non-finite ") + c.name + " at epoch " +
                         std::to_string(state_.epoch) + " step " +
                         std::to_string(state_.global_step));

  tape.backward(overall.loss);

  double dea_norm2 = 0.0;
  for (const auto& p : model_.dea_parameters())
    if (p.tensor.grad_populated())
      for (const double g : p.tensor.grad()) dea_norm2 += g * g;
  report.dea_grad_norm = std::sqrt(dea_norm2);

  opt_.step(warmup ? model_.base_parameters() : model_.parameters());

  ordered_json rec;
  rec["type"] = "step";
  rec["epoch"] = state_.epoch;
  rec["step"] = state_.global_step;
  rec["l_base"] = report.l_base;
  rec["l_dea"] = report.l_dea;
  rec["l_meta"] = report.l_meta;
  rec["l_overall"] = report.l_overall;
  rec["l_base_sup"] = report.l_base_sup;
  rec["l_base_unsup"] = report.l_base_unsup;
  rec["l_dea_sup"] = report.l_dea_sup;
  rec["l_dea_unsup"] = report.l_dea_unsup;
  rec["l_meta_sup"] = report.l_meta_sup;
  rec["l_meta_unsup"] = report.l_meta_unsup;
  rec["utilization"] = report.utilization;
  rec["dea_grad_norm"] = report.dea_grad_norm;
  metrics << rec.dump() << "\n";

  state_.epoch_loss_sum += report.l_overall;
  state_.epoch_util_sum += report.utilization;
  ++state_.step_in_epoch;
  ++state_.global_step;
}

void Trainer::end_epoch(std::ostream& metrics) {
  const int steps = steps_per_epoch();
  ordered_json rec;
  rec["type"] = "epoch";
  rec["epoch"] = state_.epoch;
  rec["steps"] = steps;
  rec["mean_l_overall"] = state_.epoch_loss_sum / steps;
  rec["mean_utilization"] = state_.epoch_util_sum / steps;
  metrics << rec.dump() << "\n";
  if (epoch_hook) epoch_hook(state_.epoch, *this);
}

void Trainer::save_checkpoint(const std::string& path) const {
  ArrayStore store = model_.export_parameters();
  store.meta["kind"] = "train_checkpoint";
  store.meta["data.fingerprint"] = dataset_fingerprint(data_.spec);

  store.meta["train.epochs"] = std::to_string(cfg_.epochs);
  store.meta["train.warmup_epochs"] = std::to_string(cfg_.warmup_epochs);
  store.meta["train.batch_labeled"] = std::to_string(cfg_.batch_labeled);
  store.meta["train.batch_unlabeled"] = std::to_string(cfg_.batch_unlabeled);
  store.meta["train.threshold"] = fmt_f64(cfg_.threshold);
  store.meta["train.tau"] =
      fmt_f64(cfg_.tau[0]) + "," + fmt_f64(cfg_.tau[1]) + "," + fmt_f64(cfg_.tau[2]);
  store.meta["train.seed"] = std::to_string(cfg_.seed);
  store.meta["train.eval_every"] = std::to_string(cfg_.eval_every);
  store.meta["train.checkpoint_every"] = std::to_string(cfg_.checkpoint_every);
  store.meta["train.learning_rate"] = fmt_f64(cfg_.learning_rate);
  store.meta["train.momentum"] = fmt_f64(cfg_.momentum);
  store.meta["train.weight_decay"] = fmt_f64(cfg_.weight_decay);

  const auto& mcfg = model_.config();
  store.meta["model.input_dim"] = std::to_string(mcfg.input_dim);
  store.meta["model.num_classes"] = std::to_string(mcfg.num_classes);
  store.meta["model.layer_widths"] = join_ints(mcfg.encoder.layer_widths);
  store.meta["model.tap_indices"] = join_ints(
      {mcfg.encoder.tap_indices[0], mcfg.encoder.tap_indices[1], mcfg.encoder.tap_indices[2]});
  store.meta["model.mff_strategy"] = to_string(mcfg.mff.strategy);
  store.meta["model.fused_dim"] = std::to_string(mcfg.mff.fused_dim);
  store.meta["model.dea_hidden"] = join_ints(mcfg.dea.hidden_widths);
  store.meta["model.dea_detach"] = mcfg.dea.detach_logits ? "1" : "0";

  store.meta["partition.head"] = join_ints(partition_.head);
  store.meta["partition.medium"] = join_ints(partition_.medium);
  store.meta["partition.tail"] = join_ints(partition_.tail);

  for (const auto& [name, vel] : opt_.velocities())
    store.f64["opt." + name] = NamedArray{{static_cast<int>(vel.size())}, vel};

  store.f64["state.sums"] =
      NamedArray{{3}, {state_.epoch_loss_sum, state_.epoch_util_sum, state_.best_metric}};
  store.u64["state.counters"] = {static_cast<std::uint64_t>(state_.epoch),
                                 static_cast<std::uint64_t>(state_.step_in_epoch),
                                 static_cast<std::uint64_t>(state_.global_step),
                                 static_cast<std::uint64_t>(
                                     static_cast<std::int64_t>(state_.best_epoch))};
  store.u64["rng.shuffle"] = pack_rng(shuffle_rng_);
  store.u64["rng.augment"] = pack_rng(augment_rng_);
  std::vector<std::uint64_t> lp(labeled_perm_.begin(), labeled_perm_.end());
  std::vector<std::uint64_t> up(unlabeled_perm_.begin(), unlabeled_perm_.end());
  store.u64["stream.labeled_perm"] = std::move(lp);
  store.u64["stream.unlabeled_perm"] = std::move(up);
  store.u64["stream.unlabeled_cursor"] = {static_cast<std::uint64_t>(unlabeled_cursor_)};

  store.save(path);
}

Trainer Trainer::resume(const std::string& path, SplitPair data) {
  const ArrayStore store = ArrayStore::load(path);
  const auto meta = [&](const std::string& key) -> const std::string& {
    const auto it = store.meta.find(key);
    if (it == store.meta.end()) throw IoError("checkpoint: missing metadata " + key + ": " + path);
    return it->second;
  };
  if (meta("kind") != "train_checkpoint")
    throw IoError("not a training checkpoint: " + path);
  if (meta("data.fingerprint") != dataset_fingerprint(data.spec))
    throw std::invalid_argument("resume: dataset does not match checkpoint (" +
                                meta("data.fingerprint") + " vs " +
                                dataset_fingerprint(data.spec) + ")");

  TrainConfig cfg;
  cfg.epochs = std::stoi(meta("train.epochs"));
  cfg.warmup_epochs = std::stoi(meta("train.warmup_epochs"));
  cfg.batch_labeled = std::stoi(meta("train.batch_labeled"));
  cfg.batch_unlabeled = std::stoi(meta("train.batch_unlabeled"));
  cfg.threshold = parse_f64(meta("train.threshold"));
  {
    std::stringstream ss(meta("train.tau"));
    std::string item;
    for (auto& t : cfg.tau) {
      std::getline(ss, item, ',');
      t = parse_f64(item);
    }
  }
  cfg.seed = std::stoull(meta("train.seed"));
  cfg.eval_every = std::stoi(meta("train.eval_every"));
  cfg.checkpoint_every = std::stoi(meta("train.checkpoint_every"));
  cfg.learning_rate = parse_f64(meta("train.learning_rate"));
  cfg.momentum = parse_f64(meta("train.momentum"));
  cfg.weight_decay = parse_f64(meta("train.weight_decay"));

  ModelConfig mcfg;
  mcfg.input_dim = std::stoi(meta("model.input_dim"));
  mcfg.num_classes = std::stoi(meta("model.num_classes"));
  mcfg.encoder.layer_widths = split_ints(meta("model.layer_widths"));
  const auto taps = split_ints(meta("model.tap_indices"));
  if (taps.size() != 3) throw IoError("checkpoint: malformed tap_indices: " + path);
  mcfg.encoder.tap_indices = {taps[0], taps[1], taps[2]};
  mcfg.mff.strategy = mff_strategy_from_string(meta("model.mff_strategy"));
  mcfg.mff.fused_dim = std::stoi(meta("model.fused_dim"));
  mcfg.dea.hidden_widths = split_ints(meta("model.dea_hidden"));
  mcfg.dea.detach_logits = meta("model.dea_detach") == "1";

  IntervalPartition partition;
  partition.head = split_ints(meta("partition.head"));
  partition.medium = split_ints(meta("partition.medium"));
  partition.tail = split_ints(meta("partition.tail"));

  Model model(mcfg, cfg.seed);
  Trainer t(cfg, std::move(data), std::move(partition), std::move(model));
  t.model_.import_parameters(store);

  for (const auto& [name, arr] : store.f64)
    if (name.rfind("opt.", 0) == 0) t.opt_.velocities()[name.substr(4)] = arr.values;

  const auto sums = store.f64.find("state.sums");
  const auto counters = store.u64.find("state.counters");
  if (sums == store.f64.end() || sums->second.values.size() != 3 ||
      counters == store.u64.end() || counters->second.size() != 4)
    throw IoError("checkpoint: missing run state: " + path);
  t.state_.epoch_loss_sum = sums->second.values[0];
  t.state_.epoch_util_sum = sums->second.values[1];
  t.state_.best_metric = sums->second.values[2];
  t.state_.epoch = static_cast<int>(counters->second[0]);
  t.state_.step_in_epoch = static_cast<int>(counters->second[1]);
  t.state_.global_step = static_cast<std::int64_t>(counters->second[2]);
  t.state_.best_epoch = static_cast<int>(static_cast<std::int64_t>(counters->second[3]));

  unpack_rng(store.u64.at("rng.shuffle"), t.shuffle_rng_);
  unpack_rng(store.u64.at("rng.augment"), t.augment_rng_);
  const auto& lp = store.u64.at("stream.labeled_perm");
  const auto& up = store.u64.at("stream.unlabeled_perm");
  t.labeled_perm_.assign(lp.begin(), lp.end());
  t.unlabeled_perm_.assign(up.begin(), up.end());
  t.unlabeled_cursor_ = static_cast<std::size_t>(store.u64.at("stream.unlabeled_cursor")[0]);
  return t;
}

}  // namespace ltssl
