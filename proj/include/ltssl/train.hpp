#ifndef LTSSL_TRAIN_HPP
#define LTSSL_TRAIN_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <string>

#include "ltssl/dataset.hpp"
#include "ltssl/model.hpp"
#include "ltssl/objectives.hpp"
#include "ltssl/optim.hpp"

namespace ltssl {

struct TrainConfig {
  int epochs = 30;
  int warmup_epochs = 18;
  int batch_labeled = 64;
  int batch_unlabeled = 128;
  double threshold = 0.95;
  std::array<double, 3> tau{0.0, 1.0, 2.0};
  std::uint64_t seed = 1;
  int eval_every = 0;        // epochs between hook calls, 0 = never
  int checkpoint_every = 0;  // epochs between periodic checkpoints, 0 = final only
  double learning_rate = 3e-2;
  double momentum = 0.9;
  double weight_decay = 5e-4;

  void validate() const;
};

struct RunState {
  int epoch = 0;
  int step_in_epoch = 0;
  std::int64_t global_step = 0;
  // running epoch sums for the epoch summary record
  double epoch_loss_sum = 0.0;
  double epoch_util_sum = 0.0;
  double best_metric = 0.0;
  int best_epoch = -1;
};

// Warm-up then joint training. An epoch is ceil(N / B_l) steps over a fresh
// shuffle of the labeled split; each step draws B_u unlabeled samples from a
// persistent shuffled stream that reshuffles when exhausted. During warm-up
// only the base loss is computed and only non-router parameters are stepped,
// so router bytes cannot change (weight decay included). Every loss scalar
// is validated finite before backward; a violation aborts with the term name
// and step. One step-record per step and one summary per epoch go to the
// metrics stream as JSON lines, deterministically.
class Trainer {
 public:
  Trainer(TrainConfig cfg, SplitPair data, IntervalPartition partition, Model model);

  // Runs until training completes or `max_steps` more steps were taken
  // (max_steps < 0: no cap). Returns the number of steps executed.
  std::int64_t run(std::ostream& metrics, std::int64_t max_steps = -1);

  bool finished() const { return state_.epoch >= cfg_.epochs; }
  int steps_per_epoch() const;

  Model& model() { return model_; }
  const Model& model() const { return model_; }
  const TrainConfig& config() const { return cfg_; }
  const RunState& state() const { return state_; }
  const SplitPair& data() const { return data_; }
  const IntervalPartition& partition() const { return partition_; }
  SgdOptimizer& optimizer() { return opt_; }

  // Best-metric bookkeeping for evaluation hooks.
  void note_metric(double value);

  // Called after every completed epoch; the hook applies its own cadence
  // (eval_every, checkpoint_every).
  std::function<void(int epoch, Trainer&)> epoch_hook;

  // Test hook: pretends the base loss went non-finite at this global step.
  std::int64_t poison_step = -1;

  void save_checkpoint(const std::string& path) const;
  // Rebuilds the trainer from a checkpoint; `data` must be the dataset the
  // run was started with (validated against a stored fingerprint).
  static Trainer resume(const std::string& path, SplitPair data);

 private:
  void step_once(std::ostream& metrics);
  void begin_epoch();
  void end_epoch(std::ostream& metrics);
  std::vector<std::uint32_t> next_unlabeled_batch();

  TrainConfig cfg_;
  SplitPair data_;
  IntervalPartition partition_;
  Model model_;
  SgdOptimizer opt_;
  RunState state_;

  Rng shuffle_rng_;
  Rng augment_rng_;
  std::vector<std::uint32_t> labeled_perm_;
  std::vector<std::uint32_t> unlabeled_perm_;
  std::size_t unlabeled_cursor_ = 0;
};

// Exact decimal round-trip formatting used for config echoes in checkpoints
// and manifests.
std::string fmt_f64(double v);
double parse_f64(const std::string& s);

}  // namespace ltssl

#endif
