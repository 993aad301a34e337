#ifndef LTSSL_OBJECTIVES_HPP
#define LTSSL_OBJECTIVES_HPP

#include <array>
#include <vector>

#include "ltssl/dataset.hpp"
#include "ltssl/tensor.hpp"

namespace ltssl {

// Labeler ids: 0..2 are the experts, 3 the aggregator.
constexpr int kAggregatorLabeler = 3;

// Pseudo-labels of one labeler on one batch of weak views. mask[i] is 1.0
// exactly when confidence[i] > threshold (strict); argmax ties resolve to the
// lowest class index. Stored as doubles so it can be fed to cross_entropy as
// a per-sample mask.
struct PseudoLabelBatch {
  int labeler = 0;
  double threshold = 0.95;
  std::vector<int> y_hat;
  std::vector<double> confidence;
  std::vector<double> mask;

  int masked_in() const;
};

PseudoLabelBatch make_pseudo_labels(const Tensor& probs_weak, double threshold, int labeler);

// Expert-assignment targets: membership interval of the true label for
// labeled samples, of the aggregator's pseudo-label for unlabeled ones.
struct MembershipTargets {
  std::vector<int> labeled;
  std::vector<int> unlabeled;
};

MembershipTargets make_membership_targets(const std::vector<int>& y_labeled,
                                          const std::vector<int>& y_hat_aggregator,
                                          const IntervalPartition& partition);

struct LossReport {
  double l_base = 0.0;
  double l_dea = 0.0;
  double l_meta = 0.0;
  double l_overall = 0.0;
  double l_base_sup = 0.0, l_base_unsup = 0.0;
  double l_dea_sup = 0.0, l_dea_unsup = 0.0;
  double l_meta_sup = 0.0, l_meta_unsup = 0.0;
  // Mask-in rate of the aggregator on this batch; during warm-up (no
  // aggregator) the mean of the three expert mask rates.
  double utilization = 0.0;
  double dea_grad_norm = 0.0;
};

// A differentiable loss term plus its scalar breakdown for logging.
struct LossTerm {
  Tensor loss;
  double supervised = 0.0;
  double unsupervised = 0.0;
};

// Sum over experts of the logit-adjusted supervised cross-entropy on the
// labeled weak view plus the masked consistency cross-entropy on the strong
// view, each expert masked by its own weak-view pseudo-labels. Masked means
// divide by the full unlabeled batch size. pi must be strictly positive.
struct BaseLossInputs {
  std::array<Tensor, 3> z_labeled_weak;
  std::vector<int> y;
  std::array<Tensor, 3> z_unlabeled_strong;
  std::array<PseudoLabelBatch, 3> expert_pseudo;
  std::vector<double> pi;
  std::array<double, 3> tau{0.0, 1.0, 2.0};
};

LossTerm base_loss(Tape& tape, const BaseLossInputs& in);

// Router loss: cross-entropy of the assignment probabilities against the
// membership targets; the unlabeled term is evaluated on the strong view and
// masked by the aggregator's weak-view acceptance.
LossTerm dea_loss(Tape& tape, const Tensor& w_labeled, const std::vector<int>& s_labeled,
                  const Tensor& w_unlabeled_strong, const std::vector<int>& s_hat,
                  const std::vector<double>& aggregator_mask);

// Aggregator loss: cross-entropy of the blended prediction against labels,
// plus the masked consistency term against the aggregator's own weak-view
// pseudo-labels on the strong view.
LossTerm meta_loss(Tape& tape, const Tensor& ym_labeled, const std::vector<int>& y,
                   const Tensor& ym_unlabeled_strong, const std::vector<int>& y_hat,
                   const std::vector<double>& aggregator_mask);

// During warm-up the overall loss is the base term alone; afterwards the
// three-term sum. dea/meta may be null only during warm-up.
struct OverallLoss {
  Tensor loss;
  LossReport report;
};

OverallLoss overall_loss(Tape& tape, const LossTerm& base, const LossTerm* dea,
                         const LossTerm* meta, bool warmup);

// Row-wise argmax (ties to the lowest index) and row maxima of a 2D tensor.
std::vector<int> argmax_rows(const Tensor& t);
std::vector<double> max_rows(const Tensor& t);

}  // namespace ltssl

#endif
