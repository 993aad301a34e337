#include "ltssl/objectives.hpp"

#include <cmath>
#include <stdexcept>

namespace ltssl {

int PseudoLabelBatch::masked_in() const {
  int n = 0;
  for (double m : mask) n += m != 0.0;
  return n;
}

std::vector<int> argmax_rows(const Tensor& t) {
  const int n = t.shape().size() == 2 ? t.rows() : 1;
  const int m = t.cols();
  std::vector<int> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    int best = 0;
    for (int j = 1; j < m; ++j)
      if (t.data()[static_cast<std::size_t>(i) * m + j] >
          t.data()[static_cast<std::size_t>(i) * m + best])
        best = j;
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

std::vector<double> max_rows(const Tensor& t) {
  const int n = t.shape().size() == 2 ? t.rows() : 1;
  const int m = t.cols();
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double best = t.data()[static_cast<std::size_t>(i) * m];
    for (int j = 1; j < m; ++j)
      best = std::max(best, t.data()[static_cast<std::size_t>(i) * m + j]);
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

PseudoLabelBatch make_pseudo_labels(const Tensor& probs_weak, double threshold, int labeler) {
  PseudoLabelBatch b;
  b.labeler = labeler;
  b.threshold = threshold;
  b.y_hat = argmax_rows(probs_weak);
  b.confidence = max_rows(probs_weak);
  b.mask.resize(b.confidence.size());
  for (std::size_t i = 0; i < b.confidence.size(); ++i)
    b.mask[i] = b.confidence[i] > threshold ? 1.0 : 0.0;
  return b;
}

MembershipTargets make_membership_targets(const std::vector<int>& y_labeled,
                                          const std::vector<int>& y_hat_aggregator,
                                          const IntervalPartition& partition) {
  MembershipTargets t;
  t.labeled.reserve(y_labeled.size());
  t.unlabeled.reserve(y_hat_aggregator.size());
  for (int y : y_labeled) t.labeled.push_back(partition.membership_of(y));
  for (int y : y_hat_aggregator) t.unlabeled.push_back(partition.membership_of(y));
  return t;
}

LossTerm base_loss(Tape& tape, const BaseLossInputs& in) {
  const int c_count = in.z_labeled_weak[0].cols();
  if (static_cast<int>(in.pi.size()) != c_count)
    throw std::invalid_argument("base_loss: pi length " + std::to_string(in.pi.size()) +
                                " does not match " + std::to_string(c_count) + " classes");
  for (double p : in.pi)
    if (p <= 0.0)
      throw std::invalid_argument("base_loss: pi has a nonpositive entry; log pi undefined");

  LossTerm term;
  for (int k = 0; k < 3; ++k) {
    std::vector<double> adj(static_cast<std::size_t>(c_count));
    for (int c = 0; c < c_count; ++c)
      adj[static_cast<std::size_t>(c)] =
          in.tau[static_cast<std::size_t>(k)] * std::log(in.pi[static_cast<std::size_t>(c)]);
    const Tensor bias = Tensor::from({c_count}, std::move(adj));
    const Tensor adjusted = add(tape, in.z_labeled_weak[static_cast<std::size_t>(k)], bias);
    const Tensor sup = cross_entropy(tape, softmax(tape, adjusted), in.y);

    const auto& pl = in.expert_pseudo[static_cast<std::size_t>(k)];
    const Tensor unsup =
        cross_entropy(tape, softmax(tape, in.z_unlabeled_strong[static_cast<std::size_t>(k)]),
                      pl.y_hat, &pl.mask);

    term.supervised += sup.item();
    term.unsupervised += unsup.item();
    const Tensor pair = add(tape, sup, unsup);
    term.loss = k == 0 ? pair : add(tape, term.loss, pair);
  }
  return term;
}

LossTerm dea_loss(Tape& tape, const Tensor& w_labeled, const std::vector<int>& s_labeled,
                  const Tensor& w_unlabeled_strong, const std::vector<int>& s_hat,
                  const std::vector<double>& aggregator_mask) {
  LossTerm term;
  const Tensor sup = cross_entropy(tape, w_labeled, s_labeled);
  const Tensor unsup = cross_entropy(tape, w_unlabeled_strong, s_hat, &aggregator_mask);
  term.supervised = sup.item();
  term.unsupervised = unsup.item();
  term.loss = add(tape, sup, unsup);
  return term;
}

LossTerm meta_loss(Tape& tape, const Tensor& ym_labeled, const std::vector<int>& y,
                   const Tensor& ym_unlabeled_strong, const std::vector<int>& y_hat,
                   const std::vector<double>& aggregator_mask) {
  LossTerm term;
  const Tensor sup = cross_entropy(tape, ym_labeled, y);
  const Tensor unsup = cross_entropy(tape, ym_unlabeled_strong, y_hat, &aggregator_mask);
  term.supervised = sup.item();
  term.unsupervised = unsup.item();
  term.loss = add(tape, sup, unsup);
  return term;
}

OverallLoss overall_loss(Tape& tape, const LossTerm& base, const LossTerm* dea,
                         const LossTerm* meta, bool warmup) {
  OverallLoss out;
  out.report.l_base = base.loss.item();
  out.report.l_base_sup = base.supervised;
  out.report.l_base_unsup = base.unsupervised;
  if (warmup) {
    out.loss = base.loss;
    out.report.l_overall = out.report.l_base;
    return out;
  }
  if (!dea || !meta)
    throw std::invalid_argument("overall_loss: dea and meta terms required after warm-up");
  out.report.l_dea = dea->loss.item();
  out.report.l_dea_sup = dea->supervised;
  out.report.l_dea_unsup = dea->unsupervised;
  out.report.l_meta = meta->loss.item();
  out.report.l_meta_sup = meta->supervised;
  out.report.l_meta_unsup = meta->unsupervised;
  out.loss = add(tape, add(tape, base.loss, dea->loss), meta->loss);
  out.report.l_overall = out.loss.item();
  return out;
}

}  // namespace ltssl
