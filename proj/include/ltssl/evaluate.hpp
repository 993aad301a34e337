#ifndef LTSSL_EVALUATE_HPP
#define LTSSL_EVALUATE_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ltssl/dataset.hpp"
#include "ltssl/model.hpp"
#include "ltssl/objectives.hpp"

namespace ltssl {

// Accuracies are percentages (0..100); pseudo-labeling error rates and
// utilization ratios are fractions (0..1), matching how each quantity is
// asserted in tests and printed in reports.

struct IntervalAccuracy {
  std::optional<double> head, medium, tail;  // empty interval -> undefined
  double overall = 0.0;
};

// Per-interval accuracy over the classes of each interval; overall over all
// samples. Recombines exactly: overall = count-weighted mean of intervals.
IntervalAccuracy interval_accuracy(const std::vector<int>& predictions,
                                   const std::vector<int>& truth,
                                   const IntervalPartition& partition);

struct F1Report {
  bool defined = false;  // false when the mask is empty
  int evaluated = 0;     // masked-in sample count
  std::vector<double> per_class;  // percent; absent classes get 0 by convention
  std::vector<int> absent_classes;
  std::optional<double> overall, head, medium, tail;  // macro-F1, percent
};

// Macro-F1 of pseudo-labels over masked-in samples only, overall and within
// each interval's class set.
F1Report pseudo_label_f1(const PseudoLabelBatch& pl, const std::vector<int>& truth,
                         const IntervalPartition& partition);

// eps[i][j]: error rate of labeler i's pseudo-labels among the samples of
// true membership j that labeler i accepts; cells with no accepted samples
// are undefined and carry accepted count 0.
struct ErrorMatrix {
  std::array<std::array<double, 3>, 3> eps{};
  std::array<std::array<int, 3>, 3> accepted{};
  std::array<std::array<bool, 3>, 3> defined{};
};

ErrorMatrix error_matrix(const std::array<PseudoLabelBatch, 3>& expert_pl,
                         const std::vector<int>& truth,
                         const std::vector<int>& memberships);

struct EpsSummary {
  double value = 0.0;
  int excluded_cells = 0;  // undefined cells dropped from the average
};

// Mean over all Q*Q cells.
EpsSummary eps_cpe(const ErrorMatrix& m);
// Mean over the diagonal (each expert on its own interval).
EpsSummary eps_ours(const ErrorMatrix& m);

double utilization(const PseudoLabelBatch& pl);

// Per-labeler pseudo-label quality for the report table: per-interval error
// rates, accepted-only overall error, the acceptance/correctness discrepancy
// rate |I(accepted) - I(correct)| averaged over all samples, utilization,
// and F1.
struct LabelerStats {
  std::string name;
  std::array<std::optional<double>, 3> interval_error;
  std::optional<double> error;  // among accepted samples
  double discrepancy = 0.0;
  double utilization = 0.0;
  F1Report f1;
};

LabelerStats labeler_stats(const std::string& name, const PseudoLabelBatch& pl,
                           const std::vector<int>& truth, const std::vector<int>& memberships,
                           const IntervalPartition& partition);

// ------------------------------------------------------------ policies

struct PolicyKind {
  enum class Type { expert, cpe_ensemble, dea, upper_e };
  Type type = Type::dea;
  int expert_k = 0;  // for Type::expert

  static PolicyKind parse(const std::string& name);  // expert1..3|cpe|dea|upper_e
  std::string name() const;
};

// Frozen-model outputs on one batch of inputs, recording off.
struct EvalOutputs {
  FeatureTaps taps;
  std::array<Tensor, 3> probs;  // softmax of each expert's logits
  Tensor w;
  Tensor y_m;
};

EvalOutputs eval_forward(const Model& model, const Tensor& x);

// expert k: argmax of that expert's softmax. cpe_ensemble: the uniform
// expert's prediction (mean-of-softmaxes behind the flag). dea: argmax of the
// aggregator. upper_e: the expert matched to the sample's true membership,
// which requires oracle memberships.
std::vector<int> policy_predict(const PolicyKind& policy, const EvalOutputs& out,
                                const std::vector<int>* oracle_memberships = nullptr,
                                bool cpe_mean_softmax = false);

// Mean router weight per true interval: profile[j][k] = mean w_k over
// samples of interval j.
struct DeaProfile {
  std::array<std::array<double, 3>, 3> mean_w{};
  std::array<int, 3> count{};
};

DeaProfile dea_confidence_profile(const Tensor& w, const std::vector<int>& memberships);

// ------------------------------------------------------------- k-means

struct KMeansResult {
  std::vector<int> assignment;
  std::vector<double> centroids;  // [k, dim]
  int iterations = 0;
  double inertia = 0.0;  // sum of squared distances to assigned centroid
};

// Lloyd's algorithm, seeded farthest-point init, at most max_iter rounds,
// stopping when no centroid moves more than tol. An empty cluster is
// re-seeded from the point farthest from its assigned centroid.
KMeansResult kmeans(const std::vector<double>& x, int n, int dim, int k, std::uint64_t seed,
                    int max_iter = 100, double tol = 1e-8);

struct DepthProbeRow {
  std::string depth;  // shallow | middle | deep
  IntervalAccuracy acc;
  std::optional<double> gap;  // head minus tail accuracy, percent
};

// K-means with k = C on each depth's features; clusters map to classes by
// majority vote (ties to the lower class), then accuracies per interval.
std::vector<DepthProbeRow> depth_bias_probe(const FeatureTaps& taps,
                                            const std::vector<int>& labels,
                                            const IntervalPartition& partition, int k,
                                            std::uint64_t seed);

// ------------------------------------------------------------- reports

struct PolicyResult {
  std::string name;
  IntervalAccuracy acc;
};

struct EvalReport {
  std::string regime;
  int num_classes = 0;
  std::string mff_strategy;
  std::uint64_t dataset_seed = 0;
  std::uint64_t train_seed = 0;
  std::vector<PolicyResult> policies;
  ErrorMatrix matrix;
  EpsSummary cpe;
  EpsSummary ours;
  std::vector<LabelerStats> labelers;  // expert1..3, cpe, aggregator
  // Union-of-accepted variant of the CPE row, logged alongside the
  // per-expert average that the table uses.
  double cpe_union_error = 0.0;
  double cpe_union_utilization = 0.0;
  DeaProfile profile;
  std::vector<DepthProbeRow> probe;  // empty when the probe is off
};

std::string report_to_json(const EvalReport& r);
// Aligned-column text: accuracy table (policy x head/medium/tail/overall)
// and pseudo-label table (labeler x head/medium/tail/eps/utilization).
std::string format_accuracy_table(const EvalReport& r);
std::string format_pseudo_table(const EvalReport& r);
// Plot data: per-labeler interval F1 bars and the router-confidence profile.
std::string f1_csv(const EvalReport& r);
std::string profile_csv(const EvalReport& r);

}  // namespace ltssl

#endif
