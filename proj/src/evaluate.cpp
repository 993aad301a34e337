#include "ltssl/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace ltssl {

namespace {

using ordered_json = nlohmann::ordered_json;

int membership_count(const IntervalPartition& p) {
  return static_cast<int>(p.head.size() + p.medium.size() + p.tail.size());
}

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw std::invalid_argument(std::string(what) + ": length mismatch " + std::to_string(a) +
                                " vs " + std::to_string(b));
}

double sq_dist(const double* a, const double* b, int dim) {
  double acc = 0.0;
  for (int j = 0; j < dim; ++j) {
    const double diff = a[j] - b[j];
    acc += diff * diff;
  }
  return acc;
}

}  // namespace

IntervalAccuracy interval_accuracy(const std::vector<int>& predictions,
                                   const std::vector<int>& truth,
                                   const IntervalPartition& partition) {
  check_lengths(predictions.size(), truth.size(), "interval_accuracy");
  std::array<int, 3> correct{}, total{};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int m = partition.membership_of(truth[i]);
    ++total[static_cast<std::size_t>(m)];
    if (predictions[i] == truth[i]) ++correct[static_cast<std::size_t>(m)];
  }
  IntervalAccuracy acc;
  const auto pct = [](int c, int t) { return 100.0 * c / t; };
  if (total[0] > 0) acc.head = pct(correct[0], total[0]);
  if (total[1] > 0) acc.medium = pct(correct[1], total[1]);
  if (total[2] > 0) acc.tail = pct(correct[2], total[2]);
  const int all = total[0] + total[1] + total[2];
  acc.overall = all > 0 ? pct(correct[0] + correct[1] + correct[2], all) : 0.0;
  return acc;
}

F1Report pseudo_label_f1(const PseudoLabelBatch& pl, const std::vector<int>& truth,
                         const IntervalPartition& partition) {
  check_lengths(pl.y_hat.size(), truth.size(), "pseudo_label_f1");
  const int c_count = membership_count(partition);
  F1Report rep;
  std::vector<int> tp(static_cast<std::size_t>(c_count), 0);
  std::vector<int> fp(static_cast<std::size_t>(c_count), 0);
  std::vector<int> fn(static_cast<std::size_t>(c_count), 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (pl.mask[i] == 0.0) continue;
    ++rep.evaluated;
    const int p = pl.y_hat[i], t = truth[i];
    if (p == t) {
      ++tp[static_cast<std::size_t>(t)];
    } else {
      ++fp[static_cast<std::size_t>(p)];
      ++fn[static_cast<std::size_t>(t)];
    }
  }
  if (rep.evaluated == 0) return rep;  // undefined, reported as such
  rep.defined = true;
  rep.per_class.resize(static_cast<std::size_t>(c_count), 0.0);
  for (int c = 0; c < c_count; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    const int denom = 2 * tp[ci] + fp[ci] + fn[ci];
    if (denom == 0) {
      rep.absent_classes.push_back(c);  // F1 = 0 by convention
      continue;
    }
    rep.per_class[ci] = 100.0 * 2.0 * tp[ci] / denom;
  }
  const auto macro = [&](const std::vector<int>& classes) {
    double sum = 0.0;
    for (int c : classes) sum += rep.per_class[static_cast<std::size_t>(c)];
    return sum / static_cast<double>(classes.size());
  };
  std::vector<int> all(static_cast<std::size_t>(c_count));
  for (int c = 0; c < c_count; ++c) all[static_cast<std::size_t>(c)] = c;
  rep.overall = macro(all);
  rep.head = macro(partition.head);
  rep.medium = macro(partition.medium);
  rep.tail = macro(partition.tail);
  return rep;
}

ErrorMatrix error_matrix(const std::array<PseudoLabelBatch, 3>& expert_pl,
                         const std::vector<int>& truth,
                         const std::vector<int>& memberships) {
  check_lengths(truth.size(), memberships.size(), "error_matrix");
  std::array<std::array<int, 3>, 3> wrong{};
  ErrorMatrix m;
  for (int i = 0; i < 3; ++i) {
    const auto& pl = expert_pl[static_cast<std::size_t>(i)];
    check_lengths(pl.y_hat.size(), truth.size(), "error_matrix");
    for (std::size_t j = 0; j < truth.size(); ++j) {
      if (pl.mask[j] == 0.0) continue;
      const auto mj = static_cast<std::size_t>(memberships[j]);
      ++m.accepted[static_cast<std::size_t>(i)][mj];
      if (pl.y_hat[j] != truth[j]) ++wrong[static_cast<std::size_t>(i)][mj];
    }
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const auto ii = static_cast<std::size_t>(i), jj = static_cast<std::size_t>(j);
      m.defined[ii][jj] = m.accepted[ii][jj] > 0;
      m.eps[ii][jj] = m.defined[ii][jj]
                          ? static_cast<double>(wrong[ii][jj]) / m.accepted[ii][jj]
                          : std::numeric_limits<double>::quiet_NaN();
    }
  return m;
}

EpsSummary eps_cpe(const ErrorMatrix& m) {
  EpsSummary s;
  double sum = 0.0;
  int n = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (!m.defined[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) {
        ++s.excluded_cells;
        continue;
      }
      sum += m.eps[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      ++n;
    }
  if (n == 0) throw std::invalid_argument("eps_cpe: all cells undefined");
  s.value = sum / n;
  return s;
}

EpsSummary eps_ours(const ErrorMatrix& m) {
  EpsSummary s;
  double sum = 0.0;
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    if (!m.defined[ii][ii]) {
      ++s.excluded_cells;
      continue;
    }
    sum += m.eps[ii][ii];
    ++n;
  }
  if (n == 0) throw std::invalid_argument("eps_ours: all diagonal cells undefined");
  s.value = sum / n;
  return s;
}

double utilization(const PseudoLabelBatch& pl) {
  if (pl.mask.empty()) return 0.0;
  return static_cast<double>(pl.masked_in()) / static_cast<double>(pl.mask.size());
}

LabelerStats labeler_stats(const std::string& name, const PseudoLabelBatch& pl,
                           const std::vector<int>& truth, const std::vector<int>& memberships,
                           const IntervalPartition& partition) {
  check_lengths(pl.y_hat.size(), truth.size(), "labeler_stats");
  check_lengths(truth.size(), memberships.size(), "labeler_stats");
  LabelerStats st;
  st.name = name;
  std::array<int, 3> accepted{}, wrong{};
  int disagreements = 0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    const bool accept = pl.mask[j] != 0.0;
    const bool correct = pl.y_hat[j] == truth[j];
    if (accept != correct) ++disagreements;
    if (!accept) continue;
    const auto mj = static_cast<std::size_t>(memberships[j]);
    ++accepted[mj];
    if (!correct) ++wrong[mj];
  }
  int acc_all = 0, wrong_all = 0;
  for (int j = 0; j < 3; ++j) {
    const auto jj = static_cast<std::size_t>(j);
    acc_all += accepted[jj];
    wrong_all += wrong[jj];
    if (accepted[jj] > 0)
      st.interval_error[jj] = static_cast<double>(wrong[jj]) / accepted[jj];
  }
  if (acc_all > 0) st.error = static_cast<double>(wrong_all) / acc_all;
  st.discrepancy = truth.empty() ? 0.0
                                 : static_cast<double>(disagreements) /
                                       static_cast<double>(truth.size());
  st.utilization = utilization(pl);
  st.f1 = pseudo_label_f1(pl, truth, partition);
  return st;
}

// ------------------------------------------------------------ policies

PolicyKind PolicyKind::parse(const std::string& name) {
  PolicyKind p;
  if (name == "expert1" || name == "expert2" || name == "expert3") {
    p.type = Type::expert;
    p.expert_k = name.back() - '1';
    return p;
  }
  if (name == "cpe") {
    p.type = Type::cpe_ensemble;
    return p;
  }
  if (name == "dea") {
    p.type = Type::dea;
    return p;
  }
  if (name == "upper_e") {
    p.type = Type::upper_e;
    return p;
  }
  throw std::invalid_argument("policy: expected expert1|expert2|expert3|cpe|dea|upper_e, got '" +
                              name + "'");
}

std::string PolicyKind::name() const {
  switch (type) {
    case Type::expert: return "expert" + std::to_string(expert_k + 1);
    case Type::cpe_ensemble: return "cpe";
    case Type::dea: return "dea";
    case Type::upper_e: return "upper_e";
  }
  return "?";
}

EvalOutputs eval_forward(const Model& model, const Tensor& x) {
  Tape tape;
  tape.set_recording(false);
  const auto f = model.forward(tape, x, /*with_router=*/true);
  EvalOutputs out;
  out.taps = f.taps;
  for (int k = 0; k < 3; ++k)
    out.probs[static_cast<std::size_t>(k)] = softmax(tape, f.z[static_cast<std::size_t>(k)]);
  out.w = f.w;
  out.y_m = f.y_m;
  return out;
}

std::vector<int> policy_predict(const PolicyKind& policy, const EvalOutputs& out,
                                const std::vector<int>* oracle_memberships,
                                bool cpe_mean_softmax) {
  switch (policy.type) {
    case PolicyKind::Type::expert:
      return argmax_rows(out.probs[static_cast<std::size_t>(policy.expert_k)]);
    case PolicyKind::Type::cpe_ensemble: {
      if (!cpe_mean_softmax) return argmax_rows(out.probs[1]);  // uniform expert at test time
      Tensor mean = Tensor::zeros(out.probs[0].shape());
      for (const auto& p : out.probs)
        for (std::int64_t i = 0; i < mean.numel(); ++i) mean.data()[i] += p.data()[i] / 3.0;
      return argmax_rows(mean);
    }
    case PolicyKind::Type::dea:
      return argmax_rows(out.y_m);
    case PolicyKind::Type::upper_e: {
      if (!oracle_memberships)
        throw std::invalid_argument("policy_predict: upper_e requires oracle memberships");
      const int n = out.probs[0].rows(), m = out.probs[0].cols();
      check_lengths(oracle_memberships->size(), static_cast<std::size_t>(n), "policy_predict");
      std::vector<int> pred(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        const auto& probs = out.probs[static_cast<std::size_t>((*oracle_memberships)[static_cast<std::size_t>(i)])];
        int best = 0;
        for (int j = 1; j < m; ++j)
          if (probs.at(i, j) > probs.at(i, best)) best = j;
        pred[static_cast<std::size_t>(i)] = best;
      }
      return pred;
    }
  }
  throw std::invalid_argument("policy_predict: unknown policy");
}

DeaProfile dea_confidence_profile(const Tensor& w, const std::vector<int>& memberships) {
  check_lengths(static_cast<std::size_t>(w.rows()), memberships.size(), "dea_confidence_profile");
  DeaProfile prof;
  for (std::size_t i = 0; i < memberships.size(); ++i) {
    const auto m = static_cast<std::size_t>(memberships[i]);
    ++prof.count[m];
    for (int k = 0; k < 3; ++k)
      prof.mean_w[m][static_cast<std::size_t>(k)] += w.at(static_cast<int>(i), k);
  }
  for (int j = 0; j < 3; ++j) {
    const auto jj = static_cast<std::size_t>(j);
    if (prof.count[jj] == 0) continue;
    for (int k = 0; k < 3; ++k) prof.mean_w[jj][static_cast<std::size_t>(k)] /= prof.count[jj];
  }
  return prof;
}

// ------------------------------------------------------------- k-means

KMeansResult kmeans(const std::vector<double>& x, int n, int dim, int k, std::uint64_t seed,
                    int max_iter, double tol) {
  if (n < 1 || dim < 1 || k < 1 || k > n)
    throw std::invalid_argument("kmeans: need 1 <= k <= n, got k=" + std::to_string(k) +
                                " n=" + std::to_string(n));
  if (static_cast<std::size_t>(n) * dim != x.size())
    throw std::invalid_argument("kmeans: data size does not match n*dim");

  KMeansResult res;
  res.centroids.assign(static_cast<std::size_t>(k) * dim, 0.0);
  const auto point = [&](int i) { return x.data() + static_cast<std::size_t>(i) * dim; };
  const auto centroid = [&](int c) { return res.centroids.data() + static_cast<std::size_t>(c) * dim; };

  // Farthest-point init: random first pick, then repeatedly the point with
  // the largest distance to its nearest chosen centroid (ties to the lowest
  // index).
  Rng rng(seed, /*stream=*/0);
  std::vector<double> near_d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  const int first = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
  std::copy(point(first), point(first) + dim, centroid(0));
  for (int c = 1; c < k; ++c) {
    int far = 0;
    double far_d2 = -1.0;
    for (int i = 0; i < n; ++i) {
      near_d2[static_cast<std::size_t>(i)] =
          std::min(near_d2[static_cast<std::size_t>(i)], sq_dist(point(i), centroid(c - 1), dim));
      if (near_d2[static_cast<std::size_t>(i)] > far_d2) {
        far_d2 = near_d2[static_cast<std::size_t>(i)];
        far = i;
      }
    }
    std::copy(point(far), point(far) + dim, centroid(c));
  }

  res.assignment.assign(static_cast<std::size_t>(n), 0);
  std::vector<double> next(static_cast<std::size_t>(k) * dim);
  std::vector<int> count(static_cast<std::size_t>(k));
  std::vector<double> dist2(static_cast<std::size_t>(n));
  for (int iter = 0; iter < max_iter; ++iter) {
    res.iterations = iter + 1;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d2 = sq_dist(point(i), centroid(0), dim);
      for (int c = 1; c < k; ++c) {
        const double d2 = sq_dist(point(i), centroid(c), dim);
        if (d2 < best_d2) {
          best_d2 = d2;
          best = c;
        }
      }
      res.assignment[static_cast<std::size_t>(i)] = best;
      dist2[static_cast<std::size_t>(i)] = best_d2;
    }

    std::fill(next.begin(), next.end(), 0.0);
    std::fill(count.begin(), count.end(), 0);
    for (int i = 0; i < n; ++i) {
      const int c = res.assignment[static_cast<std::size_t>(i)];
      ++count[static_cast<std::size_t>(c)];
      for (int j = 0; j < dim; ++j)
        next[static_cast<std::size_t>(c) * dim + j] += point(i)[j];
    }
    std::vector<bool> claimed(static_cast<std::size_t>(n), false);
    for (int c = 0; c < k; ++c) {
      if (count[static_cast<std::size_t>(c)] > 0) {
        for (int j = 0; j < dim; ++j)
          next[static_cast<std::size_t>(c) * dim + j] /= count[static_cast<std::size_t>(c)];
        continue;
      }
      // Empty cluster: re-seed from the farthest unclaimed point.
      int far = -1;
      double far_d2 = -1.0;
      for (int i = 0; i < n; ++i)
        if (!claimed[static_cast<std::size_t>(i)] && dist2[static_cast<std::size_t>(i)] > far_d2) {
          far_d2 = dist2[static_cast<std::size_t>(i)];
          far = i;
        }
      claimed[static_cast<std::size_t>(far)] = true;
      std::copy(point(far), point(far) + dim, next.begin() + static_cast<std::size_t>(c) * dim);
    }

    double max_move2 = 0.0;
    for (int c = 0; c < k; ++c)
      max_move2 = std::max(max_move2, sq_dist(centroid(c), next.data() + static_cast<std::size_t>(c) * dim, dim));
    res.centroids = next;
    if (max_move2 <= tol * tol) break;
  }

  res.inertia = 0.0;
  for (int i = 0; i < n; ++i) {
    int best = 0;
    double best_d2 = sq_dist(point(i), centroid(0), dim);
    for (int c = 1; c < k; ++c) {
      const double d2 = sq_dist(point(i), centroid(c), dim);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = c;
      }
    }
    res.assignment[static_cast<std::size_t>(i)] = best;
    res.inertia += best_d2;
  }
  return res;
}

std::vector<DepthProbeRow> depth_bias_probe(const FeatureTaps& taps,
                                            const std::vector<int>& labels,
                                            const IntervalPartition& partition, int k,
                                            std::uint64_t seed) {
  const int c_count = membership_count(partition);
  std::vector<DepthProbeRow> rows;
  const std::pair<const char*, const Tensor*> depths[] = {
      {"shallow", &taps.shallow}, {"middle", &taps.middle}, {"deep", &taps.deep}};
  for (const auto& [name, feat] : depths) {
    const int n = feat->rows(), dim = feat->cols();
    const auto km = kmeans(feat->values(), n, dim, k, seed);
    // Majority vote per cluster, ties to the lower class.
    std::vector<std::vector<int>> hist(static_cast<std::size_t>(k),
                                       std::vector<int>(static_cast<std::size_t>(c_count), 0));
    for (int i = 0; i < n; ++i)
      ++hist[static_cast<std::size_t>(km.assignment[static_cast<std::size_t>(i)])]
            [static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    std::vector<int> cluster_class(static_cast<std::size_t>(k), 0);
    for (int c = 0; c < k; ++c) {
      int best = 0;
      for (int y = 1; y < c_count; ++y)
        if (hist[static_cast<std::size_t>(c)][static_cast<std::size_t>(y)] >
            hist[static_cast<std::size_t>(c)][static_cast<std::size_t>(best)])
          best = y;
      cluster_class[static_cast<std::size_t>(c)] = best;
    }
    std::vector<int> pred(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      pred[static_cast<std::size_t>(i)] =
          cluster_class[static_cast<std::size_t>(km.assignment[static_cast<std::size_t>(i)])];
    DepthProbeRow row;
    row.depth = name;
    row.acc = interval_accuracy(pred, labels, partition);
    if (row.acc.head && row.acc.tail) row.gap = *row.acc.head - *row.acc.tail;
    rows.push_back(std::move(row));
  }
  return rows;
}

// ------------------------------------------------------------- reports

namespace {

ordered_json opt_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

ordered_json f1_json(const F1Report& f) {
  ordered_json j;
  j["defined"] = f.defined;
  j["evaluated"] = f.evaluated;
  j["overall"] = opt_json(f.overall);
  j["head"] = opt_json(f.head);
  j["medium"] = opt_json(f.medium);
  j["tail"] = opt_json(f.tail);
  j["absent_classes"] = f.absent_classes;
  return j;
}

std::string cell(const std::optional<double>& v, double scale = 1.0) {
  if (!v) return "     --";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%7.2f", *v * scale);
  return buf;
}

}  // namespace

std::string report_to_json(const EvalReport& r) {
  ordered_json j;
  j["regime"] = r.regime;
  j["num_classes"] = r.num_classes;
  j["mff_strategy"] = r.mff_strategy;
  j["dataset_seed"] = r.dataset_seed;
  j["train_seed"] = r.train_seed;
  ordered_json pols = ordered_json::array();
  for (const auto& p : r.policies) {
    ordered_json pj;
    pj["policy"] = p.name;
    pj["head"] = opt_json(p.acc.head);
    pj["medium"] = opt_json(p.acc.medium);
    pj["tail"] = opt_json(p.acc.tail);
    pj["overall"] = p.acc.overall;
    pols.push_back(pj);
  }
  j["accuracy"] = pols;

  ordered_json cells = ordered_json::array();
  for (int i = 0; i < 3; ++i) {
    ordered_json row = ordered_json::array();
    for (int jx = 0; jx < 3; ++jx) {
      const auto ii = static_cast<std::size_t>(i), jj = static_cast<std::size_t>(jx);
      if (r.matrix.defined[ii][jj])
        row.push_back(r.matrix.eps[ii][jj]);
      else
        row.push_back(nullptr);
    }
    cells.push_back(row);
  }
  j["error_matrix"] = cells;
  j["eps_cpe"] = r.cpe.value;
  j["eps_cpe_excluded_cells"] = r.cpe.excluded_cells;
  j["eps_ours"] = r.ours.value;
  j["eps_ours_excluded_cells"] = r.ours.excluded_cells;
  j["cpe_union_error"] = r.cpe_union_error;
  j["cpe_union_utilization"] = r.cpe_union_utilization;

  ordered_json labs = ordered_json::array();
  for (const auto& l : r.labelers) {
    ordered_json lj;
    lj["labeler"] = l.name;
    lj["head_error"] = opt_json(l.interval_error[0]);
    lj["medium_error"] = opt_json(l.interval_error[1]);
    lj["tail_error"] = opt_json(l.interval_error[2]);
    lj["error"] = opt_json(l.error);
    lj["discrepancy"] = l.discrepancy;
    lj["utilization"] = l.utilization;
    lj["f1"] = f1_json(l.f1);
    labs.push_back(lj);
  }
  j["pseudo_labels"] = labs;

  ordered_json prof;
  for (int m = 0; m < 3; ++m) {
    const char* names[] = {"head", "medium", "tail"};
    ordered_json row = ordered_json::array();
    for (int k = 0; k < 3; ++k)
      row.push_back(r.profile.mean_w[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)]);
    prof[names[m]] = row;
  }
  j["dea_profile"] = prof;

  ordered_json probe = ordered_json::array();
  for (const auto& row : r.probe) {
    ordered_json pj;
    pj["depth"] = row.depth;
    pj["overall"] = row.acc.overall;
    pj["head"] = opt_json(row.acc.head);
    pj["medium"] = opt_json(row.acc.medium);
    pj["tail"] = opt_json(row.acc.tail);
    pj["gap"] = opt_json(row.gap);
    probe.push_back(pj);
  }
  j["depth_probe"] = probe;
  return j.dump(2);
}

std::string format_accuracy_table(const EvalReport& r) {
  std::string out = "Policy      Head  Medium    Tail Overall\n";
  for (const auto& p : r.policies) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-8s %s %s %s %7.2f\n", p.name.c_str(),
                  cell(p.acc.head).c_str(), cell(p.acc.medium).c_str(), cell(p.acc.tail).c_str(),
                  p.acc.overall);
    out += buf;
  }
  return out;
}

std::string format_pseudo_table(const EvalReport& r) {
  // Error rates and utilization are printed in percent, as fractions in JSON.
  std::string out = "Labeler     Head  Medium    Tail     eps    util\n";
  for (const auto& l : r.labelers) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-8s %s %s %s %s %7.2f\n", l.name.c_str(),
                  cell(l.interval_error[0], 100.0).c_str(),
                  cell(l.interval_error[1], 100.0).c_str(),
                  cell(l.interval_error[2], 100.0).c_str(), cell(l.error, 100.0).c_str(),
                  100.0 * l.utilization);
    out += buf;
  }
  return out;
}

std::string f1_csv(const EvalReport& r) {
  std::string out = "labeler,interval,f1\n";
  for (const auto& l : r.labelers) {
    const std::pair<const char*, const std::optional<double>*> rows[] = {
        {"overall", &l.f1.overall}, {"head", &l.f1.head},
        {"medium", &l.f1.medium},   {"tail", &l.f1.tail}};
    for (const auto& [name, v] : rows) {
      out += l.name + "," + name + ",";
      if (*v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", **v);
        out += buf;
      }
      out += "\n";
    }
  }
  return out;
}

std::string profile_csv(const EvalReport& r) {
  std::string out = "true_interval,w1,w2,w3,count\n";
  const char* names[] = {"head", "medium", "tail"};
  for (int m = 0; m < 3; ++m) {
    char buf[128];
    const auto mm = static_cast<std::size_t>(m);
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%d\n", names[m], r.profile.mean_w[mm][0],
                  r.profile.mean_w[mm][1], r.profile.mean_w[mm][2], r.profile.count[mm]);
    out += buf;
  }
  return out;
}

}  // namespace ltssl
