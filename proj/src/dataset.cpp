#include "ltssl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "io_util.hpp"

namespace ltssl {

namespace {

constexpr std::uint32_t kDatasetMagic = 0x4C545344;  // "LTSD"
constexpr std::uint32_t kDatasetVersion = 1;

// Substream ids under DatasetSpec.seed.
constexpr std::uint64_t kStreamCenters = 0;
constexpr std::uint64_t kStreamLabeled = 1;
constexpr std::uint64_t kStreamUnlabeled = 2;
constexpr std::uint64_t kStreamTest = 3;

std::vector<int> exp_profile(int anchor, double gamma, int c_count) {
  std::vector<int> counts(c_count);
  for (int c = 0; c < c_count; ++c) {
    const double expo = -static_cast<double>(c) / static_cast<double>(c_count - 1);
    counts[c] = static_cast<int>(
        std::max<long long>(1, std::llround(anchor * std::pow(gamma, expo))));
  }
  return counts;
}

std::vector<double> draw_centers(const DatasetSpec& spec) {
  Rng rng(spec.seed, kStreamCenters);
  const int c_count = spec.num_classes, d = spec.feature_dim;
  std::vector<double> centers(static_cast<std::size_t>(c_count) * d);
  for (int c = 0; c < c_count; ++c) {
    double norm2 = 0.0;
    for (int j = 0; j < d; ++j) {
      const double v = rng.normal();
      centers[static_cast<std::size_t>(c) * d + j] = v;
      norm2 += v * v;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (int j = 0; j < d; ++j) centers[static_cast<std::size_t>(c) * d + j] *= inv;
  }
  return centers;
}

void draw_class_samples(const std::vector<double>& centers, int c, int d, int count,
                        double spread, Rng& rng, std::vector<double>& x, std::vector<int>& y) {
  for (int i = 0; i < count; ++i) {
    for (int j = 0; j < d; ++j)
      x.push_back(centers[static_cast<std::size_t>(c) * d + j] + spread * rng.normal());
    y.push_back(c);
  }
}

}  // namespace

std::string to_string(UnlabeledRegime r) {
  switch (r) {
    case UnlabeledRegime::consistent: return "consistent";
    case UnlabeledRegime::uniform: return "uniform";
    case UnlabeledRegime::inverse: return "inverse";
  }
  return "?";
}

UnlabeledRegime regime_from_string(const std::string& s) {
  if (s == "consistent") return UnlabeledRegime::consistent;
  if (s == "uniform") return UnlabeledRegime::uniform;
  if (s == "inverse") return UnlabeledRegime::inverse;
  throw std::invalid_argument("unlabeled_regime: expected consistent|uniform|inverse, got '" + s + "'");
}

void DatasetSpec::validate() const {
  if (num_classes < 3) throw std::invalid_argument("num_classes: must be >= 3");
  if (feature_dim < 1) throw std::invalid_argument("feature_dim: must be >= 1");
  if (n1 < 1) throw std::invalid_argument("n1: must be >= 1");
  if (m_anchor < 1) throw std::invalid_argument("m_anchor: must be >= 1");
  if (gamma_l < 1.0) throw std::invalid_argument("gamma_l: must be >= 1");
  if (blob_spread < 0.0) throw std::invalid_argument("blob_spread: must be >= 0");
  if (augment.weak_noise_sigma < 0.0) throw std::invalid_argument("weak_noise_sigma: must be >= 0");
  if (augment.strong_noise_sigma < augment.weak_noise_sigma)
    throw std::invalid_argument("strong_noise_sigma: must be >= weak_noise_sigma");
  if (augment.strong_mask_fraction < 0.0 || augment.strong_mask_fraction >= 1.0)
    throw std::invalid_argument("strong_mask_fraction: must be in [0,1)");
}

double DatasetSpec::gamma_u() const {
  switch (unlabeled_regime) {
    case UnlabeledRegime::consistent: return gamma_l;
    case UnlabeledRegime::uniform: return 1.0;
    case UnlabeledRegime::inverse: return 1.0 / gamma_l;
  }
  return 1.0;
}

std::vector<int> class_counts(const DatasetSpec& spec, Split split) {
  spec.validate();
  if (split == Split::labeled) return exp_profile(spec.n1, spec.gamma_l, spec.num_classes);
  switch (spec.unlabeled_regime) {
    case UnlabeledRegime::consistent:
      return exp_profile(spec.m_anchor, spec.gamma_l, spec.num_classes);
    case UnlabeledRegime::uniform:
      return std::vector<int>(static_cast<std::size_t>(spec.num_classes), spec.m_anchor);
    case UnlabeledRegime::inverse: {
      auto counts = exp_profile(spec.m_anchor, spec.gamma_l, spec.num_classes);
      std::reverse(counts.begin(), counts.end());
      return counts;
    }
  }
  return {};
}

IntervalPartition IntervalPartition::default_for(int num_classes) {
  int h = std::max(1, static_cast<int>(std::floor(0.2 * num_classes)));
  int t = std::max(1, static_cast<int>(std::floor(0.6 * num_classes)));
  if (h + t >= num_classes) t = std::max(1, num_classes - h - 1);
  if (h + t >= num_classes) h = 1;
  IntervalPartition p;
  for (int c = 0; c < h; ++c) p.head.push_back(c);
  for (int c = h; c < num_classes - t; ++c) p.medium.push_back(c);
  for (int c = num_classes - t; c < num_classes; ++c) p.tail.push_back(c);
  p.validate(num_classes);
  return p;
}

void IntervalPartition::validate(int num_classes) const {
  if (head.empty() || medium.empty() || tail.empty())
    throw std::invalid_argument("partition: head, medium, and tail must each be nonempty");
  std::vector<int> seen(static_cast<std::size_t>(num_classes), 0);
  for (const auto* set : {&head, &medium, &tail})
    for (int c : *set) {
      if (c < 0 || c >= num_classes)
        throw std::invalid_argument("partition: class " + std::to_string(c) + " out of range");
      ++seen[static_cast<std::size_t>(c)];
    }
  for (int c = 0; c < num_classes; ++c)
    if (seen[static_cast<std::size_t>(c)] != 1)
      throw std::invalid_argument("partition: class " + std::to_string(c) +
                                  " covered " + std::to_string(seen[static_cast<std::size_t>(c)]) +
                                  " times");
}

int IntervalPartition::membership_of(int class_index) const {
  for (int c : head)
    if (c == class_index) return 0;
  for (int c : medium)
    if (c == class_index) return 1;
  for (int c : tail)
    if (c == class_index) return 2;
  throw std::invalid_argument("membership_of: class " + std::to_string(class_index) +
                              " not in partition");
}

SplitPair generate(const DatasetSpec& spec) {
  spec.validate();
  SplitPair ds;
  ds.spec = spec;
  ds.labeled_counts = class_counts(spec, Split::labeled);
  ds.unlabeled_counts = class_counts(spec, Split::unlabeled);
  ds.class_centers = draw_centers(spec);

  const int c_count = spec.num_classes, d = spec.feature_dim;
  ds.min_center_distance = std::numeric_limits<double>::infinity();
  for (int a = 0; a < c_count; ++a)
    for (int b = a + 1; b < c_count; ++b) {
      double dist2 = 0.0;
      for (int j = 0; j < d; ++j) {
        const double diff = ds.class_centers[static_cast<std::size_t>(a) * d + j] -
                            ds.class_centers[static_cast<std::size_t>(b) * d + j];
        dist2 += diff * diff;
      }
      ds.min_center_distance = std::min(ds.min_center_distance, std::sqrt(dist2));
    }

  Rng lab_rng(spec.seed, kStreamLabeled);
  Rng unl_rng(spec.seed, kStreamUnlabeled);
  for (int c = 0; c < c_count; ++c)
    draw_class_samples(ds.class_centers, c, d, ds.labeled_counts[c], spec.blob_spread,
                       lab_rng, ds.labeled_x, ds.labeled_y);
  for (int c = 0; c < c_count; ++c)
    draw_class_samples(ds.class_centers, c, d, ds.unlabeled_counts[c], spec.blob_spread,
                       unl_rng, ds.unlabeled_x, ds.unlabeled_true_y);

  const double n_total = static_cast<double>(ds.labeled_y.size());
  ds.pi.resize(static_cast<std::size_t>(c_count));
  for (int c = 0; c < c_count; ++c)
    ds.pi[static_cast<std::size_t>(c)] = ds.labeled_counts[c] / n_total;
  return ds;
}

TestSplit generate_test_split(const DatasetSpec& spec, int per_class) {
  spec.validate();
  if (per_class < 1) throw std::invalid_argument("test_per_class: must be >= 1");
  TestSplit t;
  t.num_classes = spec.num_classes;
  t.feature_dim = spec.feature_dim;
  const auto centers = draw_centers(spec);
  Rng rng(spec.seed, kStreamTest);
  for (int c = 0; c < spec.num_classes; ++c)
    draw_class_samples(centers, c, spec.feature_dim, per_class, spec.blob_spread, rng, t.x, t.y);
  return t;
}

std::vector<double> augment(const double* x, int dim, const AugmentationPolicy& policy,
                            AugmentStrength strength, Rng& rng) {
  std::vector<double> out(x, x + dim);
  const double sigma = strength == AugmentStrength::weak ? policy.weak_noise_sigma
                                                         : policy.strong_noise_sigma;
  for (int j = 0; j < dim; ++j) out[static_cast<std::size_t>(j)] += sigma * rng.normal();
  if (strength == AugmentStrength::strong) {
    const int k = static_cast<int>(std::llround(policy.strong_mask_fraction * dim));
    if (k > 0) {
      const auto perm = rng.permutation(static_cast<std::uint32_t>(dim));
      for (int i = 0; i < k; ++i) out[perm[static_cast<std::size_t>(i)]] = 0.0;
    }
  }
  return out;
}

void save_dataset(const SplitPair& ds, const std::string& path) {
  io::Writer w(path);
  w.u32(kDatasetMagic);
  w.u32(kDatasetVersion);
  w.u32(static_cast<std::uint32_t>(ds.spec.num_classes));
  w.u32(static_cast<std::uint32_t>(ds.spec.feature_dim));
  w.u64(ds.spec.seed);
  w.f64(ds.spec.gamma_l);
  w.u8(static_cast<std::uint8_t>(ds.spec.unlabeled_regime));
  w.f64(ds.spec.blob_spread);
  w.u32(static_cast<std::uint32_t>(ds.spec.n1));
  w.u32(static_cast<std::uint32_t>(ds.spec.m_anchor));
  w.f64(ds.spec.augment.weak_noise_sigma);
  w.f64(ds.spec.augment.strong_noise_sigma);
  w.f64(ds.spec.augment.strong_mask_fraction);
  w.u32(static_cast<std::uint32_t>(ds.n_labeled()));
  w.u32(static_cast<std::uint32_t>(ds.m_unlabeled()));
  for (int c : ds.labeled_counts) w.u32(static_cast<std::uint32_t>(c));
  for (int c : ds.unlabeled_counts) w.u32(static_cast<std::uint32_t>(c));
  w.f64(ds.min_center_distance);
  w.f64s(ds.class_centers);
  const int d = ds.spec.feature_dim;
  for (int i = 0; i < ds.n_labeled(); ++i) {
    w.u8(0);
    w.u32(static_cast<std::uint32_t>(ds.labeled_y[static_cast<std::size_t>(i)]));
    w.bytes(ds.labeled_x.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d) * 8);
  }
  for (int i = 0; i < ds.m_unlabeled(); ++i) {
    w.u8(1);
    w.u32(static_cast<std::uint32_t>(ds.unlabeled_true_y[static_cast<std::size_t>(i)]));
    w.bytes(ds.unlabeled_x.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d) * 8);
  }
}

SplitPair load_dataset(const std::string& path) {
  io::Reader r(path);
  if (r.u32() != kDatasetMagic) throw IoError("not a dataset container: " + path);
  if (const auto v = r.u32(); v != kDatasetVersion)
    throw IoError("unsupported dataset version " + std::to_string(v) + ": " + path);
  SplitPair ds;
  ds.spec.num_classes = static_cast<int>(r.u32());
  ds.spec.feature_dim = static_cast<int>(r.u32());
  ds.spec.seed = r.u64();
  ds.spec.gamma_l = r.f64();
  ds.spec.unlabeled_regime = static_cast<UnlabeledRegime>(r.u8());
  ds.spec.blob_spread = r.f64();
  ds.spec.n1 = static_cast<int>(r.u32());
  ds.spec.m_anchor = static_cast<int>(r.u32());
  ds.spec.augment.weak_noise_sigma = r.f64();
  ds.spec.augment.strong_noise_sigma = r.f64();
  ds.spec.augment.strong_mask_fraction = r.f64();
  const int n = static_cast<int>(r.u32());
  const int m = static_cast<int>(r.u32());
  const int c_count = ds.spec.num_classes, d = ds.spec.feature_dim;
  ds.labeled_counts.resize(static_cast<std::size_t>(c_count));
  ds.unlabeled_counts.resize(static_cast<std::size_t>(c_count));
  for (auto& c : ds.labeled_counts) c = static_cast<int>(r.u32());
  for (auto& c : ds.unlabeled_counts) c = static_cast<int>(r.u32());
  ds.min_center_distance = r.f64();
  ds.class_centers = r.f64s(static_cast<std::size_t>(c_count) * d);
  ds.labeled_x.reserve(static_cast<std::size_t>(n) * d);
  ds.unlabeled_x.reserve(static_cast<std::size_t>(m) * d);
  for (int i = 0; i < n + m; ++i) {
    const std::uint8_t tag = r.u8();
    const int label = static_cast<int>(r.u32());
    auto features = r.f64s(static_cast<std::size_t>(d));
    if (tag == 0) {
      ds.labeled_y.push_back(label);
      ds.labeled_x.insert(ds.labeled_x.end(), features.begin(), features.end());
    } else if (tag == 1) {
      ds.unlabeled_true_y.push_back(label);
      ds.unlabeled_x.insert(ds.unlabeled_x.end(), features.begin(), features.end());
    } else {
      throw IoError("bad split tag in " + path);
    }
  }
  if (ds.n_labeled() != n || ds.m_unlabeled() != m)
    throw IoError("record counts disagree with header: " + path);
  const double n_total = static_cast<double>(n);
  ds.pi.resize(static_cast<std::size_t>(c_count));
  for (int c = 0; c < c_count; ++c)
    ds.pi[static_cast<std::size_t>(c)] = ds.labeled_counts[c] / n_total;
  return ds;
}

}  // namespace ltssl
