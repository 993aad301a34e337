#ifndef LTSSL_DATASET_HPP
#define LTSSL_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ltssl/rng.hpp"

namespace ltssl {

enum class UnlabeledRegime { consistent, uniform, inverse };

std::string to_string(UnlabeledRegime r);
UnlabeledRegime regime_from_string(const std::string& s);

// Feature-space stand-ins for weak/strong image augmentation: weak adds
// isotropic Gaussian noise, strong adds stronger noise and then zeroes a
// fixed fraction of coordinates.
struct AugmentationPolicy {
  double weak_noise_sigma = 0.1;
  double strong_noise_sigma = 0.25;
  double strong_mask_fraction = 0.25;
};

// Declarative description of one long-tailed labeled split plus an unlabeled
// split under one of three regimes. gamma_u is implied: gamma_l (consistent),
// 1 (uniform), or 1/gamma_l (inverse). m_anchor is the unlabeled count of the
// largest class: class 0 for consistent/uniform, class C-1 for inverse.
struct DatasetSpec {
  int num_classes = 10;
  int feature_dim = 16;
  int n1 = 300;
  int m_anchor = 600;
  double gamma_l = 50.0;
  UnlabeledRegime unlabeled_regime = UnlabeledRegime::consistent;
  double blob_spread = 0.6;
  std::uint64_t seed = 1;
  AugmentationPolicy augment;

  void validate() const;  // throws std::invalid_argument naming the field
  double gamma_u() const;
};

enum class Split { labeled, unlabeled };

// Per-class sample counts. Labeled counts follow the exponential profile
// N_c = max(1, round(N1 * gamma_l^(-c/(C-1)))), c = 0..C-1, rounded half away
// from zero. Unlabeled counts reuse the profile per regime: same shape with
// anchor M1 (consistent), all equal to M1 (uniform), or the profile reversed
// with anchor M_C (inverse).
std::vector<int> class_counts(const DatasetSpec& spec, Split split);

// Head/medium/tail partition of class indices, ordered by labeled-frequency
// rank (class 0 is the largest). Default for C=10 is head {0,1}, medium
// {2,3}, tail {4..9}; otherwise head is the top 20% of classes (min 1), tail
// the bottom 60% (min 1), medium the rest.
struct IntervalPartition {
  std::vector<int> head;
  std::vector<int> medium;
  std::vector<int> tail;

  static IntervalPartition default_for(int num_classes);
  void validate(int num_classes) const;  // the three sets partition 0..C-1, each nonempty
  int membership_of(int class_index) const;  // 0 head, 1 medium, 2 tail
};

// One generated dataset: features are row-major [count, feature_dim].
// unlabeled_true_y is ground truth carried for the evaluation oracle only;
// nothing on the training path may read it.
struct SplitPair {
  DatasetSpec spec;
  std::vector<int> labeled_counts;
  std::vector<int> unlabeled_counts;
  std::vector<double> labeled_x;
  std::vector<int> labeled_y;
  std::vector<double> unlabeled_x;
  std::vector<int> unlabeled_true_y;
  std::vector<double> pi;  // labeled label frequency, sums to 1
  std::vector<double> class_centers;  // [C, feature_dim], unit norm rows
  double min_center_distance = 0.0;

  int n_labeled() const { return static_cast<int>(labeled_y.size()); }
  int m_unlabeled() const { return static_cast<int>(unlabeled_true_y.size()); }
};

// Balanced evaluation split drawn from the same class centers.
struct TestSplit {
  int num_classes = 0;
  int feature_dim = 0;
  std::vector<double> x;
  std::vector<int> y;
  int size() const { return static_cast<int>(y.size()); }
};

// Substreams of DatasetSpec.seed: 0 class centers, 1 labeled samples,
// 2 unlabeled samples, 3 test samples. Class-c features are drawn from an
// isotropic Gaussian of sigma blob_spread around a fixed unit-norm center.
SplitPair generate(const DatasetSpec& spec);
TestSplit generate_test_split(const DatasetSpec& spec, int per_class);

enum class AugmentStrength { weak, strong };

// Weak: x + N(0, weak_sigma^2). Strong: x + N(0, strong_sigma^2), then the
// first round(strong_mask_fraction * d) entries of a fresh random coordinate
// permutation are zeroed.
std::vector<double> augment(const double* x, int dim, const AugmentationPolicy& policy,
                            AugmentStrength strength, Rng& rng);

// Binary container (little-endian): header (magic 'LTSD', version, spec
// fields, counts, min center distance, centers) followed by per-sample
// records (u8 split tag, u32 label or hidden label, feature_dim float64).
// Round-trips bit-exactly.
void save_dataset(const SplitPair& ds, const std::string& path);
SplitPair load_dataset(const std::string& path);

}  // namespace ltssl

#endif
