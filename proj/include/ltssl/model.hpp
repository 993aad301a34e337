#ifndef LTSSL_MODEL_HPP
#define LTSSL_MODEL_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ltssl/container.hpp"
#include "ltssl/optim.hpp"
#include "ltssl/rng.hpp"
#include "ltssl/tensor.hpp"

namespace ltssl {

struct EncoderConfig {
  std::vector<int> layer_widths{64, 64, 64};
  std::array<int, 3> tap_indices{0, 1, 2};  // shallow/middle/deep hidden layers
  void validate() const;
};

enum class MffStrategy { add, concat };

std::string to_string(MffStrategy s);
MffStrategy mff_strategy_from_string(const std::string& s);

struct MffConfig {
  MffStrategy strategy = MffStrategy::add;
  int fused_dim = 0;  // 0 = width of the deep tap
};

struct DeaConfig {
  std::vector<int> hidden_widths{64};
  // When set, expert logits enter the router as values only; router gradients
  // reach the trunk through the fused feature, not through the expert heads.
  bool detach_logits = true;
};

struct ModelConfig {
  int input_dim = 16;
  int num_classes = 10;
  EncoderConfig encoder;
  MffConfig mff;
  DeaConfig dea;

  int fused_dim() const;
  void validate() const;
};

struct FeatureTaps {
  Tensor shallow;
  Tensor middle;
  Tensor deep;
};

struct Affine {
  Tensor weight;  // [in, out]
  Tensor bias;    // [out]
};

// Three-expert network over a shared MLP encoder: per-depth feature taps,
// trainable multi-depth fusion, three classification heads, and a routing
// MLP producing per-sample expert weights. The aggregator is the softmax of
// the weight-blended expert logits.
class Model {
 public:
  Model(ModelConfig cfg, std::uint64_t init_seed);

  const ModelConfig& config() const { return cfg_; }

  // Activations after each designated hidden layer (affine + ReLU).
  FeatureTaps encode(Tape& tape, const Tensor& x) const;

  // add:    v = Align3(Align1(v1) + Align2(v2)) + AlignDeep(v3)
  // concat: v = Proj(concat(Align1(v1), Align2(v2), AlignDeep(v3)))
  // Either way the result is [batch, fused_dim].
  Tensor fuse(Tape& tape, const FeatureTaps& taps) const;

  std::array<Tensor, 3> expert_logits(Tape& tape, const Tensor& fused) const;

  // w = softmax(MLP([v, z1, z2, z3])), one probability row per sample.
  Tensor dea_weights(Tape& tape, const Tensor& fused, const std::array<Tensor, 3>& z) const;

  // y_m = softmax(sum_k w_k z_k)
  static Tensor aggregate(Tape& tape, const Tensor& w, const std::array<Tensor, 3>& z);

  struct Forward {
    FeatureTaps taps;
    Tensor fused;
    std::array<Tensor, 3> z;
    Tensor w;    // defined only when the router ran
    Tensor y_m;  // likewise
  };
  Forward forward(Tape& tape, const Tensor& x, bool with_router) const;

  // Deterministic order: encoder, fusion, experts, router. base_parameters()
  // is everything except the router group.
  std::vector<NamedParam> parameters() const;
  std::vector<NamedParam> base_parameters() const;
  std::vector<NamedParam> dea_parameters() const;

  ArrayStore export_parameters() const;
  // Requires an exact name/shape match; throws std::invalid_argument naming
  // the offending array.
  void import_parameters(const ArrayStore& store);

 private:
  Affine make_affine(const std::string& name, int in, int out, Rng& rng,
                     std::vector<NamedParam>& reg);
  Tensor apply(Tape& tape, const Affine& a, const Tensor& x) const;

  ModelConfig cfg_;
  std::vector<Affine> encoder_;
  Affine align1_, align2_, align_deep_;
  Affine align3_;  // add strategy only
  Affine proj_;    // concat strategy only
  std::array<Affine, 3> experts_;
  std::vector<Affine> dea_;
  std::vector<NamedParam> base_params_;
  std::vector<NamedParam> dea_params_;
};

}  // namespace ltssl

#endif
