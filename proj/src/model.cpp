#include "ltssl/model.hpp"

#include <cmath>
#include <stdexcept>

namespace ltssl {

namespace {
// Substream of the training seed used for parameter init (dataset substreams
// are 0..3, batch shuffling is 5, augmentation is 6; see train.cpp).
constexpr std::uint64_t kStreamModelInit = 4;
}  // namespace

std::string to_string(MffStrategy s) {
  return s == MffStrategy::add ? "add" : "concat";
}

MffStrategy mff_strategy_from_string(const std::string& s) {
  if (s == "add") return MffStrategy::add;
  if (s == "concat") return MffStrategy::concat;
  throw std::invalid_argument("mff_strategy: expected add|concat, got '" + s + "'");
}

void EncoderConfig::validate() const {
  if (layer_widths.empty()) throw std::invalid_argument("layer_widths: must be nonempty");
  for (int w : layer_widths)
    if (w < 1) throw std::invalid_argument("layer_widths: widths must be >= 1");
  const int n = static_cast<int>(layer_widths.size());
  for (int i = 0; i < 3; ++i) {
    if (tap_indices[static_cast<std::size_t>(i)] < 0 ||
        tap_indices[static_cast<std::size_t>(i)] >= n)
      throw std::invalid_argument("tap_indices: index out of range");
    if (i > 0 && tap_indices[static_cast<std::size_t>(i)] <= tap_indices[static_cast<std::size_t>(i - 1)])
      throw std::invalid_argument("tap_indices: must be strictly increasing");
  }
}

int ModelConfig::fused_dim() const {
  if (mff.fused_dim > 0) return mff.fused_dim;
  return encoder.layer_widths[static_cast<std::size_t>(encoder.tap_indices[2])];
}

void ModelConfig::validate() const {
  if (input_dim < 1) throw std::invalid_argument("input_dim: must be >= 1");
  if (num_classes < 2) throw std::invalid_argument("num_classes: must be >= 2");
  encoder.validate();
  if (mff.fused_dim < 0) throw std::invalid_argument("fused_dim: must be >= 0");
  for (int w : dea.hidden_widths)
    if (w < 1) throw std::invalid_argument("dea hidden_widths: widths must be >= 1");
}

Affine Model::make_affine(const std::string& name, int in, int out, Rng& rng,
                          std::vector<NamedParam>& reg) {
  std::vector<double> w(static_cast<std::size_t>(in) * out);
  const double scale = 1.0 / std::sqrt(static_cast<double>(in));
  for (auto& v : w) v = scale * rng.normal();
  Affine a;
  a.weight = Tensor::from({in, out}, std::move(w), /*requires_grad=*/true);
  a.bias = Tensor::zeros({out}, /*requires_grad=*/true);
  reg.push_back({name + ".weight", a.weight});
  reg.push_back({name + ".bias", a.bias});
  return a;
}

Tensor Model::apply(Tape& tape, const Affine& a, const Tensor& x) const {
  return add(tape, matmul(tape, x, a.weight), a.bias);
}

Model::Model(ModelConfig cfg, std::uint64_t init_seed) : cfg_(std::move(cfg)) {
  cfg_.validate();
  Rng rng(init_seed, kStreamModelInit);
  const int fused = cfg_.fused_dim();
  const int c_count = cfg_.num_classes;

  int in = cfg_.input_dim;
  for (std::size_t i = 0; i < cfg_.encoder.layer_widths.size(); ++i) {
    const int out = cfg_.encoder.layer_widths[i];
    encoder_.push_back(make_affine("encoder.layer" + std::to_string(i), in, out, rng, base_params_));
    in = out;
  }

  const auto tap_width = [&](int t) {
    return cfg_.encoder.layer_widths[static_cast<std::size_t>(cfg_.encoder.tap_indices[static_cast<std::size_t>(t)])];
  };
  align1_ = make_affine("mff.align1", tap_width(0), fused, rng, base_params_);
  align2_ = make_affine("mff.align2", tap_width(1), fused, rng, base_params_);
  align_deep_ = make_affine("mff.align_deep", tap_width(2), fused, rng, base_params_);
  if (cfg_.mff.strategy == MffStrategy::add)
    align3_ = make_affine("mff.align3", fused, fused, rng, base_params_);
  else
    proj_ = make_affine("mff.proj", 3 * fused, fused, rng, base_params_);

  for (int k = 0; k < 3; ++k)
    experts_[static_cast<std::size_t>(k)] =
        make_affine("expert" + std::to_string(k + 1), fused, c_count, rng, base_params_);

  int din = fused + 3 * c_count;
  for (std::size_t i = 0; i < cfg_.dea.hidden_widths.size(); ++i) {
    const int out = cfg_.dea.hidden_widths[i];
    dea_.push_back(make_affine("dea.layer" + std::to_string(i), din, out, rng, dea_params_));
    din = out;
  }
  dea_.push_back(make_affine("dea.out", din, 3, rng, dea_params_));
}

FeatureTaps Model::encode(Tape& tape, const Tensor& x) const {
  if (x.shape().size() != 2 || x.cols() != cfg_.input_dim)
    throw std::invalid_argument("encode: batch of width " + std::to_string(cfg_.input_dim) +
                                " expected, got " + shape_str(x.shape()));
  FeatureTaps taps;
  Tensor h = x;
  for (std::size_t i = 0; i < encoder_.size(); ++i) {
    h = relu(tape, apply(tape, encoder_[i], h));
    const int layer = static_cast<int>(i);
    if (layer == cfg_.encoder.tap_indices[0]) taps.shallow = h;
    if (layer == cfg_.encoder.tap_indices[1]) taps.middle = h;
    if (layer == cfg_.encoder.tap_indices[2]) taps.deep = h;
  }
  return taps;
}

Tensor Model::fuse(Tape& tape, const FeatureTaps& taps) const {
  const Tensor a1 = apply(tape, align1_, taps.shallow);
  const Tensor a2 = apply(tape, align2_, taps.middle);
  const Tensor a3 = apply(tape, align_deep_, taps.deep);
  if (cfg_.mff.strategy == MffStrategy::add) {
    const Tensor cascade = add(tape, a1, a2);
    return add(tape, apply(tape, align3_, cascade), a3);
  }
  return apply(tape, proj_, concat_cols(tape, {a1, a2, a3}));
}

std::array<Tensor, 3> Model::expert_logits(Tape& tape, const Tensor& fused) const {
  return {apply(tape, experts_[0], fused), apply(tape, experts_[1], fused),
          apply(tape, experts_[2], fused)};
}

Tensor Model::dea_weights(Tape& tape, const Tensor& fused, const std::array<Tensor, 3>& z) const {
  std::vector<Tensor> parts{fused};
  for (const auto& zk : z) parts.push_back(cfg_.dea.detach_logits ? zk.detach() : zk);
  Tensor h = concat_cols(tape, parts);
  for (std::size_t i = 0; i + 1 < dea_.size(); ++i) h = relu(tape, apply(tape, dea_[i], h));
  return softmax(tape, apply(tape, dea_.back(), h));
}

Tensor Model::aggregate(Tape& tape, const Tensor& w, const std::array<Tensor, 3>& z) {
  const int n = w.rows();
  Tensor blended;
  for (int k = 0; k < 3; ++k) {
    const std::vector<int> col(static_cast<std::size_t>(n), k);
    const Tensor term = scale_rows(tape, z[static_cast<std::size_t>(k)], gather_cols(tape, w, col));
    blended = k == 0 ? term : add(tape, blended, term);
  }
  return softmax(tape, blended);
}

Model::Forward Model::forward(Tape& tape, const Tensor& x, bool with_router) const {
  Forward f;
  f.taps = encode(tape, x);
  f.fused = fuse(tape, f.taps);
  f.z = expert_logits(tape, f.fused);
  if (with_router) {
    f.w = dea_weights(tape, f.fused, f.z);
    f.y_m = aggregate(tape, f.w, f.z);
  }
  return f;
}

std::vector<NamedParam> Model::parameters() const {
  std::vector<NamedParam> all = base_params_;
  all.insert(all.end(), dea_params_.begin(), dea_params_.end());
  return all;
}

std::vector<NamedParam> Model::base_parameters() const { return base_params_; }
std::vector<NamedParam> Model::dea_parameters() const { return dea_params_; }

ArrayStore Model::export_parameters() const {
  ArrayStore store;
  for (const auto& p : parameters())
    store.f64[p.name] = NamedArray{p.tensor.shape(), p.tensor.values()};
  return store;
}

void Model::import_parameters(const ArrayStore& store) {
  for (auto& p : parameters()) {
    const auto it = store.f64.find(p.name);
    if (it == store.f64.end())
      throw std::invalid_argument("import_parameters: missing array " + p.name);
    if (it->second.shape != p.tensor.shape())
      throw std::invalid_argument("import_parameters: shape mismatch for " + p.name + ": " +
                                  shape_str(it->second.shape) + " vs " +
                                  shape_str(p.tensor.shape()));
    p.tensor.values() = it->second.values;
  }
}

}  // namespace ltssl
