#include "lakenet/keypoints.hpp"

#include <string>

#include "lakenet/convert.hpp"
#include "lakenet/errors.hpp"
#include "lakenet/metrics.hpp"

namespace lakenet {
namespace {

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

std::string scale_name(const char* prefix, std::size_t i) { return prefix + std::to_string(i + 1); }

}  // namespace

DetectorConfig DetectorConfig::from(const TrainingConfig& cfg) {
  DetectorConfig d;
  d.categories = cfg.categories;
  d.keypoints = cfg.keypoints;
  d.point_widths = cfg.detector_point_widths;
  d.feature_width = cfg.detector_feature_width;
  d.block_width = cfg.detector_block_width;
  d.classifier_hidden = cfg.classifier_hidden;
  d.category_offsets = cfg.category_offsets;
  return d;
}

KeypointDetector::KeypointDetector(const DetectorConfig& config, std::uint64_t seed) : config_(config) {
  if (config_.categories == 0) throw ConfigError("detector needs at least one category");
  if (config_.point_widths.empty()) throw ConfigError("detector needs at least one point layer");
  Rng rng(seed);
  point_mlp_ = nn::Mlp(store_, "point", 3, config_.point_widths, rng, /*relu_last=*/true);
  const std::size_t pw = point_mlp_.out_features();
  fuse_ = nn::Linear(store_, "fuse", 2 * pw, config_.feature_width, rng);
  std::size_t in = config_.feature_width;
  for (std::size_t i = 0; i < 3; ++i) {
    block_hidden_[i] = nn::Linear(store_, scale_name("block", i) + ".hidden", in, config_.block_width, rng);
    block_out_[i] = nn::Linear(store_, scale_name("block", i) + ".out", config_.block_width, config_.keypoints[i], rng);
    in = config_.block_width;
  }
  classifier_ = nn::Mlp(store_, "classifier", pw, {config_.classifier_hidden, config_.categories}, rng);
  const std::size_t banks = config_.category_offsets ? config_.categories : 1;
  for (std::size_t q = 0; q < banks; ++q) {
    std::array<nn::Parameter*, 3> per_scale{};
    for (std::size_t i = 0; i < 3; ++i) {
      const std::size_t k = config_.keypoints[i];
      per_scale[i] = &store_.add("offset." + std::to_string(q) + "." + std::to_string(i + 1), nn::Tensor(k, k));
    }
    offsets_.push_back(per_scale);
  }
}

DetectorOutput KeypointDetector::forward(nn::Tape& tape, nn::Var cloud) const {
  if (cloud.cols() != 3) throw ShapeError("detector input must be N x 3, got " + cloud.value().shape_string());
  if (cloud.rows() == 0) throw CardinalityError("detector input cloud is empty");
  const std::size_t n = cloud.rows();

  nn::Var h = point_mlp_(tape, cloud);
  nn::Var g = nn::max_pool(h, 0);
  const std::array<nn::Var, 2> parts{h, nn::repeat_rows(g, n)};
  nn::Var prev = nn::relu(fuse_(tape, nn::concat(parts, 1)));

  DetectorOutput out;
  out.logits = classifier_(tape, g);
  out.probs = nn::softmax(out.logits, 1);
  out.label = argmax(out.probs.value().values());
  const std::size_t bank = config_.category_offsets ? out.label : 0;

  for (std::size_t i = 0; i < 3; ++i) {
    nn::Var hidden = nn::relu(block_hidden_[i](tape, prev));
    nn::Var wt = nn::transpose(block_out_[i](tape, hidden));
    nn::Var o = tape.param(*offsets_[bank][i]);
    nn::Var w = nn::softmax(wt + nn::matmul(o, wt), 1);
    out.template_weights[i] = wt;
    out.weights[i] = w;
    out.keypoints[i] = nn::matmul(w, cloud);
    prev = hidden;
  }
  return out;
}

Detection KeypointDetector::detect(const PointCloud& cloud) const {
  nn::Tape tape;
  const DetectorOutput out = forward(tape, tape.constant(cloud_tensor(cloud)));
  Detection d;
  d.keypoints.source = KeypointSource::DetectedFromComplete;
  for (std::size_t i = 0; i < 3; ++i) {
    d.keypoints.scales[i] = tensor_cloud(out.keypoints[i].value());
    d.weights[i] = out.weights[i].value();
  }
  d.label = out.label;
  const auto p = out.probs.value().values();
  d.probs.assign(p.begin(), p.end());
  return d;
}

PointCloud keypoints_from_weights(const nn::Tensor& weights, const PointCloud& cloud) {
  if (weights.cols() != cloud.size()) {
    throw ShapeError("weights " + weights.shape_string() + " do not match a cloud of " +
                     std::to_string(cloud.size()) + " points");
  }
  nn::Tape tape;
  return tensor_cloud(nn::matmul(tape.constant(weights), tape.constant(cloud_tensor(cloud))).value());
}

std::array<nn::Tensor, 3> downsample_targets(const PointCloud& cloud, const std::array<std::size_t, 3>& counts) {
  std::array<nn::Tensor, 3> out;
  for (std::size_t i = 0; i < 3; ++i) {
    out[i] = cloud_tensor(cloud.subset(farthest_point_sampling(cloud, counts[i])));
  }
  return out;
}

DetectorLoss umkd_loss(std::span<const nn::Var> keypoints, std::span<const nn::Var> skeletons, nn::Var cloud,
                       std::span<const nn::Var> downsampled, nn::Var probs, std::size_t label) {
  if (keypoints.size() != downsampled.size() || keypoints.empty()) {
    throw CardinalityError("detector loss needs one downsampled target per keypoint scale");
  }
  if (probs.rows() != 1 || label >= probs.cols()) {
    throw ConfigError("category label " + std::to_string(label) + " outside the " +
                      std::to_string(probs.cols()) + " classifier outputs");
  }
  nn::Tape& tape = cloud.tape();
  DetectorLoss loss;
  loss.keypoint_term = nn::chamfer(keypoints[0], downsampled[0]);
  for (std::size_t i = 1; i < keypoints.size(); ++i) {
    loss.keypoint_term = loss.keypoint_term + nn::chamfer(keypoints[i], downsampled[i]);
  }
  if (skeletons.empty()) {
    loss.skeleton_term = tape.constant(nn::Tensor::scalar(0.0));
  } else {
    loss.skeleton_term = nn::chamfer(skeletons[0], cloud);
    for (std::size_t i = 1; i < skeletons.size(); ++i) {
      loss.skeleton_term = loss.skeleton_term + nn::chamfer(skeletons[i], cloud);
    }
  }
  std::vector<double> one_hot(probs.cols(), 0.0);
  one_hot[label] = 1.0;
  loss.classification_term = nn::binary_cross_entropy(probs, one_hot);
  loss.total = loss.keypoint_term + loss.skeleton_term + loss.classification_term;
  return loss;
}

std::vector<std::size_t> farthest_feature_sampling(const nn::Tensor& features, std::size_t k,
                                                   std::size_t seed_index) {
  if (features.cols() == 0) throw ShapeError("feature sampling needs at least one feature column");
  return farthest_sampling(features.values(), features.cols(), k, seed_index);
}

GeneratorConfig GeneratorConfig::from(const TrainingConfig& cfg) {
  GeneratorConfig g;
  g.keypoints = cfg.keypoints;
  g.feature_dim = cfg.encoder_second_widths.back();
  g.slot_width = cfg.generator_slot_width;
  g.hidden = cfg.generator_hidden;
  return g;
}

KeypointGenerator::KeypointGenerator(const GeneratorConfig& config, std::uint64_t seed) : config_(config) {
  Rng rng(seed);
  const std::size_t d = config_.feature_dim;
  const std::size_t fused = d + config_.slot_width;
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string p = scale_name("scale", i);
    Scale& s = scales_[i];
    s.expand = nn::Linear(store_, p + ".expand", d, config_.keypoints[i] * config_.slot_width, rng);
    s.in = nn::Linear(store_, p + ".in", fused, config_.hidden, rng);
    s.mid = nn::Linear(store_, p + ".mid", config_.hidden, config_.hidden, rng);
    s.skip = nn::Linear(store_, p + ".skip", fused, config_.hidden, rng);
    s.out = nn::Linear(store_, p + ".out", config_.hidden, 3, rng);
  }
}

std::array<nn::Var, 3> KeypointGenerator::forward(nn::Tape& tape, nn::Var local, nn::Var global) const {
  if (local.cols() != config_.feature_dim || global.cols() != config_.feature_dim || global.rows() != 1) {
    throw ShapeError("generator expects N x " + std::to_string(config_.feature_dim) + " and 1 x " +
                     std::to_string(config_.feature_dim) + " features, got " + local.value().shape_string() +
                     " and " + global.value().shape_string());
  }
  if (local.rows() < config_.keypoints[0]) {
    throw CardinalityError("generator needs at least K1 = " + std::to_string(config_.keypoints[0]) +
                           " feature rows, got " + std::to_string(local.rows()));
  }
  std::array<nn::Var, 3> out;
  for (std::size_t i = 0; i < 3; ++i) {
    const Scale& s = scales_[i];
    const std::size_t k = config_.keypoints[i];
    const auto idx = farthest_feature_sampling(local.value(), k);
    nn::Var sampled = nn::gather_rows(local, idx);
    nn::Var slots = nn::reshape(s.expand(tape, global), k, config_.slot_width);
    const std::array<nn::Var, 2> parts{sampled, slots};
    nn::Var x = nn::concat(parts, 1);
    nn::Var r = s.mid(tape, nn::relu(s.in(tape, x))) + s.skip(tape, x);
    out[i] = s.out(tape, nn::relu(r));
  }
  return out;
}

KeypointSet KeypointGenerator::generate(const nn::Tensor& local, const nn::Tensor& global) const {
  nn::Tape tape;
  const auto vars = forward(tape, tape.constant(local), tape.constant(global));
  KeypointSet set;
  set.source = KeypointSource::GeneratedFromPartial;
  for (std::size_t i = 0; i < 3; ++i) set.scales[i] = tensor_cloud(vars[i].value());
  return set;
}

nn::Var ckg_loss(std::span<const nn::Var> generated, std::span<const nn::Var> detected) {
  if (generated.size() != detected.size() || generated.empty()) {
    throw CardinalityError("keypoint supervision needs matching scale counts, got " +
                           std::to_string(generated.size()) + " and " + std::to_string(detected.size()));
  }
  nn::Var total;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    if (!generated[i].value().same_shape(detected[i].value())) {
      throw CardinalityError("scale " + std::to_string(i + 1) + ": generated " +
                             generated[i].value().shape_string() + " vs detected " +
                             detected[i].value().shape_string());
    }
    nn::Var term = nn::squared_norm(generated[i] - detected[i]);
    total = total.valid() ? total + term : term;
  }
  return total;
}

}  // namespace lakenet
