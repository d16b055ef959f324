#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lakenet/autograd.hpp"
#include "lakenet/config.hpp"
#include "lakenet/layers.hpp"
#include "lakenet/point_cloud.hpp"

namespace lakenet {

enum class KeypointSource : std::uint8_t { DetectedFromComplete, GeneratedFromPartial };

/// Keypoints at three scales; index 0 is the finest (K1 points).
struct KeypointSet {
  std::array<PointCloud, 3> scales;
  KeypointSource source = KeypointSource::DetectedFromComplete;
};

struct DetectorConfig {
  std::size_t categories = 8;
  std::array<std::size_t, 3> keypoints{256, 128, 64};
  std::vector<std::size_t> point_widths{64, 128};
  std::size_t feature_width = 256;
  std::size_t block_width = 256;
  std::size_t classifier_hidden = 256;
  /// false replaces the per-category offset bank by one shared offset per scale.
  bool category_offsets = true;

  static DetectorConfig from(const TrainingConfig& cfg);
};

/// Nodes recorded by KeypointDetector::forward.
struct DetectorOutput {
  std::array<nn::Var, 3> template_weights;  ///< W_t per scale, K_i x N
  std::array<nn::Var, 3> weights;           ///< normalized, K_i x N, rows on the simplex
  std::array<nn::Var, 3> keypoints;         ///< K_i x 3
  nn::Var logits;                           ///< 1 x Q
  nn::Var probs;                            ///< softmax(logits)
  std::size_t label = 0;                    ///< argmax of probs, lowest index on ties
};

/// Result of a detached forward pass.
struct Detection {
  KeypointSet keypoints;
  std::array<nn::Tensor, 3> weights;
  std::size_t label = 0;
  std::vector<double> probs;
};

/// Multi-scale convex-combination keypoint detector for complete clouds.
///
/// A shared per-point MLP is max-pooled to a global feature that is
/// concatenated back onto every point; three chained fully connected blocks
/// emit template logits W_t (K_i x N). The category picked by a two-layer
/// classifier on the global feature selects offset matrices O (K_i x K_i),
/// W = softmax_N(W_t + O W_t), and P = W X. Every step is equivariant in the
/// point order up to the final contraction, so P does not depend on it.
class KeypointDetector {
 public:
  KeypointDetector() = default;
  KeypointDetector(const DetectorConfig& config, std::uint64_t seed);

  DetectorOutput forward(nn::Tape& tape, nn::Var cloud) const;
  Detection detect(const PointCloud& cloud) const;

  const DetectorConfig& config() const { return config_; }
  nn::ParameterStore& parameters() { return store_; }
  const nn::ParameterStore& parameters() const { return store_; }

  /// Number of offset matrices per scale: Q with the bank, 1 without.
  std::size_t bank_size() const { return offsets_.size(); }
  nn::Parameter& offset(std::size_t bank, std::size_t scale) const { return *offsets_.at(bank).at(scale); }

 private:
  DetectorConfig config_;
  nn::ParameterStore store_;
  nn::Mlp point_mlp_;
  nn::Linear fuse_;
  std::array<nn::Linear, 3> block_hidden_;
  std::array<nn::Linear, 3> block_out_;
  nn::Mlp classifier_;
  std::vector<std::array<nn::Parameter*, 3>> offsets_;
};

/// P = W X for a (K x N) weight matrix; exposed for forcing arbitrary weights.
PointCloud keypoints_from_weights(const nn::Tensor& weights, const PointCloud& cloud);

/// FPS of `cloud` down to each keypoint count; the X* targets of the detector loss.
std::array<nn::Tensor, 3> downsample_targets(const PointCloud& cloud, const std::array<std::size_t, 3>& counts);

struct DetectorLoss {
  nn::Var keypoint_term;        ///< sum_i CD(P_i, X*_i)
  nn::Var skeleton_term;        ///< sum_i CD(S_i, X); zero scalar when no skeletons are given
  nn::Var classification_term;  ///< BCE of probs against the one-hot label
  nn::Var total;
};

/// Unsupervised detector objective. `label` must index a column of `probs`,
/// otherwise ConfigError.
DetectorLoss umkd_loss(std::span<const nn::Var> keypoints, std::span<const nn::Var> skeletons, nn::Var cloud,
                       std::span<const nn::Var> downsampled, nn::Var probs, std::size_t label);

/// Greedy farthest sampling over feature rows with Euclidean distance;
/// identical rules to farthest_point_sampling.
std::vector<std::size_t> farthest_feature_sampling(const nn::Tensor& features, std::size_t k,
                                                   std::size_t seed_index = 0);

struct GeneratorConfig {
  std::array<std::size_t, 3> keypoints{256, 128, 64};
  std::size_t feature_dim = 1024;
  std::size_t slot_width = 64;
  std::size_t hidden = 256;

  static GeneratorConfig from(const TrainingConfig& cfg);
};

/// Predicts complete keypoints from partial-cloud features.
///
/// Per scale: FFS picks K_i rows of the local features, a linear expansion of
/// the global feature yields one slot vector per keypoint, and the pair passes
/// through a residual block to unconstrained K_i x 3 coordinates.
class KeypointGenerator {
 public:
  KeypointGenerator() = default;
  KeypointGenerator(const GeneratorConfig& config, std::uint64_t seed);

  /// `local` is N_p x d, `global` 1 x d. Throws CardinalityError when N_p < K1.
  std::array<nn::Var, 3> forward(nn::Tape& tape, nn::Var local, nn::Var global) const;
  KeypointSet generate(const nn::Tensor& local, const nn::Tensor& global) const;

  const GeneratorConfig& config() const { return config_; }
  nn::ParameterStore& parameters() { return store_; }
  const nn::ParameterStore& parameters() const { return store_; }

 private:
  struct Scale {
    nn::Linear expand;
    nn::Linear in;
    nn::Linear mid;
    nn::Linear skip;
    nn::Linear out;
  };

  GeneratorConfig config_;
  nn::ParameterStore store_;
  std::array<Scale, 3> scales_;
};

/// sum over scales and index-matched keypoints of |p_hat - p|^2. Scale count or
/// per-scale shape mismatch raises CardinalityError.
nn::Var ckg_loss(std::span<const nn::Var> generated, std::span<const nn::Var> detected);

}  // namespace lakenet
