#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lakenet/autograd.hpp"
#include "lakenet/config.hpp"
#include "lakenet/dataset.hpp"
#include "lakenet/keypoints.hpp"
#include "lakenet/layers.hpp"
#include "lakenet/skeleton.hpp"

namespace lakenet {

struct AutoEncoderConfig {
  std::vector<std::size_t> first_widths{128, 256};
  std::vector<std::size_t> second_widths{512, 1024};
  std::size_t coarse_points = 1024;
  std::size_t decoder_hidden = 1024;

  static AutoEncoderConfig from(const TrainingConfig& cfg);
};

/// Two-stage point encoder with a fully connected coarse decoder.
///
/// mlp1 -> max-pool -> concat(pointwise, pooled) -> mlp2 gives the local
/// features f (N x d); the global feature is their column maximum. The
/// decoder maps the global feature to coarse_points x 3 coordinates.
class AutoEncoder {
 public:
  struct Encoding {
    nn::Var local;
    nn::Var global;
  };
  struct Features {
    nn::Tensor local;
    nn::Tensor global;
  };

  AutoEncoder() = default;
  AutoEncoder(const AutoEncoderConfig& config, std::uint64_t seed);

  Encoding encode(nn::Tape& tape, nn::Var cloud) const;
  nn::Var generate(nn::Tape& tape, nn::Var global) const;

  Features encode(const PointCloud& cloud) const;
  PointCloud generate_coarse(const nn::Tensor& global) const;

  std::size_t feature_dim() const { return config_.second_widths.back(); }
  const AutoEncoderConfig& config() const { return config_; }
  nn::ParameterStore& parameters() { return store_; }
  const nn::ParameterStore& parameters() const { return store_; }

 private:
  AutoEncoderConfig config_;
  nn::ParameterStore store_;
  nn::Mlp first_;
  nn::Mlp second_;
  nn::Mlp decoder_;
};

/// Per-copy 2-D codes appended before the offset head: copy j of an up factor
/// u sits on a ceil(sqrt(u)) square grid spanning [-0.5, 0.5]^2. Row
/// r * up + j of the result holds the code of copy j.
nn::Tensor folding_grid(std::size_t up_factor, std::size_t rows);

/// Row indices that repeat each of `rows` entries `up_factor` times in place.
std::vector<std::size_t> interleave_indices(std::size_t rows, std::size_t up_factor);

struct RefinementConfig {
  std::array<std::size_t, 3> up_factors{1, 1, 2};
  std::size_t condition_dim = 1024;
  /// point layer 1, point layer 2, fused hidden, offset head hidden.
  std::array<std::size_t, 4> widths{64, 128, 128, 64};

  static RefinementConfig from(const TrainingConfig& cfg);
};

/// One residual refinement step. The input is concat(coarse, skeleton); each
/// row is duplicated up_factor times and receives a predicted offset. The
/// last offset layer starts at zero so a fresh module is the identity on the
/// duplicated input.
class RsrModule {
 public:
  RsrModule() = default;
  RsrModule(nn::ParameterStore& store, const std::string& prefix, std::size_t up_factor,
            std::size_t condition_dim, const std::array<std::size_t, 4>& widths, Rng& rng);

  /// `coarse` and `skeleton` must have the same row count (ContractError).
  nn::Var operator()(nn::Tape& tape, nn::Var coarse, nn::Var skeleton, nn::Var condition) const;
  PointCloud step(const PointCloud& coarse, const PointCloud& skeleton, const nn::Tensor& condition) const;

  std::size_t up_factor() const { return up_; }
  /// The zero-initialized final layer.
  const nn::Linear& offset_head() const { return head_out_; }

 private:
  std::size_t up_ = 1;
  nn::Linear point1_;
  nn::Linear point2_;
  nn::Linear context_global_;
  nn::Linear context_condition_;
  nn::Linear local_;
  nn::Linear head_hidden_;
  nn::Linear head_out_;
};

/// Three RSR modules applied in sequence, each fed one surface-skeleton.
class RefinementSubnet {
 public:
  RefinementSubnet() = default;
  RefinementSubnet(const RefinementConfig& config, std::uint64_t seed);

  /// `skeletons` are in module order. Returns the output of every module.
  std::array<nn::Var, 3> forward(nn::Tape& tape, nn::Var coarse, std::span<const nn::Var> skeletons,
                                 nn::Var condition) const;

  const RsrModule& module(std::size_t i) const { return modules_.at(i); }
  const RefinementConfig& config() const { return config_; }
  nn::ParameterStore& parameters() { return store_; }
  const nn::ParameterStore& parameters() const { return store_; }

 private:
  RefinementConfig config_;
  nn::ParameterStore store_;
  std::array<RsrModule, 3> modules_;
};

/// Scale consumed by refinement module m: coarsest keypoints feed the first.
constexpr std::size_t module_scale(std::size_t m) { return 2 - m; }

/// Skeleton points as a differentiable function of the keypoints they were
/// interpolated from.
nn::Var skeleton_var(nn::Var keypoints, const SurfaceSkeleton& skeleton);

struct Stage1Targets {
  std::array<nn::Tensor, 3> downsampled;
};

struct Stage1Terms {
  nn::Var reconstruction;  ///< CD(Xc, X) + CD(Xf, X)
  nn::Var keypoint;        ///< detector loss
  DetectorLoss keypoint_parts;
  nn::Var total;           ///< reconstruction + lambda_kp1 * keypoint
};

struct Stage1Pass {
  DetectorOutput detection;
  AutoEncoder::Encoding encoding;
  nn::Var coarse;
  std::array<SurfaceSkeleton, 3> skeletons;  ///< by keypoint scale
  std::array<nn::Var, 3> skeleton_points;
  std::array<nn::Var, 3> refined;            ///< by module
  Stage1Terms terms;
};

/// Supervision produced by the frozen detector and reconstruction encoder.
struct Stage2Targets {
  std::array<nn::Tensor, 3> keypoints;
  nn::Tensor global;
};

struct Stage2Terms {
  nn::Var completion;  ///< CD(Xc, X) + CD(Xf, X) on the partial branch
  nn::Var keypoint;    ///< index-matched squared keypoint distance
  nn::Var feature;     ///< mean squared global-feature difference
  nn::Var total;       ///< completion + lambda_kp2 * keypoint + lambda_feat * feature
};

struct Stage2Pass {
  AutoEncoder::Encoding encoding;
  nn::Var coarse;
  std::array<nn::Var, 3> keypoints;
  std::array<SurfaceSkeleton, 3> skeletons;
  std::array<nn::Var, 3> skeleton_points;
  std::array<nn::Var, 3> refined;
  Stage2Terms terms;
};

struct Completion {
  KeypointSet keypoints;
  std::array<SurfaceSkeleton, 3> skeletons;
  PointCloud coarse;
  PointCloud fine;
};

/// The full model: detector D, auto-encoders E1 (complete) and E2 (partial),
/// keypoint generator G and refinement subnet R.
class LakeNet {
 public:
  explicit LakeNet(const TrainingConfig& config);

  const TrainingConfig& config() const { return config_; }

  KeypointDetector& detector() { return detector_; }
  const KeypointDetector& detector() const { return detector_; }
  AutoEncoder& reconstruction_encoder() { return e1_; }
  const AutoEncoder& reconstruction_encoder() const { return e1_; }
  AutoEncoder& completion_encoder() { return e2_; }
  const AutoEncoder& completion_encoder() const { return e2_; }
  KeypointGenerator& generator() { return generator_; }
  const KeypointGenerator& generator() const { return generator_; }
  RefinementSubnet& refiner() { return refiner_; }
  const RefinementSubnet& refiner() const { return refiner_; }

  /// Store for a component tag D, E1, E2, G or R.
  nn::ParameterStore& component(const std::string& tag);
  const nn::ParameterStore& component(const std::string& tag) const;
  static const std::array<std::string, 5>& component_tags();

  Stage1Targets stage1_targets(const PointCloud& complete) const;
  Stage1Pass stage1_forward(nn::Tape& tape, const PointCloud& complete, std::size_t label,
                            const Stage1Targets& targets) const;

  Stage2Targets stage2_targets(const PointCloud& complete) const;
  Stage2Pass stage2_forward(nn::Tape& tape, const PointCloud& partial, const PointCloud& complete,
                            const Stage2Targets& targets) const;

  /// Partial cloud -> coarse and fine completion through E2, G and R.
  Completion complete(const PointCloud& partial) const;

  bool stage1_trained() const { return stage1_trained_; }
  bool stage2_trained() const { return stage2_trained_; }
  void mark_stage1_trained() { stage1_trained_ = true; }
  void mark_stage2_trained() { stage2_trained_ = true; }

 private:
  InterpolationOptions skeleton_options() const;

  TrainingConfig config_;
  KeypointDetector detector_;
  AutoEncoder e1_;
  AutoEncoder e2_;
  KeypointGenerator generator_;
  RefinementSubnet refiner_;
  bool stage1_trained_ = false;
  bool stage2_trained_ = false;
};

/// Per-epoch means of every loss term plus wall-clock seconds.
struct EpochLog {
  std::size_t epoch = 0;
  std::vector<std::pair<std::string, double>> terms;
  double seconds = 0.0;

  double term(const std::string& name) const;
};

/// CSV header `epoch,<terms...>,seconds` and the matching row.
std::string epoch_csv_header(const EpochLog& log);
std::string epoch_csv_row(const EpochLog& log);

using EpochCallback = std::function<void(const EpochLog&)>;

/// Jointly trains D, E1 and R on complete clouds; skeletons use the cloud
/// itself as reference. Terms: total, reconstruction, keypoint, kp_points,
/// kp_skeleton, kp_class. A non-finite value aborts with NumericalError
/// naming the loss term.
std::vector<EpochLog> stage1_train(LakeNet& model, std::span<const Sample> data, const TrainingConfig& cfg,
                                   const EpochCallback& on_epoch = {});

/// Trains E2, G and R with D and E1 frozen. Requires stage-1 weights
/// (ConfigError otherwise). Terms: total, completion, keypoint, feature.
std::vector<EpochLog> stage2_train(LakeNet& model, std::span<const Sample> data, const TrainingConfig& cfg,
                                   const EpochCallback& on_epoch = {});

/// Detector-only training on the detector loss (keypoint, skeleton and
/// classification terms) for stage1_epochs.
std::vector<EpochLog> train_detector(KeypointDetector& detector, std::span<const Sample> data,
                                     const TrainingConfig& cfg, const EpochCallback& on_epoch = {});

/// Writes <tag>.ckpt for each requested component; the configuration travels
/// in each file's metadata.
void save_model(const LakeNet& model, const std::filesystem::path& dir, std::span<const std::string> tags);
void save_model(const LakeNet& model, const std::filesystem::path& dir);
/// Restores every component file present in `dir`. ConfigError when none is.
LakeNet load_model(const std::filesystem::path& dir);

}  // namespace lakenet
