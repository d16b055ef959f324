#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace lakenet {

/// Every tunable of the pipeline. Serialized as flat `key = value` text; list
/// values are comma separated. Defaults reproduce the full-scale setup; see
/// toy() for the desk-scale benchmark.
struct TrainingConfig {
  // Data.
  std::size_t categories = 8;
  std::size_t complete_points = 16384;
  std::size_t partial_points = 2048;
  double keep_fraction = 0.25;

  // Keypoints and skeletons, indexed by scale (1 = finest).
  std::array<std::size_t, 3> keypoints{256, 128, 64};
  std::array<std::size_t, 3> skeleton_points{4096, 2048, 1024};
  std::size_t coarse_points = 1024;
  /// Up factor of each refinement module, in execution order.
  std::array<std::size_t, 3> up_factors{1, 1, 2};
  double edge_fraction = 0.5;

  // Architecture widths.
  std::vector<std::size_t> detector_point_widths{64, 128};
  std::size_t detector_feature_width = 256;
  std::size_t detector_block_width = 256;
  std::size_t classifier_hidden = 256;
  bool category_offsets = true;
  std::vector<std::size_t> encoder_first_widths{128, 256};
  std::vector<std::size_t> encoder_second_widths{512, 1024};
  std::size_t decoder_hidden = 1024;
  std::size_t generator_slot_width = 64;
  std::size_t generator_hidden = 256;
  std::array<std::size_t, 4> refine_widths{64, 128, 128, 64};

  // Losses and optimization.
  double lambda_kp1 = 10.0;
  double lambda_kp2 = 10.0;
  double lambda_feat = 1000.0;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::size_t batch_size = 64;
  std::size_t stage1_epochs = 60;
  std::size_t stage2_epochs = 100;

  // Toy benchmark size and reproducibility.
  std::size_t dataset_size = 200;
  std::size_t holdout_size = 40;
  std::uint64_t seed = 0;
  bool deterministic = true;

  /// Desk-scale configuration: 512-point clouds, K = (24, 12, 6), batch 8.
  static TrainingConfig toy();

  /// Number of points emitted by the refinement subnet.
  std::size_t fine_points() const;

  /// Checks internal consistency (keypoint ordering, point-count chain through
  /// the refinement modules); throws ConfigError.
  void validate() const;

  std::map<std::string, std::string> to_map() const;
  /// Applies `key -> value` overrides; unknown keys or malformed values raise
  /// ConfigError naming the token.
  void apply(const std::map<std::string, std::string>& values);

  friend bool operator==(const TrainingConfig&, const TrainingConfig&) = default;
};

/// Parses `key = value` lines ('#' starts a comment). Duplicate keys and
/// unknown keys raise ConfigError with the line number.
std::map<std::string, std::string> parse_key_values(std::istream& in);

TrainingConfig parse_config(std::istream& in, const TrainingConfig& base = {});
TrainingConfig load_config(const std::filesystem::path& path, const TrainingConfig& base = {});
std::string serialize_config(const TrainingConfig& config);

/// All recognized configuration keys, in serialization order.
const std::vector<std::string>& config_keys();

}  // namespace lakenet
