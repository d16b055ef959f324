#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lakenet/config.hpp"
#include "lakenet/point_cloud.hpp"
#include "lakenet/rng.hpp"

namespace lakenet {

enum class ShapeFamily : std::uint8_t { Table, Chair, Box, LBracket, CylinderHandle };
inline constexpr std::size_t kFamilyCount = 5;

std::string_view family_name(ShapeFamily family);

/// Parametric description of one synthetic object. `params` are in [0, 1] and
/// map to family-specific proportions (leg height, top extent, ...).
struct SyntheticShapeSpec {
  ShapeFamily family = ShapeFamily::Box;
  std::vector<double> params;
  std::size_t category = 0;
  std::size_t points = 2048;
  std::uint64_t seed = 0;

  /// Draws parameters from Rng(seed); category is the family index.
  static SyntheticShapeSpec random(ShapeFamily family, std::size_t points, std::uint64_t seed);
};

struct SyntheticShape {
  PointCloud cloud;
  /// Hand-placed semantic keypoints (corners, feet, rim points) in the same
  /// normalized frame as `cloud`.
  PointCloud annotations;
  std::size_t category = 0;
};

/// Area-weighted surface sampling of the primitives described by `spec`, centered on the
/// bounding box and scaled to unit maximum extent. Identical specs give
/// identical clouds.
SyntheticShape sample_shape(const SyntheticShapeSpec& spec);

struct PartialViewSpec {
  Vec3 view{0.0, 0.0, 1.0};
  double keep_fraction = 0.25;
  std::size_t points = 2048;
  std::uint64_t seed = 0;
};

/// Keeps the floor(keep * |X|) points with the smallest projection on the view
/// direction (stable by index), then resamples them with replacement to
/// `points`. A zero view vector or an empty kept set raises ContractError.
PointCloud make_partial(const PointCloud& cloud, const PartialViewSpec& spec);

/// Uniformly distributed unit vector.
Vec3 random_direction(Rng& rng);

struct Sample {
  std::string id;
  std::size_t category = 0;
  PointCloud complete;
  PointCloud partial;
  /// Empty when loaded from disk.
  PointCloud annotations;
};

/// The synthetic benchmark described by `cfg`: dataset_size shapes cycling
/// through the families, each with one partial view.
std::vector<Sample> synthesize_dataset(const TrainingConfig& cfg);

/// Splits off the last `holdout` samples.
struct DatasetSplit {
  std::vector<Sample> train;
  std::vector<Sample> heldout;
};
DatasetSplit split_dataset(std::vector<Sample> samples, std::size_t holdout);

struct ManifestRow {
  std::string id;
  std::size_t category = 0;
  std::string complete_path;  ///< relative to the manifest directory
  std::string partial_path;
};

inline constexpr std::string_view kManifestHeader = "id,category,complete_path,partial_path";

/// Writes complete/<id>.xyz, partial/<id>.xyz and manifest.csv under `out_dir`.
void write_dataset(std::span<const Sample> samples, const std::filesystem::path& out_dir);
std::vector<ManifestRow> read_manifest(const std::filesystem::path& manifest);
/// Loads every row of a manifest; paths resolve against its directory.
std::vector<Sample> load_dataset(const std::filesystem::path& manifest);

}  // namespace lakenet
