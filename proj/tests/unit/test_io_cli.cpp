#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "lakenet/cloud_io.hpp"
#include "lakenet/config.hpp"
#include "lakenet/dataset.hpp"
#include "lakenet/errors.hpp"
#include "lakenet/pipeline.hpp"
#include "lakenet/viz.hpp"
#include "oracles.hpp"

using namespace lakenet;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("lakenet_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = lakenet::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Every regular file below `root`, as paths relative to it.
std::set<std::string> tree(const fs::path& root) {
  std::set<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files.insert(fs::relative(e.path(), root).generic_string());
  }
  return files;
}

bool contains_point(const PointCloud& cloud, const Vec3& p) {
  for (const auto& q : cloud.points()) {
    if (q == p) return true;
  }
  return false;
}

}  // namespace

TEST_SUITE("io-cli") {

TEST_CASE("config serialization is a fixed point") {
  for (const auto& base : {TrainingConfig{}, TrainingConfig::toy(), testing::micro_config()}) {
    const std::string text = serialize_config(base);
    std::istringstream in(text);
    const TrainingConfig parsed = parse_config(in);
    CHECK(parsed == base);
    CHECK(serialize_config(parsed) == text);
  }
  CHECK(config_keys().size() == TrainingConfig{}.to_map().size());
}

TEST_CASE("config parsing errors") {
  std::istringstream unknown("batch_size = 4\nbogus_key = 1\n");
  try {
    parse_config(unknown);
    FAIL("expected an unknown key error");
  } catch (const UnknownKeyError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("bogus_key") != std::string::npos);
    CHECK(msg.find("line 2") != std::string::npos);
  }
  std::istringstream dup("seed = 1\nseed = 2\n");
  CHECK_THROWS_AS(parse_config(dup), ConfigError);
  std::istringstream bad("batch_size = many\n");
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  std::istringstream comment("# toy\nbatch_size = 4  # small\n\n");
  CHECK(parse_config(comment).batch_size == 4);
  CHECK_THROWS_AS(load_config("/nonexistent/lakenet.cfg"), ConfigError);
}

TEST_CASE("shipped configurations are consistent") {
  CHECK_NOTHROW(TrainingConfig{}.validate());
  CHECK_NOTHROW(TrainingConfig::toy().validate());
  CHECK_NOTHROW(testing::micro_config().validate());
  const auto toy = TrainingConfig::toy();
  CHECK(toy.complete_points == 512);
  CHECK(toy.keypoints == std::array<std::size_t, 3>{24, 12, 6});
  CHECK(toy.batch_size == 8);
  CHECK(toy.dataset_size == 200);
  const TrainingConfig full;
  CHECK(full.keypoints == std::array<std::size_t, 3>{256, 128, 64});
  CHECK(full.up_factors == std::array<std::size_t, 3>{1, 1, 2});
  CHECK(full.learning_rate == 1e-3);
  CHECK(full.batch_size == 64);
  CHECK(full.stage1_epochs == 60);
  CHECK(full.stage2_epochs == 100);
  CHECK(full.keep_fraction == 0.25);
  auto broken = toy;
  broken.keypoints = {6, 12, 24};
  CHECK_THROWS_AS(broken.validate(), ConfigError);
  broken = toy;
  broken.coarse_points = 31;
  CHECK_THROWS_AS(broken.validate(), ConfigError);
}

TEST_CASE("partial views") {
  const auto cloud = testing::random_cloud(100, 1);
  PartialViewSpec all{{0, 0, 1}, 1.0, 100, 3};
  const auto resampled = make_partial(cloud, all);
  CHECK(resampled.size() == 100);
  for (const auto& p : resampled.points()) CHECK(contains_point(cloud, p));

  // Unit cube surface, culled along +z keeping half.
  const auto cube = sample_shape(SyntheticShapeSpec::random(ShapeFamily::Box, 400, 2)).cloud;
  std::vector<double> z;
  for (const auto& p : cube.points()) z.push_back(p[2]);
  std::sort(z.begin(), z.end());
  const double median = z[z.size() / 2];
  const auto half = make_partial(cube, {{0, 0, 1}, 0.5, 300, 4});
  CHECK(half.size() == 300);
  for (const auto& p : half.points()) CHECK(p[2] <= median);

  CHECK_THROWS_AS(make_partial(cloud, {{0, 0, 0}, 0.5, 10, 1}), ContractError);
  CHECK_THROWS_AS(make_partial(cloud, {{0, 0, 1}, 0.001, 10, 1}), ContractError);
}

TEST_CASE("synthetic shapes") {
  for (std::size_t f = 0; f < kFamilyCount; ++f) {
    const auto spec = SyntheticShapeSpec::random(static_cast<ShapeFamily>(f), 256, 7);
    const auto a = sample_shape(spec);
    const auto b = sample_shape(spec);
    CHECK(a.category == f);
    REQUIRE(a.cloud.size() == 256);
    CHECK(a.annotations.size() > 0);
    for (std::size_t i = 0; i < 256; ++i) CHECK(a.cloud[i] == b.cloud[i]);
    const auto [lo, hi] = a.cloud.bounding_box();
    double extent = 0.0;
    for (int d = 0; d < 3; ++d) extent = std::max(extent, hi[d] - lo[d]);
    CHECK(extent == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("dataset files are deterministic and the manifest is complete") {
  auto cfg = TrainingConfig::toy();
  cfg.dataset_size = 10;
  const auto samples = synthesize_dataset(cfg);
  const auto a = scratch_dir("data_a");
  const auto b = scratch_dir("data_b");
  write_dataset(samples, a);
  write_dataset(synthesize_dataset(cfg), b);
  const auto files = tree(a);
  CHECK(files == tree(b));
  for (const auto& f : files) CHECK(slurp(a / f) == slurp(b / f));

  const auto rows = read_manifest(a / "manifest.csv");
  REQUIRE(rows.size() == 10);
  CHECK(slurp(a / "manifest.csv").rfind(std::string(kManifestHeader), 0) == 0);
  std::set<std::string> referenced{"manifest.csv"};
  for (const auto& r : rows) {
    CHECK(fs::exists(a / r.complete_path));
    CHECK(fs::exists(a / r.partial_path));
    referenced.insert(r.complete_path);
    referenced.insert(r.partial_path);
  }
  CHECK(referenced == files);

  const auto loaded = load_dataset(a / "manifest.csv");
  REQUIRE(loaded.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(loaded[i].id == samples[i].id);
    CHECK(loaded[i].category == samples[i].category);
    CHECK(loaded[i].partial.size() == cfg.partial_points);
    for (std::size_t k = 0; k < loaded[i].complete.size(); ++k) CHECK(loaded[i].complete[k] == samples[i].complete[k]);
  }
  const auto split = split_dataset(samples, 3);
  CHECK(split.train.size() == 7);
  CHECK(split.heldout.front().id == samples[7].id);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("partial clouds are drawn from their complete clouds") {
  auto cfg = TrainingConfig::toy();
  cfg.dataset_size = 10;
  for (const auto& s : synthesize_dataset(cfg)) {
    CHECK(s.partial.size() == cfg.partial_points);
    for (const auto& p : s.partial.points()) CHECK(contains_point(s.complete, p));
  }
}

TEST_CASE("visualization colors") {
  KeypointSet k;
  k.scales = {testing::random_cloud(4, 1), testing::random_cloud(3, 2), testing::random_cloud(2, 3)};
  const auto overlay = keypoint_overlay(k);
  CHECK(overlay.size() == 9);
  for (std::size_t s = 1; s <= 3; ++s) {
    const auto back = select_scale(overlay, s);
    REQUIRE(back.size() == k.scales[s - 1].size());
    for (std::size_t i = 0; i < back.size(); ++i) CHECK(back[i] == k.scales[s - 1][i]);
  }
  CHECK_THROWS_AS(select_scale(overlay, 4), ContractError);
  CHECK_THROWS_AS(select_scale(testing::random_cloud(3, 1), 1), FormatError);

  const std::vector<Vec3> tri{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  const auto sk = make_surface_skeleton(tri, PointCloud{}, 20);
  const auto colored_sk = skeleton_overlay(sk);
  for (std::size_t i = 0; i < sk.size(); ++i) {
    const Rgb want = sk.origins[i].kind == OriginKind::Node   ? kNodeColor
                     : sk.origins[i].kind == OriginKind::Edge ? kEdgeColor
                                                              : kTriangleColor;
    CHECK(colored_sk.colors()[i] == want);
  }
}

TEST_CASE("command line end to end on an untrained model") {
  const auto dir = scratch_dir("cli");
  auto cfg = testing::micro_config();
  cfg.categories = 5;
  LakeNet model(cfg);
  for (const auto& tag : LakeNet::component_tags()) testing::randomize(model.component(tag), 11, 0.3);
  save_model(model, dir / "ckpt");

  const auto partial = testing::random_cloud(cfg.partial_points, 1);
  write_xyz(dir / "partial.xyz", partial);
  auto r = run_cli({"complete", "--checkpoints", (dir / "ckpt").string(), "--input", (dir / "partial.xyz").string(),
                "--out", (dir / "fine.xyz").string(), "--coarse-out", (dir / "coarse.xyz").string()});
  REQUIRE_MESSAGE(r.code == lakenet::cli::kOk, r.err);
  CHECK(read_cloud(dir / "fine.xyz").size() == cfg.fine_points());
  CHECK(read_cloud(dir / "coarse.xyz").size() == cfg.coarse_points);

  r = run_cli({"eval", "--pred", (dir / "fine.xyz").string(), "--target", (dir / "fine.xyz").string()});
  REQUIRE_MESSAGE(r.code == lakenet::cli::kOk, r.err);
  std::istringstream csv(r.out);
  std::string header;
  std::string row;
  std::getline(csv, header);
  std::getline(csv, row);
  CHECK(header == "id,cd_l2,emd,miou");
  CHECK(row.find(",0,0,1") != std::string::npos);

  const auto table = sample_shape(SyntheticShapeSpec::random(ShapeFamily::Table, cfg.complete_points, 3)).cloud;
  write_xyz(dir / "table.xyz", table);
  r = run_cli({"detect-keypoints", "--checkpoints", (dir / "ckpt").string(), "--input", (dir / "table.xyz").string(),
           "--out-dir", (dir / "kp").string()});
  REQUIRE_MESSAGE(r.code == lakenet::cli::kOk, r.err);
  const auto kp = read_ply(dir / "kp" / "table_keypoints.ply");
  CHECK(kp.size() == cfg.keypoints[0] + cfg.keypoints[1] + cfg.keypoints[2]);
  CHECK(slurp(dir / "kp" / "labels.txt").rfind("0 ", 0) == 0);

  r = run_cli({"skeletonize", "--keypoints", (dir / "kp" / "table_keypoints.ply").string(), "--scale", "1",
           "--reference", (dir / "table.xyz").string(), "--points", "30", "--out", (dir / "skel.ply").string(),
           "--adjacency", (dir / "edges.txt").string()});
  REQUIRE_MESSAGE(r.code == lakenet::cli::kOk, r.err);
  const auto skel = read_ply(dir / "skel.ply");
  REQUIRE(skel.size() == 30);
  REQUIRE(skel.has_colors());
  const auto nodes = select_scale(kp, 1);
  const auto expect = make_surface_skeleton({nodes.points().begin(), nodes.points().end()}, table, 30);
  std::size_t node_count = 0;
  for (std::size_t i = 0; i < 30; ++i) {
    const Rgb c = skel.colors()[i];
    CHECK((c == kNodeColor || c == kEdgeColor || c == kTriangleColor));
    const Rgb want = expect.origins[i].kind == OriginKind::Node   ? kNodeColor
                     : expect.origins[i].kind == OriginKind::Edge ? kEdgeColor
                                                                  : kTriangleColor;
    CHECK(c == want);
    node_count += c == kNodeColor ? 1 : 0;
  }
  CHECK(node_count == cfg.keypoints[0]);
  CHECK_FALSE(slurp(dir / "edges.txt").empty());

  r = run_cli({"export-viz", "--checkpoints", (dir / "ckpt").string(), "--input", (dir / "partial.xyz").string(),
           "--out-dir", (dir / "viz").string()});
  REQUIRE_MESSAGE(r.code == lakenet::cli::kOk, r.err);
  CHECK_FALSE(tree(dir / "viz").empty());
  fs::remove_all(dir);
}

TEST_CASE("command line exit codes") {
  CHECK(run_cli({"--bogus"}).code == lakenet::cli::kUsage);
  CHECK(run_cli({"--set", "no_such_key=1", "gen-data", "--out", "/tmp/lakenet_never"}).code == lakenet::cli::kUsage);
  const auto r = run_cli({"complete", "--checkpoints", "/nonexistent", "--input", "a.xyz", "--out", "b.xyz"});
  CHECK(r.code == lakenet::cli::kDataError);
  CHECK(r.err.find("checkpoint") != std::string::npos);

  const auto dir = scratch_dir("gen");
  CHECK(run_cli({"--toy", "--seed", "5", "gen-data", "--out", (dir / "a").string(), "--count", "3"}).code == lakenet::cli::kOk);
  CHECK(run_cli({"--toy", "--seed", "5", "gen-data", "--out", (dir / "b").string(), "--count", "3"}).code == lakenet::cli::kOk);
  CHECK(tree(dir / "a") == tree(dir / "b"));
  for (const auto& f : tree(dir / "a")) CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  fs::remove_all(dir);
}

}  // TEST_SUITE
