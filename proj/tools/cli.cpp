#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include "lakenet/cloud_io.hpp"
#include "lakenet/config.hpp"
#include "lakenet/dataset.hpp"
#include "lakenet/errors.hpp"
#include "lakenet/metrics.hpp"
#include "lakenet/pipeline.hpp"
#include "lakenet/viz.hpp"

namespace lakenet::cli {
namespace {

namespace fs = std::filesystem;

constexpr double kEmdApproxEpsilon = 0.01;

struct GlobalOptions {
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  bool deterministic = false;
  std::string config_path;
  bool toy = false;
  std::vector<std::string> overrides;
};

TrainingConfig resolve_config(const GlobalOptions& g) {
  TrainingConfig cfg = g.toy ? TrainingConfig::toy() : TrainingConfig{};
  if (!g.config_path.empty()) cfg = load_config(g.config_path, cfg);
  std::map<std::string, std::string> kv;
  for (const auto& o : g.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw UnknownKeyError("--set expects key=value, got '" + o + "'");
    kv[o.substr(0, eq)] = o.substr(eq + 1);
  }
  cfg.apply(kv);
  if (g.seed_opt->count() > 0) cfg.seed = g.seed;
  if (g.deterministic) cfg.deterministic = true;
  return cfg;
}

void require_components(const fs::path& dir, std::initializer_list<const char*> tags) {
  for (const char* tag : tags) {
    if (!fs::exists(dir / (std::string(tag) + ".ckpt"))) {
      throw ConfigError("missing checkpoint: " + (dir / (std::string(tag) + ".ckpt")).string());
    }
  }
}

// Appends each epoch as a CSV row, writing the header before the first one.
EpochCallback csv_logger(const fs::path& path, const char* stage, std::ostream& out) {
  auto file = std::make_shared<std::ofstream>(path, std::ios::trunc);
  if (!*file) throw IoError("cannot write training log " + path.string());
  return [file, stage, &out, path](const EpochLog& log) {
    if (log.epoch == 1) *file << epoch_csv_header(log) << '\n';
    *file << epoch_csv_row(log) << '\n';
    file->flush();
    if (!*file) throw IoError("failed writing " + path.string());
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s epoch %zu: total=%.6g (%.1fs)", stage, log.epoch, log.term("total"),
                  log.seconds);
    out << buf << '\n';
  };
}

std::vector<Sample> training_split(const fs::path& manifest, const TrainingConfig& cfg) {
  auto samples = load_dataset(manifest);
  if (cfg.holdout_size >= samples.size()) {
    throw CardinalityError("manifest has " + std::to_string(samples.size()) + " rows, not enough for holdout_size " +
                           std::to_string(cfg.holdout_size));
  }
  return split_dataset(std::move(samples), cfg.holdout_size).train;
}

struct EvalRow {
  std::string id;
  double cd = 0.0;
  double emd = 0.0;
  double miou = 0.0;
};

EvalRow evaluate_pair(const std::string& id, const PointCloud& pred, const PointCloud& target,
                      const LakeNet* model, double threshold) {
  EvalRow r;
  r.id = id;
  r.cd = chamfer_distance(pred, target);
  if (pred.size() != target.size()) {
    throw CardinalityError(id + ": EMD needs equal sizes, got " + std::to_string(pred.size()) + " and " +
                           std::to_string(target.size()));
  }
  r.emd = pred.size() <= kExactAssignmentCap ? emd_exact(pred, target).cost
                                             : emd_approx(pred, target, kEmdApproxEpsilon).cost;
  if (model != nullptr) {
    const auto kp_pred = model->detector().detect(pred).keypoints.scales[0];
    const auto kp_target = model->detector().detect(target).keypoints.scales[0];
    r.miou = keypoint_miou(kp_pred, kp_target, threshold);
  } else {
    r.miou = keypoint_miou(pred, target, threshold);
  }
  return r;
}

void write_eval(std::ostream& os, const std::vector<EvalRow>& rows) {
  os << "id,cd_l2,emd,miou\n";
  EvalRow mean{"mean"};
  for (const auto& r : rows) {
    os << r.id << ',' << format_double(r.cd) << ',' << format_double(r.emd) << ',' << format_double(r.miou) << '\n';
    mean.cd += r.cd / static_cast<double>(rows.size());
    mean.emd += r.emd / static_cast<double>(rows.size());
    mean.miou += r.miou / static_cast<double>(rows.size());
  }
  os << mean.id << ',' << format_double(mean.cd) << ',' << format_double(mean.emd) << ','
     << format_double(mean.miou) << '\n';
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Keypoint- and skeleton-assisted point cloud completion"};
  app.name("lakenet");
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  g.seed_opt = app.add_option("--seed", g.seed, "Seed for initialization, shuffling and data synthesis");
  app.add_flag("--deterministic", g.deterministic, "Force deterministic execution");
  app.add_option("--config", g.config_path, "Flat key = value configuration file");
  app.add_flag("--toy", g.toy, "Start from the desk-scale toy configuration");
  app.add_option("--set", g.overrides, "Override one configuration key (key=value), repeatable");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Synthesize complete and partial clouds plus a manifest");
  std::string gen_out;
  std::optional<std::size_t> gen_count;
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--count", gen_count, "Number of shapes (default: dataset_size)");

  // train-recon
  auto* recon = app.add_subcommand("train-recon", "Stage 1: train detector, reconstruction auto-encoder and refiner");
  std::string recon_data, recon_out, recon_log;
  recon->add_option("--data", recon_data, "Dataset manifest.csv")->required();
  recon->add_option("--out", recon_out, "Checkpoint directory")->required();
  recon->add_option("--log", recon_log, "Per-epoch CSV log (default: <out>/stage1_log.csv)");

  // train-complete
  auto* comp_train = app.add_subcommand("train-complete", "Stage 2: train completion encoder, generator and refiner");
  std::string ct_data, ct_ckpt, ct_log;
  comp_train->add_option("--data", ct_data, "Dataset manifest.csv")->required();
  comp_train->add_option("--checkpoints", ct_ckpt, "Checkpoint directory from train-recon")->required();
  comp_train->add_option("--log", ct_log, "Per-epoch CSV log (default: <checkpoints>/stage2_log.csv)");

  // detect-keypoints
  auto* detect = app.add_subcommand("detect-keypoints", "Detect multi-scale keypoints on complete clouds");
  std::string det_ckpt, det_out;
  std::vector<std::string> det_inputs;
  detect->add_option("--checkpoints", det_ckpt, "Checkpoint directory with D.ckpt")->required();
  detect->add_option("--input", det_inputs, "Input clouds (.xyz or .ply)")->required();
  detect->add_option("--out-dir", det_out, "Output directory")->required();

  // skeletonize
  auto* skel = app.add_subcommand("skeletonize", "Build a surface-skeleton from keypoints");
  std::string sk_keypoints, sk_reference, sk_out, sk_adjacency;
  std::size_t sk_scale = 1;
  std::optional<std::size_t> sk_points;
  skel->add_option("--keypoints", sk_keypoints, "Keypoint cloud; a colored keypoint PLY is filtered by --scale")
      ->required();
  skel->add_option("--scale", sk_scale, "Keypoint scale to use from a colored PLY (1-3)")
      ->check(CLI::Range(1, 3));
  skel->add_option("--reference", sk_reference, "Reference cloud for the recovery prior");
  skel->add_option("--points", sk_points, "Skeleton size (default: skeleton_points of the scale)");
  skel->add_option("--out", sk_out, "Output PLY colored by origin")->required();
  skel->add_option("--adjacency", sk_adjacency, "Write the graph as an 'i j' edge list");

  // complete
  auto* complete = app.add_subcommand("complete", "Complete a partial cloud");
  std::string c_ckpt, c_input, c_out, c_coarse;
  complete->add_option("--checkpoints", c_ckpt, "Checkpoint directory")->required();
  complete->add_option("--input", c_input, "Partial cloud")->required();
  complete->add_option("--out", c_out, "Fine output cloud")->required();
  complete->add_option("--coarse-out", c_coarse, "Also write the coarse cloud");

  // eval
  auto* eval = app.add_subcommand("eval", "Chamfer, EMD and keypoint IoU of predictions against targets");
  std::string ev_pred, ev_target, ev_manifest, ev_pred_dir, ev_ckpt, ev_out;
  double ev_threshold = 0.1;
  eval->add_option("--pred", ev_pred, "Predicted cloud (single-pair mode)");
  eval->add_option("--target", ev_target, "Target cloud (single-pair mode)");
  eval->add_option("--manifest", ev_manifest, "Manifest whose complete clouds are the targets");
  eval->add_option("--pred-dir", ev_pred_dir, "Directory holding <id>.xyz predictions (manifest mode)");
  eval->add_option("--checkpoints", ev_ckpt, "Compare detector keypoints instead of raw clouds for mIoU");
  eval->add_option("--threshold", ev_threshold, "mIoU distance threshold");
  eval->add_option("--out", ev_out, "Metrics CSV (default: stdout)");

  // export-viz
  auto* viz = app.add_subcommand("export-viz", "Write colored keypoint, skeleton, coarse and fine PLY overlays");
  std::string v_ckpt, v_input, v_out;
  viz->add_option("--checkpoints", v_ckpt, "Checkpoint directory")->required();
  viz->add_option("--input", v_input, "Partial cloud")->required();
  viz->add_option("--out-dir", v_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const TrainingConfig cfg = resolve_config(g);

    if (gen->parsed()) {
      TrainingConfig c = cfg;
      if (gen_count) c.dataset_size = *gen_count;
      const auto samples = synthesize_dataset(c);
      write_dataset(samples, gen_out);
      out << "wrote " << samples.size() << " samples to " << gen_out << '\n';
    } else if (recon->parsed()) {
      const auto data = training_split(recon_data, cfg);
      LakeNet model(cfg);
      const fs::path log = recon_log.empty() ? fs::path(recon_out) / "stage1_log.csv" : fs::path(recon_log);
      ensure_dir(recon_out);
      stage1_train(model, data, cfg, csv_logger(log, "stage 1", out));
      const std::vector<std::string> tags{"D", "E1", "R"};
      save_model(model, recon_out, tags);
      out << "saved D, E1, R to " << recon_out << '\n';
    } else if (comp_train->parsed()) {
      require_components(ct_ckpt, {"D", "E1", "R"});
      LakeNet model = load_model(ct_ckpt);
      const auto data = training_split(ct_data, cfg);
      const fs::path log = ct_log.empty() ? fs::path(ct_ckpt) / "stage2_log.csv" : fs::path(ct_log);
      stage2_train(model, data, cfg, csv_logger(log, "stage 2", out));
      const std::vector<std::string> tags{"E2", "G", "R"};
      save_model(model, ct_ckpt, tags);
      out << "saved E2, G, R to " << ct_ckpt << '\n';
    } else if (detect->parsed()) {
      require_components(det_ckpt, {"D"});
      const LakeNet model = load_model(det_ckpt);
      ensure_dir(det_out);
      std::ofstream labels(fs::path(det_out) / "labels.txt");
      for (std::size_t i = 0; i < det_inputs.size(); ++i) {
        const fs::path input = det_inputs[i];
        const Detection d = model.detector().detect(read_cloud(input));
        const fs::path dest = fs::path(det_out) / (input.stem().string() + "_keypoints.ply");
        write_ply(dest, keypoint_overlay(d.keypoints));
        labels << i << ' ' << d.label << '\n';
        out << dest.string() << ": category " << d.label << '\n';
      }
      if (!labels) throw IoError("failed writing " + (fs::path(det_out) / "labels.txt").string());
    } else if (skel->parsed()) {
      PointCloud kp = read_cloud(sk_keypoints);
      if (kp.has_colors()) kp = select_scale(kp, sk_scale);
      const PointCloud reference = sk_reference.empty() ? PointCloud{} : read_cloud(sk_reference);
      const std::size_t target = sk_points ? *sk_points : cfg.skeleton_points[sk_scale - 1];
      InterpolationOptions opts;
      opts.edge_fraction = cfg.edge_fraction;
      const SkeletalGraph graph = build_graph(kp.points(), reference);
      const auto triangles = detect_triangles(graph);
      const SurfaceSkeleton skeleton = interpolate(graph, triangles, target, opts);
      write_ply(sk_out, skeleton_overlay(skeleton));
      if (!sk_adjacency.empty()) {
        std::ofstream adj(sk_adjacency);
        write_edge_list(adj, graph);
        if (!adj) throw IoError("failed writing " + sk_adjacency);
      }
      out << sk_out << ": " << skeleton.size() << " points, " << graph.edge_count() << " edges, "
          << triangles.size() << " triangles\n";
    } else if (complete->parsed()) {
      require_components(c_ckpt, {"E2", "G", "R"});
      const LakeNet model = load_model(c_ckpt);
      const Completion result = model.complete(read_cloud(c_input));
      write_cloud(c_out, result.fine);
      if (!c_coarse.empty()) write_cloud(c_coarse, result.coarse);
      out << c_out << ": " << result.fine.size() << " points\n";
    } else if (eval->parsed()) {
      std::optional<LakeNet> model;
      if (!ev_ckpt.empty()) {
        require_components(ev_ckpt, {"D"});
        model.emplace(load_model(ev_ckpt));
      }
      const LakeNet* m = model ? &*model : nullptr;
      std::vector<EvalRow> rows;
      if (!ev_pred.empty() || !ev_target.empty()) {
        if (ev_pred.empty() || ev_target.empty() || !ev_manifest.empty()) {
          throw CLI::ValidationError("eval: give either --pred with --target, or --manifest with --pred-dir");
        }
        rows.push_back(evaluate_pair(fs::path(ev_pred).stem().string(), read_cloud(ev_pred), read_cloud(ev_target),
                                     m, ev_threshold));
      } else {
        if (ev_manifest.empty() || ev_pred_dir.empty()) {
          throw CLI::ValidationError("eval: give either --pred with --target, or --manifest with --pred-dir");
        }
        const fs::path base = fs::path(ev_manifest).parent_path();
        for (const auto& row : read_manifest(ev_manifest)) {
          rows.push_back(evaluate_pair(row.id, read_cloud(fs::path(ev_pred_dir) / (row.id + ".xyz")),
                                       read_xyz(base / row.complete_path), m, ev_threshold));
        }
      }
      if (ev_out.empty()) {
        write_eval(out, rows);
      } else {
        std::ofstream f(ev_out);
        write_eval(f, rows);
        if (!f) throw IoError("failed writing " + ev_out);
      }
    } else if (viz->parsed()) {
      require_components(v_ckpt, {"E2", "G", "R"});
      const LakeNet model = load_model(v_ckpt);
      const Completion result = model.complete(read_cloud(v_input));
      ensure_dir(v_out);
      const fs::path dir = v_out;
      PointCloud skeleton;
      for (const auto& s : result.skeletons) skeleton.append(skeleton_overlay(s));
      const PointCloud keypoints = keypoint_overlay(result.keypoints);
      const PointCloud coarse = colored(result.coarse, kCoarseColor);
      const PointCloud fine = colored(result.fine, kFineColor);
      write_ply(dir / "keypoints.ply", keypoints);
      write_ply(dir / "skeleton.ply", skeleton);
      write_ply(dir / "coarse.ply", coarse);
      write_ply(dir / "fine.ply", fine);
      PointCloud overlay = fine;
      overlay.append(coarse);
      overlay.append(skeleton);
      overlay.append(keypoints);
      write_ply(dir / "overlay.ply", overlay);
      out << "wrote keypoints, skeleton, coarse, fine and overlay PLY files to " << v_out << '\n';
    }
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const UnknownKeyError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical abort: " << e.what() << '\n';
    return kNumericalAbort;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("lakenet");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace lakenet::cli
