#include "lakenet/pipeline.hpp"

#include <chrono>
#include <cmath>

#include "lakenet/checkpoint.hpp"
#include "lakenet/convert.hpp"
#include "lakenet/errors.hpp"

namespace lakenet {
namespace {

// Re-raises a numerical failure inside `f` with the loss term it belongs to.
template <class F>
auto in_term(const char* term, F&& f) {
  try {
    return f();
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("non-finite value in loss term '") + term + "': " + e.what());
  }
}

nn::Var constant_points(nn::Tape& tape, const PointCloud& cloud) { return tape.constant(cloud_tensor(cloud)); }

std::array<nn::Var, 3> module_order(const std::array<nn::Var, 3>& by_scale) {
  return {by_scale[module_scale(0)], by_scale[module_scale(1)], by_scale[module_scale(2)]};
}

}  // namespace

// ---------------------------------------------------------------------------
// Auto-encoder

AutoEncoderConfig AutoEncoderConfig::from(const TrainingConfig& cfg) {
  AutoEncoderConfig a;
  a.first_widths = cfg.encoder_first_widths;
  a.second_widths = cfg.encoder_second_widths;
  a.coarse_points = cfg.coarse_points;
  a.decoder_hidden = cfg.decoder_hidden;
  return a;
}

AutoEncoder::AutoEncoder(const AutoEncoderConfig& config, std::uint64_t seed) : config_(config) {
  if (config_.first_widths.empty() || config_.second_widths.empty()) {
    throw ConfigError("auto-encoder needs non-empty layer width lists");
  }
  Rng rng(seed);
  first_ = nn::Mlp(store_, "encoder.first", 3, config_.first_widths, rng, /*relu_last=*/true);
  second_ = nn::Mlp(store_, "encoder.second", 2 * first_.out_features(), config_.second_widths, rng);
  decoder_ = nn::Mlp(store_, "decoder", feature_dim(),
                     {config_.decoder_hidden, config_.decoder_hidden, 3 * config_.coarse_points}, rng);
}

AutoEncoder::Encoding AutoEncoder::encode(nn::Tape& tape, nn::Var cloud) const {
  if (cloud.cols() != 3) throw ShapeError("encoder input must be N x 3, got " + cloud.value().shape_string());
  if (cloud.rows() == 0) throw CardinalityError("encoder input cloud is empty");
  nn::Var h = first_(tape, cloud);
  const std::array<nn::Var, 2> parts{h, nn::repeat_rows(nn::max_pool(h, 0), cloud.rows())};
  Encoding e;
  e.local = second_(tape, nn::concat(parts, 1));
  e.global = nn::max_pool(e.local, 0);
  return e;
}

nn::Var AutoEncoder::generate(nn::Tape& tape, nn::Var global) const {
  if (global.rows() != 1 || global.cols() != feature_dim()) {
    throw ShapeError("coarse generator expects 1 x " + std::to_string(feature_dim()) + ", got " +
                     global.value().shape_string());
  }
  return nn::reshape(decoder_(tape, global), config_.coarse_points, 3);
}

AutoEncoder::Features AutoEncoder::encode(const PointCloud& cloud) const {
  nn::Tape tape;
  const Encoding e = encode(tape, constant_points(tape, cloud));
  return {e.local.value(), e.global.value()};
}

PointCloud AutoEncoder::generate_coarse(const nn::Tensor& global) const {
  nn::Tape tape;
  return tensor_cloud(generate(tape, tape.constant(global)).value());
}

// ---------------------------------------------------------------------------
// Refinement

nn::Tensor folding_grid(std::size_t up_factor, std::size_t rows) {
  if (up_factor == 0) throw ContractError("up factor must be positive");
  const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(up_factor))));
  nn::Tensor grid(rows * up_factor, 2);
  for (std::size_t j = 0; j < up_factor; ++j) {
    const double u = side > 1 ? static_cast<double>(j % side) / static_cast<double>(side - 1) - 0.5 : 0.0;
    const double v = side > 1 ? static_cast<double>(j / side) / static_cast<double>(side - 1) - 0.5 : 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      grid.at(r * up_factor + j, 0) = u;
      grid.at(r * up_factor + j, 1) = v;
    }
  }
  return grid;
}

std::vector<std::size_t> interleave_indices(std::size_t rows, std::size_t up_factor) {
  std::vector<std::size_t> idx;
  idx.reserve(rows * up_factor);
  for (std::size_t r = 0; r < rows; ++r) idx.insert(idx.end(), up_factor, r);
  return idx;
}

RefinementConfig RefinementConfig::from(const TrainingConfig& cfg) {
  RefinementConfig r;
  r.up_factors = cfg.up_factors;
  r.condition_dim = cfg.encoder_second_widths.back();
  r.widths = cfg.refine_widths;
  return r;
}

RsrModule::RsrModule(nn::ParameterStore& store, const std::string& prefix, std::size_t up_factor,
                     std::size_t condition_dim, const std::array<std::size_t, 4>& widths, Rng& rng)
    : up_(up_factor) {
  if (up_ == 0) throw ConfigError("up factor must be positive");
  const auto [w1, w2, hidden, head] = widths;
  point1_ = nn::Linear(store, prefix + ".point1", 3, w1, rng);
  point2_ = nn::Linear(store, prefix + ".point2", w1, w2, rng);
  context_global_ = nn::Linear(store, prefix + ".context_global", w2, hidden, rng);
  context_condition_ = nn::Linear(store, prefix + ".context_condition", condition_dim, hidden, rng);
  local_ = nn::Linear(store, prefix + ".local", w2, hidden, rng);
  head_hidden_ = nn::Linear(store, prefix + ".head_hidden", hidden + 2, head, rng);
  head_out_ = nn::Linear(store, prefix + ".head_out", head, 3, rng, nn::Init::Zero);
}

nn::Var RsrModule::operator()(nn::Tape& tape, nn::Var coarse, nn::Var skeleton, nn::Var condition) const {
  if (coarse.rows() != skeleton.rows()) {
    throw ContractError("refinement step needs equal coarse and skeleton counts, got " +
                        std::to_string(coarse.rows()) + " and " + std::to_string(skeleton.rows()));
  }
  if (coarse.cols() != 3 || skeleton.cols() != 3) {
    throw ShapeError("refinement inputs must be N x 3, got " + coarse.value().shape_string() + " and " +
                     skeleton.value().shape_string());
  }
  const std::array<nn::Var, 2> stacked{coarse, skeleton};
  nn::Var x = nn::concat(stacked, 0);
  const std::size_t m = x.rows();

  nn::Var l2 = point2_(tape, nn::relu(point1_(tape, x)));
  nn::Var ctx = context_global_(tape, nn::max_pool(l2, 0)) + context_condition_(tape, condition);
  nn::Var h = nn::relu(local_(tape, l2) + nn::repeat_rows(ctx, m));

  const auto idx = interleave_indices(m, up_);
  const std::array<nn::Var, 2> head_in{nn::gather_rows(h, idx), tape.constant(folding_grid(up_, m))};
  nn::Var offsets = head_out_(tape, nn::relu(head_hidden_(tape, nn::concat(head_in, 1))));
  return nn::gather_rows(x, idx) + offsets;
}

PointCloud RsrModule::step(const PointCloud& coarse, const PointCloud& skeleton, const nn::Tensor& condition) const {
  nn::Tape tape;
  const nn::Var out = (*this)(tape, constant_points(tape, coarse), constant_points(tape, skeleton),
                              tape.constant(condition));
  return tensor_cloud(out.value());
}

RefinementSubnet::RefinementSubnet(const RefinementConfig& config, std::uint64_t seed) : config_(config) {
  Rng rng(seed);
  for (std::size_t m = 0; m < 3; ++m) {
    modules_[m] = RsrModule(store_, "rsr" + std::to_string(m + 1), config_.up_factors[m], config_.condition_dim,
                            config_.widths, rng);
  }
}

std::array<nn::Var, 3> RefinementSubnet::forward(nn::Tape& tape, nn::Var coarse, std::span<const nn::Var> skeletons,
                                                 nn::Var condition) const {
  if (skeletons.size() != 3) throw CardinalityError("refinement needs exactly three skeletons");
  std::array<nn::Var, 3> out;
  nn::Var current = coarse;
  for (std::size_t m = 0; m < 3; ++m) {
    current = modules_[m](tape, current, skeletons[m], condition);
    out[m] = current;
  }
  return out;
}

nn::Var skeleton_var(nn::Var keypoints, const SurfaceSkeleton& skeleton) {
  return nn::combine_rows(keypoints, skeleton.combination());
}

// ---------------------------------------------------------------------------
// Model

LakeNet::LakeNet(const TrainingConfig& config) : config_(config) {
  config_.validate();
  detector_ = KeypointDetector(DetectorConfig::from(config_), derive_seed(config_.seed, 1));
  e1_ = AutoEncoder(AutoEncoderConfig::from(config_), derive_seed(config_.seed, 2));
  e2_ = AutoEncoder(AutoEncoderConfig::from(config_), derive_seed(config_.seed, 3));
  generator_ = KeypointGenerator(GeneratorConfig::from(config_), derive_seed(config_.seed, 4));
  refiner_ = RefinementSubnet(RefinementConfig::from(config_), derive_seed(config_.seed, 5));
}

const std::array<std::string, 5>& LakeNet::component_tags() {
  static const std::array<std::string, 5> tags{"D", "E1", "E2", "G", "R"};
  return tags;
}

nn::ParameterStore& LakeNet::component(const std::string& tag) {
  return const_cast<nn::ParameterStore&>(std::as_const(*this).component(tag));
}

const nn::ParameterStore& LakeNet::component(const std::string& tag) const {
  if (tag == "D") return detector_.parameters();
  if (tag == "E1") return e1_.parameters();
  if (tag == "E2") return e2_.parameters();
  if (tag == "G") return generator_.parameters();
  if (tag == "R") return refiner_.parameters();
  throw ConfigError("unknown component tag '" + tag + "'");
}

InterpolationOptions LakeNet::skeleton_options() const {
  InterpolationOptions o;
  o.edge_fraction = config_.edge_fraction;
  return o;
}

Stage1Targets LakeNet::stage1_targets(const PointCloud& complete) const {
  return {downsample_targets(complete, config_.keypoints)};
}

Stage1Pass LakeNet::stage1_forward(nn::Tape& tape, const PointCloud& complete, std::size_t label,
                                   const Stage1Targets& targets) const {
  Stage1Pass pass;
  nn::Var x = constant_points(tape, complete);
  pass.detection = in_term("keypoint", [&] { return detector_.forward(tape, x); });
  in_term("reconstruction", [&] {
    pass.encoding = e1_.encode(tape, x);
    pass.coarse = e1_.generate(tape, pass.encoding.global);
    return 0;
  });
  for (std::size_t i = 0; i < 3; ++i) {
    pass.skeletons[i] = make_surface_skeleton(tensor_points(pass.detection.keypoints[i].value()), complete,
                                              config_.skeleton_points[i], skeleton_options());
    pass.skeleton_points[i] = skeleton_var(pass.detection.keypoints[i], pass.skeletons[i]);
  }
  const auto skel = module_order(pass.skeleton_points);
  pass.refined = in_term("reconstruction",
                         [&] { return refiner_.forward(tape, pass.coarse, skel, pass.encoding.global); });

  Stage1Terms& t = pass.terms;
  t.keypoint_parts = in_term("keypoint", [&] {
    std::array<nn::Var, 3> downs;
    for (std::size_t i = 0; i < 3; ++i) downs[i] = tape.constant(targets.downsampled[i]);
    return umkd_loss(pass.detection.keypoints, pass.skeleton_points, x, downs, pass.detection.probs, label);
  });
  t.keypoint = t.keypoint_parts.total;
  t.reconstruction =
      in_term("reconstruction", [&] { return nn::chamfer(pass.coarse, x) + nn::chamfer(pass.refined[2], x); });
  t.total = in_term("total", [&] { return t.reconstruction + config_.lambda_kp1 * t.keypoint; });
  return pass;
}

Stage2Targets LakeNet::stage2_targets(const PointCloud& complete) const {
  nn::Tape tape;
  nn::Var x = constant_points(tape, complete);
  const DetectorOutput det = detector_.forward(tape, x);
  const AutoEncoder::Encoding enc = e1_.encode(tape, x);
  Stage2Targets t;
  for (std::size_t i = 0; i < 3; ++i) t.keypoints[i] = det.keypoints[i].value();
  t.global = enc.global.value();
  return t;
}

Stage2Pass LakeNet::stage2_forward(nn::Tape& tape, const PointCloud& partial, const PointCloud& complete,
                                   const Stage2Targets& targets) const {
  Stage2Pass pass;
  nn::Var xp = constant_points(tape, partial);
  in_term("completion", [&] {
    pass.encoding = e2_.encode(tape, xp);
    pass.coarse = e2_.generate(tape, pass.encoding.global);
    return 0;
  });
  pass.keypoints = in_term("keypoint", [&] {
    return generator_.forward(tape, pass.encoding.local, pass.encoding.global);
  });
  const PointCloud coarse = tensor_cloud(pass.coarse.value());
  for (std::size_t i = 0; i < 3; ++i) {
    pass.skeletons[i] = make_surface_skeleton(tensor_points(pass.keypoints[i].value()), coarse,
                                              config_.skeleton_points[i], skeleton_options());
    pass.skeleton_points[i] = skeleton_var(pass.keypoints[i], pass.skeletons[i]);
  }
  const auto skel = module_order(pass.skeleton_points);
  pass.refined = in_term("completion",
                         [&] { return refiner_.forward(tape, pass.coarse, skel, pass.encoding.global); });

  if (complete.empty()) return pass;  // inference only

  nn::Var x = constant_points(tape, complete);
  Stage2Terms& t = pass.terms;
  t.completion =
      in_term("completion", [&] { return nn::chamfer(pass.coarse, x) + nn::chamfer(pass.refined[2], x); });
  t.keypoint = in_term("keypoint", [&] {
    std::array<nn::Var, 3> detected;
    for (std::size_t i = 0; i < 3; ++i) detected[i] = tape.constant(targets.keypoints[i]);
    return ckg_loss(pass.keypoints, detected);
  });
  t.feature = in_term("feature", [&] {
    const nn::Var diff = tape.constant(targets.global) - pass.encoding.global;
    return nn::scale(nn::squared_norm(diff), 1.0 / static_cast<double>(diff.cols()));
  });
  t.total = in_term("total", [&] {
    return t.completion + config_.lambda_kp2 * t.keypoint + config_.lambda_feat * t.feature;
  });
  return pass;
}

Completion LakeNet::complete(const PointCloud& partial) const {
  nn::Tape tape;
  const Stage2Pass pass = stage2_forward(tape, partial, PointCloud{}, Stage2Targets{});
  Completion c;
  c.keypoints.source = KeypointSource::GeneratedFromPartial;
  for (std::size_t i = 0; i < 3; ++i) c.keypoints.scales[i] = tensor_cloud(pass.keypoints[i].value());
  c.skeletons = pass.skeletons;
  c.coarse = tensor_cloud(pass.coarse.value());
  c.fine = tensor_cloud(pass.refined[2].value());
  return c;
}

// ---------------------------------------------------------------------------
// Training

double EpochLog::term(const std::string& name) const {
  for (const auto& [k, v] : terms) {
    if (k == name) return v;
  }
  throw ContractError("epoch log has no term '" + name + "'");
}

std::string epoch_csv_header(const EpochLog& log) {
  std::string s = "epoch";
  for (const auto& [k, v] : log.terms) s += "," + k;
  return s + ",seconds";
}

std::string epoch_csv_row(const EpochLog& log) {
  std::string s = std::to_string(log.epoch);
  char buf[64];
  for (const auto& [k, v] : log.terms) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    s += buf;
  }
  std::snprintf(buf, sizeof buf, ",%.3f", log.seconds);
  return s + buf;
}

namespace {

using TermFn = std::function<std::vector<nn::Var>(nn::Tape&, std::size_t)>;

// Mini-batch Adam over `stores`. `forward` records one sample and returns its
// terms, the first of which is optimized; gradients of a batch are the mean
// over its samples, accumulated in sample order.
std::vector<EpochLog> run_training(const char* stage, std::span<const Sample> data, const TrainingConfig& cfg,
                                   std::size_t epochs, const std::vector<nn::ParameterStore*>& stores,
                                   const std::vector<std::string>& names, const TermFn& forward,
                                   const EpochCallback& on_epoch) {
  if (data.empty()) throw ConfigError(std::string(stage) + ": empty training set");
  if (data.size() < cfg.batch_size) {
    throw ConfigError(std::string(stage) + ": dataset of " + std::to_string(data.size()) +
                      " samples is smaller than batch_size " + std::to_string(cfg.batch_size));
  }
  const nn::AdamOptions adam{cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon};
  std::vector<EpochLog> logs;
  for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const auto order = random_permutation(data.size(), derive_seed(cfg.seed, 1000 + epoch));
    std::vector<double> sums(names.size(), 0.0);
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), b + cfg.batch_size);
      const double inv = 1.0 / static_cast<double>(end - b);
      for (auto* s : stores) s->zero_grad();
      for (std::size_t k = b; k < end; ++k) {
        const Sample& sample = data[order[k]];
        nn::Tape tape;
        std::vector<nn::Var> terms;
        try {
          terms = forward(tape, order[k]);
        } catch (const NumericalError& e) {
          throw NumericalError(std::string(stage) + ", epoch " + std::to_string(epoch) + ", sample " + sample.id +
                               ": " + e.what());
        }
        for (std::size_t t = 0; t < names.size(); ++t) sums[t] += terms[t].value().item();
        tape.backward(nn::scale(terms[0], inv));
      }
      for (auto* s : stores) {
        for (std::size_t i = 0; i < s->size(); ++i) {
          const auto& p = s->at(i);
          if (p.trainable && !p.grad.all_finite()) {
            throw NumericalError(std::string(stage) + ", epoch " + std::to_string(epoch) +
                                 ": non-finite gradient for parameter '" + p.name + "'");
          }
        }
        nn::adam_step(*s, adam);
      }
    }
    EpochLog log;
    log.epoch = epoch;
    for (std::size_t t = 0; t < names.size(); ++t) {
      log.terms.emplace_back(names[t], sums[t] / static_cast<double>(data.size()));
    }
    log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_epoch) on_epoch(log);
    logs.push_back(std::move(log));
  }
  return logs;
}

void check_labels(std::span<const Sample> data, std::size_t categories) {
  for (const auto& s : data) {
    if (s.category >= categories) {
      throw ConfigError("sample " + s.id + " has category " + std::to_string(s.category) + " but the model has " +
                        std::to_string(categories) + " categories");
    }
  }
}

}  // namespace

std::vector<EpochLog> stage1_train(LakeNet& model, std::span<const Sample> data, const TrainingConfig& cfg,
                                   const EpochCallback& on_epoch) {
  check_labels(data, model.config().categories);
  std::vector<Stage1Targets> targets;
  targets.reserve(data.size());
  for (const auto& s : data) targets.push_back(model.stage1_targets(s.complete));
  for (const char* tag : {"D", "E1", "R"}) model.component(tag).set_trainable(true);

  const TermFn forward = [&](nn::Tape& tape, std::size_t i) {
    const Stage1Pass p = model.stage1_forward(tape, data[i].complete, data[i].category, targets[i]);
    const Stage1Terms& t = p.terms;
    return std::vector<nn::Var>{t.total, t.reconstruction, t.keypoint, t.keypoint_parts.keypoint_term,
                                t.keypoint_parts.skeleton_term, t.keypoint_parts.classification_term};
  };
  auto logs = run_training("stage 1", data, cfg, cfg.stage1_epochs,
                           {&model.component("D"), &model.component("E1"), &model.component("R")},
                           {"total", "reconstruction", "keypoint", "kp_points", "kp_skeleton", "kp_class"}, forward,
                           on_epoch);
  model.mark_stage1_trained();
  return logs;
}

std::vector<EpochLog> stage2_train(LakeNet& model, std::span<const Sample> data, const TrainingConfig& cfg,
                                   const EpochCallback& on_epoch) {
  if (!model.stage1_trained()) {
    throw ConfigError("missing stage-1 checkpoint: stage 2 needs trained D, E1 and R");
  }
  model.component("D").set_trainable(false);
  model.component("E1").set_trainable(false);
  for (const char* tag : {"E2", "G", "R"}) model.component(tag).set_trainable(true);

  std::vector<Stage2Targets> targets;
  targets.reserve(data.size());
  for (const auto& s : data) targets.push_back(model.stage2_targets(s.complete));

  const TermFn forward = [&](nn::Tape& tape, std::size_t i) {
    const Stage2Pass p = model.stage2_forward(tape, data[i].partial, data[i].complete, targets[i]);
    const Stage2Terms& t = p.terms;
    return std::vector<nn::Var>{t.total, t.completion, t.keypoint, t.feature};
  };
  auto logs = run_training("stage 2", data, cfg, cfg.stage2_epochs,
                           {&model.component("E2"), &model.component("G"), &model.component("R")},
                           {"total", "completion", "keypoint", "feature"}, forward, on_epoch);
  model.mark_stage2_trained();
  return logs;
}

std::vector<EpochLog> train_detector(KeypointDetector& detector, std::span<const Sample> data,
                                     const TrainingConfig& cfg, const EpochCallback& on_epoch) {
  check_labels(data, detector.config().categories);
  std::vector<std::array<nn::Tensor, 3>> targets;
  targets.reserve(data.size());
  for (const auto& s : data) targets.push_back(downsample_targets(s.complete, detector.config().keypoints));
  InterpolationOptions opts;
  opts.edge_fraction = cfg.edge_fraction;

  const TermFn forward = [&](nn::Tape& tape, std::size_t i) {
    const PointCloud& cloud = data[i].complete;
    nn::Var x = constant_points(tape, cloud);
    const DetectorOutput det = detector.forward(tape, x);
    std::array<nn::Var, 3> skel;
    std::array<nn::Var, 3> downs;
    for (std::size_t s = 0; s < 3; ++s) {
      const auto sk = make_surface_skeleton(tensor_points(det.keypoints[s].value()), cloud,
                                            cfg.skeleton_points[s], opts);
      skel[s] = skeleton_var(det.keypoints[s], sk);
      downs[s] = tape.constant(targets[i][s]);
    }
    const DetectorLoss l = in_term("keypoint", [&] {
      return umkd_loss(det.keypoints, skel, x, downs, det.probs, data[i].category);
    });
    return std::vector<nn::Var>{l.total, l.keypoint_term, l.skeleton_term, l.classification_term};
  };
  return run_training("detector", data, cfg, cfg.stage1_epochs, {&detector.parameters()},
                      {"total", "kp_points", "kp_skeleton", "kp_class"}, forward, on_epoch);
}

// ---------------------------------------------------------------------------
// Persistence

void save_model(const LakeNet& model, const std::filesystem::path& dir, std::span<const std::string> tags) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create checkpoint directory " + dir.string() + ": " + ec.message());
  std::map<std::string, std::string> meta;
  for (const auto& [k, v] : model.config().to_map()) meta["config." + k] = v;
  meta["stage1_trained"] = model.stage1_trained() ? "1" : "0";
  meta["stage2_trained"] = model.stage2_trained() ? "1" : "0";
  for (const auto& tag : tags) {
    nn::write_checkpoint(dir / (tag + ".ckpt"), nn::capture(model.component(tag), tag, meta));
  }
}

void save_model(const LakeNet& model, const std::filesystem::path& dir) {
  const auto& tags = LakeNet::component_tags();
  save_model(model, dir, std::span<const std::string>(tags.data(), tags.size()));
}

LakeNet load_model(const std::filesystem::path& dir) {
  std::vector<nn::Checkpoint> found;
  for (const auto& tag : LakeNet::component_tags()) {
    const auto path = dir / (tag + ".ckpt");
    if (std::filesystem::exists(path)) found.push_back(nn::read_checkpoint(path));
  }
  if (found.empty()) throw ConfigError("missing checkpoint: no component files in " + dir.string());

  std::map<std::string, std::string> values;
  const std::string prefix = "config.";
  for (const auto& [k, v] : found.front().meta) {
    if (k.rfind(prefix, 0) == 0) values[k.substr(prefix.size())] = v;
  }
  TrainingConfig cfg;
  cfg.apply(values);
  LakeNet model(cfg);

  auto has = [&](const std::string& tag, const char* flag) {
    for (const auto& c : found) {
      if (c.component == tag) {
        auto it = c.meta.find(flag);
        return it != c.meta.end() && it->second == "1";
      }
    }
    return false;
  };
  for (const auto& c : found) nn::restore(model.component(c.component), c);
  if (has("D", "stage1_trained") && has("E1", "stage1_trained") && has("R", "stage1_trained")) {
    model.mark_stage1_trained();
  }
  if (has("E2", "stage2_trained") && has("G", "stage2_trained") && has("R", "stage2_trained")) {
    model.mark_stage2_trained();
  }
  return model;
}

}  // namespace lakenet
