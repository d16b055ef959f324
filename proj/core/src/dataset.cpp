#include "lakenet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "lakenet/cloud_io.hpp"
#include "lakenet/errors.hpp"

namespace lakenet {
namespace {

constexpr double kPi = std::numbers::pi;

struct Part {
  double area = 0.0;
  std::function<Vec3(Rng&)> sample;
};

Part box(Vec3 c, Vec3 h) {
  const std::array<double, 3> face{4 * h[1] * h[2], 4 * h[0] * h[2], 4 * h[0] * h[1]};
  Part p;
  p.area = 2 * (face[0] + face[1] + face[2]);
  p.sample = [c, h, face](Rng& rng) {
    double u = rng.uniform() * (face[0] + face[1] + face[2]);
    std::size_t axis = 0;
    while (axis < 2 && u >= face[axis]) u -= face[axis++];
    const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
    Vec3 q{};
    for (std::size_t a = 0; a < 3; ++a) {
      q[a] = c[a] + (a == axis ? side * h[a] : rng.uniform(-h[a], h[a]));
    }
    return q;
  };
  return p;
}

// Closed cylinder along z.
Part cylinder(Vec3 c, double r, double half_height) {
  const double lateral = 2 * kPi * r * 2 * half_height;
  const double cap = kPi * r * r;
  Part p;
  p.area = lateral + 2 * cap;
  p.sample = [=](Rng& rng) {
    const double u = rng.uniform() * (lateral + 2 * cap);
    const double theta = rng.uniform(0.0, 2 * kPi);
    if (u < lateral) {
      return Vec3{c[0] + r * std::cos(theta), c[1] + r * std::sin(theta),
                  c[2] + rng.uniform(-half_height, half_height)};
    }
    const double rho = r * std::sqrt(rng.uniform());
    const double z = u < lateral + cap ? c[2] - half_height : c[2] + half_height;
    return Vec3{c[0] + rho * std::cos(theta), c[1] + rho * std::sin(theta), z};
  };
  return p;
}

// Half torus in the xz plane bulging toward +x, tube circle in the (radial, y) plane.
Part half_torus(Vec3 c, double major, double minor) {
  Part p;
  p.area = kPi * major * 2 * kPi * minor;
  p.sample = [=](Rng& rng) {
    const double phi = rng.uniform(-kPi / 2, kPi / 2);
    double v = 0.0;
    do {
      v = rng.uniform(0.0, 2 * kPi);
    } while (rng.uniform() * (major + minor) > major + minor * std::cos(v));
    const double rad = major + minor * std::cos(v);
    return Vec3{c[0] + rad * std::cos(phi), c[1] + minor * std::sin(v), c[2] + rad * std::sin(phi)};
  };
  return p;
}

struct Layout {
  std::vector<Part> parts;
  std::vector<Vec3> annotations;
};

Layout layout_table(const std::vector<double>& p) {
  const double w = 0.8 + 0.4 * p[0], d = 0.5 + 0.4 * p[1], h = 0.5 + 0.4 * p[2];
  const double t = 0.05, lw = 0.03 + 0.02 * p[3];
  Layout l;
  l.parts.push_back(box({0, 0, h + t / 2}, {w / 2, d / 2, t / 2}));
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      const double x = sx * (w / 2 - lw), y = sy * (d / 2 - lw);
      l.parts.push_back(box({x, y, h / 2}, {lw, lw, h / 2}));
      l.annotations.push_back({sx * w / 2, sy * d / 2, h + t});
      l.annotations.push_back({x, y, 0.0});
    }
  }
  l.annotations.push_back({0, 0, h + t});
  return l;
}

Layout layout_chair(const std::vector<double>& p) {
  const double w = 0.5 + 0.2 * p[0], d = 0.5 + 0.2 * p[1], h = 0.4 + 0.2 * p[2], back = 0.4 + 0.3 * p[3];
  const double t = 0.05, lw = 0.03;
  Layout l;
  l.parts.push_back(box({0, 0, h + t / 2}, {w / 2, d / 2, t / 2}));
  l.parts.push_back(box({0, -d / 2 + t / 2, h + t + back / 2}, {w / 2, t / 2, back / 2}));
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      const double x = sx * (w / 2 - lw), y = sy * (d / 2 - lw);
      l.parts.push_back(box({x, y, h / 2}, {lw, lw, h / 2}));
      l.annotations.push_back({sx * w / 2, sy * d / 2, h + t});
      l.annotations.push_back({x, y, 0.0});
    }
    l.annotations.push_back({sx * w / 2, -d / 2, h + t + back});
  }
  return l;
}

Layout layout_box(const std::vector<double>& p) {
  const Vec3 half{(0.3 + 0.7 * p[0]) / 2, (0.3 + 0.7 * p[1]) / 2, (0.3 + 0.7 * p[2]) / 2};
  Layout l;
  l.parts.push_back(box({0, 0, 0}, half));
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      for (double sz : {-1.0, 1.0}) l.annotations.push_back({sx * half[0], sy * half[1], sz * half[2]});
    }
  }
  return l;
}

Layout layout_bracket(const std::vector<double>& p) {
  const double len = 0.8 + 0.4 * p[0], wy = 0.3 + 0.4 * p[1], t = 0.08 + 0.07 * p[2], up = 0.5 + 0.5 * p[3];
  Layout l;
  l.parts.push_back(box({0, 0, t / 2}, {len / 2, wy / 2, t / 2}));
  l.parts.push_back(box({-len / 2 + t / 2, 0, t + up / 2}, {t / 2, wy / 2, up / 2}));
  for (double sy : {-1.0, 1.0}) {
    const double y = sy * wy / 2;
    l.annotations.push_back({-len / 2, y, 0});
    l.annotations.push_back({len / 2, y, 0});
    l.annotations.push_back({len / 2, y, t});
    l.annotations.push_back({-len / 2, y, t + up});
    l.annotations.push_back({-len / 2 + t, y, t + up});
  }
  return l;
}

Layout layout_mug(const std::vector<double>& p) {
  const double r = 0.25 + 0.15 * p[0], h = 0.5 + 0.5 * p[1];
  const double major = h * (0.25 + 0.1 * p[2]), minor = 0.03;
  Layout l;
  l.parts.push_back(cylinder({0, 0, h / 2}, r, h / 2));
  l.parts.push_back(half_torus({r, 0, h / 2}, major, minor));
  l.annotations = {{0, 0, h},          {0, 0, 0},          {r, 0, h},
                   {-r, 0, h},         {0, r, h},          {0, -r, h},
                   {r, 0, h / 2 + major}, {r, 0, h / 2 - major}, {r + major, 0, h / 2}};
  return l;
}

Layout layout(const SyntheticShapeSpec& spec) {
  if (spec.params.size() < 4) throw ContractError("synthetic shapes need 4 parameters");
  switch (spec.family) {
    case ShapeFamily::Table: return layout_table(spec.params);
    case ShapeFamily::Chair: return layout_chair(spec.params);
    case ShapeFamily::Box: return layout_box(spec.params);
    case ShapeFamily::LBracket: return layout_bracket(spec.params);
    case ShapeFamily::CylinderHandle: return layout_mug(spec.params);
  }
  throw ContractError("unknown shape family");
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string_view family_name(ShapeFamily family) {
  switch (family) {
    case ShapeFamily::Table: return "table";
    case ShapeFamily::Chair: return "chair";
    case ShapeFamily::Box: return "box";
    case ShapeFamily::LBracket: return "l-bracket";
    case ShapeFamily::CylinderHandle: return "cylinder-with-handle";
  }
  return "unknown";
}

SyntheticShapeSpec SyntheticShapeSpec::random(ShapeFamily family, std::size_t points, std::uint64_t seed) {
  SyntheticShapeSpec s;
  s.family = family;
  s.category = static_cast<std::size_t>(family);
  s.points = points;
  s.seed = seed;
  Rng rng(seed);
  for (int i = 0; i < 4; ++i) s.params.push_back(rng.uniform());
  return s;
}

SyntheticShape sample_shape(const SyntheticShapeSpec& spec) {
  if (spec.points == 0) throw CardinalityError("synthetic shape needs at least one point");
  const Layout l = layout(spec);
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& part : l.parts) cumulative.push_back(total += part.area);

  Rng rng(derive_seed(spec.seed, 0x5a3b));
  std::vector<Vec3> pts;
  pts.reserve(spec.points);
  for (std::size_t i = 0; i < spec.points; ++i) {
    const double u = rng.uniform() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t k = std::min<std::size_t>(it - cumulative.begin(), l.parts.size() - 1);
    pts.push_back(l.parts[k].sample(rng));
  }

  PointCloud raw(std::move(pts));
  const auto [lo, hi] = raw.bounding_box();
  const Vec3 center = 0.5 * (lo + hi);
  const double extent = std::max({hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]});
  const double s = extent > 0.0 ? 1.0 / extent : 1.0;
  auto normalize = [&](const Vec3& p) { return s * (p - center); };

  SyntheticShape shape;
  shape.category = spec.category;
  for (const auto& p : raw.points()) shape.cloud.push_back(normalize(p));
  for (const auto& p : l.annotations) shape.annotations.push_back(normalize(p));
  return shape;
}

PointCloud make_partial(const PointCloud& cloud, const PartialViewSpec& spec) {
  const double len = norm(spec.view);
  if (!(len > 1e-12) || !std::isfinite(len)) throw ContractError("view direction cannot be normalized");
  const Vec3 dir = (1.0 / len) * spec.view;
  if (!(spec.keep_fraction > 0.0 && spec.keep_fraction <= 1.0)) {
    throw ContractError("keep fraction must lie in (0, 1]");
  }
  const auto keep = static_cast<std::size_t>(std::floor(spec.keep_fraction * static_cast<double>(cloud.size())));
  if (keep == 0) throw ContractError("keep fraction leaves no points of a " + std::to_string(cloud.size()) + "-point cloud");

  std::vector<std::size_t> order(cloud.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<double> proj(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) proj[i] = dot(cloud[i], dir);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return proj[a] < proj[b]; });

  Rng rng(spec.seed);
  std::vector<std::size_t> picked(spec.points);
  for (auto& p : picked) p = order[rng.below(keep)];
  return cloud.subset(picked);
}

Vec3 random_direction(Rng& rng) {
  for (;;) {
    const Vec3 v{rng.normal(), rng.normal(), rng.normal()};
    const double n = norm(v);
    if (n > 1e-9) return (1.0 / n) * v;
  }
}

std::vector<Sample> synthesize_dataset(const TrainingConfig& cfg) {
  std::vector<Sample> out;
  out.reserve(cfg.dataset_size);
  for (std::size_t i = 0; i < cfg.dataset_size; ++i) {
    const auto family = static_cast<ShapeFamily>(i % kFamilyCount);
    const auto spec = SyntheticShapeSpec::random(family, cfg.complete_points, derive_seed(cfg.seed, 2 * i));
    SyntheticShape shape = sample_shape(spec);

    Rng view_rng(derive_seed(cfg.seed, 2 * i + 1));
    PartialViewSpec view;
    view.view = random_direction(view_rng);
    view.keep_fraction = cfg.keep_fraction;
    view.points = cfg.partial_points;
    view.seed = view_rng.fork_seed();

    char id[32];
    std::snprintf(id, sizeof id, "shape_%04zu", i);
    Sample s;
    s.id = id;
    s.category = shape.category;
    s.partial = make_partial(shape.cloud, view);
    s.complete = std::move(shape.cloud);
    s.annotations = std::move(shape.annotations);
    out.push_back(std::move(s));
  }
  return out;
}

DatasetSplit split_dataset(std::vector<Sample> samples, std::size_t holdout) {
  if (holdout > samples.size()) throw CardinalityError("holdout larger than the dataset");
  DatasetSplit split;
  const std::size_t n_train = samples.size() - holdout;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    (i < n_train ? split.train : split.heldout).push_back(std::move(samples[i]));
  }
  return split;
}

void write_dataset(std::span<const Sample> samples, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir / "complete", ec);
  if (!ec) fs::create_directories(out_dir / "partial", ec);
  if (ec) throw IoError("cannot create dataset directories under " + out_dir.string() + ": " + ec.message());

  const fs::path manifest_path = out_dir / "manifest.csv";
  std::ofstream manifest(manifest_path);
  if (!manifest) throw IoError("cannot write " + manifest_path.string());
  manifest << kManifestHeader << '\n';
  for (const auto& s : samples) {
    const std::string complete = "complete/" + s.id + ".xyz";
    const std::string partial = "partial/" + s.id + ".xyz";
    write_xyz(out_dir / complete, s.complete);
    write_xyz(out_dir / partial, s.partial);
    manifest << s.id << ',' << s.category << ',' << complete << ',' << partial << '\n';
  }
  if (!manifest) throw IoError("failed writing " + manifest_path.string());
}

std::vector<ManifestRow> read_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open manifest " + manifest.string());
  std::string line;
  if (!std::getline(in, line) || line != kManifestHeader) {
    throw FormatError(manifest.string() + ": expected header '" + std::string(kManifestHeader) + "'");
  }
  std::vector<ManifestRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    const std::string where = manifest.string() + ": line " + std::to_string(lineno) + ": ";
    if (f.size() != 4) throw FormatError(where + "expected 4 fields, got " + std::to_string(f.size()));
    ManifestRow row;
    row.id = f[0];
    try {
      std::size_t used = 0;
      row.category = std::stoul(f[1], &used);
      if (used != f[1].size()) throw std::invalid_argument(f[1]);
    } catch (const std::exception&) {
      throw FormatError(where + "category '" + f[1] + "' is not a non-negative integer");
    }
    row.complete_path = f[2];
    row.partial_path = f[3];
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Sample> load_dataset(const std::filesystem::path& manifest) {
  const auto base = manifest.parent_path();
  std::vector<Sample> out;
  for (const auto& row : read_manifest(manifest)) {
    Sample s;
    s.id = row.id;
    s.category = row.category;
    s.complete = read_xyz(base / row.complete_path);
    s.partial = read_xyz(base / row.partial_path);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace lakenet
