#include "lakenet/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <type_traits>

#include "lakenet/cloud_io.hpp"
#include "lakenet/errors.hpp"

namespace lakenet {
namespace {

// Every field paired with its key, in serialization order. Shared by the
// reader and the writer so the two cannot drift apart.
template <class Config, class F>
void visit_fields(Config& c, F&& f) {
  f("categories", c.categories);
  f("complete_points", c.complete_points);
  f("partial_points", c.partial_points);
  f("keep_fraction", c.keep_fraction);
  f("keypoints", c.keypoints);
  f("skeleton_points", c.skeleton_points);
  f("coarse_points", c.coarse_points);
  f("up_factors", c.up_factors);
  f("edge_fraction", c.edge_fraction);
  f("detector_point_widths", c.detector_point_widths);
  f("detector_feature_width", c.detector_feature_width);
  f("detector_block_width", c.detector_block_width);
  f("classifier_hidden", c.classifier_hidden);
  f("category_offsets", c.category_offsets);
  f("encoder_first_widths", c.encoder_first_widths);
  f("encoder_second_widths", c.encoder_second_widths);
  f("decoder_hidden", c.decoder_hidden);
  f("generator_slot_width", c.generator_slot_width);
  f("generator_hidden", c.generator_hidden);
  f("refine_widths", c.refine_widths);
  f("lambda_kp1", c.lambda_kp1);
  f("lambda_kp2", c.lambda_kp2);
  f("lambda_feat", c.lambda_feat);
  f("learning_rate", c.learning_rate);
  f("adam_beta1", c.adam_beta1);
  f("adam_beta2", c.adam_beta2);
  f("adam_epsilon", c.adam_epsilon);
  f("batch_size", c.batch_size);
  f("stage1_epochs", c.stage1_epochs);
  f("stage2_epochs", c.stage2_epochs);
  f("dataset_size", c.dataset_size);
  f("holdout_size", c.holdout_size);
  f("seed", c.seed);
  f("deterministic", c.deterministic);
}

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& text, const char* expected) {
  throw ConfigError("config key '" + key + "': cannot parse '" + text + "' as " + expected);
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) bad_value(key, text, "a non-negative integer");
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) items.push_back(trim(item));
  return items;
}

template <class T>
std::string format_value(const T& v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (std::is_floating_point_v<T>) {
    return format_double(v);
  } else if constexpr (std::is_integral_v<T>) {
    return std::to_string(v);
  } else {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(v[i]);
    }
    return out;
  }
}

template <class T>
void parse_value(const std::string& key, const std::string& text, T& out) {
  if constexpr (std::is_same_v<T, bool>) {
    if (text == "true" || text == "1") out = true;
    else if (text == "false" || text == "0") out = false;
    else bad_value(key, text, "a boolean");
  } else if constexpr (std::is_floating_point_v<T>) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc() || ptr != end) bad_value(key, text, "a real number");
    out = v;
  } else if constexpr (std::is_integral_v<T>) {
    out = static_cast<T>(parse_unsigned(key, text));
  } else {
    const auto items = split_list(text);
    if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
      if (items.empty()) bad_value(key, text, "a comma-separated integer list");
      out.clear();
      for (const auto& item : items) out.push_back(parse_unsigned(key, item));
    } else {
      if (items.size() != out.size()) {
        bad_value(key, text, ("a list of " + std::to_string(out.size()) + " integers").c_str());
      }
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = parse_unsigned(key, items[i]);
    }
  }
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError("invalid configuration: " + message);
}

bool has_zero(const std::vector<std::size_t>& v) {
  return std::find(v.begin(), v.end(), std::size_t{0}) != v.end();
}

}  // namespace

TrainingConfig TrainingConfig::toy() {
  TrainingConfig c;
  c.categories = 5;
  c.complete_points = 512;
  c.partial_points = 256;
  c.keypoints = {24, 12, 6};
  c.skeleton_points = {128, 64, 32};
  c.coarse_points = 32;
  c.detector_point_widths = {16, 32};
  c.detector_feature_width = 64;
  c.detector_block_width = 64;
  c.classifier_hidden = 32;
  c.encoder_first_widths = {16, 32};
  c.encoder_second_widths = {64, 128};
  c.decoder_hidden = 128;
  c.generator_slot_width = 16;
  c.generator_hidden = 64;
  c.refine_widths = {16, 32, 32, 16};
  c.batch_size = 8;
  return c;
}

std::size_t TrainingConfig::fine_points() const {
  std::size_t n = coarse_points;
  for (std::size_t m = 0; m < 3; ++m) n = (n + skeleton_points[2 - m]) * up_factors[m];
  return n;
}

void TrainingConfig::validate() const {
  require(categories >= 1, "categories must be at least 1");
  require(keypoints[0] > keypoints[1] && keypoints[1] > keypoints[2],
          "keypoints must be strictly decreasing (K1 > K2 > K3)");
  require(keypoints[2] >= 3, "every scale needs at least 3 keypoints");
  for (std::size_t i = 0; i < 3; ++i) {
    require(skeleton_points[i] >= keypoints[i],
            "skeleton_points[" + std::to_string(i) + "] is smaller than its keypoint count");
    require(up_factors[i] >= 1, "up factors must be positive");
  }
  // Each refinement module needs as many incoming points as skeleton points.
  std::size_t n = coarse_points;
  for (std::size_t m = 0; m < 3; ++m) {
    const std::size_t s = skeleton_points[2 - m];
    require(n == s, "refinement module " + std::to_string(m + 1) + " receives " + std::to_string(n) +
                        " points but its skeleton has " + std::to_string(s));
    n = (n + s) * up_factors[m];
  }
  require(complete_points >= keypoints[0], "complete_points must be at least K1");
  require(partial_points >= keypoints[0], "partial_points must be at least K1");
  require(keep_fraction > 0.0 && keep_fraction <= 1.0, "keep_fraction must lie in (0, 1]");
  require(edge_fraction >= 0.0 && edge_fraction <= 1.0, "edge_fraction must lie in [0, 1]");
  require(!detector_point_widths.empty() && !has_zero(detector_point_widths), "detector_point_widths");
  require(!encoder_first_widths.empty() && !has_zero(encoder_first_widths), "encoder_first_widths");
  require(!encoder_second_widths.empty() && !has_zero(encoder_second_widths), "encoder_second_widths");
  require(detector_feature_width && detector_block_width && classifier_hidden && decoder_hidden &&
              generator_slot_width && generator_hidden,
          "layer widths must be positive");
  for (auto w : refine_widths) require(w > 0, "refine_widths must be positive");
  require(lambda_kp1 >= 0.0 && lambda_kp2 >= 0.0 && lambda_feat >= 0.0, "loss weights must be non-negative");
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0,
          "adam betas must lie in [0, 1)");
  require(adam_epsilon > 0.0, "adam_epsilon must be positive");
  require(batch_size >= 1, "batch_size must be positive");
  require(holdout_size < dataset_size, "holdout_size must be smaller than dataset_size");
}

std::map<std::string, std::string> TrainingConfig::to_map() const {
  std::map<std::string, std::string> out;
  visit_fields(*this, [&](const char* key, const auto& field) { out[key] = format_value(field); });
  return out;
}

void TrainingConfig::apply(const std::map<std::string, std::string>& values) {
  std::set<std::string> seen;
  visit_fields(*this, [&](const char* key, auto& field) {
    if (auto it = values.find(key); it != values.end()) {
      parse_value(key, it->second, field);
      seen.insert(key);
    }
  });
  for (const auto& [key, value] : values) {
    if (!seen.count(key)) throw UnknownKeyError("unknown configuration key '" + key + "'");
  }
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    TrainingConfig c;
    visit_fields(c, [&](const char* key, auto&) { k.emplace_back(key); });
    return k;
  }();
  return keys;
}

std::map<std::string, std::string> parse_key_values(std::istream& in) {
  const auto& keys = config_keys();
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    const std::string where = "config line " + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value', got '" + text + "'");
    std::string key = trim(std::string_view(text).substr(0, eq));
    std::string value = trim(std::string_view(text).substr(eq + 1));
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw UnknownKeyError(where + "unknown configuration key '" + key + "'");
    }
    if (!out.emplace(key, value).second) throw ConfigError(where + "duplicate key '" + key + "'");
  }
  return out;
}

TrainingConfig parse_config(std::istream& in, const TrainingConfig& base) {
  TrainingConfig c = base;
  c.apply(parse_key_values(in));
  return c;
}

TrainingConfig load_config(const std::filesystem::path& path, const TrainingConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  return parse_config(in, base);
}

std::string serialize_config(const TrainingConfig& config) {
  std::string out;
  visit_fields(config, [&](const char* key, const auto& field) {
    out += key;
    out += " = ";
    out += format_value(field);
    out += "\n";
  });
  return out;
}

}  // namespace lakenet
