#include "lakenet/checkpoint.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lakenet/errors.hpp"

namespace lakenet::nn {
namespace {

std::string format17(double v) {
  std::array<char, 40> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  if (ec != std::errc()) throw FormatError("checkpoint: cannot format value");
  return std::string(buf.data(), ptr);
}

void write_values(std::ostream& out, const char* tag, const Tensor& t) {
  out << tag;
  for (double v : t.values()) out << ' ' << format17(v);
  out << '\n';
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::vector<std::string> next(const char* expect) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      std::istringstream ss(line);
      std::vector<std::string> tokens;
      std::string tok;
      while (ss >> tok) tokens.push_back(tok);
      if (tokens.empty()) continue;
      if (expect != nullptr && tokens[0] != expect) fail("expected '" + std::string(expect) + "'");
      return tokens;
    }
    fail("unexpected end of file");
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw FormatError("checkpoint: line " + std::to_string(line_no_) + ": " + why);
  }

  std::size_t to_size(const std::string& s) const {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail("invalid integer '" + s + "'");
    return v;
  }

  Tensor read_values(const char* tag, std::size_t rows, std::size_t cols) {
    const auto tokens = next(tag);
    if (tokens.size() != rows * cols + 1) fail(std::string(tag) + ": wrong value count");
    std::vector<double> vals(rows * cols);
    for (std::size_t k = 0; k < vals.size(); ++k) {
      const auto& s = tokens[k + 1];
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), vals[k]);
      if (ec != std::errc() || ptr != s.data() + s.size()) fail("invalid number '" + s + "'");
    }
    return Tensor(rows, cols, std::move(vals));
  }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

}  // namespace

Checkpoint capture(const ParameterStore& store, const std::string& component,
                   std::map<std::string, std::string> meta) {
  Checkpoint c;
  c.component = component;
  c.step = store.step();
  c.meta = std::move(meta);
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& p = store.at(i);
    c.entries.push_back({p.name, p.value, p.adam_m, p.adam_v, p.trainable});
  }
  return c;
}

void restore(ParameterStore& store, const Checkpoint& ckpt) {
  if (ckpt.entries.size() != store.size()) {
    throw FormatError("checkpoint '" + ckpt.component + "' holds " + std::to_string(ckpt.entries.size()) +
                      " parameters, model expects " + std::to_string(store.size()));
  }
  for (const auto& e : ckpt.entries) {
    if (!store.contains(e.name)) throw FormatError("checkpoint parameter '" + e.name + "' unknown to model");
    auto& p = store.get(e.name);
    if (!p.value.same_shape(e.value)) {
      throw FormatError("checkpoint parameter '" + e.name + "' has shape " + e.value.shape_string() +
                        ", model expects " + p.value.shape_string());
    }
    p.value = e.value;
    p.adam_m = e.adam_m;
    p.adam_v = e.adam_v;
    p.grad = Tensor();
  }
  store.set_step(ckpt.step);
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out << "lakenet-checkpoint\n";
  out << "format_version " << ckpt.format_version << '\n';
  out << "component " << ckpt.component << '\n';
  out << "step " << ckpt.step << '\n';
  for (const auto& [k, v] : ckpt.meta) out << "meta " << k << ' ' << v << '\n';
  out << "parameters " << ckpt.entries.size() << '\n';
  for (const auto& e : ckpt.entries) {
    out << "parameter " << e.name << ' ' << e.value.rows() << ' ' << e.value.cols() << ' '
        << (e.trainable ? 1 : 0) << '\n';
    write_values(out, "values", e.value);
    write_values(out, "adam_m", e.adam_m);
    write_values(out, "adam_v", e.adam_v);
  }
  out << "end\n";
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_checkpoint(out, ckpt);
  if (!out) throw IoError("write failed: " + path.string());
}

Checkpoint read_checkpoint(std::istream& in) {
  LineReader r(in);
  Checkpoint c;
  r.next("lakenet-checkpoint");
  auto t = r.next("format_version");
  if (t.size() != 2) r.fail("malformed format_version");
  c.format_version = static_cast<int>(r.to_size(t[1]));
  if (c.format_version != kCheckpointFormatVersion) {
    r.fail("unsupported format_version " + t[1]);
  }
  t = r.next("component");
  if (t.size() != 2) r.fail("malformed component");
  c.component = t[1];
  t = r.next("step");
  if (t.size() != 2) r.fail("malformed step");
  c.step = r.to_size(t[1]);
  std::size_t count = 0;
  while (true) {
    t = r.next(nullptr);
    if (t[0] == "meta") {
      if (t.size() < 2) r.fail("malformed meta");
      std::string value;
      for (std::size_t k = 2; k < t.size(); ++k) value += (k > 2 ? " " : "") + t[k];
      c.meta[t[1]] = value;
    } else if (t[0] == "parameters") {
      if (t.size() != 2) r.fail("malformed parameters");
      count = r.to_size(t[1]);
      break;
    } else {
      r.fail("unexpected '" + t[0] + "'");
    }
  }
  for (std::size_t i = 0; i < count; ++i) {
    t = r.next("parameter");
    if (t.size() != 5) r.fail("malformed parameter header");
    Checkpoint::Entry e;
    e.name = t[1];
    const std::size_t rows = r.to_size(t[2]);
    const std::size_t cols = r.to_size(t[3]);
    e.trainable = t[4] == "1";
    e.value = r.read_values("values", rows, cols);
    e.adam_m = r.read_values("adam_m", rows, cols);
    e.adam_v = r.read_values("adam_v", rows, cols);
    c.entries.push_back(std::move(e));
  }
  r.next("end");
  return c;
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("missing checkpoint: " + path.string());
  try {
    return read_checkpoint(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace lakenet::nn
