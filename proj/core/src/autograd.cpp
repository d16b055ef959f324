#include "lakenet/autograd.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lakenet/errors.hpp"
#include "lakenet/layers.hpp"
#include "lakenet/metrics.hpp"

namespace lakenet::nn {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

ConstMap view(const Tensor& t) { return ConstMap(t.data(), t.rows(), t.cols()); }
MutMap view(Tensor& t) { return MutMap(t.data(), t.rows(), t.cols()); }

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_string() + " and " +
                   b.shape_string());
}

void require_same_shape(const char* op, Var a, Var b) {
  if (!a.value().same_shape(b.value())) shape_fail(op, a.value(), b.value());
}

void require_tape(const char* op, Var a, Var b) {
  if (&a.tape() != &b.tape()) throw ContractError(std::string(op) + ": operands on different tapes");
}

int check_axis(const char* op, int axis) {
  if (axis != 0 && axis != 1) {
    throw ShapeError(std::string(op) + ": axis must be 0 or 1, got " + std::to_string(axis));
  }
  return axis;
}

}  // namespace

Tape& Var::tape() const {
  if (tape_ == nullptr) throw ContractError("use of an unbound Var");
  return *tape_;
}
const Tensor& Var::value() const { return tape().value(id_); }
const Tensor& Var::grad() const { return tape().grad(id_); }
bool Var::requires_grad() const { return tape().requires_grad(id_); }

void SparseRows::add_row(std::span<const std::size_t> idx, std::span<const double> w) {
  if (idx.size() != w.size()) throw ContractError("SparseRows::add_row: index/weight length mismatch");
  for (std::size_t i : idx) {
    if (i >= input_rows) throw CardinalityError("SparseRows::add_row: index out of range");
  }
  index.insert(index.end(), idx.begin(), idx.end());
  weight.insert(weight.end(), w.begin(), w.end());
  offsets.push_back(index.size());
}

Var Tape::constant(Tensor value) {
  if (!value.all_finite()) throw NumericalError("constant: non-finite input");
  nodes_.push_back(Node{std::move(value), Tensor(), false, nullptr, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::variable(Tensor value) {
  if (!value.all_finite()) throw NumericalError("variable: non-finite input");
  nodes_.push_back(Node{std::move(value), Tensor(), true, nullptr, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(Parameter& p) {
  auto it = param_ids_.find(&p);
  if (it != param_ids_.end()) return Var(this, it->second);
  if (!p.value.all_finite()) throw NumericalError("parameter '" + p.name + "' holds non-finite values");
  nodes_.push_back(Node{p.value, Tensor(), p.trainable, nullptr, p.trainable ? &p : nullptr});
  param_ids_.emplace(&p, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(const char* op, Tensor value, std::span<const Var> inputs, BackwardFn fn) {
  if (!value.all_finite()) throw NumericalError(std::string(op) + ": produced a non-finite value");
  bool needs = false;
  for (const auto& v : inputs) {
    if (&v.tape() != this) throw ContractError(std::string(op) + ": input recorded on another tape");
    needs = needs || requires_grad(v.id());
  }
  nodes_.push_back(Node{std::move(value), Tensor(), needs, needs ? std::move(fn) : BackwardFn{}, nullptr});
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::grad(std::size_t id) const {
  const Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor::zeros_like(n.value);
  return n.grad;
}

Tensor& Tape::grad_buffer(std::size_t id) {
  Tensor& g = pass_grads_[id];
  if (g.empty()) g = Tensor::zeros_like(nodes_[id].value);
  return g;
}

void Tape::backward(Var loss) {
  if (&loss.tape() != this) throw ContractError("backward: loss recorded on another tape");
  if (loss.value().size() != 1) {
    throw ContractError("backward: loss must be scalar, got shape " + loss.value().shape_string());
  }
  if (!requires_grad(loss.id())) return;
  pass_grads_.assign(nodes_.size(), Tensor());
  pass_grads_[loss.id()] = Tensor::scalar(1.0);
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    if (pass_grads_[i].empty() || !nodes_[i].backward) continue;
    nodes_[i].backward(*this, nodes_[i].value, pass_grads_[i]);
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Tensor& g = pass_grads_[i];
    if (g.empty()) continue;
    if (!g.all_finite()) throw NumericalError("backward: non-finite gradient");
    Node& n = nodes_[i];
    if (n.grad.empty()) n.grad = Tensor::zeros_like(n.value);
    n.grad.add_inplace(g);
    if (n.param != nullptr) {
      if (!n.param->has_grad()) n.param->grad = Tensor::zeros_like(n.param->value);
      n.param->grad.add_inplace(g);
    }
  }
  pass_grads_.clear();
}

void Tape::zero_grad() {
  for (auto& n : nodes_) n.grad = Tensor();
}

Var matmul(Var a, Var b) {
  require_tape("matmul", a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows()) shape_fail("matmul", av, bv);
  Tensor out(av.rows(), bv.cols());
  view(out).noalias() = view(av) * view(bv);
  const std::size_t ia = a.id(), ib = b.id();
  const Var in[] = {a, b};
  return a.tape().record("matmul", std::move(out), in, [ia, ib](Tape& t, const Tensor&, const Tensor& g) {
    if (t.requires_grad(ia)) view(t.grad_buffer(ia)).noalias() += view(g) * view(t.value(ib)).transpose();
    if (t.requires_grad(ib)) view(t.grad_buffer(ib)).noalias() += view(t.value(ia)).transpose() * view(g);
  });
}

Var linear(Var x, Var w, Var b) {
  require_tape("linear", x, w);
  require_tape("linear", x, b);
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  const Tensor& bv = b.value();
  if (xv.cols() != wv.rows()) shape_fail("linear", xv, wv);
  if (bv.rows() != 1 || bv.cols() != wv.cols()) shape_fail("linear", wv, bv);
  Tensor out(xv.rows(), wv.cols());
  auto o = view(out);
  o.noalias() = view(xv) * view(wv);
  o.rowwise() += view(bv).row(0);
  const std::size_t ix = x.id(), iw = w.id(), ib = b.id();
  const Var in[] = {x, w, b};
  return x.tape().record("linear", std::move(out), in, [ix, iw, ib](Tape& t, const Tensor&, const Tensor& g) {
    if (t.requires_grad(ix)) view(t.grad_buffer(ix)).noalias() += view(g) * view(t.value(iw)).transpose();
    if (t.requires_grad(iw)) view(t.grad_buffer(iw)).noalias() += view(t.value(ix)).transpose() * view(g);
    if (t.requires_grad(ib)) view(t.grad_buffer(ib)).row(0) += view(g).colwise().sum();
  });
}

Var add(Var a, Var b) {
  require_tape("add", a, b);
  require_same_shape("add", a, b);
  Tensor out = a.value();
  out.add_inplace(b.value());
  const std::size_t ia = a.id(), ib = b.id();
  const Var in[] = {a, b};
  return a.tape().record("add", std::move(out), in, [ia, ib](Tape& t, const Tensor&, const Tensor& g) {
    if (t.requires_grad(ia)) t.grad_buffer(ia).add_inplace(g);
    if (t.requires_grad(ib)) t.grad_buffer(ib).add_inplace(g);
  });
}

Var sub(Var a, Var b) {
  require_tape("sub", a, b);
  require_same_shape("sub", a, b);
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] -= bv[k];
  const std::size_t ia = a.id(), ib = b.id();
  const Var in[] = {a, b};
  return a.tape().record("sub", std::move(out), in, [ia, ib](Tape& t, const Tensor&, const Tensor& g) {
    if (t.requires_grad(ia)) t.grad_buffer(ia).add_inplace(g);
    if (t.requires_grad(ib)) {
      Tensor& gb = t.grad_buffer(ib);
      for (std::size_t k = 0; k < g.size(); ++k) gb[k] -= g[k];
    }
  });
}

Var mul(Var a, Var b) {
  require_tape("mul", a, b);
  require_same_shape("mul", a, b);
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= bv[k];
  const std::size_t ia = a.id(), ib = b.id();
  const Var in[] = {a, b};
  return a.tape().record("mul", std::move(out), in, [ia, ib](Tape& t, const Tensor&, const Tensor& g) {
    if (t.requires_grad(ia)) {
      Tensor& ga = t.grad_buffer(ia);
      const Tensor& bv = t.value(ib);
      for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * bv[k];
    }
    if (t.requires_grad(ib)) {
      Tensor& gb = t.grad_buffer(ib);
      const Tensor& av = t.value(ia);
      for (std::size_t k = 0; k < g.size(); ++k) gb[k] += g[k] * av[k];
    }
  });
}

Var scale(Var a, double s) {
  Tensor out = a.value();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= s;
  const std::size_t ia = a.id();
  const Var in[] = {a};
  return a.tape().record("scale", std::move(out), in, [ia, s](Tape& t, const Tensor&, const Tensor& g) {
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t k = 0; k < g.size(); ++k) ga[k] += s * g[k];
  });
}

Var relu(Var a) {
  Tensor out = a.value();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = out[k] > 0.0 ? out[k] : 0.0;
  const std::size_t ia = a.id();
  const Var in[] = {a};
  return a.tape().record("relu", std::move(out), in, [ia](Tape& t, const Tensor&, const Tensor& g) {
    Tensor& ga = t.grad_buffer(ia);
    const Tensor& av = t.value(ia);
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (av[k] > 0.0) ga[k] += g[k];
    }
  });
}

Var softmax(Var a, int axis) {
  check_axis("softmax", axis);
  const Tensor& av = a.value();
  Tensor out(av.rows(), av.cols());
  // Each group is a row (axis 1) or a column (axis 0); element k of group i
  // sits at i * outer + k * inner.
  const std::size_t groups = axis == 1 ? av.rows() : av.cols();
  const std::size_t len = axis == 1 ? av.cols() : av.rows();
  const std::size_t outer = axis == 1 ? av.cols() : 1;
  const std::size_t inner = axis == 1 ? 1 : av.cols();
  for (std::size_t gi = 0; gi < groups; ++gi) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < len; ++k) mx = std::max(mx, av[gi * outer + k * inner]);
    double total = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
      const double e = std::exp(av[gi * outer + k * inner] - mx);
      out[gi * outer + k * inner] = e;
      total += e;
    }
    for (std::size_t k = 0; k < len; ++k) out[gi * outer + k * inner] /= total;
  }
  const std::size_t ia = a.id();
  const Var in[] = {a};
  return a.tape().record("softmax", std::move(out), in,
                         [ia, groups, len, outer, inner](Tape& t, const Tensor& y, const Tensor& g) {
                           Tensor& ga = t.grad_buffer(ia);
                           for (std::size_t gi = 0; gi < groups; ++gi) {
                             double dotp = 0.0;
                             for (std::size_t k = 0; k < len; ++k) {
                               const std::size_t idx = gi * outer + k * inner;
                               dotp += g[idx] * y[idx];
                             }
                             for (std::size_t k = 0; k < len; ++k) {
                               const std::size_t idx = gi * outer + k * inner;
                               ga[idx] += y[idx] * (g[idx] - dotp);
                             }
                           }
                         });
}

Var max_pool(Var a, int axis) {
  check_axis("max_pool", axis);
  const Tensor& av = a.value();
  if (av.size() == 0) throw ShapeError("max_pool: empty input " + av.shape_string());
  const std::size_t groups = axis == 1 ? av.rows() : av.cols();
  const std::size_t len = axis == 1 ? av.cols() : av.rows();
  const std::size_t outer = axis == 1 ? av.cols() : 1;
  const std::size_t inner = axis == 1 ? 1 : av.cols();
  Tensor out = axis == 0 ? Tensor(1, av.cols()) : Tensor(av.rows(), 1);
  std::vector<std::size_t> argmax(groups);
  for (std::size_t gi = 0; gi < groups; ++gi) {
    std::size_t best = gi * outer;
    for (std::size_t k = 1; k < len; ++k) {
      const std::size_t idx = gi * outer + k * inner;
      if (av[idx] > av[best]) best = idx;
    }
    argmax[gi] = best;
    out[gi] = av[best];
  }
  const std::size_t ia = a.id();
  const Var in[] = {a};
  return a.tape().record("max_pool", std::move(out), in,
                         [ia, argmax = std::move(argmax)](Tape& t, const Tensor&, const Tensor& g) {
                           Tensor& ga = t.grad_buffer(ia);
                           for (std::size_t gi = 0; gi < argmax.size(); ++gi) ga[argmax[gi]] += g[gi];
                         });
}

Var concat(std::span<const Var> parts, int axis) {
  check_axis("concat", axis);
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const Tensor& first = parts[0].value();
  std::size_t rows = 0, cols = 0;
  for (const auto& p : parts) {
    require_tape("concat", parts[0], p);
    const Tensor& v = p.value();
    if (axis == 0) {
      if (v.cols() != first.cols()) shape_fail("concat", first, v);
      rows += v.rows();
      cols = v.cols();
    } else {
      if (v.rows() != first.rows()) shape_fail("concat", first, v);
      cols += v.cols();
      rows = v.rows();
    }
  }
  Tensor out(rows, cols);
  std::vector<std::size_t> ids;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const Tensor& v = p.value();
    ids.push_back(p.id());
    if (axis == 0) {
      std::copy(v.data(), v.data() + v.size(), out.data() + offset * cols);
      offset += v.rows();
    } else {
      for (std::size_t r = 0; r < rows; ++r) {
        std::copy(v.data() + r * v.cols(), v.data() + (r + 1) * v.cols(), out.data() + r * cols + offset);
      }
      offset += v.cols();
    }
  }
  return parts[0].tape().record(
      "concat", std::move(out), parts, [ids = std::move(ids), axis, cols](Tape& t, const Tensor&, const Tensor& g) {
        std::size_t offset = 0;
        for (std::size_t id : ids) {
          const Tensor& v = t.value(id);
          if (t.requires_grad(id)) {
            Tensor& gi = t.grad_buffer(id);
            if (axis == 0) {
              for (std::size_t k = 0; k < v.size(); ++k) gi[k] += g[offset * cols + k];
            } else {
              for (std::size_t r = 0; r < v.rows(); ++r) {
                for (std::size_t c = 0; c < v.cols(); ++c) gi.at(r, c) += g[r * cols + offset + c];
              }
            }
          }
          offset += axis == 0 ? v.rows() : v.cols();
        }
      });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  const std::size_t ia = a.id();
  const Var in[] = {a};
  return a.tape().record("sum", Tensor::scalar(s), in, [ia](Tape& t, const Tensor&, const Tensor& g) {
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t k = 0; k < ga.size(); ++k) ga[k] += g[0];
  });
}

Var mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  if (n == 0) throw ShapeError("mean: empty input");
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  const std::size_t ia = a.id();
  const Var in[] = {a};
  return a.tape().record("mean", Tensor::scalar(s / n), in, [ia, n](Tape& t, const Tensor&, const Tensor& g) {
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t k = 0; k < ga.size(); ++k) ga[k] += g[0] / n;
  });
}

Var squared_norm(Var a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v * v;
  const std::size_t ia = a.id();
  const Var in[] = {a};
  return a.tape().record("squared_norm", Tensor::scalar(s), in, [ia](Tape& t, const Tensor&, const Tensor& g) {
    Tensor& ga = t.grad_buffer(ia);
    const Tensor& av = t.value(ia);
    for (std::size_t k = 0; k < ga.size(); ++k) ga[k] += 2.0 * av[k] * g[0];
  });
}

Var transpose(Var a) {
  const Tensor& av = a.value();
  Tensor out(av.cols(), av.rows());
  view(out) = view(av).transpose();
  const std::size_t ia = a.id();
  const Var in[] = {a};
  return a.tape().record("transpose", std::move(out), in, [ia](Tape& t, const Tensor&, const Tensor& g) {
    view(t.grad_buffer(ia)) += view(g).transpose();
  });
}

Var reshape(Var a, std::size_t rows, std::size_t cols) {
  const Tensor& av = a.value();
  if (rows * cols != av.size()) {
    throw ShapeError("reshape: cannot view " + av.shape_string() + " as [" + std::to_string(rows) + ", " +
                     std::to_string(cols) + "]");
  }
  Tensor out(rows, cols, std::vector<double>(av.values().begin(), av.values().end()));
  const std::size_t ia = a.id();
  const Var in[] = {a};
  return a.tape().record("reshape", std::move(out), in, [ia](Tape& t, const Tensor&, const Tensor& g) {
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k];
  });
}

Var gather_rows(Var a, std::span<const std::size_t> indices) {
  const Tensor& av = a.value();
  const std::size_t cols = av.cols();
  Tensor out(indices.size(), cols);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= av.rows()) {
      throw CardinalityError("gather_rows: index " + std::to_string(indices[r]) + " out of range for " +
                             av.shape_string());
    }
    std::copy(av.data() + indices[r] * cols, av.data() + (indices[r] + 1) * cols, out.data() + r * cols);
  }
  const std::size_t ia = a.id();
  const Var in[] = {a};
  return a.tape().record("gather_rows", std::move(out), in,
                         [ia, cols, idx = std::vector<std::size_t>(indices.begin(), indices.end())](
                             Tape& t, const Tensor&, const Tensor& g) {
                           Tensor& ga = t.grad_buffer(ia);
                           for (std::size_t r = 0; r < idx.size(); ++r) {
                             for (std::size_t c = 0; c < cols; ++c) ga[idx[r] * cols + c] += g[r * cols + c];
                           }
                         });
}

Var repeat_rows(Var a, std::size_t n) {
  if (a.value().rows() != 1) throw ShapeError("repeat_rows: expected a single row, got " + a.value().shape_string());
  const std::vector<std::size_t> idx(n, 0);
  return gather_rows(a, idx);
}

Var combine_rows(Var a, const SparseRows& map) {
  const Tensor& av = a.value();
  if (map.input_rows != av.rows()) {
    throw ShapeError("combine_rows: map expects " + std::to_string(map.input_rows) + " input rows, got " +
                     av.shape_string());
  }
  const std::size_t cols = av.cols();
  Tensor out(map.output_rows(), cols);
  for (std::size_t r = 0; r < map.output_rows(); ++r) {
    for (std::size_t k = map.offsets[r]; k < map.offsets[r + 1]; ++k) {
      const double w = map.weight[k];
      const double* src = av.data() + map.index[k] * cols;
      for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] += w * src[c];
    }
  }
  const std::size_t ia = a.id();
  const Var in[] = {a};
  return a.tape().record("combine_rows", std::move(out), in, [ia, cols, map](Tape& t, const Tensor&, const Tensor& g) {
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t r = 0; r < map.output_rows(); ++r) {
      for (std::size_t k = map.offsets[r]; k < map.offsets[r + 1]; ++k) {
        const double w = map.weight[k];
        for (std::size_t c = 0; c < cols; ++c) ga[map.index[k] * cols + c] += w * g[r * cols + c];
      }
    }
  });
}

Var chamfer(Var a, Var b) {
  require_tape("chamfer", a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != 3 || bv.cols() != 3) shape_fail("chamfer", av, bv);
  if (av.rows() == 0 || bv.rows() == 0) throw CardinalityError("chamfer: point sets must not be empty");
  auto ab = lakenet::detail::nearest_neighbors(av.values(), bv.values());
  auto ba = lakenet::detail::nearest_neighbors(bv.values(), av.values());
  double sa = 0.0, sb = 0.0;
  for (double d : ab.sq_dist) sa += d;
  for (double d : ba.sq_dist) sb += d;
  const double n = static_cast<double>(av.rows());
  const double m = static_cast<double>(bv.rows());
  const double value = sa / n + sb / m;
  const std::size_t ia = a.id(), ib = b.id();
  const Var in[] = {a, b};
  return a.tape().record(
      "chamfer", Tensor::scalar(value), in,
      [ia, ib, n, m, nn_ab = std::move(ab.index), nn_ba = std::move(ba.index)](Tape& t, const Tensor&,
                                                                               const Tensor& g) {
        const Tensor& av = t.value(ia);
        const Tensor& bv = t.value(ib);
        Tensor* ga = t.requires_grad(ia) ? &t.grad_buffer(ia) : nullptr;
        Tensor* gb = t.requires_grad(ib) ? &t.grad_buffer(ib) : nullptr;
        const double ca = 2.0 * g[0] / n;
        const double cb = 2.0 * g[0] / m;
        for (std::size_t i = 0; i < nn_ab.size(); ++i) {
          const std::size_t j = nn_ab[i];
          for (int c = 0; c < 3; ++c) {
            const double d = av[3 * i + c] - bv[3 * j + c];
            if (ga) (*ga)[3 * i + c] += ca * d;
            if (gb) (*gb)[3 * j + c] -= ca * d;
          }
        }
        for (std::size_t j = 0; j < nn_ba.size(); ++j) {
          const std::size_t i = nn_ba[j];
          for (int c = 0; c < 3; ++c) {
            const double d = bv[3 * j + c] - av[3 * i + c];
            if (gb) (*gb)[3 * j + c] += cb * d;
            if (ga) (*ga)[3 * i + c] -= cb * d;
          }
        }
      });
}

Var binary_cross_entropy(Var probs, std::span<const double> targets) {
  const Tensor& pv = probs.value();
  if (targets.size() != pv.size()) {
    throw ShapeError("binary_cross_entropy: " + std::to_string(targets.size()) + " targets for probabilities " +
                     pv.shape_string());
  }
  constexpr double lo = 1e-12;
  constexpr double hi = 1.0 - 1e-12;
  double loss = 0.0;
  for (std::size_t k = 0; k < pv.size(); ++k) {
    const double p = std::clamp(pv[k], lo, hi);
    loss -= targets[k] * std::log(p) + (1.0 - targets[k]) * std::log(1.0 - p);
  }
  const std::size_t ip = probs.id();
  const Var in[] = {probs};
  return probs.tape().record(
      "binary_cross_entropy", Tensor::scalar(loss), in,
      [ip, tg = std::vector<double>(targets.begin(), targets.end())](Tape& t, const Tensor&, const Tensor& g) {
        const Tensor& pv = t.value(ip);
        Tensor& gp = t.grad_buffer(ip);
        for (std::size_t k = 0; k < pv.size(); ++k) {
          const double p = pv[k];
          if (p < lo || p > hi) continue;
          gp[k] += g[0] * (-(tg[k] / p) + (1.0 - tg[k]) / (1.0 - p));
        }
      });
}

}  // namespace lakenet::nn
