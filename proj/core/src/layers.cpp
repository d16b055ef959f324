#include "lakenet/layers.hpp"

#include <cmath>
#include <cstring>

#include "lakenet/errors.hpp"

namespace lakenet::nn {

Parameter& ParameterStore::add(std::string name, Tensor init) {
  if (index_.count(name) != 0) throw ContractError("duplicate parameter name '" + name + "'");
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->adam_m = Tensor::zeros_like(init);
  p->adam_v = Tensor::zeros_like(init);
  p->value = std::move(init);
  index_.emplace(std::move(name), params_.size());
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter& ParameterStore::get(std::string_view name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter '" + std::string(name) + "'");
  return *params_[it->second];
}

const Parameter& ParameterStore::get(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter '" + std::string(name) + "'");
  return *params_[it->second];
}

bool ParameterStore::contains(std::string_view name) const { return index_.find(name) != index_.end(); }

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p->grad = Tensor::zeros_like(p->value);
}

void ParameterStore::set_trainable(bool trainable) {
  for (auto& p : params_) p->trainable = trainable;
}

std::uint64_t ParameterStore::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& p : params_) {
    mix(p->name.data(), p->name.size());
    const std::uint64_t dims[2] = {p->value.rows(), p->value.cols()};
    mix(dims, sizeof(dims));
    mix(p->value.data(), p->value.size() * sizeof(double));
  }
  return h;
}

void adam_step(ParameterStore& store, const AdamOptions& options) {
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& p = store.at(i);
    if (p.trainable && !p.has_grad()) {
      throw ContractError("adam_step: parameter '" + p.name + "' has no gradient");
    }
  }
  store.increment_step();
  const double t = static_cast<double>(store.step());
  const double bc1 = 1.0 - std::pow(options.beta1, t);
  const double bc2 = 1.0 - std::pow(options.beta2, t);
  for (std::size_t i = 0; i < store.size(); ++i) {
    auto& p = store.at(i);
    if (!p.trainable) {
      p.grad = Tensor();
      continue;
    }
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad[k];
      p.adam_m[k] = options.beta1 * p.adam_m[k] + (1.0 - options.beta1) * g;
      p.adam_v[k] = options.beta2 * p.adam_v[k] + (1.0 - options.beta2) * g * g;
      const double m_hat = p.adam_m[k] / bc1;
      const double v_hat = p.adam_v[k] / bc2;
      p.value[k] -= options.learning_rate * m_hat / (std::sqrt(v_hat) + options.epsilon);
    }
    p.grad = Tensor();
  }
}

Linear::Linear(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out,
               Rng& rng, Init init)
    : in_(in), out_(out) {
  Tensor w(in, out);
  Tensor b(1, out);
  if (init == Init::Uniform) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = rng.uniform(-bound, bound);
    for (std::size_t k = 0; k < b.size(); ++k) b[k] = rng.uniform(-bound, bound);
  }
  weight_ = &store.add(name + ".weight", std::move(w));
  bias_ = &store.add(name + ".bias", std::move(b));
}

Var Linear::operator()(Tape& tape, Var x) const {
  return linear(x, tape.param(*weight_), tape.param(*bias_));
}

Mlp::Mlp(ParameterStore& store, const std::string& name, std::size_t in,
         const std::vector<std::size_t>& widths, Rng& rng, bool relu_last)
    : relu_last_(relu_last) {
  std::size_t prev = in;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    layers_.emplace_back(store, name + "." + std::to_string(i), prev, widths[i], rng);
    prev = widths[i];
  }
}

Var Mlp::operator()(Tape& tape, Var x) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i](tape, x);
    if (i + 1 < layers_.size() || relu_last_) x = relu(x);
  }
  return x;
}

}  // namespace lakenet::nn
