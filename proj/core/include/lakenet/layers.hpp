#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "lakenet/autograd.hpp"
#include "lakenet/rng.hpp"
#include "lakenet/tensor.hpp"

namespace lakenet::nn {

/// Named learnable tensor with its gradient and Adam moment buffers.
struct Parameter {
  std::string name;
  Tensor value;
  /// Empty until ParameterStore::zero_grad() or a backward pass populates it.
  Tensor grad;
  bool trainable = true;
  Tensor adam_m;
  Tensor adam_v;

  bool has_grad() const { return !grad.empty(); }
};

/// Owns a component's parameters in insertion order, plus optimizer state.
/// Parameter addresses are stable for the lifetime of the store.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;

  Parameter& add(std::string name, Tensor init);
  Parameter& get(std::string_view name);
  const Parameter& get(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::size_t size() const { return params_.size(); }
  Parameter& at(std::size_t i) { return *params_[i]; }
  const Parameter& at(std::size_t i) const { return *params_[i]; }
  std::size_t scalar_count() const;

  /// Allocates zero gradients for every parameter.
  void zero_grad();
  void set_trainable(bool trainable);

  std::uint64_t step() const { return step_; }
  void set_step(std::uint64_t s) { step_ = s; }
  void increment_step() { ++step_; }

  /// FNV-1a over names, shapes and the bit patterns of all values.
  std::uint64_t hash() const;

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::uint64_t step_ = 0;
};

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam update over every trainable parameter, then clears
/// the gradients. Throws ContractError naming the first trainable parameter
/// without a gradient.
void adam_step(ParameterStore& store, const AdamOptions& options = {});

enum class Init { Uniform, Zero };

/// Fully connected layer y = x W + b.
class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out, Rng& rng,
         Init init = Init::Uniform);

  Var operator()(Tape& tape, Var x) const;

  std::size_t in_features() const { return in_; }
  std::size_t out_features() const { return out_; }
  Parameter& weight() const { return *weight_; }
  Parameter& bias() const { return *bias_; }

 private:
  Parameter* weight_ = nullptr;
  Parameter* bias_ = nullptr;
  std::size_t in_ = 0;
  std::size_t out_ = 0;
};

/// Stack of Linear layers with ReLU between them. The final layer is left
/// linear unless `relu_last` is set.
class Mlp {
 public:
  Mlp() = default;
  Mlp(ParameterStore& store, const std::string& name, std::size_t in,
      const std::vector<std::size_t>& widths, Rng& rng, bool relu_last = false);

  Var operator()(Tape& tape, Var x) const;
  std::size_t out_features() const { return layers_.empty() ? 0 : layers_.back().out_features(); }

 private:
  std::vector<Linear> layers_;
  bool relu_last_ = false;
};

}  // namespace lakenet::nn
