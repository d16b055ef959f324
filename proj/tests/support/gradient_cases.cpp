#include "gradient_cases.hpp"

#include <array>

namespace lakenet::testing {

using nn::Tape;
using nn::Var;

namespace {

nn::SparseRows blend_map() {
  nn::SparseRows m;
  m.input_rows = 4;
  const std::size_t i0[] = {0, 2};
  const double w0[] = {0.25, 0.75};
  const std::size_t i1[] = {3};
  const double w1[] = {1.0};
  const std::size_t i2[] = {1, 2, 3};
  const double w2[] = {0.2, 0.3, 0.5};
  m.add_row(i0, w0);
  m.add_row(i1, w1);
  m.add_row(i2, w2);
  return m;
}

std::vector<GradientCase> build() {
  using V = std::span<const Var>;
  const nn::SparseRows map = blend_map();
  return {
      {"matmul", {{3, 4}, {4, 2}}, [](Tape&, V v) { return squared_norm(matmul(v[0], v[1])); }},
      {"linear", {{5, 3}, {3, 4}, {1, 4}}, [](Tape&, V v) { return squared_norm(linear(v[0], v[1], v[2])); }},
      {"add", {{3, 3}, {3, 3}}, [](Tape&, V v) { return squared_norm(add(v[0], v[1])); }},
      {"sub", {{3, 3}, {3, 3}}, [](Tape&, V v) { return squared_norm(sub(v[0], v[1])); }},
      {"mul", {{3, 3}, {3, 3}}, [](Tape&, V v) { return sum(mul(v[0], v[1])); }},
      {"scale", {{2, 5}}, [](Tape&, V v) { return squared_norm(scale(v[0], -1.7)); }},
      {"relu", {{4, 4}}, [](Tape&, V v) { return squared_norm(relu(v[0])); }},
      {"softmax_rows", {{4, 3}, {4, 3}}, [](Tape&, V v) { return sum(mul(softmax(v[0], 0), v[1])); }},
      {"softmax_cols", {{4, 3}, {4, 3}}, [](Tape&, V v) { return sum(mul(softmax(v[0], 1), v[1])); }},
      {"max_pool_rows", {{6, 3}}, [](Tape&, V v) { return squared_norm(max_pool(v[0], 0)); }},
      {"max_pool_cols", {{3, 6}}, [](Tape&, V v) { return squared_norm(max_pool(v[0], 1)); }},
      {"concat_rows", {{2, 3}, {4, 3}}, [](Tape&, V v) {
         const std::array<Var, 2> p{v[0], v[1]};
         return squared_norm(scale(concat(p, 0), 0.5));
       }},
      {"concat_cols", {{3, 2}, {3, 4}, {3, 6}}, [](Tape&, V v) {
         const std::array<Var, 2> p{v[0], v[1]};
         return sum(mul(concat(p, 1), v[2]));
       }},
      {"sum", {{3, 4}, {3, 4}}, [](Tape&, V v) { return mul(sum(v[0]), sum(mul(v[0], v[1]))); }},
      {"mean", {{3, 5}}, [](Tape&, V v) { return squared_norm(mean(v[0])); }},
      {"squared_norm", {{4, 2}}, [](Tape&, V v) { return squared_norm(v[0]); }},
      {"transpose", {{2, 4}, {4, 2}}, [](Tape&, V v) { return sum(mul(transpose(v[0]), v[1])); }},
      {"reshape", {{2, 6}, {4, 3}}, [](Tape&, V v) { return sum(mul(reshape(v[0], 4, 3), v[1])); }},
      {"gather_rows", {{4, 3}}, [](Tape&, V v) {
         const std::size_t idx[] = {3, 0, 3, 1};
         return squared_norm(gather_rows(v[0], idx));
       }},
      {"repeat_rows", {{1, 3}, {5, 3}}, [](Tape&, V v) { return sum(mul(repeat_rows(v[0], 5), v[1])); }},
      {"combine_rows", {{4, 3}}, [map](Tape&, V v) { return squared_norm(combine_rows(v[0], map)); }},
      {"chamfer", {{6, 3}, {5, 3}}, [](Tape&, V v) { return chamfer(v[0], v[1]); }},
      {"binary_cross_entropy", {{1, 4}}, [](Tape&, V v) {
         const double t[] = {0, 1, 0, 0};
         return binary_cross_entropy(softmax(v[0], 1), t);
       }},
  };
}

}  // namespace

const std::vector<GradientCase>& primitive_gradient_cases() {
  static const std::vector<GradientCase> cases = build();
  return cases;
}

std::vector<nn::Tensor> gradient_inputs(const GradientCase& c, std::uint64_t seed) {
  std::vector<nn::Tensor> inputs;
  for (std::size_t i = 0; i < c.shapes.size(); ++i) {
    inputs.push_back(random_tensor(c.shapes[i].first, c.shapes[i].second, 1000 * seed + i));
  }
  return inputs;
}

}  // namespace lakenet::testing
