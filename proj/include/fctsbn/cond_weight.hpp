// Copyright 2026 The fctsbn Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FCTSBN_COND_WEIGHT_HPP
#define FCTSBN_COND_WEIGHT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fctsbn/rng.hpp"
#include "fctsbn/types.hpp"

namespace fctsbn {

template <class M>
struct BasicTensorRef {
  std::string name;
  M* data;
  std::vector<Index> shape;
};
using TensorRef = BasicTensorRef<Matrix>;
using ConstTensorRef = BasicTensorRef<const Matrix>;

// Global multiply-add counter fed by the style-conditioned maps; used to
// compare dense and factored cost per training step.
namespace flops {
void add(std::uint64_t n);
std::uint64_t read();
void reset();
}  // namespace flops

struct FactoredGradients {
  Matrix a;  // out x F
  Matrix b;  // F x S
  Matrix c;  // F x in
};

/**
 * A linear map whose weights are gated by a side-information vector y.
 *
 * Dense: a three-way tensor T[out, in, S]; the effective matrix is
 * sum_s y_s T[:, :, s]. Stored as an out x (in*S) matrix whose s-th block of
 * `in` columns is slice s.
 *
 * Factored: W(y) = Wa * diag(Wb * y) * Wc with Wa out x F, Wb F x S and
 * Wc F x in. Wa and Wc are shared across styles.
 */
class CondWeight {
 public:
  enum class Kind { Dense, Factored };

  CondWeight() = default;
  static CondWeight dense(Index out, Index in, Index styles);
  static CondWeight factored(Index out, Index in, Index styles, Index factors);

  Kind kind() const { return kind_; }
  bool is_factored() const { return kind_ == Kind::Factored; }
  Index out_dim() const { return out_; }
  Index in_dim() const { return in_; }
  Index styles() const { return styles_; }
  Index factors() const { return factors_; }

  // Number of free scalars: out*in*S dense, (out+in+S)*F factored.
  Index parameter_count() const;

  Vector apply(const Vector& y, const Vector& x) const;
  // out += W(y) x
  void apply_add(const Vector& y, const Vector& x, Vector& out) const;
  Matrix effective(const Vector& y) const;

  // grad += d/dW <xi, W(y) eta>, i.e. the gradient of f(W(y) eta) when
  // xi = f'(W(y) eta). `grad` must have the same structure as *this.
  void accumulate_gradient(const Vector& y, const Vector& xi, const Vector& eta,
                           CondWeight& grad) const;

  CondWeight zeros_like() const;
  void fill_gaussian(Rng& rng, double stddev);

  Matrix& tensor() { return tensor_; }
  const Matrix& tensor() const { return tensor_; }
  auto slice(Index s) { return tensor_.middleCols(s * in_, in_); }
  auto slice(Index s) const { return tensor_.middleCols(s * in_, in_); }
  Matrix& a() { return a_; }
  Matrix& b() { return b_; }
  Matrix& c() { return c_; }
  const Matrix& a() const { return a_; }
  const Matrix& b() const { return b_; }
  const Matrix& c() const { return c_; }

  // Dense: one tensor `name` of shape [out, in, S]. Factored: `name.a`,
  // `name.b`, `name.c`.
  void append_tensors(const std::string& name, std::vector<TensorRef>& out);
  void append_tensors(const std::string& name, std::vector<ConstTensorRef>& out) const;

 private:
  void check_inputs(const Vector& y, const Vector& x) const;

  Kind kind_ = Kind::Dense;
  Index out_ = 0;
  Index in_ = 0;
  Index styles_ = 0;
  Index factors_ = 0;
  Matrix tensor_;
  Matrix a_, b_, c_;
};

// The three gradient expressions for a factored map, given the downstream
// error xi (out), the input eta (in) and side information y (S).
FactoredGradients factored_weight_gradients(const CondWeight& w, const Vector& xi,
                                            const Vector& eta, const Vector& y);

inline Matrix effective_weight(const CondWeight& w, const Vector& y) { return w.effective(y); }

}  // namespace fctsbn

#endif  // FCTSBN_COND_WEIGHT_HPP
