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

#ifndef FCTSBN_GRADCHECK_HPP
#define FCTSBN_GRADCHECK_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fctsbn/baseline.hpp"
#include "fctsbn/classifier.hpp"
#include "fctsbn/params.hpp"
#include "fctsbn/sequence.hpp"

namespace fctsbn {

struct GradCheckOptions {
  double step = 1e-5;
  double rtol = 1e-4;
  double atol = 1e-7;
  int probes = 7;
  // Tensor whose analytic gradient is perturbed before comparison (fault
  // injection for the checker itself). Empty: none.
  std::string corrupt;
};

struct TensorCheck {
  std::string name;
  double max_error = 0.0;  // max |g - fd| / max(|fd|, atol / rtol)
  int probes = 0;
  bool pass = true;
};

struct GradCheckReport {
  std::string label;
  std::vector<TensorCheck> tensors;

  bool pass() const;
  double max_error() const;
};

// Compares analytic gradients of `f` with central differences at random
// coordinates of each tensor. `params` are perturbed in place and restored.
GradCheckReport check_gradients(const std::string& label, std::vector<TensorRef> params,
                                const std::vector<ConstTensorRef>& analytic,
                                const std::function<double()>& f, const GradCheckOptions& options,
                                Rng& rng);

// d/dtheta log p(V, H | Y).
GradCheckReport check_model_gradients(GenerativeParams p, const Matrix& V, const HiddenStates& H,
                                      const Matrix& Y, const GradCheckOptions& options, Rng& rng);
// d/dphi sum_{k,t} w(k,t) log q(h^k_t | ...).
GradCheckReport check_recognition_gradients(RecognitionParams q, const Matrix& V,
                                            const HiddenStates& H, const Matrix& Y,
                                            const Matrix& weights, const GradCheckOptions& options,
                                            Rng& rng);
GradCheckReport check_baseline_gradients(BaselineParams b, const Vector& x,
                                         const GradCheckOptions& options, Rng& rng);
// d/dpsi alpha * log q(style | window).
GradCheckReport check_classifier_gradients(ClassifierParams c, const Vector& window, int style,
                                           double alpha, const GradCheckOptions& options, Rng& rng);

struct SuiteCase {
  ObsKind obs;
  bool factored;
  int order;
  int layers;
  std::string label() const;
};

// Real/Binary/Count x Dense/Factored x n in {1, 3} x L in {1, 2}.
std::vector<SuiteCase> gradcheck_grid();

// Random instance for one grid case: model and recognition reports.
std::vector<GradCheckReport> run_case(const SuiteCase& c, std::uint64_t seed,
                                      const GradCheckOptions& options);

// The full grid plus baseline and classifier checks.
std::vector<GradCheckReport> run_gradcheck_suite(std::uint64_t seed, const GradCheckOptions& options);

}  // namespace fctsbn

#endif  // FCTSBN_GRADCHECK_HPP
