// Copyright 2026 The ackmmea Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>

#include "ackmmea/consistgnn.hpp"

namespace ackmmea {

// Adam with bias-corrected moments and decoupled weight decay:
//   p -= lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * p)
class AdamW {
 public:
  struct Settings {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
  };

  AdamW(const ModelParams& like, Settings s) : s_(s), m_(zeros_like(like)), v_(zeros_like(like)) {}

  void step(ModelParams& params, const ModelParams& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(s_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(s_.beta2, static_cast<double>(t_));
    visit_params(
        [&](const std::string&, Matrix& p, const Matrix& g, Matrix& m, Matrix& v) {
          m = s_.beta1 * m + (1.0 - s_.beta1) * g;
          v = s_.beta2 * v + (1.0 - s_.beta2) * g.cwiseAbs2();
          const Matrix update =
              (m / c1).array() / ((v / c2).array().sqrt() + s_.eps);
          p -= s_.learning_rate * (update + s_.weight_decay * p);
        },
        params, grads, m_, v_);
  }

  long steps() const { return t_; }

 private:
  static ModelParams zeros_like(const ModelParams& p) {
    ModelParams z = p;
    visit_params([](const std::string&, Matrix& m) { m.setZero(); }, z);
    return z;
  }

  Settings s_;
  ModelParams m_;
  ModelParams v_;
  long t_ = 0;
};

}  // namespace ackmmea
