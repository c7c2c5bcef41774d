// Copyright 2026 The stratest Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STRATEST_CERTIFICATE_HPP_
#define STRATEST_CERTIFICATE_HPP_

#include <string>

#include <Eigen/Dense>

namespace stratest {

/// Outcome of one verification suite. worst_residual is the quantity
/// compared against threshold: the largest cost improvement found by a
/// deviation, or the largest identity residual.
struct Certificate {
  std::string suite;
  bool passed = true;
  double worst_residual = 0.0;
  double threshold = 0.0;
  Eigen::Index trials = 0;
  std::string detail;
  // The deviation achieving worst_residual, flattened (empty if none).
  Eigen::VectorXd witness;

  void record(double residual, const Eigen::VectorXd& deviation) {
    ++trials;
    if (trials == 1 || residual > worst_residual) {
      worst_residual = residual;
      witness = deviation;
    }
    passed = worst_residual <= threshold;
  }
};

}  // namespace stratest

#endif  // STRATEST_CERTIFICATE_HPP_
