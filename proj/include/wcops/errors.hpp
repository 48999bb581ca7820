// Copyright 2026 The wcops Authors. All rights reserved.
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

#include <stdexcept>
#include <string>
#include <vector>

namespace wcops {

/// Shapes or layer structure do not match the instance.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A scalar parameter is outside its legal range (delta, gamma, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An input violates a validity condition (occupancy measure, policy).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A function was evaluated outside its domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed configuration or instance document.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The solver stopped without meeting its tolerances. Carries the best
/// iterate found and its residuals so callers can inspect or recover.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::vector<double> best_iterate,
              double primal_residual, double dual_residual, double gap)
      : std::runtime_error(what),
        best_iterate_(std::move(best_iterate)),
        primal_residual_(primal_residual),
        dual_residual_(dual_residual),
        gap_(gap) {}

  const std::vector<double>& best_iterate() const { return best_iterate_; }
  double primal_residual() const { return primal_residual_; }
  double dual_residual() const { return dual_residual_; }
  double gap() const { return gap_; }

 private:
  std::vector<double> best_iterate_;
  double primal_residual_;
  double dual_residual_;
  double gap_;
};

}  // namespace wcops
