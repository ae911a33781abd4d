// Copyright 2026 The benderskit Authors
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

#ifndef BENDERSKIT_LP_BACKEND_HPP_
#define BENDERSKIT_LP_BACKEND_HPP_

#include <memory>
#include <string>

#include "benderskit/lp.hpp"

namespace benderskit {

/// Solver abstraction. Every module that needs an LP/QP solved goes through
/// this interface; nothing else in the toolkit knows how solves happen.
///
/// Thread safety: solve() is const and stateless, so concurrent solves on
/// distinct LinearProgram instances are permitted.
class LpBackend {
 public:
  virtual ~LpBackend() = default;
  virtual SolveOutcome solve(const LinearProgram& lp,
                             const SolverOptions& opts) const = 0;
  SolveOutcome solve(const LinearProgram& lp) const {
    return solve(lp, SolverOptions{});
  }
  virtual std::string name() const = 0;
};

/// Creates a backend by name. An empty name consults the BENDERSKIT_BACKEND
/// environment variable and falls back to the built-in interior-point solver
/// ("ipm"). Unknown names throw.
std::unique_ptr<LpBackend> make_backend(const std::string& name = {});

}  // namespace benderskit

#endif  // BENDERSKIT_LP_BACKEND_HPP_
