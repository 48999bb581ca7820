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

#include <string>
#include <vector>

#include "wcops/cmdp.hpp"

namespace wcops {

/// Something that happened inside a learner worth persisting with a run
/// (constraint-set fallbacks, estimator regime changes).
struct LearnerEvent {
  std::size_t episode = 0;
  std::string kind;
  std::string detail;
};

/// Online learner in the episodic protocol: act() yields pi_t, observe()
/// consumes the bandit feedback of episode t.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual std::string name() const = 0;
  virtual Policy act() = 0;
  virtual void observe(const EpisodeTrace& trace) = 0;
  const std::vector<LearnerEvent>& events() const { return events_; }

 protected:
  void log_event(std::size_t episode, std::string kind, std::string detail = {}) {
    events_.push_back({episode, std::move(kind), std::move(detail)});
  }

 private:
  std::vector<LearnerEvent> events_;
};

}  // namespace wcops
