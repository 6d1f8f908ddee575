/*
 * Copyright (c) 2026, the tsokit authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
*/

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tsokit/rng.hpp"
#include "tsokit/runtime.hpp"

namespace tsokit {

enum class FixtureKind { Litmus, Free, Register, Snapshot };

struct Fixture {
  std::string name;
  FixtureKind kind = FixtureKind::Free;
  Scenario scenario;
  std::shared_ptr<const Protocol> protocol;
};

struct UnknownFixture : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/* Shipped fixtures:
 *   sb                  two-process store-buffering litmus protocol
 *   free                every syntactic action is a candidate (fuzzing)
 *   register-fenced     write = buffer write; fence; return — read = read; return
 *   register-unfenced   write returns without a fence (non-linearizable foil)
 *   register-alternating only every other write of a process is fenced
 *   snapshot            fenced updates, scan = repeated double collect
 *   snapshot-rmw-scan   plain updates, scan orders itself by an rmw on a
 *                       shared sequence variable, then collects once
 */
Fixture make_fixture(const std::string& name, int nprocs);
std::vector<std::string> fixture_names();

struct GenOptions {
  int horizon = 12;
  uint64_t seed = 1;
  double p_move = 0.75;
  double p_prop = 0.45;
  double p_invoke = 0.35;
  int max_ops = 4;  // invocation budget across the whole run
};

/* Seeded random run of a fixture. Every round is built against the current
 * state: disabled fences, rmws and props degrade to null, and any action
 * whose event would conflict with an earlier event of the same round is
 * demoted. Identical options reproduce the run bit for bit. */
Run generate_run(const Fixture& f, const GenOptions& opt);

enum class PropPolicy {
  Eager,  // the dispatcher drains the buffer every round
  Lazy,   // props fire only to unblock a pending fence or rmw
};

struct ExtendResult {
  Run run;
  std::optional<int> return_round;  // round performing the return, if reached
};

/* Appends an invocation of `op` at process j to the run, then lets only j
 * and its dispatcher step (deterministically: first candidate) until the
 * matching return, or until `bound` rounds pass. */
ExtendResult extend_with_op(const Run& r, const Protocol& protocol, ProcId j,
                            const OpName& op, PropPolicy policy, int bound);

}  // namespace tsokit
