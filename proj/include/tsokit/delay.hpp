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

#include <string>
#include <vector>

#include "tsokit/causality.hpp"
#include "tsokit/runtime.hpp"

namespace tsokit {

/* Piecewise time shift: identity up to the threshold, +delta beyond it. */
inline int shift_time(int t, int threshold, int delta) {
  return t <= threshold ? t : t + delta;
}

struct HorizonExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InternalReplayDivergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FeedbackLoopPresent : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PreconditionViolated : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/* Produces a locally equivalent run of horizon r.horizon() + delta in which
 * every action at a node outside Past⁺(S) happens delta rounds later, and
 * every other action keeps its time. Built by deterministic re-execution
 * under the derived schedule: each agent idles through its gap rounds,
 * dispatchers re-prop when their counterpart round propped, processes
 * replay their recorded action.
 *
 * Throws HorizonExhausted when some (but not all) agents have every node
 * within the horizon inside Past⁺(S) and delta > 0: extend the run (quiesce
 * or pad) and retry. InternalReplayDivergence signals an implementation
 * bug, never an input problem. */
Run delay_transform(const Run& r, const std::vector<Node>& S, int delta);

struct DelayReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

/* Independent check of a transformed run against the original: per-agent
 * action sequences and their per-node timing, per-process local states at
 * corresponding times, read/prop tag preservation, conflict-freedom of the
 * new joint actions, and local equivalence. Does not trust any bookkeeping
 * of delay_transform. */
DelayReport verify_delay(const Run& r, const Run& transformed,
                         const std::vector<Node>& S, int delta);

/* The supporting invariants of the construction, checked directly:
 * no reordering of occurs-before-related nodes, occurs-before preservation
 * across the transform, propagation correspondence, and buffer/memory
 * transfer at fences and rmws. */
DelayReport verify_delay_claims(const Run& r, const Run& transformed,
                                const std::vector<Node>& S, int delta);

struct Divergence {
  ProcId process = 0;
  int position = 0;
  std::string in_first;
  std::string in_second;
};

struct EquivalenceReport {
  bool equivalent = true;
  std::vector<Divergence> divergences;  // first divergence per process
};

/* Two runs are locally equivalent when every process traverses the same
 * record sequence in both. Reads of one tag compare equal whether they were
 * served from the buffer or from memory. */
EquivalenceReport local_equivalence(const Run& r1, const Run& r2);

/* Rebuilds the run so that the given complete operation runs solo: between
 * its (shifted) start and end only its process and dispatcher act. Two
 * delay passes: the first keeps everything that the operation's end depends
 * on, the second evicts the operation itself past all of it.
 * Requires a feedback-loop-free operation. */
Run solo_transform(const Run& r, const Operation& X);

/* Rebuilds the run so that the prop of tag kappa, written by the operation's
 * process during X, lands strictly after X's end. Requires that X writes
 * kappa, contains no fence or rmw, and has no feedback loop. */
Run unpropagated_transform(const Run& r, const Operation& X, const Tag& kappa);

/* Operation ordinal helpers shared by the scenario drivers: the operation
 * of `run` matching `X`'s process and per-process position. */
Operation find_corresponding_op(const Run& transformed, const Run& original,
                                const Operation& X);

/* True when only X.process and its dispatcher perform non-null actions in
 * rounds start+1 .. end of the run. */
bool runs_solo(const Run& r, const Operation& X);

}  // namespace tsokit
