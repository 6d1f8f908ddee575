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

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tsokit/core.hpp"

namespace tsokit {

/* What a process remembers about one of its own steps. Reads are recorded
 * without the buffer/memory distinction: the process cannot observe it. */
struct LocalRecord {
  enum class Kind { W, R, Rmw, F, Internal, Invoke, Ret };

  Kind kind = Kind::Internal;
  VarId var = -1;
  Value value = 0;
  Value expected = 0;
  Value replacement = 0;
  std::string label;
  OpName op;
  Response response;

  friend bool operator==(const LocalRecord&, const LocalRecord&) = default;
};

using LocalState = std::vector<LocalRecord>;

std::string to_string(const LocalRecord& rec);

struct GlobalState {
  TsoState tso;
  std::vector<LocalState> locals;              // per proc
  std::vector<std::optional<OpName>> pending;  // invoked, not yet returned
  std::vector<int> write_counters;             // writes + rmws issued so far

  static GlobalState initial(const Scenario& sc);

  const LocalState& local(ProcId p) const { return locals[p - 1]; }

  friend bool operator==(const GlobalState&, const GlobalState&) = default;
};

/* One round's worth of scheduled actions, applied processes-first (ascending),
 * then dispatchers (ascending), then the environment. */
struct JointAction {
  std::vector<Action> proc_actions;  // size nprocs, Null = does not move
  std::vector<bool> props;           // size nprocs
  std::vector<std::pair<ProcId, OpName>> invokes;

  static JointAction empty(int nprocs) {
    JointAction j;
    j.proc_actions.assign(nprocs, Action::null());
    j.props.assign(nprocs, false);
    return j;
  }
  friend bool operator==(const JointAction&, const JointAction&) = default;
};

struct Round {
  JointAction action;
  std::vector<Event> events;  // in application order, non-null only

  friend bool operator==(const Round&, const Round&) = default;
};

struct Run {
  Scenario scenario;
  std::string protocol_name;
  uint64_t seed = 0;
  std::vector<GlobalState> states;  // size horizon + 1
  std::vector<Round> rounds;        // round t+1 lives at rounds[t]

  int horizon() const { return static_cast<int>(rounds.size()); }
  const GlobalState& at(int t) const { return states[t]; }

  /* Action performed by `agent` at node time t, i.e. in round t+1.
   * Null for non-movers and for t == horizon(). */
  Action action_at(const AgentId& agent, int t) const;
  /* Matching event, if the agent moved. */
  std::optional<Event> event_at(const AgentId& agent, int t) const;

  friend bool operator==(const Run&, const Run&) = default;
};

class Protocol {
 public:
  virtual ~Protocol() = default;
  virtual std::string name() const = 0;
  /* Nonempty set of candidate actions in the given local state. */
  virtual std::vector<Action> candidates(ProcId i, const LocalState& local) const = 0;
};

/* A replayable schedule: explicit per-round actions, prop attempts and
 * invokes. Scheduled-but-disabled fences, rmws and props degrade to null
 * (blocking semantics under an oblivious scheduler). */
struct ScheduledRound {
  std::vector<Action> proc_actions;
  std::vector<bool> props;
  std::vector<std::pair<ProcId, OpName>> invokes;
};

struct Schedule {
  std::vector<ScheduledRound> rounds;
};

struct ConflictingJointAction : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DoubleInvoke : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ScheduleInvalid : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MalformedHistory : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/* Applies one joint action: every scheduled action must be enabled at its
 * turn within the sequential application, and the resulting events must be
 * pairwise non-conflicting. */
std::pair<GlobalState, std::vector<Event>> joint_apply(const Scenario& sc,
                                                       const GlobalState& g,
                                                       const JointAction& j);

/* Runs `horizon` rounds of the protocol under the schedule. */
Run execute(const Scenario& sc, const Protocol& protocol, const Schedule& schedule,
            int horizon, uint64_t seed = 0);

struct Violation {
  int round = 0;  // 1-based; 0 for the initial state
  std::string kind;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

/* Checks that `r` is a run of `protocol`: initial state, transition replay,
 * enabledness, conflict-freedom, protocol consistency, local-state
 * bookkeeping and FIFO tag propagation. */
ValidationReport validate_run(const Run& r, const Protocol& protocol);

/* Extends the run with prop-only rounds (one dispatcher per round, round-robin)
 * until all buffers are drained. Realizes propagation fairness at a finite
 * horizon. */
Run quiesce(const Run& r);

/* Appends `extra` rounds in which nobody moves. */
Run pad(const Run& r, int extra);

/* An operation interval extracted from a run. Times follow the run
 * convention: the invoke is delivered in round start_time + 1 and the
 * return is performed in round end_time. */
struct Operation {
  int id = 0;
  ProcId process = 0;
  OpName name;
  int start_time = 0;
  std::optional<int> end_time;
  std::optional<Response> response;

  bool complete() const { return end_time.has_value(); }
};

struct History {
  std::vector<Operation> ops;
  int horizon = 0;
};

/* Throws MalformedHistory when a return has no pending invoke. */
History extract_history(const Run& r);

}  // namespace tsokit
