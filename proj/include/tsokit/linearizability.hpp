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

#include <optional>
#include <string>
#include <vector>

#include "tsokit/causality.hpp"
#include "tsokit/delay.hpp"
#include "tsokit/fixtures.hpp"
#include "tsokit/runtime.hpp"

namespace tsokit {

/* Real-time order: X completes before Y is invoked. */
bool precedes(const Operation& x, const Operation& y);
bool concurrent(const Operation& x, const Operation& y);

/* No operation of the history is concurrent with x. */
bool isolated(const History& h, const Operation& x);

/* A sequential object specification: an abstract state vector, stepped one
 * operation at a time. step() returns the successor state when the
 * operation is legal (a recorded response must match the computed one) and
 * writes the computed response through `response`. */
class SequentialSpec {
 public:
  virtual ~SequentialSpec() = default;
  virtual std::string name() const = 0;
  virtual std::vector<Value> initial_state() const = 0;
  virtual std::optional<std::vector<Value>> step(const std::vector<Value>& state,
                                                 const Operation& op,
                                                 Response* response) const = 0;
};

/* Read returns the most recent preceding write, or the default value. */
class RegisterSpec : public SequentialSpec {
 public:
  explicit RegisterSpec(Value default_value = 0) : default_(default_value) {}
  std::string name() const override { return "register"; }
  std::vector<Value> initial_state() const override { return {default_}; }
  std::optional<std::vector<Value>> step(const std::vector<Value>& state,
                                         const Operation& op,
                                         Response* response) const override;

 private:
  Value default_;
};

/* Single-writer snapshot: scan returns, per process, the value of its last
 * preceding update, or the bottom value. */
class SnapshotSpec : public SequentialSpec {
 public:
  explicit SnapshotSpec(int nprocs) : nprocs_(nprocs) {}
  std::string name() const override { return "snapshot"; }
  std::vector<Value> initial_state() const override {
    return std::vector<Value>(nprocs_, kBottom);
  }
  std::optional<std::vector<Value>> step(const std::vector<Value>& state,
                                         const Operation& op,
                                         Response* response) const override;

 private:
  int nprocs_;
};

struct BoundExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/* A legal total order of the history's complete operations (plus any subset
 * of pending ones, completed with the responses the spec assigns). */
struct LinWitness {
  std::vector<int> order;            // operation ids in linearization order
  std::vector<Response> responses;   // response of each entry
};

/* Brute-force linearizability check with memoized-state pruning. Pending
 * operations may be dropped or completed. Throws BoundExceeded for more
 * than `bound` complete operations. */
std::optional<LinWitness> check_linearizable(const History& h,
                                             const SequentialSpec& spec,
                                             int bound = 10);

/* Replays a witness; used to validate witnesses independently. */
bool witness_legal(const History& h, const SequentialSpec& spec,
                   const LinWitness& w);

struct CheckReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/* For every pair X <_r Y of value-annotated register operations with Y
 * complete, isolated and carrying a different value, X's start must occur
 * before Y's end. A violation refutes the fixture's linearizability or the
 * harness. */
CheckReport check_register_ob_necessity(const Run& r);

/* Update-to-scan and scan-to-update chains, plus the spec-level facts on
 * the scanned vector components (compared by update ordinal). */
CheckReport check_snapshot_ob(const Run& r);

struct FixtureDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SyncOptions {
  int completion_bound = 64;
  ProcId follower = 0;   // 0: pick any process other than X's
  Value fresh_value = 0; // 0: first unused value
};

struct ScenarioReport {
  bool completed = false;
  bool followup_synced = false;
  std::string sync_kind;  // "F", "RMW" or empty
  bool prefix_indistinguishable = false;
  Run run;
  Operation followup;
  std::vector<std::string> notes;
};

/* Delays everything outside the past of a solo, isolated, fence-free
 * operation X (suppressing X's own props), truncates at X's end, then lets
 * another process run a write (register) or the matching counter-operation
 * (snapshot) to completion, and reports whether that follow-up performed a
 * fence or rmw. */
ScenarioReport sync_necessity_register(const Run& r, const Operation& X,
                                       const Protocol& protocol,
                                       const SyncOptions& opt = {});
ScenarioReport sync_necessity_snapshot(const Run& r, const Operation& X,
                                       const Protocol& protocol,
                                       const SyncOptions& opt = {});

/* Bounded search for a run of the fixture with exactly m write operations,
 * each performing a fence or rmw: writer sequences are enumerated and every
 * write runs with props suppressed unless needed. std::nullopt is
 * inconclusive, not a refutation. */
std::optional<Run> search_writemustsync(const Fixture& impl, int m, int budget);

}  // namespace tsokit
