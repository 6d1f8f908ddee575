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

#include <compare>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsokit {

using ProcId = int;  // 1..n
using VarId = int;   // index into Scenario::vars
using Value = int;

/* Default value of an unwritten snapshot component. */
constexpr Value kBottom = -1;

/* An agent is either a process or the dispatcher draining its buffer. */
struct AgentId {
  bool dispatcher = false;
  ProcId proc = 0;

  static AgentId process(ProcId p) { return AgentId{false, p}; }
  static AgentId dispatcher_of(ProcId p) { return AgentId{true, p}; }

  friend auto operator<=>(const AgentId&, const AgentId&) = default;
};

std::string to_string(const AgentId& a);

/* The declared universe of a run: process count, variables, value set and
 * the initial memory contents. */
struct Scenario {
  int nprocs = 0;
  std::vector<std::string> vars;
  std::vector<Value> vals;
  std::vector<Value> initial;  // one entry per variable

  VarId var_id(const std::string& name) const;  // -1 when undeclared
  bool var_ok(VarId x) const { return x >= 0 && x < static_cast<int>(vars.size()); }

  int agent_count() const { return 2 * nprocs; }
  int agent_index(const AgentId& a) const {
    return a.dispatcher ? nprocs + a.proc - 1 : a.proc - 1;
  }
  AgentId agent_at(int idx) const {
    return idx < nprocs ? AgentId::process(idx + 1)
                        : AgentId::dispatcher_of(idx - nprocs + 1);
  }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/* Identity of a write: the k'th write issued by a process. */
struct Tag {
  ProcId writer = 0;
  int seq = 0;

  friend auto operator<=>(const Tag&, const Tag&) = default;
};

std::string to_string(const Tag& t);

/* Name of an operation carried by invoke/return actions. */
struct OpName {
  enum class Kind { Read, Write, Update, Scan };
  Kind kind = Kind::Read;
  Value arg = 0;  // Write / Update only

  bool has_arg() const { return kind == Kind::Write || kind == Kind::Update; }
  friend bool operator==(const OpName&, const OpName&) = default;
};

std::string to_string(const OpName& op);
std::optional<OpName> parse_op_name(const std::string& s);

/* Response recorded by a return action. */
struct Response {
  enum class Kind { Ack, Val, Vec };
  Kind kind = Kind::Ack;
  Value value = 0;
  std::vector<Value> vec;

  static Response ack() { return Response{}; }
  static Response of(Value v) { return Response{Kind::Val, v, {}}; }
  static Response of_vec(std::vector<Value> v) {
    return Response{Kind::Vec, 0, std::move(v)};
  }
  friend bool operator==(const Response&, const Response&) = default;
};

std::string to_string(const Response& r);
std::optional<Response> parse_response(const std::string& s);

struct Action {
  enum class Kind {
    Null,
    Read,      // processes: R[x]
    Write,     // processes: W[x,v]
    Fence,     // processes: F
    Rmw,       // processes: RMW[x, expected, replacement]
    Internal,  // processes: local bookkeeping, label only
    Ret,       // processes: return(op) completing an operation
    Prop,      // dispatchers only
    Invoke,    // environment only: invoke(target, op)
  };

  Kind kind = Kind::Null;
  VarId var = -1;
  Value value = 0;
  Value expected = 0;
  Value replacement = 0;
  std::string label;   // Internal
  OpName op;           // Ret / Invoke
  Response response;   // Ret
  ProcId target = 0;   // Invoke

  static Action null() { return Action{}; }
  static Action read(VarId x) { return Action{Kind::Read, x, 0, 0, 0, {}, {}, {}, 0}; }
  static Action write(VarId x, Value v) {
    return Action{Kind::Write, x, v, 0, 0, {}, {}, {}, 0};
  }
  static Action fence() { return Action{Kind::Fence, -1, 0, 0, 0, {}, {}, {}, 0}; }
  static Action rmw(VarId x, Value expect, Value replace) {
    return Action{Kind::Rmw, x, 0, expect, replace, {}, {}, {}, 0};
  }
  static Action internal(std::string l) {
    return Action{Kind::Internal, -1, 0, 0, 0, std::move(l), {}, {}, 0};
  }
  static Action ret(OpName op, Response resp) {
    return Action{Kind::Ret, -1, 0, 0, 0, {}, op, std::move(resp), 0};
  }
  static Action prop() { return Action{Kind::Prop, -1, 0, 0, 0, {}, {}, {}, 0}; }
  static Action invoke(ProcId target, OpName op) {
    return Action{Kind::Invoke, -1, 0, 0, 0, {}, op, {}, target};
  }

  bool is_null() const { return kind == Kind::Null; }
  friend bool operator==(const Action&, const Action&) = default;
};

struct Event {
  enum class Kind { Null, W, RfB, RfM, F, Rmw, Prop, Internal, InvokeDelivered };

  AgentId agent;
  Kind kind = Kind::Null;
  VarId var = -1;
  Value value = 0;
  Value expected = 0;
  Value replacement = 0;
  std::optional<Tag> tag;  // W, RfB, RfM, Prop; empty for reads of initial memory

  friend bool operator==(const Event&, const Event&) = default;
};

std::string to_string(const Event& e);

struct BufferEntry {
  VarId var = -1;
  Value value = 0;
  Tag tag;

  friend bool operator==(const BufferEntry&, const BufferEntry&) = default;
};

/* A memory cell keeps the tag of the write it came from, so reads can
 * report which write they observed. No tag means the initial value. */
struct MemCell {
  Value value = 0;
  std::optional<Tag> tag;

  friend bool operator==(const MemCell&, const MemCell&) = default;
};

struct TsoState {
  std::vector<MemCell> memory;                   // indexed by VarId
  std::vector<std::deque<BufferEntry>> buffers;  // indexed by proc - 1

  static TsoState initial(const Scenario& sc);

  const std::deque<BufferEntry>& buffer(ProcId p) const { return buffers[p - 1]; }
  std::deque<BufferEntry>& buffer(ProcId p) { return buffers[p - 1]; }
  bool all_buffers_empty() const;

  friend bool operator==(const TsoState&, const TsoState&) = default;
};

struct NotEnabled : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnknownVar : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/* Whether `action` by `agent` may fire in `state`. Reads, writes, null and
 * internal actions are always enabled; a fence needs an empty buffer, an
 * rmw additionally needs the expected memory value, a prop a nonempty
 * buffer. Throws UnknownVar for undeclared variables. */
bool enabled(const Scenario& sc, const TsoState& state, const AgentId& agent,
             const Action& action);

/* Performs one enabled action, mutating `state` and returning the event.
 * `next_seq` is the tag sequence number consumed when the action is a
 * write or an rmw (the caller owns the per-process counters).
 * Throws NotEnabled exactly when enabled() is false. */
Event apply(const Scenario& sc, TsoState& state, const AgentId& agent,
            const Action& action, int next_seq);

/* The variable an event accesses in shared memory: RfM, Rmw and Prop only.
 * Writes and buffer reads touch the store buffer, not memory. */
std::optional<VarId> memory_access_var(const Event& e);

/* Two events conflict when they access the same variable in memory, they
 * are not both RfM, and they are not a prop at d_i paired with an RfM
 * at i itself. */
bool conflicts(const Event& a, const Event& b);

}  // namespace tsokit
