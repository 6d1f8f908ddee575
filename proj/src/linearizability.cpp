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

#include "tsokit/linearizability.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace tsokit {

bool precedes(const Operation& x, const Operation& y) {
  return x.complete() && *x.end_time < y.start_time;
}

bool concurrent(const Operation& x, const Operation& y) {
  return !precedes(x, y) && !precedes(y, x);
}

bool isolated(const History& h, const Operation& x) {
  for (const Operation& other : h.ops)
    if (other.id != x.id && concurrent(other, x)) return false;
  return true;
}

std::optional<std::vector<Value>> RegisterSpec::step(const std::vector<Value>& state,
                                                     const Operation& op,
                                                     Response* response) const {
  switch (op.name.kind) {
    case OpName::Kind::Read: {
      Response computed = Response::of(state[0]);
      if (op.response && !(*op.response == computed)) return std::nullopt;
      if (response) *response = computed;
      return state;
    }
    case OpName::Kind::Write: {
      Response computed = Response::ack();
      if (op.response && !(*op.response == computed)) return std::nullopt;
      if (response) *response = computed;
      return std::vector<Value>{op.name.arg};
    }
    default:
      return std::nullopt;
  }
}

std::optional<std::vector<Value>> SnapshotSpec::step(const std::vector<Value>& state,
                                                     const Operation& op,
                                                     Response* response) const {
  switch (op.name.kind) {
    case OpName::Kind::Update: {
      Response computed = Response::ack();
      if (op.response && !(*op.response == computed)) return std::nullopt;
      if (response) *response = computed;
      std::vector<Value> next = state;
      next[op.process - 1] = op.name.arg;
      return next;
    }
    case OpName::Kind::Scan: {
      Response computed = Response::of_vec(state);
      if (op.response && !(*op.response == computed)) return std::nullopt;
      if (response) *response = computed;
      return state;
    }
    default:
      return std::nullopt;
  }
}

namespace {

struct SearchSpace {
  std::vector<const Operation*> ops;  // complete first, then pending
  size_t complete_count = 0;
};

SearchSpace search_space(const History& h) {
  SearchSpace s;
  for (const Operation& op : h.ops)
    if (op.complete()) s.ops.push_back(&op);
  s.complete_count = s.ops.size();
  for (const Operation& op : h.ops)
    if (!op.complete()) s.ops.push_back(&op);
  return s;
}

}  // namespace

std::optional<LinWitness> check_linearizable(const History& h,
                                             const SequentialSpec& spec,
                                             int bound) {
  SearchSpace space = search_space(h);
  if (static_cast<int>(space.complete_count) > bound)
    throw BoundExceeded("history has " + std::to_string(space.complete_count) +
                        " complete operations, bound is " + std::to_string(bound));
  size_t total = space.ops.size();
  uint32_t complete_mask = (1u << space.complete_count) - 1;

  std::set<std::pair<uint32_t, std::vector<Value>>> visited;
  LinWitness witness;

  auto may_start = [&](size_t k, uint32_t taken) {
    // Everything that really precedes op k must already be linearized.
    for (size_t x = 0; x < space.complete_count; ++x)
      if (!(taken >> x & 1) && precedes(*space.ops[x], *space.ops[k])) return false;
    return true;
  };

  auto dfs = [&](auto&& self, uint32_t taken, const std::vector<Value>& state) -> bool {
    if ((taken & complete_mask) == complete_mask) return true;
    if (!visited.emplace(taken, state).second) return false;
    for (size_t k = 0; k < total; ++k) {
      if (taken >> k & 1) continue;
      if (!may_start(k, taken)) continue;
      Response resp;
      auto next = spec.step(state, *space.ops[k], &resp);
      if (!next) continue;
      witness.order.push_back(space.ops[k]->id);
      witness.responses.push_back(resp);
      if (self(self, taken | (1u << k), *next)) return true;
      witness.order.pop_back();
      witness.responses.pop_back();
    }
    return false;
  };

  if (dfs(dfs, 0, spec.initial_state())) return witness;
  return std::nullopt;
}

bool witness_legal(const History& h, const SequentialSpec& spec,
                   const LinWitness& w) {
  std::map<int, const Operation*> by_id;
  for (const Operation& op : h.ops) by_id[op.id] = &op;

  // Every complete operation appears exactly once, in an order extending
  // real-time precedence, and replays legally.
  std::set<int> seen;
  for (int id : w.order) {
    if (!by_id.count(id) || !seen.insert(id).second) return false;
  }
  for (const Operation& op : h.ops)
    if (op.complete() && !seen.count(op.id)) return false;

  for (size_t a = 0; a < w.order.size(); ++a)
    for (size_t b = a + 1; b < w.order.size(); ++b)
      if (precedes(*by_id[w.order[b]], *by_id[w.order[a]])) return false;

  std::vector<Value> state = spec.initial_state();
  for (int id : w.order) {
    auto next = spec.step(state, *by_id[id], nullptr);
    if (!next) return false;
    state = *next;
  }
  return true;
}

namespace {

std::optional<Value> operation_value(const Operation& op) {
  if (op.name.kind == OpName::Kind::Write || op.name.kind == OpName::Kind::Update)
    return op.name.arg;
  if (op.name.kind == OpName::Kind::Read && op.response &&
      op.response->kind == Response::Kind::Val)
    return op.response->value;
  return std::nullopt;
}

bool performed_sync(const Run& r, ProcId p, int from, int to, std::string* kind) {
  for (int t = from; t < to; ++t) {
    auto ev = r.event_at(AgentId::process(p), t);
    if (!ev) continue;
    if (ev->kind == Event::Kind::F) {
      if (kind) *kind = "F";
      return true;
    }
    if (ev->kind == Event::Kind::Rmw) {
      if (kind) *kind = "RMW";
      return true;
    }
  }
  return false;
}

}  // namespace

namespace {

/* The analysis matches reads to writes by value: register values must be
 * unique across the run, update values unique per process. */
void check_unique_values(const History& h, CheckReport& rep) {
  for (size_t a = 0; a < h.ops.size(); ++a)
    for (size_t b = a + 1; b < h.ops.size(); ++b) {
      const OpName& na = h.ops[a].name;
      const OpName& nb = h.ops[b].name;
      if (!na.has_arg() || na.kind != nb.kind || na.arg != nb.arg) continue;
      if (na.kind == OpName::Kind::Update &&
          h.ops[a].process != h.ops[b].process)
        continue;
      rep.violations.push_back("value " + std::to_string(na.arg) +
                               " is written twice; the harness requires "
                               "unique values per run");
    }
}

}  // namespace

CheckReport check_register_ob_necessity(const Run& r) {
  CheckReport rep;
  History h = extract_history(r);
  check_unique_values(h, rep);
  ObGraph g(r);
  for (const Operation& x : h.ops) {
    auto a = operation_value(x);
    if (!a) continue;
    for (const Operation& y : h.ops) {
      if (x.id == y.id || !y.complete() || !precedes(x, y)) continue;
      auto b = operation_value(y);
      if (!b || *a == *b) continue;
      if (!isolated(h, y)) continue;
      Node xs{AgentId::process(x.process), x.start_time};
      Node ye{AgentId::process(y.process), *y.end_time};
      if (!g.reaches(xs, ye))
        rep.violations.push_back("no occurs-before chain from op " +
                                 std::to_string(x.id) + " (" + to_string(x.name) +
                                 ") to op " + std::to_string(y.id) + " (" +
                                 to_string(y.name) + ")");
    }
  }
  return rep;
}

CheckReport check_snapshot_ob(const Run& r) {
  CheckReport rep;
  History h = extract_history(r);
  check_unique_values(h, rep);
  ObGraph g(r);

  // Ordinal of each update among its process's updates, and value lookup.
  std::map<ProcId, std::map<Value, int>> ordinals;
  std::map<int, int> update_ordinal;
  {
    std::map<ProcId, int> count;
    for (const Operation& op : h.ops) {
      if (op.name.kind != OpName::Kind::Update) continue;
      int k = ++count[op.process];
      update_ordinal[op.id] = k;
      ordinals[op.process][op.name.arg] = k;
    }
  }
  auto component_ordinal = [&](ProcId writer, Value v) -> std::optional<int> {
    if (v == kBottom) return 0;
    auto pit = ordinals.find(writer);
    if (pit == ordinals.end()) return std::nullopt;
    auto vit = pit->second.find(v);
    if (vit == pit->second.end()) return std::nullopt;
    return vit->second;
  };

  for (const Operation& upd : h.ops) {
    if (upd.name.kind != OpName::Kind::Update) continue;
    for (const Operation& scan : h.ops) {
      if (scan.name.kind != OpName::Kind::Scan) continue;

      if (scan.complete() && precedes(upd, scan)) {
        Node us{AgentId::process(upd.process), upd.start_time};
        Node se{AgentId::process(scan.process), *scan.end_time};
        if (!g.reaches(us, se))
          rep.violations.push_back("no chain from update " + std::to_string(upd.id) +
                                   " to scan " + std::to_string(scan.id));
        Value comp = scan.response->vec[upd.process - 1];
        auto ord = component_ordinal(upd.process, comp);
        if (!ord)
          rep.violations.push_back("scan " + std::to_string(scan.id) +
                                   " returned a value never written");
        else if (*ord < update_ordinal[upd.id])
          rep.violations.push_back("scan " + std::to_string(scan.id) +
                                   " misses preceding update " +
                                   std::to_string(upd.id));
      }

      if (upd.complete() && scan.complete() && precedes(scan, upd)) {
        Node ss{AgentId::process(scan.process), scan.start_time};
        Node ue{AgentId::process(upd.process), *upd.end_time};
        if (!g.reaches(ss, ue))
          rep.violations.push_back("no chain from scan " + std::to_string(scan.id) +
                                   " to update " + std::to_string(upd.id));
        Value comp = scan.response->vec[upd.process - 1];
        auto ord = component_ordinal(upd.process, comp);
        if (!ord)
          rep.violations.push_back("scan " + std::to_string(scan.id) +
                                   " returned a value never written");
        else if (*ord >= update_ordinal[upd.id])
          rep.violations.push_back("scan " + std::to_string(scan.id) +
                                   " already sees later update " +
                                   std::to_string(upd.id));
      }
    }
  }
  return rep;
}

namespace {

Value first_unused_value(const Run& r) {
  Value used = 0;
  for (const Round& round : r.rounds)
    for (const Event& e : round.events)
      if (e.kind == Event::Kind::W || e.kind == Event::Kind::Rmw)
        used = std::max(used, std::max(e.value, e.replacement));
  Value fresh = used + 1;
  if (std::find(r.scenario.vals.begin(), r.scenario.vals.end(), fresh) ==
      r.scenario.vals.end())
    throw PreconditionViolated("no unused value left in the declared set");
  return fresh;
}

ScenarioReport sync_necessity(const Run& r0, const Operation& X,
                              const Protocol& protocol, const OpName& followup_op,
                              const SyncOptions& opt) {
  ProcId i = X.process;
  if (!X.complete()) throw PreconditionViolated("operation did not complete");
  int t1 = X.start_time;
  int t2 = *X.end_time;

  if (performed_sync(r0, i, t1, t2, nullptr))
    throw PreconditionViolated("operation performs a fence or rmw");
  if (!runs_solo(r0, X)) throw PreconditionViolated("operation does not run solo");
  if (!isolated(extract_history(r0), X))
    throw PreconditionViolated("operation does not run in isolation");

  Run r = t2 >= r0.horizon() ? pad(r0, t2 - r0.horizon() + 1) : r0;

  // Keep everything up to X's start and X itself; push the rest (including
  // X's own props) past the window.
  std::vector<Node> S{Node{AgentId::process(i), t2}};
  for (int a = 0; a < r.scenario.agent_count(); ++a)
    S.push_back(Node{r.scenario.agent_at(a), t1});
  int delta = t2 - t1 + 2;
  Run shifted = delay_transform(r, S, delta);

  Run prefix;
  prefix.scenario = shifted.scenario;
  prefix.protocol_name = shifted.protocol_name;
  prefix.seed = shifted.seed;
  prefix.states.assign(shifted.states.begin(), shifted.states.begin() + t2 + 1);
  prefix.rounds.assign(shifted.rounds.begin(), shifted.rounds.begin() + t2);

  ScenarioReport rep;
  rep.prefix_indistinguishable = true;
  for (int t = 0; t <= t2; ++t)
    if (prefix.states[t].local(i) != r.states[t].local(i)) {
      rep.prefix_indistinguishable = false;
      break;
    }

  ProcId j = opt.follower ? opt.follower : (i % r.scenario.nprocs) + 1;
  if (j == i) throw PreconditionViolated("follower must be another process");

  ExtendResult ext =
      extend_with_op(prefix, protocol, j, followup_op, PropPolicy::Eager,
                     opt.completion_bound);
  if (!ext.return_round)
    throw FixtureDiverged("follow-up operation did not return within " +
                          std::to_string(opt.completion_bound) + " rounds");

  rep.run = ext.run;
  History h = extract_history(rep.run);
  for (const Operation& op : h.ops)
    if (op.process == j && op.complete() && op.start_time >= t2) rep.followup = op;
  rep.followup_synced = performed_sync(rep.run, j, rep.followup.start_time,
                                       *rep.followup.end_time, &rep.sync_kind);
  rep.completed = true;
  return rep;
}

}  // namespace

ScenarioReport sync_necessity_register(const Run& r, const Operation& X,
                                       const Protocol& protocol,
                                       const SyncOptions& opt) {
  Value fresh = opt.fresh_value ? opt.fresh_value : first_unused_value(r);
  return sync_necessity(r, X, protocol, OpName{OpName::Kind::Write, fresh}, opt);
}

ScenarioReport sync_necessity_snapshot(const Run& r, const Operation& X,
                                       const Protocol& protocol,
                                       const SyncOptions& opt) {
  if (X.name.kind == OpName::Kind::Update)
    return sync_necessity(r, X, protocol, OpName{OpName::Kind::Scan, 0}, opt);
  if (X.name.kind == OpName::Kind::Scan) {
    Value fresh = opt.fresh_value ? opt.fresh_value : first_unused_value(r);
    return sync_necessity(r, X, protocol, OpName{OpName::Kind::Update, fresh}, opt);
  }
  throw PreconditionViolated("operation is neither an update nor a scan");
}

std::optional<Run> search_writemustsync(const Fixture& impl, int m, int budget) {
  if (m <= 0) throw PreconditionViolated("the write count must be positive");
  int n = impl.scenario.nprocs;
  if (n < 2) throw PreconditionViolated("need at least two processes");
  for (Value v = 1; v <= m; ++v)
    if (std::find(impl.scenario.vals.begin(), impl.scenario.vals.end(), v) ==
        impl.scenario.vals.end())
      throw PreconditionViolated("not enough distinct values for " +
                                 std::to_string(m) + " writes");

  // Writer sequences in lexicographic order; alternating ones come first.
  std::vector<std::vector<ProcId>> patterns;
  {
    std::vector<ProcId> alt;
    for (int start = 1; start <= n; ++start) {
      alt.clear();
      for (int k = 0; k < m; ++k) alt.push_back((start - 1 + k) % n + 1);
      patterns.push_back(alt);
    }
    std::vector<int> counter(m, 0);
    while (static_cast<int>(patterns.size()) < budget) {
      std::vector<ProcId> pat;
      for (int k = 0; k < m; ++k) pat.push_back(counter[k] + 1);
      if (std::find(patterns.begin(), patterns.end(), pat) == patterns.end())
        patterns.push_back(pat);
      int k = m - 1;
      while (k >= 0 && ++counter[k] == n) counter[k--] = 0;
      if (k < 0) break;
    }
  }

  for (const auto& pattern : patterns) {
    Run run;
    run.scenario = impl.scenario;
    run.protocol_name = impl.protocol->name();
    run.states.push_back(GlobalState::initial(impl.scenario));

    bool built = true;
    for (int k = 0; k < m && built; ++k) {
      OpName op{OpName::Kind::Write, k + 1};
      ExtendResult ext =
          extend_with_op(run, *impl.protocol, pattern[k], op, PropPolicy::Lazy, 64);
      built = ext.return_round.has_value();
      run = std::move(ext.run);
    }
    if (!built) continue;

    History h = extract_history(run);
    bool all_synced = true;
    int writes = 0;
    for (const Operation& op : h.ops) {
      if (op.name.kind != OpName::Kind::Write) continue;
      ++writes;
      if (!op.complete() ||
          !performed_sync(run, op.process, op.start_time, *op.end_time, nullptr))
        all_synced = false;
    }
    if (writes == m && all_synced) return run;
  }
  return std::nullopt;
}

}  // namespace tsokit
