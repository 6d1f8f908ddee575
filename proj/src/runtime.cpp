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

#include "tsokit/runtime.hpp"

#include <algorithm>
#include <sstream>

namespace tsokit {

std::string to_string(const LocalRecord& rec) {
  switch (rec.kind) {
    case LocalRecord::Kind::W:
      return "W(" + std::to_string(rec.var) + "," + std::to_string(rec.value) + ")";
    case LocalRecord::Kind::R:
      return "R(" + std::to_string(rec.var) + "," + std::to_string(rec.value) + ")";
    case LocalRecord::Kind::Rmw:
      return "RMW(" + std::to_string(rec.var) + "," + std::to_string(rec.expected) +
             "," + std::to_string(rec.replacement) + ")";
    case LocalRecord::Kind::F:
      return "F";
    case LocalRecord::Kind::Internal:
      return "internal(" + rec.label + ")";
    case LocalRecord::Kind::Invoke:
      return "invoke(" + to_string(rec.op) + ")";
    case LocalRecord::Kind::Ret:
      return "return(" + to_string(rec.op) + "," + to_string(rec.response) + ")";
  }
  return "?";
}

GlobalState GlobalState::initial(const Scenario& sc) {
  GlobalState g;
  g.tso = TsoState::initial(sc);
  g.locals.resize(sc.nprocs);
  g.pending.resize(sc.nprocs);
  g.write_counters.assign(sc.nprocs, 0);
  return g;
}

Action Run::action_at(const AgentId& agent, int t) const {
  if (t < 0 || t >= horizon()) return Action::null();
  const JointAction& j = rounds[t].action;
  if (agent.dispatcher)
    return j.props[agent.proc - 1] ? Action::prop() : Action::null();
  return j.proc_actions[agent.proc - 1];
}

std::optional<Event> Run::event_at(const AgentId& agent, int t) const {
  if (t < 0 || t >= horizon()) return std::nullopt;
  for (const Event& e : rounds[t].events) {
    if (e.agent == agent && e.kind != Event::Kind::InvokeDelivered) return e;
  }
  return std::nullopt;
}

namespace {

LocalRecord record_of(const Action& a, const Event& e) {
  LocalRecord rec;
  switch (a.kind) {
    case Action::Kind::Write:
      rec.kind = LocalRecord::Kind::W;
      rec.var = a.var;
      rec.value = a.value;
      break;
    case Action::Kind::Read:
      rec.kind = LocalRecord::Kind::R;
      rec.var = a.var;
      rec.value = e.value;  // the value read, not where it came from
      break;
    case Action::Kind::Rmw:
      rec.kind = LocalRecord::Kind::Rmw;
      rec.var = a.var;
      rec.expected = a.expected;
      rec.replacement = a.replacement;
      break;
    case Action::Kind::Fence:
      rec.kind = LocalRecord::Kind::F;
      break;
    case Action::Kind::Internal:
      rec.kind = LocalRecord::Kind::Internal;
      rec.label = a.label;
      break;
    case Action::Kind::Ret:
      rec.kind = LocalRecord::Kind::Ret;
      rec.op = a.op;
      rec.response = a.response;
      break;
    default:
      throw std::logic_error("unrecordable action");
  }
  return rec;
}

}  // namespace

std::pair<GlobalState, std::vector<Event>> joint_apply(const Scenario& sc,
                                                       const GlobalState& g,
                                                       const JointAction& j) {
  GlobalState out = g;
  std::vector<Event> events;

  for (ProcId i = 1; i <= sc.nprocs; ++i) {
    const Action& a = j.proc_actions[i - 1];
    if (a.is_null()) continue;
    if (a.kind == Action::Kind::Prop || a.kind == Action::Kind::Invoke)
      throw std::logic_error("misplaced action in process slot");
    Event e = apply(sc, out.tso, AgentId::process(i), a, out.write_counters[i - 1] + 1);
    if (a.kind == Action::Kind::Write || a.kind == Action::Kind::Rmw)
      ++out.write_counters[i - 1];
    out.locals[i - 1].push_back(record_of(a, e));
    if (a.kind == Action::Kind::Ret) out.pending[i - 1].reset();
    events.push_back(e);
  }

  for (ProcId i = 1; i <= sc.nprocs; ++i) {
    if (!j.props[i - 1]) continue;
    Event e = apply(sc, out.tso, AgentId::dispatcher_of(i), Action::prop(), 0);
    events.push_back(e);
  }

  for (const auto& [target, op] : j.invokes) {
    if (target < 1 || target > sc.nprocs)
      throw std::logic_error("invoke target out of range");
    if (out.pending[target - 1])
      throw DoubleInvoke("invoke at p" + std::to_string(target) +
                         " while an operation is pending");
    out.pending[target - 1] = op;
    LocalRecord rec;
    rec.kind = LocalRecord::Kind::Invoke;
    rec.op = op;
    out.locals[target - 1].push_back(rec);
    Event e;
    e.agent = AgentId::process(target);
    e.kind = Event::Kind::InvokeDelivered;
    events.push_back(e);
  }

  for (size_t a = 0; a < events.size(); ++a)
    for (size_t b = a + 1; b < events.size(); ++b)
      if (conflicts(events[a], events[b]))
        throw ConflictingJointAction(to_string(events[a].agent) + ":" +
                                     to_string(events[a]) + " vs " +
                                     to_string(events[b].agent) + ":" +
                                     to_string(events[b]));

  return {std::move(out), std::move(events)};
}

Run execute(const Scenario& sc, const Protocol& protocol, const Schedule& schedule,
            int horizon, uint64_t seed) {
  Run run;
  run.scenario = sc;
  run.protocol_name = protocol.name();
  run.seed = seed;
  run.states.push_back(GlobalState::initial(sc));

  for (int t = 0; t < horizon; ++t) {
    const GlobalState& g = run.states.back();
    JointAction j = JointAction::empty(sc.nprocs);
    if (t < static_cast<int>(schedule.rounds.size())) {
      const ScheduledRound& sr = schedule.rounds[t];
      for (ProcId i = 1; i <= sc.nprocs; ++i) {
        if (static_cast<int>(sr.proc_actions.size()) < i) break;
        Action a = sr.proc_actions[i - 1];
        if (a.is_null()) continue;
        auto cands = protocol.candidates(i, g.local(i));
        if (std::find(cands.begin(), cands.end(), a) == cands.end())
          throw ScheduleInvalid("round " + std::to_string(t + 1) + ": p" +
                                std::to_string(i) +
                                " scheduled outside its protocol");
        // Blocking semantics: a disabled fence or rmw waits as a null.
        if ((a.kind == Action::Kind::Fence || a.kind == Action::Kind::Rmw) &&
            !enabled(sc, g.tso, AgentId::process(i), a))
          continue;
        j.proc_actions[i - 1] = a;
      }
      for (ProcId i = 1; i <= sc.nprocs; ++i) {
        if (static_cast<int>(sr.props.size()) < i) break;
        // A prop fires only when the buffer is already nonempty at the start
        // of the round; a same-round write cannot feed it.
        j.props[i - 1] = sr.props[i - 1] && !g.tso.buffer(i).empty();
      }
      j.invokes = sr.invokes;
    }
    auto [next, events] = joint_apply(sc, g, j);
    run.rounds.push_back(Round{std::move(j), std::move(events)});
    run.states.push_back(std::move(next));
  }
  return run;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& v : violations)
    os << "round " << v.round << " [" << v.kind << "] " << v.detail << "\n";
  return os.str();
}

ValidationReport validate_run(const Run& r, const Protocol& protocol) {
  ValidationReport rep;
  auto flag = [&](int round, std::string kind, std::string detail) {
    rep.violations.push_back(Violation{round, std::move(kind), std::move(detail)});
  };

  const Scenario& sc = r.scenario;
  if (r.states.size() != r.rounds.size() + 1) {
    flag(0, "shape", "state count does not match round count");
    return rep;
  }
  if (r.states[0] != GlobalState::initial(sc))
    flag(0, "initial-state", "state 0 is not the initial state");

  for (int t = 0; t < r.horizon(); ++t) {
    const Round& round = r.rounds[t];
    for (ProcId i = 1; i <= sc.nprocs; ++i) {
      const Action& a = round.action.proc_actions[i - 1];
      if (a.is_null()) continue;
      auto cands = protocol.candidates(i, r.states[t].local(i));
      if (std::find(cands.begin(), cands.end(), a) == cands.end())
        flag(t + 1, "protocol", "p" + std::to_string(i) + " performed an action outside its protocol");
    }
    try {
      auto [next, events] = joint_apply(sc, r.states[t], round.action);
      if (next != r.states[t + 1])
        flag(t + 1, "state-mismatch", "replayed state differs from recorded state");
      if (events != round.events)
        flag(t + 1, "event-mismatch", "replayed events differ from recorded events");
    } catch (const NotEnabled& e) {
      flag(t + 1, "enabledness", e.what());
    } catch (const ConflictingJointAction& e) {
      flag(t + 1, "conflict", e.what());
    } catch (const DoubleInvoke& e) {
      flag(t + 1, "double-invoke", e.what());
    }
  }

  // FIFO: per process, the propagated tag sequence is a prefix of the
  // issued write-tag sequence.
  for (ProcId i = 1; i <= sc.nprocs; ++i) {
    std::vector<Tag> writes, props;
    for (const Round& round : r.rounds) {
      for (const Event& e : round.events) {
        if (e.agent == AgentId::process(i) && e.kind == Event::Kind::W)
          writes.push_back(*e.tag);
        if (e.agent == AgentId::dispatcher_of(i) && e.kind == Event::Kind::Prop)
          props.push_back(*e.tag);
      }
    }
    if (props.size() > writes.size() ||
        !std::equal(props.begin(), props.end(), writes.begin()))
      flag(0, "fifo", "p" + std::to_string(i) +
                          ": propagation order differs from write order");
  }
  return rep;
}

Run quiesce(const Run& r) {
  Run out = r;
  int n = out.scenario.nprocs;
  int cursor = 0;
  while (!out.states.back().tso.all_buffers_empty()) {
    int pick = -1;
    for (int k = 0; k < n; ++k) {
      int idx = (cursor + k) % n;
      if (!out.states.back().tso.buffers[idx].empty()) {
        pick = idx;
        break;
      }
    }
    cursor = (pick + 1) % n;
    JointAction j = JointAction::empty(n);
    j.props[pick] = true;
    auto [next, events] = joint_apply(out.scenario, out.states.back(), j);
    out.rounds.push_back(Round{std::move(j), std::move(events)});
    out.states.push_back(std::move(next));
  }
  return out;
}

Run pad(const Run& r, int extra) {
  Run out = r;
  for (int k = 0; k < extra; ++k) {
    out.rounds.push_back(Round{JointAction::empty(out.scenario.nprocs), {}});
    out.states.push_back(out.states.back());
  }
  return out;
}

History extract_history(const Run& r) {
  History h;
  h.horizon = r.horizon();
  std::vector<std::optional<Operation>> open(r.scenario.nprocs);

  for (int t = 0; t < r.horizon(); ++t) {
    const Round& round = r.rounds[t];
    for (ProcId i = 1; i <= r.scenario.nprocs; ++i) {
      const Action& a = round.action.proc_actions[i - 1];
      if (a.kind != Action::Kind::Ret) continue;
      if (!open[i - 1])
        throw MalformedHistory("return with no pending invoke at p" +
                               std::to_string(i) + ", round " + std::to_string(t + 1));
      if (!(open[i - 1]->name == a.op))
        throw MalformedHistory("return does not match the pending operation at p" +
                               std::to_string(i));
      Operation op = *open[i - 1];
      op.end_time = t + 1;
      op.response = a.response;
      h.ops.push_back(op);
      open[i - 1].reset();
    }
    for (const auto& [target, op] : round.action.invokes) {
      Operation o;
      o.process = target;
      o.name = op;
      o.start_time = t;
      open[target - 1] = o;
    }
  }
  for (auto& o : open)
    if (o) h.ops.push_back(*o);

  std::stable_sort(h.ops.begin(), h.ops.end(), [](const Operation& a, const Operation& b) {
    return a.start_time != b.start_time ? a.start_time < b.start_time
                                        : a.process < b.process;
  });
  for (size_t k = 0; k < h.ops.size(); ++k) h.ops[k].id = static_cast<int>(k);
  return h;
}

}  // namespace tsokit
