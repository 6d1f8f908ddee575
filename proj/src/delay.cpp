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

#include "tsokit/delay.hpp"

#include <algorithm>
#include <sstream>

namespace tsokit {

namespace {

/* Per-agent shift thresholds for a fixed S: the first node time outside
 * Past⁺(S). Node t keeps its time iff t < threshold; round m iff
 * m <= threshold. */
struct Thresholds {
  std::vector<int> first_outside;  // indexed like Scenario::agent_index
  int horizon = 0;

  int of(const Scenario& sc, const AgentId& a) const {
    return first_outside[sc.agent_index(a)];
  }
  int node_time(const Scenario& sc, const AgentId& a, int t, int delta) const {
    return t < of(sc, a) ? t : t + delta;
  }
  int round(const Scenario& sc, const AgentId& a, int m, int delta) const {
    return shift_time(m, of(sc, a), delta);
  }
};

Thresholds thresholds_of(const Scenario& sc, const ObGraph& g,
                         const std::vector<Node>& S) {
  Thresholds th;
  th.horizon = g.horizon();
  auto mask = g.past_plus_mask(S);
  th.first_outside.resize(sc.agent_count());
  for (int a = 0; a < sc.agent_count(); ++a) {
    AgentId agent = sc.agent_at(a);
    int t = 0;
    while (t <= g.horizon() && mask[g.index(Node{agent, t})]) ++t;
    th.first_outside[a] = t;
  }
  return th;
}

/* Round of r that lands on round mp of the transformed run, or 0. */
int inverse_round(int mp, int threshold, int delta, int horizon) {
  int m;
  if (mp <= threshold)
    m = mp;
  else if (mp > threshold + delta)
    m = mp - delta;
  else
    return 0;
  return m >= 1 && m <= horizon ? m : 0;
}

}  // namespace

Run delay_transform(const Run& r, const std::vector<Node>& S, int delta) {
  if (delta < 0) throw std::invalid_argument("negative delay");
  const Scenario& sc = r.scenario;
  const int T = r.horizon();
  const int n = sc.nprocs;

  ObGraph g(r);
  for (const Node& s : S)
    if (!g.in_range(s))
      throw std::invalid_argument("node " + to_string(s) + " outside the horizon");

  if (delta == 0) return r;

  Thresholds th = thresholds_of(sc, g, S);

  // A buffered read and the prop of the very same tag inside one round have
  // no occurs-before edge between them. Keeping the prop while delaying the
  // read would lose the read's tag, so that split is refused. Every other
  // split of such a pair replays soundly: the per-agent pasts are time
  // prefixes, so no later prop of the same buffer can jump ahead.
  for (int t = 0; t < T; ++t) {
    for (const Event& a : r.rounds[t].events) {
      if (a.kind != Event::Kind::RfB) continue;
      for (const Event& b : r.rounds[t].events) {
        if (b.kind != Event::Kind::Prop || b.agent.proc != a.agent.proc ||
            !(b.tag == a.tag))
          continue;
        bool read_kept = t < th.of(sc, a.agent);
        bool prop_kept = t < th.of(sc, b.agent);
        if (prop_kept && !read_kept)
          throw PreconditionViolated(
              "a buffered read and the prop of its tag share round " +
              std::to_string(t + 1) +
              " and the node set keeps only the prop; no locally equivalent "
              "delayed run exists");
      }
    }
  }
  bool any_exhausted = false, all_exhausted = true;
  for (int a = 0; a < sc.agent_count(); ++a) {
    bool exhausted = th.first_outside[a] > T;
    any_exhausted = any_exhausted || exhausted;
    all_exhausted = all_exhausted && exhausted;
  }
  if (all_exhausted) return pad(r, delta);  // nothing left to delay
  if (any_exhausted)
    throw HorizonExhausted(
        "some agent is inside Past+ through the whole horizon; extend the run "
        "(quiesce or pad) and retry");

  // Invoke deliveries travel with the process node of their round.
  std::vector<std::vector<std::pair<ProcId, OpName>>> invokes_at(T + delta + 1);
  for (int m = 1; m <= T; ++m)
    for (const auto& [target, op] : r.rounds[m - 1].action.invokes)
      invokes_at[th.round(sc, AgentId::process(target), m, delta)].emplace_back(target,
                                                                                op);

  Run out;
  out.scenario = sc;
  out.protocol_name = r.protocol_name;
  out.seed = r.seed;
  out.states.push_back(r.states[0]);

  auto diverge = [&](int round, const std::string& what) {
    throw InternalReplayDivergence("round " + std::to_string(round) + ": " + what);
  };

  for (int mp = 1; mp <= T + delta; ++mp) {
    const GlobalState& g0 = out.states.back();
    JointAction j = JointAction::empty(n);

    for (ProcId i = 1; i <= n; ++i) {
      int m = inverse_round(mp, th.of(sc, AgentId::process(i)), delta, T);
      if (m == 0) continue;
      const Action& a = r.rounds[m - 1].action.proc_actions[i - 1];
      if (a.is_null()) continue;
      if (g0.local(i) != r.states[m - 1].local(i))
        diverge(mp, "p" + std::to_string(i) + " local state differs from source");
      if (!enabled(sc, g0.tso, AgentId::process(i), a))
        diverge(mp, "replayed action of p" + std::to_string(i) + " is disabled");
      j.proc_actions[i - 1] = a;
    }

    for (ProcId i = 1; i <= n; ++i) {
      int m = inverse_round(mp, th.of(sc, AgentId::dispatcher_of(i)), delta, T);
      if (m == 0 || !r.rounds[m - 1].action.props[i - 1]) continue;
      if (g0.tso.buffer(i).empty())
        diverge(mp, "d" + std::to_string(i) + " has nothing to propagate");
      j.props[i - 1] = true;
    }

    j.invokes = invokes_at[mp];

    try {
      auto [next, events] = joint_apply(sc, g0, j);
      out.rounds.push_back(Round{std::move(j), std::move(events)});
      out.states.push_back(std::move(next));
    } catch (const std::runtime_error& e) {
      diverge(mp, e.what());
    }
  }
  return out;
}

std::string DelayReport::summary() const {
  std::ostringstream os;
  for (const auto& v : violations) os << v << "\n";
  return os.str();
}

DelayReport verify_delay(const Run& r, const Run& transformed,
                         const std::vector<Node>& S, int delta) {
  DelayReport rep;
  auto flag = [&](std::string s) { rep.violations.push_back(std::move(s)); };

  const Scenario& sc = r.scenario;
  const int T = r.horizon();
  if (transformed.scenario != sc) {
    flag("scenario mismatch");
    return rep;
  }
  if (delta > 0 && transformed.horizon() != T + delta)
    flag("horizon is " + std::to_string(transformed.horizon()) + ", expected " +
         std::to_string(T + delta));

  ObGraph g(r);
  Thresholds th = thresholds_of(sc, g, S);

  // (a) same actions, same order, at the shifted node times.
  for (int a = 0; a < sc.agent_count(); ++a) {
    AgentId agent = sc.agent_at(a);
    int moved_r = 0, moved_t = 0;
    for (int t = 0; t < T; ++t) {
      Action act = r.action_at(agent, t);
      if (act.is_null()) continue;
      ++moved_r;
      int tp = th.node_time(sc, agent, t, delta);
      if (!(transformed.action_at(agent, tp) == act))
        flag("action of " + to_string(agent) + "@" + std::to_string(t) +
             " not replayed at time " + std::to_string(tp));
    }
    for (int t = 0; t < transformed.horizon(); ++t)
      if (!transformed.action_at(agent, t).is_null()) ++moved_t;
    if (moved_r != moved_t)
      flag(to_string(agent) + " performs " + std::to_string(moved_t) +
           " actions, expected " + std::to_string(moved_r));
  }

  // Invoke deliveries shift with the process node of their round.
  {
    size_t total_r = 0, total_t = 0;
    for (int m = 1; m <= T; ++m) {
      for (const auto& inv : r.rounds[m - 1].action.invokes) {
        ++total_r;
        int mp = th.round(sc, AgentId::process(inv.first), m, delta);
        const auto& at = transformed.rounds[mp - 1].action.invokes;
        if (std::find(at.begin(), at.end(), inv) == at.end())
          flag("invoke at p" + std::to_string(inv.first) + " of round " +
               std::to_string(m) + " not delivered in round " + std::to_string(mp));
      }
    }
    for (const Round& round : transformed.rounds) total_t += round.action.invokes.size();
    if (total_r != total_t) flag("invoke count differs");
  }

  // (b) local states at corresponding times.
  auto mask = g.past_plus_mask(S);
  for (ProcId jproc = 1; jproc <= sc.nprocs; ++jproc) {
    for (int t = 0; t <= T; ++t) {
      int tp = mask[g.index(Node{AgentId::process(jproc), t})] ? t : t + delta;
      if (tp >= static_cast<int>(transformed.states.size())) {
        flag("no state at shifted time " + std::to_string(tp));
        continue;
      }
      if (r.states[t].local(jproc) != transformed.states[tp].local(jproc))
        flag("local state of p" + std::to_string(jproc) + " differs at times " +
             std::to_string(t) + "/" + std::to_string(tp));
    }
  }

  // Reads and props return the same tags at corresponding nodes.
  for (int a = 0; a < sc.agent_count(); ++a) {
    AgentId agent = sc.agent_at(a);
    for (int t = 0; t < T; ++t) {
      auto ev = r.event_at(agent, t);
      if (!ev) continue;
      bool is_read = ev->kind == Event::Kind::RfB || ev->kind == Event::Kind::RfM;
      bool is_prop = ev->kind == Event::Kind::Prop;
      if (!is_read && !is_prop) continue;
      int tp = th.node_time(sc, agent, t, delta);
      auto evp = transformed.event_at(agent, tp);
      if (!evp) {
        flag("no event at " + to_string(agent) + "@" + std::to_string(tp));
        continue;
      }
      bool still_read =
          evp->kind == Event::Kind::RfB || evp->kind == Event::Kind::RfM;
      if (is_read && (!still_read || evp->tag != ev->tag || evp->value != ev->value))
        flag("read tag changed at " + to_string(agent) + "@" + std::to_string(t));
      if (is_prop && (evp->kind != Event::Kind::Prop || evp->tag != ev->tag))
        flag("prop tag changed at " + to_string(agent) + "@" + std::to_string(t));
    }
  }

  // Joint actions of the transformed run stay conflict-free.
  for (int t = 0; t < transformed.horizon(); ++t) {
    const auto& events = transformed.rounds[t].events;
    for (size_t x = 0; x < events.size(); ++x)
      for (size_t y = x + 1; y < events.size(); ++y)
        if (conflicts(events[x], events[y]))
          flag("conflicting events in round " + std::to_string(t + 1));
  }

  EquivalenceReport eq = local_equivalence(r, transformed);
  if (!eq.equivalent) flag("runs are not locally equivalent");

  return rep;
}

DelayReport verify_delay_claims(const Run& r, const Run& transformed,
                                const std::vector<Node>& S, int delta) {
  DelayReport rep;
  auto flag = [&](std::string s) { rep.violations.push_back(std::move(s)); };

  const Scenario& sc = r.scenario;
  const int T = r.horizon();
  ObGraph g(r);
  ObGraph gp(transformed);
  Thresholds th = thresholds_of(sc, g, S);

  // Related nodes are never reordered, and shifted rounds stay in range.
  for (const ObEdge& e : g.base_edges()) {
    int m1 = th.round(sc, e.from.agent, e.from.time + 1, delta);
    int m2 = th.round(sc, e.to.agent, e.to.time + 1, delta);
    if (m1 >= m2)
      flag("edge " + to_string(e.from) + " -> " + to_string(e.to) +
           " reordered: rounds " + std::to_string(m1) + " vs " + std::to_string(m2));
    if (m1 - 1 < 0 || m2 - 1 < 0) flag("shifted round index went negative");
  }

  // Occurs-before preservation. The base edges of both runs correspond one
  // to one — and the closures must then agree on every shifted pair —
  // unless the shift rewires buffer-flow edges. That happens in exactly two
  // shapes: a read flips between RfM and RfB because its own prop crossed
  // it, or a same-round buffered-read/prop pair of one tag is split apart,
  // which creates the read-to-prop edge the single round never had. On
  // rewired instances only the ordering direction is required: related
  // nodes of the original stay temporally ordered after the shift.
  bool rewired = false;
  for (int a = 0; a < sc.agent_count() && !rewired; ++a) {
    AgentId agent = sc.agent_at(a);
    if (agent.dispatcher) continue;
    for (int t = 0; t < T && !rewired; ++t) {
      auto ev = g.event_of(Node{agent, t});
      if (!ev || (ev->kind != Event::Kind::RfM && ev->kind != Event::Kind::RfB))
        continue;
      Node moved{agent, th.node_time(sc, agent, t, delta)};
      std::optional<Event> evp;
      if (gp.in_range(moved)) evp = gp.event_of(moved);
      if (evp && evp->kind != ev->kind) rewired = true;
      if (ev->kind == Event::Kind::RfB) {
        auto prop = g.event_of(Node{AgentId::dispatcher_of(agent.proc), t});
        if (prop && prop->kind == Event::Kind::Prop && prop->tag == ev->tag &&
            th.node_time(sc, AgentId::dispatcher_of(agent.proc), t, delta) !=
                moved.time)
          rewired = true;
      }
    }
  }
  for (int va = 0; va < g.node_count(); ++va) {
    Node a = g.node_at(va);
    Node ap{a.agent, th.node_time(sc, a.agent, a.time, delta)};
    for (int vb = 0; vb < g.node_count(); ++vb) {
      Node b = g.node_at(vb);
      Node bp{b.agent, th.node_time(sc, b.agent, b.time, delta)};
      bool before = g.reaches(a, b);
      bool after = gp.in_range(ap) && gp.in_range(bp) && gp.reaches(ap, bp);
      if (before && !(ap.time < bp.time))
        flag("related nodes " + to_string(a) + ", " + to_string(b) +
             " lost their temporal order");
      if (!rewired && before != after) {
        flag("occurs-before not preserved between " + to_string(a) + " and " +
             to_string(b));
        vb = g.node_count();
        va = g.node_count();  // one witness is enough
      }
    }
  }

  // Propagation correspondence: a tag is propagated in round m of the
  // original iff in the shifted round of the transformed run.
  for (ProcId i = 1; i <= sc.nprocs; ++i) {
    AgentId di = AgentId::dispatcher_of(i);
    int props_r = 0, props_t = 0;
    for (int m = 1; m <= T; ++m) {
      auto ev = r.event_at(di, m - 1);
      if (!ev || ev->kind != Event::Kind::Prop) continue;
      ++props_r;
      int mp = th.round(sc, di, m, delta);
      auto evp = transformed.event_at(di, mp - 1);
      if (!evp || evp->kind != Event::Kind::Prop || evp->tag != ev->tag)
        flag("prop of " + to_string(*ev->tag) + " in round " + std::to_string(m) +
             " has no counterpart in round " + std::to_string(mp));
    }
    for (int m = 1; m <= transformed.horizon(); ++m) {
      auto evp = transformed.event_at(di, m - 1);
      if (evp && evp->kind == Event::Kind::Prop) ++props_t;
    }
    if (props_r != props_t) flag("prop count of d" + std::to_string(i) + " differs");
  }

  // At the shifted round of every fence or rmw the buffer is empty, and for
  // an rmw the memory still holds the expected value.
  for (ProcId jproc = 1; jproc <= sc.nprocs; ++jproc) {
    AgentId pj = AgentId::process(jproc);
    for (int m = 1; m <= T; ++m) {
      auto ev = r.event_at(pj, m - 1);
      if (!ev || (ev->kind != Event::Kind::F && ev->kind != Event::Kind::Rmw))
        continue;
      int mp = th.round(sc, pj, m, delta);
      const TsoState& st = transformed.states[mp - 1].tso;
      if (!st.buffer(jproc).empty())
        flag("buffer of p" + std::to_string(jproc) + " nonempty before round " +
             std::to_string(mp));
      if (ev->kind == Event::Kind::Rmw && st.memory[ev->var].value != ev->expected)
        flag("memory value differs before the rmw of round " + std::to_string(mp));
    }
  }

  return rep;
}

EquivalenceReport local_equivalence(const Run& r1, const Run& r2) {
  EquivalenceReport rep;
  if (r1.scenario.nprocs != r2.scenario.nprocs) {
    rep.equivalent = false;
    rep.divergences.push_back(Divergence{0, 0, "n=" + std::to_string(r1.scenario.nprocs),
                                         "n=" + std::to_string(r2.scenario.nprocs)});
    return rep;
  }
  for (ProcId i = 1; i <= r1.scenario.nprocs; ++i) {
    const LocalState& a = r1.states.back().local(i);
    const LocalState& b = r2.states.back().local(i);
    size_t k = 0;
    while (k < a.size() && k < b.size() && a[k] == b[k]) ++k;
    if (k == a.size() && k == b.size()) continue;
    rep.equivalent = false;
    rep.divergences.push_back(
        Divergence{i, static_cast<int>(k), k < a.size() ? to_string(a[k]) : "(end)",
                   k < b.size() ? to_string(b[k]) : "(end)"});
  }
  return rep;
}

Run solo_transform(const Run& r, const Operation& X) {
  if (!X.complete()) throw PreconditionViolated("operation did not complete");
  ProcId i = X.process;
  int t1 = X.start_time;
  int t2 = *X.end_time;

  ObGraph g(r);
  Node xs{AgentId::process(i), t1}, xe{AgentId::process(i), t2};
  if (feedback_loop(g, xs, xe))
    throw FeedbackLoopPresent("operation " + std::to_string(X.id) +
                              " contains a feedback loop");
  int delta = t2 - t1 + 1;

  std::vector<Node> seed{xe};
  if (t1 >= 1)
    for (int a = 0; a < r.scenario.agent_count(); ++a)
      seed.push_back(Node{r.scenario.agent_at(a), t1 - 1});
  std::vector<Node> s1 = g.past_plus(seed);

  Run mid = delay_transform(r, s1, delta);

  std::vector<Node> s2;
  for (const Node& nd : s1)
    if (!(nd.agent.proc == i && nd.time >= t1 - 1)) s2.push_back(nd);

  return delay_transform(mid, s2, delta);
}

Run unpropagated_transform(const Run& r, const Operation& X, const Tag& kappa) {
  if (!X.complete()) throw PreconditionViolated("operation did not complete");
  ProcId i = X.process;
  int t1 = X.start_time;
  int t2 = *X.end_time;

  bool wrote = false;
  for (int t = t1; t < t2; ++t) {
    auto ev = r.event_at(AgentId::process(i), t);
    if (!ev) continue;
    if (ev->kind == Event::Kind::W && ev->tag == kappa) wrote = true;
    if (ev->kind == Event::Kind::F)
      throw PreconditionViolated("operation performs a fence");
    if (ev->kind == Event::Kind::Rmw)
      throw PreconditionViolated("operation performs an rmw");
  }
  if (!wrote)
    throw PreconditionViolated("tag " + to_string(kappa) +
                               " is not written during the operation");
  {
    ObGraph g(r);
    if (feedback_loop(g, Node{AgentId::process(i), t1}, Node{AgentId::process(i), t2}))
      throw PreconditionViolated("operation contains a feedback loop");
  }

  Run solo = solo_transform(r, X);
  Operation xs = find_corresponding_op(solo, r, X);
  int s1 = xs.start_time;
  int s2 = *xs.end_time;

  std::vector<Node> S{Node{AgentId::process(i), s2}};
  for (int a = 0; a < r.scenario.agent_count(); ++a)
    S.push_back(Node{r.scenario.agent_at(a), s1});
  return delay_transform(solo, S, s2 - s1);
}

Operation find_corresponding_op(const Run& transformed, const Run& original,
                                const Operation& X) {
  History ho = extract_history(original);
  History ht = extract_history(transformed);
  int ordinal = 0;
  for (const Operation& op : ho.ops) {
    if (op.process != X.process) continue;
    if (op.id == X.id) break;
    ++ordinal;
  }
  int seen = 0;
  for (const Operation& op : ht.ops) {
    if (op.process != X.process) continue;
    if (seen == ordinal) return op;
    ++seen;
  }
  throw std::logic_error("operation not found in the transformed run");
}

bool runs_solo(const Run& r, const Operation& X) {
  if (!X.complete()) return false;
  for (int t = X.start_time; t < *X.end_time; ++t)
    for (int a = 0; a < r.scenario.agent_count(); ++a) {
      AgentId agent = r.scenario.agent_at(a);
      if (agent.proc == X.process) continue;
      if (!r.action_at(agent, t).is_null()) return false;
    }
  return true;
}

}  // namespace tsokit
