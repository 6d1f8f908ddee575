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

#include "tsokit/fixtures.hpp"

#include <algorithm>

namespace tsokit {

namespace {

/* Index of the last still-open invoke, or -1. */
int open_invoke(const LocalState& local) {
  for (int k = static_cast<int>(local.size()) - 1; k >= 0; --k) {
    if (local[k].kind == LocalRecord::Kind::Ret) return -1;
    if (local[k].kind == LocalRecord::Kind::Invoke) return k;
  }
  return -1;
}

class ScriptProtocol : public Protocol {
 public:
  ScriptProtocol(std::string name, std::vector<std::vector<Action>> scripts)
      : name_(std::move(name)), scripts_(std::move(scripts)) {}

  std::string name() const override { return name_; }

  std::vector<Action> candidates(ProcId i, const LocalState& local) const override {
    const auto& script = scripts_[i - 1];
    size_t pos = local.size();  // every performed action leaves one record
    if (pos < script.size()) return {script[pos]};
    return {Action::null()};
  }

 private:
  std::string name_;
  std::vector<std::vector<Action>> scripts_;
};

class FreeProtocol : public Protocol {
 public:
  explicit FreeProtocol(const Scenario& sc) {
    for (VarId x = 0; x < static_cast<VarId>(sc.vars.size()); ++x) {
      menu_.push_back(Action::read(x));
      for (Value v : sc.vals) menu_.push_back(Action::write(x, v));
      for (Value a : sc.vals)
        for (Value b : sc.vals)
          if (a != b) menu_.push_back(Action::rmw(x, a, b));
    }
    menu_.push_back(Action::fence());
  }

  std::string name() const override { return "free"; }

  std::vector<Action> candidates(ProcId, const LocalState&) const override {
    return menu_;
  }

 private:
  std::vector<Action> menu_;
};

class RegisterProtocol : public Protocol {
 public:
  enum class Sync { None, Fence, Alternating };

  RegisterProtocol(std::string name, Sync sync) : name_(std::move(name)), sync_(sync) {}

  std::string name() const override { return name_; }

  std::vector<Action> candidates(ProcId, const LocalState& local) const override {
    int inv = open_invoke(local);
    if (inv < 0) return {Action::null()};
    const OpName& op = local[inv].op;
    int steps = static_cast<int>(local.size()) - inv - 1;

    if (op.kind == OpName::Kind::Read) {
      if (steps == 0) return {Action::read(kReg)};
      return {Action::ret(op, Response::of(local[inv + 1].value))};
    }
    // write(v)
    bool fenced = sync_ == Sync::Fence;
    if (sync_ == Sync::Alternating) {
      int prior_writes = 0;
      for (int k = 0; k < inv; ++k)
        if (local[k].kind == LocalRecord::Kind::Invoke &&
            local[k].op.kind == OpName::Kind::Write)
          ++prior_writes;
      fenced = prior_writes % 2 == 0;
    }
    if (steps == 0) return {Action::write(kReg, op.arg)};
    if (steps == 1 && fenced) return {Action::fence()};
    return {Action::ret(op, Response::ack())};
  }

  static constexpr VarId kReg = 0;

 private:
  std::string name_;
  Sync sync_;
};

class SnapshotProtocol : public Protocol {
 public:
  SnapshotProtocol(std::string name, int nprocs, bool rmw_scan)
      : name_(std::move(name)), nprocs_(nprocs), rmw_scan_(rmw_scan) {}

  std::string name() const override { return name_; }

  std::vector<Action> candidates(ProcId i, const LocalState& local) const override {
    int inv = open_invoke(local);
    if (inv < 0) return {Action::null()};
    const OpName& op = local[inv].op;
    int steps = static_cast<int>(local.size()) - inv - 1;

    if (op.kind == OpName::Kind::Update) {
      VarId own = i - 1;
      if (steps == 0) return {Action::write(own, op.arg)};
      if (steps == 1 && !rmw_scan_) return {Action::fence()};
      return {Action::ret(op, Response::ack())};
    }

    // scan
    if (rmw_scan_) {
      if (steps == 0) return {Action::read(seq_var())};
      if (steps == 1) {
        Value c = local[inv + 1].value;
        return {Action::rmw(seq_var(), c, c + 1)};
      }
      int got = steps - 2;
      if (got < nprocs_) return {Action::read(got)};
      std::vector<Value> vec;
      for (int k = 0; k < nprocs_; ++k) vec.push_back(local[inv + 3 + k].value);
      return {Action::ret(op, Response::of_vec(std::move(vec)))};
    }

    // Repeated collects; return once two consecutive ones agree. Unwritten
    // values are never reused, so equal collects pin the whole vector.
    int reads = steps;
    if (reads >= 2 * nprocs_ && reads % nprocs_ == 0) {
      bool stable = true;
      for (int k = 0; k < nprocs_ && stable; ++k)
        stable = local[inv + 1 + reads - 2 * nprocs_ + k].value ==
                 local[inv + 1 + reads - nprocs_ + k].value;
      if (stable) {
        std::vector<Value> vec;
        for (int k = 0; k < nprocs_; ++k)
          vec.push_back(local[inv + 1 + reads - nprocs_ + k].value);
        return {Action::ret(op, Response::of_vec(std::move(vec)))};
      }
    }
    return {Action::read(reads % nprocs_)};
  }

  VarId seq_var() const { return nprocs_; }

 private:
  std::string name_;
  int nprocs_;
  bool rmw_scan_;
};

Scenario basic_scenario(int nprocs, std::vector<std::string> vars,
                        std::vector<Value> vals, Value init) {
  Scenario sc;
  sc.nprocs = nprocs;
  sc.vars = std::move(vars);
  sc.vals = std::move(vals);
  sc.initial.assign(sc.vars.size(), init);
  return sc;
}

std::vector<Value> iota_vals(int lo, int hi) {
  std::vector<Value> v;
  for (int k = lo; k <= hi; ++k) v.push_back(k);
  return v;
}

}  // namespace

Fixture make_fixture(const std::string& name, int nprocs) {
  Fixture f;
  f.name = name;

  if (name == "sb") {
    f.kind = FixtureKind::Litmus;
    f.scenario = basic_scenario(2, {"x", "y"}, {0, 1}, 0);
    VarId x = 0, y = 1;
    f.protocol = std::make_shared<ScriptProtocol>(
        "sb", std::vector<std::vector<Action>>{
                  {Action::write(x, 1), Action::read(y)},
                  {Action::write(y, 1), Action::read(x)}});
    return f;
  }
  if (name == "free") {
    f.kind = FixtureKind::Free;
    f.scenario = basic_scenario(nprocs, {"x", "y"}, {0, 1, 2}, 0);
    f.protocol = std::make_shared<FreeProtocol>(f.scenario);
    return f;
  }
  if (name == "register-fenced" || name == "register-unfenced" ||
      name == "register-alternating") {
    f.kind = FixtureKind::Register;
    f.scenario = basic_scenario(nprocs, {"reg"}, iota_vals(0, 9), 0);
    auto sync = name == "register-fenced"      ? RegisterProtocol::Sync::Fence
                : name == "register-unfenced" ? RegisterProtocol::Sync::None
                                               : RegisterProtocol::Sync::Alternating;
    f.protocol = std::make_shared<RegisterProtocol>(name, sync);
    return f;
  }
  if (name == "snapshot" || name == "snapshot-rmw-scan") {
    f.kind = FixtureKind::Snapshot;
    bool rmw = name == "snapshot-rmw-scan";
    std::vector<std::string> vars;
    for (int i = 1; i <= nprocs; ++i) vars.push_back("snap" + std::to_string(i));
    if (rmw) vars.push_back("sseq");
    f.scenario.nprocs = nprocs;
    f.scenario.vars = vars;
    f.scenario.vals = iota_vals(0, 30);
    f.scenario.initial.assign(vars.size(), kBottom);
    if (rmw) f.scenario.initial.back() = 0;  // the sequence variable starts at 0
    f.protocol = std::make_shared<SnapshotProtocol>(name, nprocs, rmw);
    return f;
  }
  throw UnknownFixture("unknown fixture: " + name);
}

std::vector<std::string> fixture_names() {
  return {"sb",
          "free",
          "register-fenced",
          "register-unfenced",
          "register-alternating",
          "snapshot",
          "snapshot-rmw-scan"};
}

Run generate_run(const Fixture& f, const GenOptions& opt) {
  const Scenario& sc = f.scenario;
  const Protocol& protocol = *f.protocol;
  Rng rng(opt.seed);

  Run run;
  run.scenario = sc;
  run.protocol_name = protocol.name();
  run.seed = opt.seed;
  run.states.push_back(GlobalState::initial(sc));

  int ops_left = opt.max_ops;
  Value next_value = 1;

  for (int t = 0; t < opt.horizon; ++t) {
    const GlobalState& g = run.states.back();
    JointAction j = JointAction::empty(sc.nprocs);

    // Tentative picks.
    for (ProcId i = 1; i <= sc.nprocs; ++i) {
      auto cands = protocol.candidates(i, g.local(i));
      if (!rng.chance(opt.p_move)) continue;
      Action a = cands[rng.below(cands.size())];
      if (a.is_null()) continue;
      if ((a.kind == Action::Kind::Fence || a.kind == Action::Kind::Rmw) &&
          !enabled(sc, g.tso, AgentId::process(i), a))
        continue;  // blocks
      j.proc_actions[i - 1] = a;
    }
    for (ProcId i = 1; i <= sc.nprocs; ++i)
      j.props[i - 1] = !g.tso.buffer(i).empty() && rng.chance(opt.p_prop);

    if (f.kind == FixtureKind::Register || f.kind == FixtureKind::Snapshot) {
      for (ProcId i = 1; i <= sc.nprocs; ++i) {
        if (g.pending[i - 1] || ops_left == 0 || !rng.chance(opt.p_invoke)) continue;
        OpName op;
        if (f.kind == FixtureKind::Register)
          op = rng.chance(0.5) ? OpName{OpName::Kind::Read, 0}
                               : OpName{OpName::Kind::Write, next_value++};
        else
          op = rng.chance(0.5) ? OpName{OpName::Kind::Scan, 0}
                               : OpName{OpName::Kind::Update, next_value++};
        j.invokes.emplace_back(i, op);
        --ops_left;
      }
    }

    // Demote any action whose event would conflict with an earlier one, and
    // any prop that would drain a tag its own process reads back this very
    // round: nothing orders that read before the prop, which puts the round
    // outside what the delay transform can preserve.
    {
      TsoState scratch = g.tso;
      std::vector<Event> kept;
      auto try_apply = [&](const AgentId& agent, const Action& a) -> bool {
        TsoState snapshot = scratch;
        if (!enabled(sc, scratch, agent, a)) return false;
        Event e = apply(sc, scratch, agent, a,
                        agent.dispatcher ? 0 : g.write_counters[agent.proc - 1] + 1);
        for (const Event& prior : kept)
          if (conflicts(prior, e)) {
            scratch = snapshot;
            return false;
          }
        if (e.kind == Event::Kind::Prop)
          for (const Event& prior : kept)
            if (prior.kind == Event::Kind::RfB &&
                prior.agent.proc == agent.proc && prior.tag == e.tag) {
              scratch = snapshot;
              return false;
            }
        kept.push_back(e);
        return true;
      };
      for (ProcId i = 1; i <= sc.nprocs; ++i) {
        const Action& a = j.proc_actions[i - 1];
        if (!a.is_null() && !try_apply(AgentId::process(i), a))
          j.proc_actions[i - 1] = Action::null();
      }
      for (ProcId i = 1; i <= sc.nprocs; ++i)
        if (j.props[i - 1] && !try_apply(AgentId::dispatcher_of(i), Action::prop()))
          j.props[i - 1] = false;
    }

    auto [next, events] = joint_apply(sc, g, j);
    run.rounds.push_back(Round{std::move(j), std::move(events)});
    run.states.push_back(std::move(next));
  }
  return run;
}

ExtendResult extend_with_op(const Run& r, const Protocol& protocol, ProcId j,
                            const OpName& op, PropPolicy policy, int bound) {
  const Scenario& sc = r.scenario;
  ExtendResult result{r, std::nullopt};
  Run& run = result.run;

  {
    JointAction inv = JointAction::empty(sc.nprocs);
    inv.invokes.emplace_back(j, op);
    auto [next, events] = joint_apply(sc, run.states.back(), inv);
    run.rounds.push_back(Round{std::move(inv), std::move(events)});
    run.states.push_back(std::move(next));
  }

  for (int step = 0; step < bound; ++step) {
    const GlobalState& g = run.states.back();
    JointAction ja = JointAction::empty(sc.nprocs);
    Action a = protocol.candidates(j, g.local(j)).front();
    bool blocked = (a.kind == Action::Kind::Fence || a.kind == Action::Kind::Rmw) &&
                   !enabled(sc, g.tso, AgentId::process(j), a);
    if (!a.is_null() && !blocked) ja.proc_actions[j - 1] = a;
    bool want_prop = policy == PropPolicy::Eager ? true : blocked;
    const auto& buf = g.tso.buffer(j);
    if (want_prop && !buf.empty() && a.kind == Action::Kind::Read) {
      // defer the prop when the head is exactly what this read returns
      auto newest = std::find_if(buf.rbegin(), buf.rend(), [&](const BufferEntry& be) {
        return be.var == a.var;
      });
      if (newest != buf.rend() && newest->tag == buf.front().tag) want_prop = false;
    }
    ja.props[j - 1] = want_prop && !buf.empty();

    bool returned = ja.proc_actions[j - 1].kind == Action::Kind::Ret;
    auto [next, events] = joint_apply(sc, g, ja);
    run.rounds.push_back(Round{std::move(ja), std::move(events)});
    run.states.push_back(std::move(next));
    if (returned) {
      result.return_round = run.horizon();
      break;
    }
  }
  return result;
}

}  // namespace tsokit
