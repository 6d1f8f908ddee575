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

#include "tsokit/trace_io.hpp"

#include <fstream>
#include <sstream>

namespace tsokit {

namespace {

std::string tag_str(const std::optional<Tag>& t) {
  return t ? to_string(*t) : std::string("init");
}

std::string action_str(const Scenario& sc, const Action& a) {
  switch (a.kind) {
    case Action::Kind::Read:
      return "read " + sc.vars[a.var];
    case Action::Kind::Write:
      return "write " + sc.vars[a.var] + " " + std::to_string(a.value);
    case Action::Kind::Fence:
      return "fence";
    case Action::Kind::Rmw:
      return "rmw " + sc.vars[a.var] + " " + std::to_string(a.expected) + " " +
             std::to_string(a.replacement);
    case Action::Kind::Internal:
      return "internal " + a.label;
    case Action::Kind::Ret:
      return "return " + to_string(a.op) + " " + to_string(a.response);
    case Action::Kind::Prop:
      return "prop";
    default:
      throw std::logic_error("unprintable action");
  }
}

std::string event_str(const Scenario& sc, const Event& e) {
  switch (e.kind) {
    case Event::Kind::W:
      return "W " + sc.vars[e.var] + " " + std::to_string(e.value) + " " +
             tag_str(e.tag);
    case Event::Kind::RfB:
      return "RfB " + sc.vars[e.var] + " " + std::to_string(e.value) + " " +
             tag_str(e.tag);
    case Event::Kind::RfM:
      return "RfM " + sc.vars[e.var] + " " + std::to_string(e.value) + " " +
             tag_str(e.tag);
    case Event::Kind::F:
      return "F";
    case Event::Kind::Rmw:
      return "RMW " + sc.vars[e.var] + " " + std::to_string(e.expected) + " " +
             std::to_string(e.replacement);
    case Event::Kind::Prop:
      return "prop " + sc.vars[e.var] + " " + std::to_string(e.value) + " " +
             tag_str(e.tag);
    case Event::Kind::Internal:
      return "internal";
    default:
      throw std::logic_error("unprintable event");
  }
}

}  // namespace

std::string emit_trace(const Run& r) {
  const Scenario& sc = r.scenario;
  std::ostringstream os;
  os << "tsokit-trace 1\n";
  os << "protocol " << r.protocol_name << "\n";
  os << "procs " << sc.nprocs << "\n";
  os << "vars";
  for (const auto& v : sc.vars) os << " " << v;
  os << "\nvals";
  for (Value v : sc.vals) os << " " << v;
  os << "\ninit";
  for (Value v : sc.initial) os << " " << v;
  os << "\nseed " << r.seed << "\n";
  os << "horizon " << r.horizon() << "\n";

  for (int t = 0; t < r.horizon(); ++t) {
    os << "round " << t + 1 << "\n";
    const Round& round = r.rounds[t];
    for (ProcId i = 1; i <= sc.nprocs; ++i) {
      const Action& a = round.action.proc_actions[i - 1];
      if (a.is_null()) continue;
      auto ev = r.event_at(AgentId::process(i), t);
      os << "p" << i << " " << action_str(sc, a) << " = " << event_str(sc, *ev)
         << "\n";
    }
    for (ProcId i = 1; i <= sc.nprocs; ++i) {
      if (!round.action.props[i - 1]) continue;
      auto ev = r.event_at(AgentId::dispatcher_of(i), t);
      os << "d" << i << " prop = " << event_str(sc, *ev) << "\n";
    }
    for (const auto& [target, op] : round.action.invokes)
      os << "env invoke p" << target << " " << to_string(op) << "\n";
  }

  os << "state\n";
  const TsoState& fin = r.states.back().tso;
  for (size_t x = 0; x < sc.vars.size(); ++x)
    os << "mem " << sc.vars[x] << " " << fin.memory[x].value << " "
       << tag_str(fin.memory[x].tag) << "\n";
  for (ProcId i = 1; i <= sc.nprocs; ++i) {
    os << "buf p" << i;
    for (const BufferEntry& be : fin.buffer(i))
      os << " " << sc.vars[be.var] << ":" << be.value << ":" << to_string(be.tag);
    os << "\n";
  }
  os << "end\n";
  return os.str();
}

namespace {

struct Cursor {
  std::istringstream in;
  int line_no = 0;
  std::string line;

  explicit Cursor(const std::string& text) : in(text) {}

  bool next() {
    if (!std::getline(in, line)) return false;
    ++line_no;
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(line_no, msg);
  }
};

std::vector<std::string> tokens_of(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

int to_int(Cursor& c, const std::string& s) {
  try {
    return std::stoi(s);
  } catch (const std::exception&) {
    c.fail("expected a number, got '" + s + "'");
  }
}

std::optional<Tag> parse_tag(Cursor& c, const std::string& s) {
  if (s == "init") return std::nullopt;
  auto dot = s.find('.');
  if (s.size() < 4 || s[0] != 'p' || dot == std::string::npos)
    c.fail("bad tag '" + s + "'");
  return Tag{to_int(c, s.substr(1, dot - 1)), to_int(c, s.substr(dot + 1))};
}

VarId var_of(Cursor& c, const Scenario& sc, const std::string& name) {
  VarId x = sc.var_id(name);
  if (x < 0) c.fail("unknown variable '" + name + "'");
  return x;
}

ProcId proc_of(Cursor& c, const Scenario& sc, const std::string& s, char prefix) {
  if (s.empty() || s[0] != prefix) c.fail("expected agent, got '" + s + "'");
  int p = to_int(c, s.substr(1));
  if (p < 1 || p > sc.nprocs) c.fail("process out of range in '" + s + "'");
  return p;
}

/* Parses "<action> = <event>" after the agent token. Returns the action and
 * the recorded event for cross-checking. */
std::pair<Action, Event> parse_step(Cursor& c, const Scenario& sc,
                                    const std::vector<std::string>& t) {
  size_t eq = 0;
  while (eq < t.size() && t[eq] != "=") ++eq;
  if (eq == t.size()) c.fail("missing '=' between action and event");
  std::vector<std::string> act(t.begin() + 1, t.begin() + eq);
  std::vector<std::string> ev(t.begin() + eq + 1, t.end());
  if (act.empty() || ev.empty()) c.fail("empty action or event");

  Action a;
  if (act[0] == "read" && act.size() == 2) {
    a = Action::read(var_of(c, sc, act[1]));
  } else if (act[0] == "write" && act.size() == 3) {
    a = Action::write(var_of(c, sc, act[1]), to_int(c, act[2]));
  } else if (act[0] == "fence" && act.size() == 1) {
    a = Action::fence();
  } else if (act[0] == "rmw" && act.size() == 4) {
    a = Action::rmw(var_of(c, sc, act[1]), to_int(c, act[2]), to_int(c, act[3]));
  } else if (act[0] == "internal" && act.size() == 2) {
    a = Action::internal(act[1]);
  } else if (act[0] == "return" && act.size() == 3) {
    auto op = parse_op_name(act[1]);
    auto resp = parse_response(act[2]);
    if (!op || !resp) c.fail("bad return '" + act[1] + " " + act[2] + "'");
    a = Action::ret(*op, *resp);
  } else if (act[0] == "prop" && act.size() == 1) {
    a = Action::prop();
  } else {
    c.fail("unknown action '" + act[0] + "'");
  }

  Event e;
  if (ev[0] == "W" && ev.size() == 4) {
    e.kind = Event::Kind::W;
    e.var = var_of(c, sc, ev[1]);
    e.value = to_int(c, ev[2]);
    e.tag = parse_tag(c, ev[3]);
  } else if (ev[0] == "RfB" && ev.size() == 4) {
    e.kind = Event::Kind::RfB;
    e.var = var_of(c, sc, ev[1]);
    e.value = to_int(c, ev[2]);
    e.tag = parse_tag(c, ev[3]);
  } else if (ev[0] == "RfM" && ev.size() == 4) {
    e.kind = Event::Kind::RfM;
    e.var = var_of(c, sc, ev[1]);
    e.value = to_int(c, ev[2]);
    e.tag = parse_tag(c, ev[3]);
  } else if (ev[0] == "F" && ev.size() == 1) {
    e.kind = Event::Kind::F;
  } else if (ev[0] == "RMW" && ev.size() == 4) {
    e.kind = Event::Kind::Rmw;
    e.var = var_of(c, sc, ev[1]);
    e.expected = to_int(c, ev[2]);
    e.replacement = to_int(c, ev[3]);
  } else if (ev[0] == "prop" && ev.size() == 4) {
    e.kind = Event::Kind::Prop;
    e.var = var_of(c, sc, ev[1]);
    e.value = to_int(c, ev[2]);
    e.tag = parse_tag(c, ev[3]);
  } else if (ev[0] == "internal" && ev.size() == 1) {
    e.kind = Event::Kind::Internal;
  } else {
    c.fail("unknown event '" + ev[0] + "'");
  }
  return {a, e};
}

}  // namespace

Run parse_trace(const std::string& text) {
  Cursor c(text);
  auto expect_line = [&](const std::string& what) {
    if (!c.next()) c.fail("unexpected end of trace, expected " + what);
    return tokens_of(c.line);
  };

  auto header = expect_line("header");
  if (header.size() != 2 || header[0] != "tsokit-trace" || header[1] != "1")
    c.fail("not a tsokit-trace v1 file");

  Run run;
  Scenario& sc = run.scenario;
  auto t = expect_line("protocol");
  if (t.size() != 2 || t[0] != "protocol") c.fail("expected 'protocol <name>'");
  run.protocol_name = t[1];

  t = expect_line("procs");
  if (t.size() != 2 || t[0] != "procs") c.fail("expected 'procs <n>'");
  sc.nprocs = to_int(c, t[1]);
  if (sc.nprocs < 1) c.fail("need at least one process");

  t = expect_line("vars");
  if (t.size() < 2 || t[0] != "vars") c.fail("expected 'vars <name>...'");
  sc.vars.assign(t.begin() + 1, t.end());

  t = expect_line("vals");
  if (t.size() < 2 || t[0] != "vals") c.fail("expected 'vals <v>...'");
  for (size_t k = 1; k < t.size(); ++k) sc.vals.push_back(to_int(c, t[k]));

  t = expect_line("init");
  if (t.size() != sc.vars.size() + 1 || t[0] != "init")
    c.fail("expected one initial value per variable");
  for (size_t k = 1; k < t.size(); ++k) sc.initial.push_back(to_int(c, t[k]));

  t = expect_line("seed");
  if (t.size() != 2 || t[0] != "seed") c.fail("expected 'seed <u64>'");
  try {
    run.seed = std::stoull(t[1]);
  } catch (const std::exception&) {
    c.fail("bad seed '" + t[1] + "'");
  }

  t = expect_line("horizon");
  if (t.size() != 2 || t[0] != "horizon") c.fail("expected 'horizon <T>'");
  int horizon = to_int(c, t[1]);
  if (horizon < 0) c.fail("negative horizon");

  run.states.push_back(GlobalState::initial(sc));

  int current = 0;
  JointAction pending = JointAction::empty(sc.nprocs);
  std::vector<Event> recorded;
  bool in_round = false;

  auto flush_round = [&]() {
    if (!in_round) return;
    int at_line = c.line_no;
    for (const auto& inv : pending.invokes) {
      Event e;
      e.agent = AgentId::process(inv.first);
      e.kind = Event::Kind::InvokeDelivered;
      recorded.push_back(e);
    }
    try {
      auto [next, events] = joint_apply(sc, run.states.back(), pending);
      if (events != recorded)
        throw ParseError(at_line, "recorded events do not match the replay of round " +
                                      std::to_string(current));
      run.rounds.push_back(Round{pending, std::move(events)});
      run.states.push_back(std::move(next));
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(at_line,
                       "round " + std::to_string(current) + ": " + e.what());
    }
    pending = JointAction::empty(sc.nprocs);
    recorded.clear();
    in_round = false;
  };

  while (true) {
    t = expect_line("round body or state");
    if (t.empty()) c.fail("blank line inside trace");
    if (t[0] == "state") break;
    if (t[0] == "round") {
      flush_round();
      if (t.size() != 2 || to_int(c, t[1]) != current + 1)
        c.fail("rounds must be consecutive starting at 1");
      ++current;
      in_round = true;
      continue;
    }
    if (!in_round) c.fail("step outside a round");
    if (t[0] == "env") {
      if (t.size() != 4 || t[1] != "invoke") c.fail("expected 'env invoke p<i> <op>'");
      ProcId target = proc_of(c, sc, t[2], 'p');
      auto op = parse_op_name(t[3]);
      if (!op) c.fail("bad operation '" + t[3] + "'");
      pending.invokes.emplace_back(target, *op);
      continue;
    }
    if (t[0].size() >= 2 && t[0][0] == 'p') {
      ProcId i = proc_of(c, sc, t[0], 'p');
      if (!pending.proc_actions[i - 1].is_null())
        c.fail("two actions for p" + std::to_string(i) + " in one round");
      auto [a, e] = parse_step(c, sc, t);
      if (a.kind == Action::Kind::Prop) c.fail("prop in a process slot");
      pending.proc_actions[i - 1] = a;
      Event tagged = e;
      tagged.agent = AgentId::process(i);
      recorded.push_back(tagged);
      continue;
    }
    if (t[0].size() >= 2 && t[0][0] == 'd') {
      ProcId i = proc_of(c, sc, t[0], 'd');
      if (pending.props[i - 1])
        c.fail("two props for d" + std::to_string(i) + " in one round");
      auto [a, e] = parse_step(c, sc, t);
      if (a.kind != Action::Kind::Prop) c.fail("dispatcher can only prop");
      pending.props[i - 1] = true;
      Event tagged = e;
      tagged.agent = AgentId::dispatcher_of(i);
      recorded.push_back(tagged);
      continue;
    }
    c.fail("unrecognized line '" + c.line + "'");
  }
  flush_round();

  if (current != horizon)
    c.fail("trace has " + std::to_string(current) + " rounds, header says " +
           std::to_string(horizon));

  // Footer cross-check.
  const TsoState& fin = run.states.back().tso;
  for (size_t x = 0; x < sc.vars.size(); ++x) {
    t = expect_line("mem");
    if (t.size() != 4 || t[0] != "mem" || t[1] != sc.vars[x])
      c.fail("expected 'mem " + sc.vars[x] + " <value> <tag>'");
    if (to_int(c, t[2]) != fin.memory[x].value ||
        parse_tag(c, t[3]) != fin.memory[x].tag)
      c.fail("final memory of " + sc.vars[x] + " does not match the replay");
  }
  for (ProcId i = 1; i <= sc.nprocs; ++i) {
    t = expect_line("buf");
    if (t.size() < 2 || t[0] != "buf" || proc_of(c, sc, t[1], 'p') != i)
      c.fail("expected 'buf p" + std::to_string(i) + "'");
    const auto& buf = fin.buffer(i);
    if (t.size() - 2 != buf.size())
      c.fail("final buffer of p" + std::to_string(i) + " does not match the replay");
    for (size_t k = 2; k < t.size(); ++k) {
      std::string entry = t[k];
      auto c1 = entry.find(':');
      auto c2 = entry.rfind(':');
      if (c1 == std::string::npos || c2 == c1) c.fail("bad buffer entry");
      const BufferEntry& be = buf[k - 2];
      if (var_of(c, sc, entry.substr(0, c1)) != be.var ||
          to_int(c, entry.substr(c1 + 1, c2 - c1 - 1)) != be.value ||
          parse_tag(c, entry.substr(c2 + 1)) != std::optional<Tag>(be.tag))
        c.fail("buffer entry does not match the replay");
    }
  }
  t = expect_line("end");
  if (t.size() != 1 || t[0] != "end") c.fail("expected 'end'");
  return run;
}

void write_trace_file(const Run& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << emit_trace(r);
}

Run read_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_trace(ss.str());
}

}  // namespace tsokit
