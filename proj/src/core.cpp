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

#include "tsokit/core.hpp"

#include <algorithm>
#include <sstream>

namespace tsokit {

std::string to_string(const AgentId& a) {
  return (a.dispatcher ? "d" : "p") + std::to_string(a.proc);
}

std::string to_string(const Tag& t) {
  return "p" + std::to_string(t.writer) + "." + std::to_string(t.seq);
}

VarId Scenario::var_id(const std::string& name) const {
  for (size_t i = 0; i < vars.size(); ++i)
    if (vars[i] == name) return static_cast<VarId>(i);
  return -1;
}

std::string to_string(const OpName& op) {
  switch (op.kind) {
    case OpName::Kind::Read:
      return "read";
    case OpName::Kind::Write:
      return "write(" + std::to_string(op.arg) + ")";
    case OpName::Kind::Update:
      return "update(" + std::to_string(op.arg) + ")";
    case OpName::Kind::Scan:
      return "scan";
  }
  return "?";
}

std::optional<OpName> parse_op_name(const std::string& s) {
  if (s == "read") return OpName{OpName::Kind::Read, 0};
  if (s == "scan") return OpName{OpName::Kind::Scan, 0};
  for (auto kind : {OpName::Kind::Write, OpName::Kind::Update}) {
    std::string prefix = kind == OpName::Kind::Write ? "write(" : "update(";
    if (s.rfind(prefix, 0) == 0 && s.back() == ')') {
      try {
        Value v = std::stoi(s.substr(prefix.size(), s.size() - prefix.size() - 1));
        return OpName{kind, v};
      } catch (const std::exception&) {
        return std::nullopt;
      }
    }
  }
  return std::nullopt;
}

std::string to_string(const Response& r) {
  switch (r.kind) {
    case Response::Kind::Ack:
      return "ack";
    case Response::Kind::Val:
      return std::to_string(r.value);
    case Response::Kind::Vec: {
      std::string out = "[";
      for (size_t i = 0; i < r.vec.size(); ++i) {
        if (i) out += ",";
        out += r.vec[i] == kBottom ? "_" : std::to_string(r.vec[i]);
      }
      return out + "]";
    }
  }
  return "?";
}

std::optional<Response> parse_response(const std::string& s) {
  if (s == "ack") return Response::ack();
  if (!s.empty() && s.front() == '[' && s.back() == ']') {
    std::vector<Value> vec;
    std::string body = s.substr(1, s.size() - 2);
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item == "_") {
        vec.push_back(kBottom);
      } else {
        try {
          vec.push_back(std::stoi(item));
        } catch (const std::exception&) {
          return std::nullopt;
        }
      }
    }
    return Response::of_vec(std::move(vec));
  }
  try {
    return Response::of(std::stoi(s));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string to_string(const Event& e) {
  auto tag_str = [&] { return e.tag ? to_string(*e.tag) : std::string("init"); };
  switch (e.kind) {
    case Event::Kind::Null:
      return "null";
    case Event::Kind::W:
      return "W " + std::to_string(e.var) + " " + std::to_string(e.value) + " " +
             tag_str();
    case Event::Kind::RfB:
      return "RfB " + std::to_string(e.var) + " " + std::to_string(e.value) +
             " " + tag_str();
    case Event::Kind::RfM:
      return "RfM " + std::to_string(e.var) + " " + std::to_string(e.value) +
             " " + tag_str();
    case Event::Kind::F:
      return "F";
    case Event::Kind::Rmw:
      return "RMW " + std::to_string(e.var) + " " + std::to_string(e.expected) +
             " " + std::to_string(e.replacement);
    case Event::Kind::Prop:
      return "prop " + std::to_string(e.var) + " " + std::to_string(e.value) +
             " " + tag_str();
    case Event::Kind::Internal:
      return "internal";
    case Event::Kind::InvokeDelivered:
      return "invoke";
  }
  return "?";
}

TsoState TsoState::initial(const Scenario& sc) {
  TsoState st;
  st.memory.resize(sc.vars.size());
  for (size_t i = 0; i < sc.vars.size(); ++i)
    st.memory[i] = MemCell{sc.initial[i], std::nullopt};
  st.buffers.resize(sc.nprocs);
  return st;
}

bool TsoState::all_buffers_empty() const {
  return std::all_of(buffers.begin(), buffers.end(),
                     [](const auto& b) { return b.empty(); });
}

namespace {

void check_var(const Scenario& sc, VarId x) {
  if (!sc.var_ok(x)) throw UnknownVar("undeclared variable id " + std::to_string(x));
}

void check_shape(const AgentId& agent, const Action& a) {
  bool ok;
  switch (a.kind) {
    case Action::Kind::Prop:
      ok = agent.dispatcher;
      break;
    case Action::Kind::Invoke:
      ok = false;  // environment action, never applied through an agent
      break;
    case Action::Kind::Null:
      ok = true;
      break;
    default:
      ok = !agent.dispatcher;
      break;
  }
  if (!ok)
    throw std::logic_error("action not available to agent " + to_string(agent));
}

}  // namespace

bool enabled(const Scenario& sc, const TsoState& state, const AgentId& agent,
             const Action& action) {
  check_shape(agent, action);
  switch (action.kind) {
    case Action::Kind::Null:
    case Action::Kind::Internal:
    case Action::Kind::Ret:
      return true;
    case Action::Kind::Read:
    case Action::Kind::Write:
      check_var(sc, action.var);
      return true;
    case Action::Kind::Fence:
      return state.buffer(agent.proc).empty();
    case Action::Kind::Rmw:
      check_var(sc, action.var);
      return state.buffer(agent.proc).empty() &&
             state.memory[action.var].value == action.expected;
    case Action::Kind::Prop:
      return !state.buffer(agent.proc).empty();
    case Action::Kind::Invoke:
      return true;
  }
  return false;
}

Event apply(const Scenario& sc, TsoState& state, const AgentId& agent,
            const Action& action, int next_seq) {
  if (!enabled(sc, state, agent, action))
    throw NotEnabled("disabled action by " + to_string(agent));

  Event e;
  e.agent = agent;
  switch (action.kind) {
    case Action::Kind::Write: {
      Tag tag{agent.proc, next_seq};
      state.buffer(agent.proc).push_back(BufferEntry{action.var, action.value, tag});
      e.kind = Event::Kind::W;
      e.var = action.var;
      e.value = action.value;
      e.tag = tag;
      break;
    }
    case Action::Kind::Read: {
      const auto& buf = state.buffer(agent.proc);
      auto it = std::find_if(buf.rbegin(), buf.rend(), [&](const BufferEntry& be) {
        return be.var == action.var;
      });
      if (it != buf.rend()) {
        e.kind = Event::Kind::RfB;
        e.var = action.var;
        e.value = it->value;
        e.tag = it->tag;
      } else {
        const MemCell& cell = state.memory[action.var];
        e.kind = Event::Kind::RfM;
        e.var = action.var;
        e.value = cell.value;
        e.tag = cell.tag;
      }
      break;
    }
    case Action::Kind::Fence:
      e.kind = Event::Kind::F;
      break;
    case Action::Kind::Rmw: {
      Tag tag{agent.proc, next_seq};
      state.memory[action.var] = MemCell{action.replacement, tag};
      e.kind = Event::Kind::Rmw;
      e.var = action.var;
      e.expected = action.expected;
      e.replacement = action.replacement;
      break;
    }
    case Action::Kind::Prop: {
      auto& buf = state.buffer(agent.proc);
      BufferEntry head = buf.front();
      buf.pop_front();
      state.memory[head.var] = MemCell{head.value, head.tag};
      e.kind = Event::Kind::Prop;
      e.var = head.var;
      e.value = head.value;
      e.tag = head.tag;
      break;
    }
    case Action::Kind::Internal:
    case Action::Kind::Ret:
      e.kind = Event::Kind::Internal;
      break;
    case Action::Kind::Null:
      e.kind = Event::Kind::Null;
      break;
    case Action::Kind::Invoke:
      throw std::logic_error("invoke is applied by the environment");
  }
  return e;
}

std::optional<VarId> memory_access_var(const Event& e) {
  switch (e.kind) {
    case Event::Kind::RfM:
    case Event::Kind::Rmw:
    case Event::Kind::Prop:
      return e.var;
    default:
      return std::nullopt;
  }
}

bool conflicts(const Event& a, const Event& b) {
  auto xa = memory_access_var(a);
  auto xb = memory_access_var(b);
  if (!xa || !xb || *xa != *xb) return false;
  if (a.kind == Event::Kind::RfM && b.kind == Event::Kind::RfM) return false;
  auto exempt = [](const Event& prop, const Event& rfm) {
    return prop.kind == Event::Kind::Prop && rfm.kind == Event::Kind::RfM &&
           prop.agent.dispatcher && !rfm.agent.dispatcher &&
           prop.agent.proc == rfm.agent.proc;
  };
  if (exempt(a, b) || exempt(b, a)) return false;
  return true;
}

}  // namespace tsokit
