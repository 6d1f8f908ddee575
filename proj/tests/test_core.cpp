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

#include "doctest.h"
#include "tsokit/rng.hpp"

using namespace tsokit;

namespace {

Scenario two_proc() {
  Scenario sc;
  sc.nprocs = 2;
  sc.vars = {"x", "y"};
  sc.vals = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  sc.initial = {0, 0};
  return sc;
}

constexpr VarId kX = 0;
constexpr VarId kY = 1;

Event event_of(Event::Kind k, AgentId agent, VarId var, Value v,
               std::optional<Tag> tag) {
  Event e;
  e.agent = agent;
  e.kind = k;
  e.var = var;
  e.value = v;
  e.tag = tag;
  return e;
}

}  // namespace

TEST_CASE("reads and writes are always enabled, fences need an empty buffer") {
  Scenario sc = two_proc();
  TsoState st = TsoState::initial(sc);
  CHECK(enabled(sc, st, AgentId::process(1), Action::write(kX, 1)));
  CHECK(enabled(sc, st, AgentId::process(1), Action::read(kX)));
  CHECK(enabled(sc, st, AgentId::process(1), Action::fence()));

  apply(sc, st, AgentId::process(1), Action::write(kX, 1), 1);
  CHECK_FALSE(enabled(sc, st, AgentId::process(1), Action::fence()));
  CHECK(enabled(sc, st, AgentId::process(2), Action::fence()));
}

TEST_CASE("rmw needs an empty buffer and the expected memory value") {
  Scenario sc = two_proc();
  TsoState st = TsoState::initial(sc);
  st.memory[kX] = MemCell{5, std::nullopt};
  CHECK(enabled(sc, st, AgentId::process(1), Action::rmw(kX, 5, 7)));
  CHECK_FALSE(enabled(sc, st, AgentId::process(1), Action::rmw(kX, 4, 7)));

  apply(sc, st, AgentId::process(1), Action::write(kY, 1), 1);
  CHECK_FALSE(enabled(sc, st, AgentId::process(1), Action::rmw(kX, 5, 7)));
}

TEST_CASE("prop needs a nonempty buffer") {
  Scenario sc = two_proc();
  TsoState st = TsoState::initial(sc);
  CHECK_FALSE(enabled(sc, st, AgentId::dispatcher_of(1), Action::prop()));
  apply(sc, st, AgentId::process(1), Action::write(kX, 1), 1);
  CHECK(enabled(sc, st, AgentId::dispatcher_of(1), Action::prop()));
  CHECK_FALSE(enabled(sc, st, AgentId::dispatcher_of(2), Action::prop()));
}

TEST_CASE("a write appends a tagged entry at the tail, memory unchanged") {
  Scenario sc = two_proc();
  TsoState st = TsoState::initial(sc);
  Event e = apply(sc, st, AgentId::process(1), Action::write(kX, 1), 1);
  CHECK(e.kind == Event::Kind::W);
  CHECK(e.tag == Tag{1, 1});
  REQUIRE(st.buffer(1).size() == 1);
  CHECK(st.buffer(1).front() == BufferEntry{kX, 1, Tag{1, 1}});
  CHECK(st.memory[kX] == MemCell{0, std::nullopt});

  apply(sc, st, AgentId::process(1), Action::write(kX, 2), 2);
  CHECK(st.buffer(1).back() == BufferEntry{kX, 2, Tag{1, 2}});
}

TEST_CASE("a read prefers the newest buffered entry for the variable") {
  Scenario sc = two_proc();
  TsoState st = TsoState::initial(sc);
  apply(sc, st, AgentId::process(1), Action::write(kX, 1), 1);
  apply(sc, st, AgentId::process(1), Action::write(kX, 2), 2);
  TsoState before = st;

  Event e = apply(sc, st, AgentId::process(1), Action::read(kX), 0);
  CHECK(e.kind == Event::Kind::RfB);
  CHECK(e.value == 2);
  CHECK(e.tag == Tag{1, 2});
  CHECK(st == before);

  // another process reads from memory, with the originating tag
  Event m = apply(sc, st, AgentId::process(2), Action::read(kX), 0);
  CHECK(m.kind == Event::Kind::RfM);
  CHECK(m.value == 0);
  CHECK_FALSE(m.tag.has_value());

  // a read of a different variable falls through to memory too
  Event y = apply(sc, st, AgentId::process(1), Action::read(kY), 0);
  CHECK(y.kind == Event::Kind::RfM);
}

TEST_CASE("prop pops the head entry and installs it in memory") {
  Scenario sc = two_proc();
  TsoState st = TsoState::initial(sc);
  apply(sc, st, AgentId::process(1), Action::write(kX, 1), 1);
  apply(sc, st, AgentId::process(1), Action::write(kY, 2), 2);

  Event e = apply(sc, st, AgentId::dispatcher_of(1), Action::prop(), 0);
  CHECK(e.kind == Event::Kind::Prop);
  CHECK(e.var == kX);
  CHECK(e.value == 1);
  CHECK(e.tag == Tag{1, 1});
  CHECK(st.memory[kX] == MemCell{1, Tag{1, 1}});
  REQUIRE(st.buffer(1).size() == 1);
  CHECK(st.buffer(1).front().var == kY);
}

TEST_CASE("rmw updates memory in place with a fresh tag") {
  Scenario sc = two_proc();
  TsoState st = TsoState::initial(sc);
  Event e = apply(sc, st, AgentId::process(1), Action::rmw(kX, 0, 7), 1);
  CHECK(e.kind == Event::Kind::Rmw);
  CHECK(st.memory[kX] == MemCell{7, Tag{1, 1}});
  CHECK(st.buffer(1).empty());
}

TEST_CASE("apply raises NotEnabled exactly when enabled is false") {
  Scenario sc = two_proc();
  Rng rng(7);
  TsoState st = TsoState::initial(sc);
  std::vector<Action> menu{Action::read(kX),      Action::write(kX, 1),
                           Action::write(kY, 2),  Action::fence(),
                           Action::rmw(kX, 0, 1), Action::rmw(kX, 1, 0)};
  int applied = 0;
  for (int step = 0; step < 500; ++step) {
    bool dispatcher = rng.chance(0.3);
    AgentId agent = dispatcher ? AgentId::dispatcher_of(rng.range(1, 2))
                               : AgentId::process(rng.range(1, 2));
    Action a = dispatcher ? Action::prop() : menu[rng.below(menu.size())];
    bool ok = enabled(sc, st, agent, a);
    TsoState copy = st;
    if (ok) {
      Event first = apply(sc, st, agent, a, step);
      Event second = apply(sc, copy, agent, a, step);  // determinism
      CHECK(first == second);
      CHECK(st == copy);
      ++applied;
    } else {
      CHECK_THROWS_AS(apply(sc, st, agent, a, step), NotEnabled);
      CHECK(st == copy);  // failed applications leave no trace
    }
  }
  CHECK(applied > 100);
}

TEST_CASE("apply never touches other buffers; only prop and rmw touch memory") {
  Scenario sc = two_proc();
  TsoState st = TsoState::initial(sc);
  apply(sc, st, AgentId::process(2), Action::write(kY, 3), 1);
  TsoState before = st;

  apply(sc, st, AgentId::process(1), Action::write(kX, 1), 1);
  CHECK(st.buffer(2) == before.buffer(2));
  CHECK(st.memory == before.memory);

  apply(sc, st, AgentId::process(1), Action::read(kX), 0);
  CHECK(st.buffer(2) == before.buffer(2));
  CHECK(st.memory == before.memory);
}

TEST_CASE("undeclared variables are rejected") {
  Scenario sc = two_proc();
  TsoState st = TsoState::initial(sc);
  CHECK_THROWS_AS(apply(sc, st, AgentId::process(1), Action::write(9, 1), 1),
                  UnknownVar);
  CHECK_THROWS_AS(apply(sc, st, AgentId::process(1), Action::read(-1), 0),
                  UnknownVar);
  CHECK(sc.var_id("x") == kX);
  CHECK(sc.var_id("nope") == -1);
}

TEST_CASE("memory access classification") {
  AgentId p1 = AgentId::process(1);
  CHECK(memory_access_var(event_of(Event::Kind::RfM, p1, kX, 3, std::nullopt)) ==
        kX);
  CHECK_FALSE(
      memory_access_var(event_of(Event::Kind::W, p1, kX, 3, Tag{1, 1})).has_value());
  CHECK_FALSE(
      memory_access_var(event_of(Event::Kind::RfB, p1, kX, 3, Tag{1, 1})).has_value());
  Event f;
  f.agent = p1;
  f.kind = Event::Kind::F;
  CHECK_FALSE(memory_access_var(f).has_value());
  Event rmw;
  rmw.agent = p1;
  rmw.kind = Event::Kind::Rmw;
  rmw.var = kY;
  CHECK(memory_access_var(rmw) == kY);
}

TEST_CASE("conflict classification") {
  auto prop_at = [](ProcId i, VarId x) {
    return event_of(Event::Kind::Prop, AgentId::dispatcher_of(i), x, 1, Tag{i, 1});
  };
  auto rfm_at = [](ProcId i, VarId x) {
    return event_of(Event::Kind::RfM, AgentId::process(i), x, 1, std::nullopt);
  };

  // prop at d_i against an RfM at i itself is exempt
  CHECK_FALSE(conflicts(prop_at(1, kX), rfm_at(1, kX)));
  CHECK_FALSE(conflicts(rfm_at(1, kX), prop_at(1, kX)));
  // but not across processes
  CHECK(conflicts(prop_at(1, kX), rfm_at(2, kX)));
  // two memory reads never conflict
  CHECK_FALSE(conflicts(rfm_at(1, kX), rfm_at(2, kX)));
  // two props to one variable conflict
  CHECK(conflicts(prop_at(1, kX), prop_at(2, kX)));
  // different variables never conflict
  CHECK_FALSE(conflicts(prop_at(1, kX), prop_at(2, kY)));
  // writes and buffer reads are not memory accesses
  CHECK_FALSE(conflicts(event_of(Event::Kind::W, AgentId::process(1), kX, 1, Tag{1, 1}),
                        prop_at(2, kX)));
}
