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

#include "tsokit/causality.hpp"

#include "doctest.h"
#include "enumerate.hpp"
#include "oracles.hpp"
#include "tsokit/fixtures.hpp"

using namespace tsokit;

namespace {

constexpr VarId kX = 0;
constexpr VarId kY = 1;

Run run_of(const Fixture& f, std::vector<ScheduledRound> rounds) {
  Schedule s;
  s.rounds = std::move(rounds);
  return execute(f.scenario, *f.protocol, s, static_cast<int>(s.rounds.size()));
}

ScheduledRound step(int n, std::vector<std::pair<ProcId, Action>> acts,
                    std::vector<ProcId> props = {}) {
  ScheduledRound r;
  r.proc_actions.assign(n, Action::null());
  r.props.assign(n, false);
  for (auto& [i, a] : acts) r.proc_actions[i - 1] = a;
  for (ProcId i : props) r.props[i - 1] = true;
  return r;
}

bool has_edge(const ObGraph& g, Node from, Node to, EdgeKind kind) {
  for (const ObEdge& e : g.base_edges())
    if (e.from == from && e.to == to && e.kind == kind) return true;
  return false;
}

}  // namespace

TEST_CASE("node addresses parse and print") {
  CHECK(to_string(Node{AgentId::process(3), 12}) == "p3@12");
  CHECK(parse_node("d2@5") == Node{AgentId::dispatcher_of(2), 5});
  CHECK_FALSE(parse_node("q1@2").has_value());
  CHECK_FALSE(parse_node("p1").has_value());
}

TEST_CASE("a write flows to the prop that drains it") {
  Fixture f = make_fixture("free", 2);
  Run r = run_of(f, {step(2, {{1, Action::write(kX, 1)}}),
                     step(2, {}, {1}),
                     step(2, {{2, Action::read(kX)}})});
  ObGraph g(r);
  Node w{AgentId::process(1), 0}, p{AgentId::dispatcher_of(1), 1},
      rd{AgentId::process(2), 2};
  CHECK(has_edge(g, w, p, EdgeKind::BufferFlow));
  CHECK(has_edge(g, p, rd, EdgeKind::SameVarAccess));

  // witness chain: buffer flow, then the same-variable access
  auto chain = g.query(w, rd);
  REQUIRE(chain.has_value());
  REQUIRE(chain->size() == 2);
  CHECK((*chain)[0].kind == EdgeKind::BufferFlow);
  CHECK((*chain)[1].kind == EdgeKind::SameVarAccess);
}

TEST_CASE("two memory reads of one variable are unrelated") {
  Fixture f = make_fixture("free", 2);
  Run r = run_of(f, {step(2, {{1, Action::read(kX)}}),
                     step(2, {{2, Action::read(kX)}})});
  ObGraph g(r);
  CHECK_FALSE(g.reaches(Node{AgentId::process(1), 0}, Node{AgentId::process(2), 1}));
}

TEST_CASE("a process's own prop does not reach its later memory read") {
  Fixture f = make_fixture("free", 2);
  Run r = run_of(f, {step(2, {{1, Action::write(kX, 1)}}),
                     step(2, {}, {1}),
                     step(2, {{1, Action::read(kX)}}),
                     step(2, {{1, Action::fence()}})});
  ObGraph g(r);
  Node prop{AgentId::dispatcher_of(1), 1};
  Node rfm{AgentId::process(1), 2};
  Node fence{AgentId::process(1), 3};
  REQUIRE(r.event_at(AgentId::process(1), 2)->kind == Event::Kind::RfM);
  CHECK_FALSE(has_edge(g, prop, rfm, EdgeKind::SameVarAccess));
  // the fence is the signal from the buffer
  CHECK(has_edge(g, prop, fence, EdgeKind::PropToSync));
  // and the read does learn about props of other processes
  Run r2 = run_of(f, {step(2, {{2, Action::write(kX, 1)}}),
                      step(2, {}, {2}),
                      step(2, {{1, Action::read(kX)}})});
  ObGraph g2(r2);
  CHECK(has_edge(g2, Node{AgentId::dispatcher_of(2), 1}, Node{AgentId::process(1), 2},
                 EdgeKind::SameVarAccess));
}

TEST_CASE("the reverse direction read-then-prop does create an edge") {
  Fixture f = make_fixture("free", 2);
  Run r = run_of(f, {step(2, {{1, Action::read(kX)}}),
                     step(2, {{1, Action::write(kX, 1)}}),
                     step(2, {}, {1})});
  ObGraph g(r);
  CHECK(has_edge(g, Node{AgentId::process(1), 0}, Node{AgentId::dispatcher_of(1), 2},
                 EdgeKind::SameVarAccess));
}

TEST_CASE("occurs-before is irreflexive and respects time") {
  Fixture f = make_fixture("free", 2);
  Run r = generate_run(f, GenOptions{.horizon = 10, .seed = 5});
  ObGraph g(r);
  for (int a = 0; a < g.node_count(); ++a) {
    Node na = g.node_at(a);
    CHECK_FALSE(g.reaches(na, na));
    CHECK_FALSE(g.query(na, na).has_value());
    for (int b = 0; b < g.node_count(); ++b)
      if (g.reaches(na, g.node_at(b))) CHECK(na.time < g.node_at(b).time);
  }
}

TEST_CASE("agents that never interact stay unrelated") {
  Fixture f = make_fixture("free", 2);
  Run r = run_of(f, {step(2, {{1, Action::write(kX, 1)}, {2, Action::write(kY, 1)}}),
                     step(2, {{1, Action::read(kX)}, {2, Action::read(kY)}})});
  ObGraph g(r);
  CHECK_FALSE(g.reaches(Node{AgentId::process(1), 0}, Node{AgentId::process(2), 1}));
  CHECK_FALSE(g.reaches(Node{AgentId::process(2), 0}, Node{AgentId::process(1), 1}));
}

TEST_CASE("past and boundaries") {
  Fixture f = make_fixture("free", 2);
  Run r = generate_run(f, GenOptions{.horizon = 8, .seed = 9});
  ObGraph g(r);

  SUBCASE("nothing precedes time zero") {
    auto past0 = g.past({Node{AgentId::process(1), 0}});
    CHECK(past0.empty());
  }

  SUBCASE("an idle agent contributes locality only") {
    Run idle = run_of(f, {step(2, {}), step(2, {}), step(2, {}), step(2, {}),
                          step(2, {})});
    ObGraph gi(idle);
    auto p = gi.past({Node{AgentId::process(1), 5}});
    REQUIRE(p.size() == 5);
    for (const Node& n : p) CHECK(n.agent == AgentId::process(1));
  }

  SUBCASE("the empty set has boundary zero everywhere") {
    for (int a = 0; a < 4; ++a)
      CHECK(g.past_boundary({}, r.scenario.agent_at(a)) == 0);
  }

  SUBCASE("locality alone puts the whole prefix in the past") {
    AgentId b = AgentId::process(2);
    CHECK(g.past_boundary({Node{b, 3}}, b) == 4);
  }

  SUBCASE("the past is backward closed") {
    std::vector<Node> S{Node{AgentId::process(1), 6}, Node{AgentId::dispatcher_of(2), 5}};
    auto plus = g.past_plus_mask(S);
    for (int v = 0; v < g.node_count(); ++v)
      for (int u = 0; u < g.node_count(); ++u)
        if (plus[u] && g.reaches(g.node_at(v), g.node_at(u))) CHECK(plus[v]);
  }
}

TEST_CASE("the reachability index agrees with a plain closure") {
  for (uint64_t seed = 1; seed <= 30; ++seed) {
    Fixture f = make_fixture("free", seed % 2 ? 2 : 3);
    Run r = generate_run(f, GenOptions{.horizon = 8, .seed = seed});
    ObGraph g(r);
    auto m = oracle::closure_matrix(g);
    for (int a = 0; a < g.node_count(); ++a)
      for (int b = 0; b < g.node_count(); ++b) {
        if (m[a][b] != g.reaches(g.node_at(a), g.node_at(b))) {
          CAPTURE(seed);
          CAPTURE(a);
          CAPTURE(b);
          REQUIRE(m[a][b] == g.reaches(g.node_at(a), g.node_at(b)));
        }
      }
  }
}

TEST_CASE("witness chains are real chains") {
  Fixture f = make_fixture("free", 2);
  Run r = generate_run(f, GenOptions{.horizon = 9, .seed = 21});
  ObGraph g(r);
  int found = 0;
  for (int a = 0; a < g.node_count(); ++a)
    for (int b = 0; b < g.node_count(); ++b) {
      auto chain = g.query(g.node_at(a), g.node_at(b));
      if (!chain) continue;
      ++found;
      REQUIRE_FALSE(chain->empty());
      CHECK((*chain)[0].from == g.node_at(a));
      CHECK(chain->back().to == g.node_at(b));
      for (size_t k = 0; k + 1 < chain->size(); ++k)
        CHECK((*chain)[k].to == (*chain)[k + 1].from);
      for (const ObEdge& e : *chain) {
        CHECK(e.from.time < e.to.time);
        bool is_base = false;
        for (const ObEdge& base : g.base_edges())
          if (base == e) is_base = true;
        CHECK(is_base);
      }
    }
  CHECK(found > 50);
}

TEST_CASE("base edges from a dispatcher into its process end in a fence or rmw") {
  for (uint64_t seed = 31; seed <= 60; ++seed) {
    Fixture f = make_fixture("free", 2);
    Run r = generate_run(f, GenOptions{.horizon = 8, .seed = seed});
    ObGraph g(r);
    for (const ObEdge& e : g.base_edges()) {
      if (!e.from.agent.dispatcher || e.to.agent.dispatcher) continue;
      if (e.from.agent.proc != e.to.agent.proc) continue;
      auto ev = g.event_of(e.to);
      REQUIRE(ev.has_value());
      bool sync = ev->kind == Event::Kind::F || ev->kind == Event::Kind::Rmw;
      CHECK(sync);
    }
  }
}

TEST_CASE("conflicting actions at different times are ordered") {
  for (uint64_t seed = 61; seed <= 90; ++seed) {
    Fixture f = make_fixture("free", 2);
    Run r = generate_run(f, GenOptions{.horizon = 8, .seed = seed});
    ObGraph g(r);
    for (int a = 0; a < g.node_count(); ++a)
      for (int b = 0; b < g.node_count(); ++b) {
        Node na = g.node_at(a), nb = g.node_at(b);
        if (na.time >= nb.time) continue;
        const auto& ea = g.event_of(na);
        const auto& eb = g.event_of(nb);
        if (!ea || !eb || !conflicts(*ea, *eb)) continue;
        CHECK(g.reaches(na, nb));
      }
  }
}

TEST_CASE("feedback loops") {
  Fixture f = make_fixture("free", 2);

  SUBCASE("a solo window has none") {
    Run r = run_of(f, {step(2, {{1, Action::write(kX, 1)}}), step(2, {}, {1}),
                       step(2, {{1, Action::read(kX)}})});
    ObGraph g(r);
    CHECK_FALSE(feedback_loop(g, Node{AgentId::process(1), 0},
                              Node{AgentId::process(1), 2})
                    .has_value());
  }

  SUBCASE("reading back a value routed through another process closes one") {
    // p1 writes x; p2 reads x from memory, writes y; p1 reads y from memory.
    Run r = run_of(f, {step(2, {{1, Action::write(kX, 1)}}),
                       step(2, {}, {1}),
                       step(2, {{2, Action::read(kX)}}),
                       step(2, {{2, Action::write(kY, 2)}}),
                       step(2, {}, {2}),
                       step(2, {{1, Action::read(kY)}})});
    ObGraph g(r);
    auto loop = feedback_loop(g, Node{AgentId::process(1), 0},
                              Node{AgentId::process(1), 6});
    REQUIRE(loop.has_value());
    CHECK(loop->agent.proc == 2);
  }
}

TEST_CASE("two-process chain classification") {
  Fixture f = make_fixture("free", 2);

  SUBCASE("write, prop, then a memory read on the other side") {
    Run r = run_of(f, {step(2, {{1, Action::write(kX, 1)}}), step(2, {}, {1}),
                       step(2, {{2, Action::read(kX)}})});
    ObGraph g(r);
    auto cases = ij_only_classify(g, Node{AgentId::process(1), 0},
                                  Node{AgentId::process(2), 2}, 1, 2);
    REQUIRE(cases.size() == 1);
    CHECK(cases[0].case_no == 2);
    CHECK(cases[0].t == 0);
    CHECK(cases[0].t_mid == 1);
    CHECK(cases[0].t_end == 2);
  }

  SUBCASE("an rmw answered by a memory read") {
    Run r = run_of(f, {step(2, {{1, Action::rmw(kX, 0, 1)}}),
                       step(2, {{2, Action::read(kX)}})});
    ObGraph g(r);
    auto cases = ij_only_classify(g, Node{AgentId::process(1), 0},
                                  Node{AgentId::process(2), 1}, 1, 2);
    REQUIRE(cases.size() == 1);
    CHECK(cases[0].case_no == 1);
  }

  SUBCASE("a memory read answered by an rmw") {
    Run r = run_of(f, {step(2, {{1, Action::read(kX)}}),
                       step(2, {{2, Action::rmw(kX, 0, 1)}})});
    ObGraph g(r);
    auto cases = ij_only_classify(g, Node{AgentId::process(1), 0},
                                  Node{AgentId::process(2), 1}, 1, 2);
    REQUIRE(cases.size() == 1);
    CHECK(cases[0].case_no == 3);
    CHECK(cases[0].t == 0);
    CHECK(cases[0].t_end == 1);
  }

  SUBCASE("a chain routed through a third process does not count") {
    Fixture f3 = make_fixture("free", 3);
    Run r = run_of(f3, {step(3, {{1, Action::rmw(kX, 0, 1)}}),
                        step(3, {{3, Action::read(kX)}}),
                        step(3, {{3, Action::rmw(kY, 0, 2)}}),
                        step(3, {{2, Action::read(kY)}})});
    ObGraph g(r);
    REQUIRE(g.reaches(Node{AgentId::process(1), 0}, Node{AgentId::process(2), 3}));
    CHECK_THROWS_AS(ij_only_classify(g, Node{AgentId::process(1), 0},
                                     Node{AgentId::process(2), 3}, 1, 2),
                    NoIjOnlyChain);
  }
}

TEST_CASE("every two-process chain exhibits a crossing pattern") {
  Scenario sc;
  sc.nprocs = 2;
  sc.vars = {"x"};
  sc.vals = {0, 1};
  sc.initial = {0};
  std::vector<std::vector<Action>> scripts{
      {Action::write(kX, 0), Action::read(kX), Action::fence()},
      {Action::read(kX), Action::rmw(kX, 0, 1)}};

  int runs = 0, chains = 0;
  testing::enumerate_runs(sc, scripts, 4, [&](const Run& r) {
    ++runs;
    if (r.horizon() < 2) return;
    ObGraph g(r);
    for (int t1 = 0; t1 < r.horizon(); ++t1)
      for (int t2 = t1 + 1; t2 <= r.horizon(); ++t2)
        for (int i = 1; i <= 2; ++i) {
          int j = 3 - i;
          Node a{AgentId::process(i), t1}, b{AgentId::process(j), t2};
          // with two processes every chain is {i,j}-only
          if (!g.reaches(a, b)) continue;
          ++chains;
          auto cases = ij_only_classify(g, a, b, i, j);
          CHECK_FALSE(cases.empty());
        }
  });
  CHECK(runs > 100);
  CHECK(chains > 100);
}
