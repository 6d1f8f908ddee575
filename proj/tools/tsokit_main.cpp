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

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "tsokit/linearizability.hpp"
#include "tsokit/trace_io.hpp"

using namespace tsokit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolations = 1;
constexpr int kExitUsage = 2;

uint64_t default_seed() {
  const char* env = std::getenv("TSOKIT_SEED");
  return env ? std::strtoull(env, nullptr, 10) : 1;
}

std::vector<Node> parse_node_list(const std::string& list) {
  std::vector<Node> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto n = parse_node(item);
    if (!n) throw CLI::ValidationError("bad node '" + item + "', use p1@3 or d2@5");
    out.push_back(*n);
  }
  return out;
}

void print_chain(const std::vector<ObEdge>& chain) {
  for (const ObEdge& e : chain)
    std::cout << to_string(e.from) << " -[" << to_string(e.kind) << "]-> "
              << to_string(e.to) << "\n";
}

Operation find_op(const History& h, int id) {
  for (const Operation& op : h.ops)
    if (op.id == id) return op;
  throw CLI::ValidationError("no operation with id " + std::to_string(id));
}

int cmd_simulate(const std::string& fixture_name, int nprocs, const GenOptions& opt,
                 const std::string& out_path) {
  Fixture f = make_fixture(fixture_name, nprocs);
  Run run = generate_run(f, opt);
  ValidationReport rep = validate_run(run, *f.protocol);
  if (!rep.ok()) {
    std::cerr << "generated run failed validation:\n" << rep.summary();
    return kExitViolations;
  }
  if (out_path.empty())
    std::cout << emit_trace(run);
  else
    write_trace_file(run, out_path);
  return kExitOk;
}

int cmd_ob(const Run& run, const std::string& from_s, const std::string& to_s) {
  auto from = parse_node(from_s), to = parse_node(to_s);
  if (!from || !to) throw CLI::ValidationError("bad node address");
  ObGraph g(run);
  if (!g.in_range(*from) || !g.in_range(*to))
    throw CLI::ValidationError("node outside the trace horizon");
  auto chain = g.query(*from, *to);
  if (!chain) {
    std::cout << "none\n";
    return kExitOk;
  }
  print_chain(*chain);
  return kExitOk;
}

int cmd_past(const Run& run, const std::string& nodes_s) {
  std::vector<Node> S = parse_node_list(nodes_s);
  ObGraph g(run);
  for (const Node& n : S)
    if (!g.in_range(n))
      throw CLI::ValidationError("node " + to_string(n) + " outside the horizon");
  std::cout << "past:";
  for (const Node& n : g.past(S)) std::cout << " " << to_string(n);
  std::cout << "\npast+:";
  for (const Node& n : g.past_plus(S)) std::cout << " " << to_string(n);
  std::cout << "\n";
  for (int a = 0; a < run.scenario.agent_count(); ++a) {
    AgentId agent = run.scenario.agent_at(a);
    std::cout << "boundary " << to_string(agent) << " "
              << g.past_boundary(S, agent) << "\n";
  }
  return kExitOk;
}

int cmd_transform(const Run& run, const std::string& nodes_s, int delta,
                  const std::string& out_path) {
  std::vector<Node> S = parse_node_list(nodes_s);
  Run out = delay_transform(run, S, delta);
  DelayReport rep = verify_delay(run, out, S, delta);
  DelayReport claims = verify_delay_claims(run, out, S, delta);
  if (!out_path.empty()) write_trace_file(out, out_path);
  if (rep.ok() && claims.ok()) {
    std::cout << "transform verified: " << out.horizon() << " rounds\n";
    return kExitOk;
  }
  std::cout << rep.summary() << claims.summary();
  return kExitViolations;
}

int cmd_solo(const Run& run, int op_id, const std::string& out_path) {
  History h = extract_history(run);
  Operation X = find_op(h, op_id);
  Fixture f = make_fixture(run.protocol_name, run.scenario.nprocs);
  Run padded = X.complete() && *X.end_time >= run.horizon()
                   ? pad(run, *X.end_time - run.horizon() + 1)
                   : run;
  Run out = solo_transform(padded, X);
  Operation moved = find_corresponding_op(out, padded, X);
  bool solo = runs_solo(out, moved);
  bool equiv = local_equivalence(padded, out).equivalent;
  bool valid = validate_run(out, *f.protocol).ok();
  if (!out_path.empty()) write_trace_file(out, out_path);
  std::cout << "operation " << op_id << " now spans [" << moved.start_time << ", "
            << *moved.end_time << "]\n";
  std::cout << "solo: " << (solo ? "yes" : "NO") << ", locally equivalent: "
            << (equiv ? "yes" : "NO") << ", valid: " << (valid ? "yes" : "NO")
            << "\n";
  return solo && equiv && valid ? kExitOk : kExitViolations;
}

int cmd_check_lin(const Run& run, const std::string& spec_name, int bound) {
  History h = extract_history(run);
  std::unique_ptr<SequentialSpec> spec;
  if (spec_name == "register")
    spec = std::make_unique<RegisterSpec>(run.scenario.initial[0]);
  else if (spec_name == "snapshot")
    spec = std::make_unique<SnapshotSpec>(run.scenario.nprocs);
  else
    throw CLI::ValidationError("spec must be register or snapshot");

  auto witness = check_linearizable(h, *spec, bound);
  if (witness) {
    std::cout << "linearizable:";
    for (int id : witness->order) std::cout << " " << id;
    std::cout << "\n";
    return kExitOk;
  }
  std::cout << "NOT linearizable\n";
  // Smallest witness of the failure: a real-time-ordered pair that already
  // has no legal order.
  for (const Operation& x : h.ops) {
    if (!x.complete()) continue;
    for (const Operation& y : h.ops) {
      if (!y.complete() || !precedes(x, y)) continue;
      History pair;
      pair.horizon = h.horizon;
      pair.ops = {x, y};
      if (!check_linearizable(pair, *spec, bound)) {
        std::cout << "violating pair: op " << x.id << " (" << to_string(x.name)
                  << ") before op " << y.id << " (" << to_string(y.name) << ")\n";
        return kExitViolations;
      }
    }
  }
  return kExitViolations;
}

int cmd_sync(const Run& run, int op_id, int completion_bound) {
  History h = extract_history(run);
  Operation X = find_op(h, op_id);
  Fixture f = make_fixture(run.protocol_name, run.scenario.nprocs);
  SyncOptions opt;
  opt.completion_bound = completion_bound;
  ScenarioReport rep;
  if (f.kind == FixtureKind::Register)
    rep = sync_necessity_register(run, X, *f.protocol, opt);
  else if (f.kind == FixtureKind::Snapshot)
    rep = sync_necessity_snapshot(run, X, *f.protocol, opt);
  else
    throw CLI::ValidationError("fixture has no operations");
  std::cout << "follow-up " << to_string(rep.followup.name) << " at p"
            << rep.followup.process << ": "
            << (rep.followup_synced ? "performed " + rep.sync_kind
                                    : "performed no fence or rmw")
            << "\n";
  std::cout << "prefix indistinguishable to p" << X.process << ": "
            << (rep.prefix_indistinguishable ? "yes" : "NO") << "\n";
  return rep.followup_synced && rep.prefix_indistinguishable ? kExitOk
                                                             : kExitViolations;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TSO run simulator and causality analyzer"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a run of a fixture");
  std::string fixture_name;
  std::string out_path;
  int nprocs = 2;
  GenOptions gen;
  gen.seed = default_seed();
  sim->add_option("--fixture", fixture_name, "fixture name")->required();
  sim->add_option("--rounds", gen.horizon, "number of rounds");
  sim->add_option("--seed", gen.seed, "rng seed");
  sim->add_option("--procs", nprocs, "process count");
  sim->add_option("--max-ops", gen.max_ops, "invocation budget");
  sim->add_option("--p-move", gen.p_move, "per-round move probability");
  sim->add_option("--p-prop", gen.p_prop, "per-round prop probability");
  sim->add_option("--p-invoke", gen.p_invoke, "per-round invoke probability");
  sim->add_option("--out", out_path, "trace file (stdout when omitted)");

  // analyze
  auto* ana = app.add_subcommand("analyze", "query a trace");
  std::string trace_path;
  ana->add_option("--trace", trace_path, "trace file")->required();
  ana->require_subcommand(1);

  std::string from_s, to_s, nodes_s, spec_name;
  int delta = 0, op_id = 0, lin_bound = 10, completion_bound = 64;
  std::string trans_out, solo_out;

  auto* ob = ana->add_subcommand("ob", "occurs-before witness chain");
  ob->add_option("--from", from_s)->required();
  ob->add_option("--to", to_s)->required();

  auto* past = ana->add_subcommand("past", "causal past of a node set");
  past->add_option("--nodes", nodes_s)->required();

  auto* trans = ana->add_subcommand("transform", "delay everything outside the past");
  trans->add_option("--nodes", nodes_s)->required();
  trans->add_option("--delta", delta)->required();
  trans->add_option("--out", trans_out);

  auto* solo = ana->add_subcommand("solo", "rebuild the run with an operation solo");
  solo->add_option("--op", op_id)->required();
  solo->add_option("--out", solo_out);

  auto* lin = ana->add_subcommand("check-lin", "linearizability check");
  lin->add_option("--spec", spec_name)->required();
  lin->add_option("--bound", lin_bound, "complete-operation cap");

  auto* sync = ana->add_subcommand("sync", "synchronization-necessity scenario");
  sync->add_option("--op", op_id)->required();
  sync->add_option("--bound", completion_bound, "follow-up completion bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? kExitUsage : kExitOk;
  }

  try {
    if (sim->parsed()) return cmd_simulate(fixture_name, nprocs, gen, out_path);
    Run run = read_trace_file(trace_path);
    if (ob->parsed()) return cmd_ob(run, from_s, to_s);
    if (past->parsed()) return cmd_past(run, nodes_s);
    if (trans->parsed()) return cmd_transform(run, nodes_s, delta, trans_out);
    if (solo->parsed()) return cmd_solo(run, op_id, solo_out);
    if (lin->parsed()) return cmd_check_lin(run, spec_name, lin_bound);
    if (sync->parsed()) return cmd_sync(run, op_id, completion_bound);
  } catch (const ParseError& e) {
    std::cerr << "trace error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UnknownFixture& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
