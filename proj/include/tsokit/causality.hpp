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

#include <optional>
#include <vector>

#include "tsokit/runtime.hpp"

namespace tsokit {

/* A point on an agent's timeline. The node at time t refers to whatever the
 * agent does in round t+1. */
struct Node {
  AgentId agent;
  int time = 0;

  friend auto operator<=>(const Node&, const Node&) = default;
};

std::string to_string(const Node& n);
std::optional<Node> parse_node(const std::string& s);

enum class EdgeKind { Locality, BufferFlow, SameVarAccess, PropToSync };

std::string to_string(EdgeKind k);

struct ObEdge {
  Node from;
  Node to;
  EdgeKind kind = EdgeKind::Locality;

  friend bool operator==(const ObEdge&, const ObEdge&) = default;
};

/* The occurs-before relation of one run: base edges plus a reachability
 * index over their transitive closure. Base edges are
 *   - locality: successor steps on one timeline (longer gaps arise through
 *     transitivity),
 *   - buffer flow: a write, or a buffered item read back, to the prop that
 *     drains it (same tag),
 *   - same-variable memory accesses, except two RfM's and except a prop at
 *     d_i followed by an RfM at i itself,
 *   - a prop at d_i to a later fence or rmw at i.
 * Immutable once built; queries are read-only. */
class ObGraph {
 public:
  explicit ObGraph(const Run& r);

  int horizon() const { return horizon_; }
  int node_count() const { return node_count_; }

  int index(const Node& n) const {
    return agent_index_of(n.agent) * (horizon_ + 1) + n.time;
  }
  Node node_at(int idx) const;
  bool in_range(const Node& n) const {
    return n.time >= 0 && n.time <= horizon_ && n.agent.proc >= 1 &&
           n.agent.proc <= nprocs_;
  }

  const std::vector<ObEdge>& base_edges() const { return edges_; }

  /* Strict occurs-before: a != b and a chain of base edges leads a to b. */
  bool reaches(const Node& a, const Node& b) const;

  /* Witness chain of base edges from a to b, if a occurs before b. */
  std::optional<std::vector<ObEdge>> query(const Node& a, const Node& b) const;

  /* All nodes that occur before some node of S. */
  std::vector<Node> past(const std::vector<Node>& S) const;
  std::vector<Node> past_plus(const std::vector<Node>& S) const;

  /* Membership mask indexed by node index, for Past⁺(S). */
  std::vector<bool> past_plus_mask(const std::vector<Node>& S) const;

  /* First time on agent b's timeline outside Past⁺(S); horizon+1 when every
   * node up to the horizon is inside (callers must extend the run before
   * delaying such an agent). */
  int past_boundary(const std::vector<Node>& S, const AgentId& b) const;

  /* Event of the node's action, if the agent moved in round time+1. */
  const std::optional<Event>& event_of(const Node& n) const {
    return node_events_[index(n)];
  }

 private:
  int agent_index_of(const AgentId& a) const {
    return a.dispatcher ? nprocs_ + a.proc - 1 : a.proc - 1;
  }

  int nprocs_ = 0;
  int horizon_ = 0;
  int node_count_ = 0;
  int words_ = 0;
  std::vector<ObEdge> edges_;
  std::vector<std::vector<int>> adj_;       // node index -> edge ids out
  std::vector<uint64_t> reach_;             // node_count_ x words_ closure bits
  std::vector<std::optional<Event>> node_events_;
};

/* A node of some third agent through which a occurs before b, when both are
 * nodes of the same process. */
std::optional<Node> feedback_loop(const ObGraph& g, const Node& a, const Node& b);

/* True when a chain from a to b exists that only visits i, d_i, j, d_j. */
bool has_ij_only_chain(const ObGraph& g, const Node& a, const Node& b, ProcId i,
                       ProcId j);

struct NoIjOnlyChain : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/* One way an {i,j}-only chain crosses between the two processes, with
 * witness times. */
struct IjCase {
  int case_no = 0;  // 1: rmw at i; 2: write/RfB then prop; 3: RfM at i
  int t = -1;       // time of i's action
  int t_mid = -1;   // case 2: time of d_i's prop
  int t_end = -1;   // time of j's qualifying action

  friend bool operator==(const IjCase&, const IjCase&) = default;
};

/* Which crossing patterns hold for an {i,j}-only chain from a to b. Every
 * such chain exhibits at least one. Throws NoIjOnlyChain when no chain
 * within {i, d_i, j, d_j} exists. */
std::vector<IjCase> ij_only_classify(const ObGraph& g, const Node& a, const Node& b,
                                     ProcId i, ProcId j);

}  // namespace tsokit
