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

#include <algorithm>
#include <deque>

namespace tsokit {

std::string to_string(const Node& n) {
  return to_string(n.agent) + "@" + std::to_string(n.time);
}

std::optional<Node> parse_node(const std::string& s) {
  auto at = s.find('@');
  if (at == std::string::npos || at < 2) return std::nullopt;
  char k = s[0];
  if (k != 'p' && k != 'd') return std::nullopt;
  try {
    int proc = std::stoi(s.substr(1, at - 1));
    int time = std::stoi(s.substr(at + 1));
    if (proc < 1 || time < 0) return std::nullopt;
    return Node{k == 'p' ? AgentId::process(proc) : AgentId::dispatcher_of(proc),
                time};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::Locality:
      return "locality";
    case EdgeKind::BufferFlow:
      return "buffer-flow";
    case EdgeKind::SameVarAccess:
      return "same-var";
    case EdgeKind::PropToSync:
      return "prop-to-sync";
  }
  return "?";
}

ObGraph::ObGraph(const Run& r) {
  nprocs_ = r.scenario.nprocs;
  horizon_ = r.horizon();
  node_count_ = 2 * nprocs_ * (horizon_ + 1);
  words_ = (node_count_ + 63) / 64;

  node_events_.resize(node_count_);
  for (int t = 0; t < horizon_; ++t) {
    for (const Event& e : r.rounds[t].events) {
      if (e.kind == Event::Kind::InvokeDelivered) continue;
      node_events_[index(Node{e.agent, t})] = e;
    }
  }

  // Locality steps; longer gaps on one timeline come from transitivity.
  for (int a = 0; a < 2 * nprocs_; ++a) {
    AgentId agent = a < nprocs_ ? AgentId::process(a + 1)
                                : AgentId::dispatcher_of(a - nprocs_ + 1);
    for (int t = 0; t < horizon_; ++t)
      edges_.push_back(ObEdge{Node{agent, t}, Node{agent, t + 1}, EdgeKind::Locality});
  }

  struct Access {
    Node node;
    Event::Kind kind;
    VarId var;
  };
  std::vector<Access> accesses;
  std::vector<std::pair<Node, Tag>> taggedProps;   // ⟨d_i,t⟩ with prop tag
  std::vector<std::pair<Node, Tag>> bufferTouch;   // ⟨i,t⟩ with W/RfB tag
  std::vector<Node> syncNodes;                     // F or RMW at a process

  for (int t = 0; t <= horizon_; ++t) {
    for (int a = 0; a < 2 * nprocs_; ++a) {
      Node n{a < nprocs_ ? AgentId::process(a + 1)
                         : AgentId::dispatcher_of(a - nprocs_ + 1),
             t};
      const auto& ev = node_events_[index(n)];
      if (!ev) continue;
      if (auto var = memory_access_var(*ev))
        accesses.push_back(Access{n, ev->kind, *var});
      if (ev->kind == Event::Kind::Prop) taggedProps.emplace_back(n, *ev->tag);
      if ((ev->kind == Event::Kind::W || ev->kind == Event::Kind::RfB) && ev->tag)
        bufferTouch.emplace_back(n, *ev->tag);
      if (ev->kind == Event::Kind::F || ev->kind == Event::Kind::Rmw)
        syncNodes.push_back(n);
    }
  }

  for (const auto& [touch, tag] : bufferTouch)
    for (const auto& [prop, ptag] : taggedProps)
      if (ptag == tag && prop.agent.proc == touch.agent.proc &&
          touch.time < prop.time)
        edges_.push_back(ObEdge{touch, prop, EdgeKind::BufferFlow});

  for (const Access& a : accesses) {
    for (const Access& b : accesses) {
      if (a.var != b.var || a.node.time >= b.node.time) continue;
      if (a.kind == Event::Kind::RfM && b.kind == Event::Kind::RfM) continue;
      if (a.kind == Event::Kind::Prop && b.kind == Event::Kind::RfM &&
          a.node.agent.dispatcher && !b.node.agent.dispatcher &&
          a.node.agent.proc == b.node.agent.proc)
        continue;  // a process reading memory learns nothing about its own props
      edges_.push_back(ObEdge{a.node, b.node, EdgeKind::SameVarAccess});
    }
  }

  for (const auto& [prop, tag] : taggedProps) {
    (void)tag;
    for (const Node& sync : syncNodes)
      if (sync.agent.proc == prop.agent.proc && prop.time < sync.time)
        edges_.push_back(ObEdge{prop, sync, EdgeKind::PropToSync});
  }

  adj_.resize(node_count_);
  for (size_t e = 0; e < edges_.size(); ++e)
    adj_[index(edges_[e].from)].push_back(static_cast<int>(e));

  // Closure by decreasing time; every base edge strictly increases time.
  reach_.assign(static_cast<size_t>(node_count_) * words_, 0);
  for (int t = horizon_; t >= 0; --t) {
    for (int a = 0; a < 2 * nprocs_; ++a) {
      int v = a * (horizon_ + 1) + t;
      uint64_t* row = &reach_[static_cast<size_t>(v) * words_];
      for (int eid : adj_[v]) {
        int u = index(edges_[eid].to);
        const uint64_t* urow = &reach_[static_cast<size_t>(u) * words_];
        for (int w = 0; w < words_; ++w) row[w] |= urow[w];
        row[u / 64] |= 1ULL << (u % 64);
      }
    }
  }
}

Node ObGraph::node_at(int idx) const {
  int a = idx / (horizon_ + 1);
  int t = idx % (horizon_ + 1);
  return Node{a < nprocs_ ? AgentId::process(a + 1)
                          : AgentId::dispatcher_of(a - nprocs_ + 1),
              t};
}

bool ObGraph::reaches(const Node& a, const Node& b) const {
  int va = index(a), vb = index(b);
  return (reach_[static_cast<size_t>(va) * words_ + vb / 64] >> (vb % 64)) & 1;
}

std::optional<std::vector<ObEdge>> ObGraph::query(const Node& a, const Node& b) const {
  if (!in_range(a) || !in_range(b) || !reaches(a, b)) return std::nullopt;
  std::vector<int> parent_edge(node_count_, -1);
  std::vector<bool> seen(node_count_, false);
  std::deque<int> frontier{index(a)};
  seen[index(a)] = true;
  int target = index(b);
  while (!frontier.empty()) {
    int v = frontier.front();
    frontier.pop_front();
    if (v == target) break;
    for (int eid : adj_[v]) {
      int u = index(edges_[eid].to);
      if (seen[u]) continue;
      seen[u] = true;
      parent_edge[u] = eid;
      frontier.push_back(u);
    }
  }
  std::vector<ObEdge> chain;
  for (int v = target; v != index(a); v = index(edges_[parent_edge[v]].from))
    chain.push_back(edges_[parent_edge[v]]);
  std::reverse(chain.begin(), chain.end());
  return chain;
}

std::vector<bool> ObGraph::past_plus_mask(const std::vector<Node>& S) const {
  std::vector<uint64_t> target(words_, 0);
  std::vector<bool> mask(node_count_, false);
  for (const Node& s : S) {
    int idx = index(s);
    target[idx / 64] |= 1ULL << (idx % 64);
    mask[idx] = true;
  }
  for (int v = 0; v < node_count_; ++v) {
    if (mask[v]) continue;
    const uint64_t* row = &reach_[static_cast<size_t>(v) * words_];
    for (int w = 0; w < words_; ++w)
      if (row[w] & target[w]) {
        mask[v] = true;
        break;
      }
  }
  return mask;
}

std::vector<Node> ObGraph::past(const std::vector<Node>& S) const {
  std::vector<bool> plus = past_plus_mask(S);
  std::vector<bool> in_s(node_count_, false);
  for (const Node& s : S) in_s[index(s)] = true;
  std::vector<Node> out;
  for (int v = 0; v < node_count_; ++v) {
    if (!plus[v]) continue;
    if (in_s[v]) {
      // members of S belong to the past only when they also precede S
      bool precedes_s = false;
      for (const Node& s : S)
        if (reaches(node_at(v), s)) {
          precedes_s = true;
          break;
        }
      if (!precedes_s) continue;
    }
    out.push_back(node_at(v));
  }
  return out;
}

std::vector<Node> ObGraph::past_plus(const std::vector<Node>& S) const {
  std::vector<bool> plus = past_plus_mask(S);
  std::vector<Node> out;
  for (int v = 0; v < node_count_; ++v)
    if (plus[v]) out.push_back(node_at(v));
  return out;
}

int ObGraph::past_boundary(const std::vector<Node>& S, const AgentId& b) const {
  std::vector<bool> plus = past_plus_mask(S);
  for (int t = 0; t <= horizon_; ++t)
    if (!plus[index(Node{b, t})]) return t;
  return horizon_ + 1;
}

std::optional<Node> feedback_loop(const ObGraph& g, const Node& a, const Node& b) {
  if (a.agent.dispatcher || b.agent.dispatcher || a.agent.proc != b.agent.proc)
    throw std::logic_error("feedback loop endpoints must be nodes of one process");
  ProcId i = a.agent.proc;
  for (int v = 0; v < g.node_count(); ++v) {
    Node c = g.node_at(v);
    if (c.agent.proc == i) continue;
    if (g.reaches(a, c) && g.reaches(c, b)) return c;
  }
  return std::nullopt;
}

bool has_ij_only_chain(const ObGraph& g, const Node& a, const Node& b, ProcId i,
                       ProcId j) {
  if (!g.in_range(a) || !g.in_range(b)) return false;
  std::vector<bool> seen(g.node_count(), false);
  std::deque<Node> frontier{a};
  seen[g.index(a)] = true;
  while (!frontier.empty()) {
    Node v = frontier.front();
    frontier.pop_front();
    if (v == b) return true;
    for (const ObEdge& e : g.base_edges()) {
      if (!(e.from == v)) continue;
      if (e.to.agent.proc != i && e.to.agent.proc != j) continue;
      if (seen[g.index(e.to)]) continue;
      seen[g.index(e.to)] = true;
      frontier.push_back(e.to);
    }
  }
  return false;
}

std::vector<IjCase> ij_only_classify(const ObGraph& g, const Node& a, const Node& b,
                                     ProcId i, ProcId j) {
  if (a.agent.dispatcher || b.agent.dispatcher || a.agent.proc != i ||
      b.agent.proc != j || i == j)
    throw std::logic_error("classify expects process nodes of two distinct processes");
  if (!has_ij_only_chain(g, a, b, i, j))
    throw NoIjOnlyChain("no chain from " + to_string(a) + " to " + to_string(b) +
                        " within {p" + std::to_string(i) + ",p" + std::to_string(j) +
                        "} and their dispatchers");

  int t1 = a.time, t2 = b.time;
  auto kind_at = [&](const AgentId& agent, int t) -> std::optional<Event::Kind> {
    const auto& ev = g.event_of(Node{agent, t});
    return ev ? std::optional<Event::Kind>(ev->kind) : std::nullopt;
  };

  std::vector<IjCase> out;

  // Case 1: an rmw by i, answered by a fence, rmw or memory read at j.
  for (int t = t1; t < t2; ++t) {
    if (kind_at(AgentId::process(i), t) != Event::Kind::Rmw) continue;
    for (int tj = t + 1; tj <= t2; ++tj) {
      auto k = kind_at(AgentId::process(j), tj);
      if (k == Event::Kind::F || k == Event::Kind::Rmw || k == Event::Kind::RfM) {
        out.push_back(IjCase{1, t, -1, tj});
        t = t2;  // one witness suffices
        break;
      }
    }
  }

  // Case 2: a buffered item of i, its prop, then a memory read, fence or rmw
  // at j.
  [&] {
    for (int t = t1; t < t2; ++t) {
      auto ki = kind_at(AgentId::process(i), t);
      if (ki != Event::Kind::W && ki != Event::Kind::RfB) continue;
      for (int tp = t + 1; tp < t2; ++tp) {
        if (kind_at(AgentId::dispatcher_of(i), tp) != Event::Kind::Prop) continue;
        for (int tj = tp + 1; tj <= t2; ++tj) {
          auto kj = kind_at(AgentId::process(j), tj);
          if (kj == Event::Kind::RfM || kj == Event::Kind::F ||
              kj == Event::Kind::Rmw) {
            out.push_back(IjCase{2, t, tp, tj});
            return;
          }
        }
      }
    }
  }();

  // Case 3: a memory read by i, answered by a fence or rmw at j.
  for (int t = t1; t < t2; ++t) {
    if (kind_at(AgentId::process(i), t) != Event::Kind::RfM) continue;
    for (int tj = t + 1; tj <= t2; ++tj) {
      auto k = kind_at(AgentId::process(j), tj);
      if (k == Event::Kind::F || k == Event::Kind::Rmw) {
        out.push_back(IjCase{3, t, -1, tj});
        t = t2;
        break;
      }
    }
  }

  return out;
}

}  // namespace tsokit
