// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/fusion/fusion.hpp"

#include <algorithm>
#include <map>
#include <memory>

#include "fluid/types.hpp"

namespace fluid {

using nlohmann::json;

namespace {

struct TreeNode {
  const OperatorNode* op = nullptr;
  std::vector<TreeNode*> children;
};

struct Tree {
  std::vector<std::unique_ptr<TreeNode>> store;
  TreeNode* root = nullptr;
};

Tree build_tree(const DprSpec& spec) {
  Tree t;
  std::map<std::string, TreeNode*> by_id;
  for (const auto& n : spec.nodes) {
    t.store.push_back(std::make_unique<TreeNode>());
    t.store.back()->op = &n;
    by_id[n.id] = t.store.back().get();
  }
  for (const auto& n : spec.nodes) {
    if (n.kind == OpKind::Source) {
      t.root = by_id[n.id];
    } else {
      by_id.at(n.inputs.front())->children.push_back(by_id[n.id]);
    }
  }
  if (!t.root) throw Error(ErrorCode::InvalidArgument, "dpr '" + spec.id + "' has no source");
  return t;
}

// A run of single-child Filters commutes; put it in predicate order so that
// runs written in different orders share a prefix. Each op keeps its own id.
void sort_filter_runs(TreeNode* n) {
  if (n->op->kind == OpKind::Filter) {
    std::vector<TreeNode*> run{n};
    while (run.back()->children.size() == 1 && run.back()->children[0]->op->kind == OpKind::Filter)
      run.push_back(run.back()->children[0]);
    if (run.size() > 1) {
      std::vector<const OperatorNode*> ops;
      for (auto* r : run) ops.push_back(r->op);
      std::stable_sort(ops.begin(), ops.end(),
                       [](const OperatorNode* a, const OperatorNode* b) { return a->predicate < b->predicate; });
      for (std::size_t i = 0; i < run.size(); ++i) run[i]->op = ops[i];
    }
    for (auto* c : run.back()->children) sort_filter_runs(c);
    return;
  }
  for (auto* c : n->children) sort_filter_runs(c);
}

bool mergeable(OpKind k, FusionLevel level) {
  switch (level) {
    case FusionLevel::Concat: return false;
    case FusionLevel::Prefix: return k == OpKind::ParseFields || k == OpKind::Filter;
    case FusionLevel::Full: return true;
  }
  return false;
}

struct Builder {
  FusedDag dag;
  // (parent, signature) -> fused node; only nodes created by a merge-eligible
  // op are registered.
  std::map<std::pair<int, std::string>, int> index;

  int add(int parent, const OperatorNode& op) {
    FusedNode fn;
    fn.op = op;
    fn.op.id = "n" + std::to_string(dag.nodes.size());
    fn.op.inputs.clear();
    fn.parent = parent;
    int id = static_cast<int>(dag.nodes.size());
    dag.nodes.push_back(std::move(fn));
    if (parent >= 0) dag.nodes[parent].children.push_back(id);
    return id;
  }

  void insert(int parent, const TreeNode* t, std::size_t spec) {
    const OperatorNode& op = *t->op;
    int id = -1;
    if (mergeable(op.kind, dag.level)) {
      auto key = std::make_pair(parent, op.signature());
      auto it = index.find(key);
      if (it != index.end()) {
        id = it->second;
      } else {
        id = add(parent, op);
        index.emplace(key, id);
      }
    } else {
      id = add(parent, op);
    }
    dag.nodes[id].provenance.push_back({spec, op.id});
    if (op.kind == OpKind::Sink) {
      dag.nodes[id].targets.push_back(dag.targets.size());
      dag.targets.push_back({spec, op.id});
    }
    for (const auto* c : t->children) insert(id, c, spec);
  }
};

double reach_factor(const FusedDag& dag, int node, const SelectivityProfile& sel) {
  double r = 1.0;
  for (int p = dag.nodes[node].parent; p >= 0; p = dag.nodes[p].parent) {
    const auto& op = dag.nodes[p].op;
    if (op.kind == OpKind::Filter) {
      auto it = sel.find(op.predicate.key());
      if (it != sel.end()) r *= std::clamp(it->second, 0.0, 1.0);
    }
  }
  return r;
}

}  // namespace

FusionLevel fusion_level_from_int(int level) {
  if (level < 0 || level > 2) throw Error(ErrorCode::InvalidArgument, "fusion level must be 0, 1 or 2");
  return static_cast<FusionLevel>(level);
}

std::size_t FusedDag::count(OpKind k) const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [&](const FusedNode& n) { return n.op.kind == k; }));
}

FusedDag fuse(std::span<const DprSpec> specs, FusionLevel level) {
  Builder b;
  b.dag.level = level;
  b.dag.spec_count = specs.size();
  OperatorNode src;
  src.kind = OpKind::Source;
  b.add(-1, src);

  for (std::size_t s = 0; s < specs.size(); ++s) {
    Tree t = build_tree(specs[s]);
    if (level != FusionLevel::Concat) sort_filter_runs(t.root);
    b.dag.nodes[0].provenance.push_back({s, t.root->op->id});
    for (const auto* c : t.root->children) b.insert(0, c, s);
  }

  // Children are appended after parents, so a reverse sweep sees every child
  // before its parent.
  auto& nodes = b.dag.nodes;
  for (auto& n : nodes)
    for (std::size_t t : n.targets) n.serves.push_back(b.dag.targets[t].spec);
  for (int i = static_cast<int>(nodes.size()) - 1; i >= 0; --i) {
    auto& n = nodes[i];
    std::sort(n.serves.begin(), n.serves.end());
    n.serves.erase(std::unique(n.serves.begin(), n.serves.end()), n.serves.end());
    if (n.parent >= 0) {
      auto& ps = nodes[n.parent].serves;
      ps.insert(ps.end(), n.serves.begin(), n.serves.end());
    }
  }
  return std::move(b.dag);
}

double dag_cost(const FusedDag& dag, const SelectivityProfile& sel) {
  double c = 0;
  for (std::size_t i = 0; i < dag.nodes.size(); ++i)
    c += dag.nodes[i].op.unit_cost() * reach_factor(dag, static_cast<int>(i), sel);
  return c;
}

double spec_cost(const DprSpec& spec, const SelectivityProfile& sel) {
  return dag_cost(fuse(std::span<const DprSpec>(&spec, 1), FusionLevel::Concat), sel);
}

std::vector<double> attributed_costs(const FusedDag& dag, const SelectivityProfile& sel) {
  std::vector<double> out(dag.spec_count, 0.0);
  for (std::size_t i = 0; i < dag.nodes.size(); ++i) {
    const auto& n = dag.nodes[i];
    if (n.serves.empty()) continue;
    double share = n.op.unit_cost() * reach_factor(dag, static_cast<int>(i), sel) / static_cast<double>(n.serves.size());
    for (std::size_t s : n.serves) out[s] += share;
  }
  return out;
}

json fusedump(const FusedDag& dag, std::span<const DprSpec> specs) {
  json j;
  j["level"] = static_cast<int>(dag.level);
  j["specs"] = json::array();
  for (const auto& s : specs) j["specs"].push_back(s.id);
  j["nodes"] = json::array();
  for (const auto& n : dag.nodes) {
    json jn = to_json(n.op);
    jn["inputs"] = n.parent >= 0 ? json::array({dag.nodes[n.parent].op.id}) : json::array();
    jn["unit_cost"] = n.op.unit_cost();
    json prov = json::array();
    for (const auto& p : n.provenance)
      prov.push_back({{"dpr", p.spec < specs.size() ? specs[p.spec].id : std::to_string(p.spec)}, {"node", p.node}});
    jn["provenance"] = prov;
    json serves = json::array();
    for (std::size_t s : n.serves) serves.push_back(s < specs.size() ? specs[s].id : std::to_string(s));
    jn["serves"] = serves;
    j["nodes"].push_back(std::move(jn));
  }
  json counts;
  for (std::size_t k = 0; k < kOpKindCount; ++k) counts[op_kind_name(static_cast<OpKind>(k))] = dag.count(static_cast<OpKind>(k));
  j["operator_counts"] = counts;
  j["unit_cost_per_record"] = dag_cost(dag);
  return j;
}

}  // namespace fluid
