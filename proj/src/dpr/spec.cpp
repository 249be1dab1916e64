// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/dpr/spec.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "fluid/dpr/catalog.hpp"
#include "fluid/types.hpp"

namespace fluid {

using nlohmann::json;

namespace {

constexpr const char* kKindNames[] = {"source", "parse_fields", "filter", "project", "transform", "sink"};

[[noreturn]] void invalid(const std::string& spec, const std::string& node, const std::string& msg) {
  std::string where = spec.empty() ? std::string("dpr") : "dpr '" + spec + "'";
  if (!node.empty()) where += " node '" + node + "'";
  throw Error(ErrorCode::InvalidArgument, where + ": " + msg);
}

std::vector<std::string> sorted_fields(std::vector<std::string> f) {
  std::sort(f.begin(), f.end());
  f.erase(std::unique(f.begin(), f.end()), f.end());
  return f;
}

std::vector<std::string> string_list(const json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

// Ancestors of `id` from Source down to, but excluding, the node itself.
std::vector<const OperatorNode*> path_to(const DprSpec& spec, std::string_view id) {
  std::vector<const OperatorNode*> path;
  const OperatorNode* n = spec.node(id);
  std::size_t guard = 0;
  while (n && !n->inputs.empty() && guard++ <= spec.nodes.size()) {
    n = spec.node(n->inputs.front());
    if (n) path.push_back(n);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

struct FieldState {
  std::set<std::string> available;
  std::set<std::string> derived;
};

// Fields available at the output of each node on the path.
FieldState fields_after(const std::vector<const OperatorNode*>& path) {
  FieldState st;
  for (const OperatorNode* n : path) {
    switch (n->kind) {
      case OpKind::ParseFields:
        for (const auto& f : n->fields) {
          st.available.insert(f);
          st.derived.erase(f);
        }
        break;
      case OpKind::Project: {
        std::set<std::string> keep(n->fields.begin(), n->fields.end());
        std::erase_if(st.available, [&](const std::string& f) { return !keep.count(f); });
        std::erase_if(st.derived, [&](const std::string& f) { return !keep.count(f); });
        break;
      }
      case OpKind::Transform: {
        std::string out = n->params.value("output", "");
        st.available.insert(out);
        st.derived.insert(out);
        break;
      }
      default:
        break;
    }
  }
  return st;
}

std::string param_string(const OperatorNode& n, const char* key) {
  auto it = n.params.find(key);
  if (it == n.params.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

}  // namespace

const char* op_kind_name(OpKind k) { return kKindNames[static_cast<int>(k)]; }

OpKind parse_op_kind(std::string_view s) {
  for (std::size_t i = 0; i < kOpKindCount; ++i)
    if (s == kKindNames[i]) return static_cast<OpKind>(i);
  // Accept the CamelCase spelling too.
  static const std::map<std::string_view, OpKind> alt = {
      {"Source", OpKind::Source}, {"ParseFields", OpKind::ParseFields}, {"Filter", OpKind::Filter},
      {"Project", OpKind::Project}, {"Transform", OpKind::Transform}, {"Sink", OpKind::Sink}};
  if (auto it = alt.find(s); it != alt.end()) return it->second;
  throw Error(ErrorCode::InvalidArgument, "unknown operator kind '" + std::string(s) + "'");
}

std::string OperatorNode::signature() const {
  json j;
  j["kind"] = op_kind_name(kind);
  switch (kind) {
    case OpKind::ParseFields:
    case OpKind::Project:
      j["fields"] = sorted_fields(fields);
      break;
    case OpKind::Filter:
      j["predicate"] = predicate.key();
      break;
    case OpKind::Transform:
      j["token"] = token;
      j["params"] = params;
      break;
    case OpKind::Sink:
      j["structure"] = structure_kind_name(structure);
      j["params"] = params;
      break;
    case OpKind::Source:
      break;
  }
  return j.dump();
}

double OperatorNode::unit_cost() const {
  switch (kind) {
    case OpKind::Source: return 0.0;
    case OpKind::ParseFields: return 5.0;
    case OpKind::Filter: return 1.0;
    case OpKind::Project: return 1.0;
    case OpKind::Sink: return 2.0;
    case OpKind::Transform: {
      const CatalogEntry* e = find_transform(token);
      return e ? e->unit_cost(params) : 1.0;
    }
  }
  return 0.0;
}

const OperatorNode* DprSpec::node(std::string_view nid) const {
  for (const auto& n : nodes)
    if (n.id == nid) return &n;
  return nullptr;
}

std::vector<const OperatorNode*> sinks(const DprSpec& spec) {
  std::vector<const OperatorNode*> out;
  for (const auto& n : spec.nodes)
    if (n.kind == OpKind::Sink) out.push_back(&n);
  return out;
}

void validate(const DprSpec& spec) {
  const std::string& sid = spec.id;
  if (sid.empty()) invalid(sid, "", "missing id");
  if (spec.nodes.empty()) invalid(sid, "", "no operators");

  std::map<std::string, const OperatorNode*> by_id;
  std::map<std::string, int> children;
  const OperatorNode* source = nullptr;
  for (const auto& n : spec.nodes) {
    if (n.id.empty()) invalid(sid, "", "operator without id");
    if (!by_id.emplace(n.id, &n).second) invalid(sid, n.id, "duplicate operator id");
    if (n.kind == OpKind::Source) {
      if (source) invalid(sid, n.id, "more than one source");
      source = &n;
      if (!n.inputs.empty()) invalid(sid, n.id, "source takes no inputs");
    } else if (n.inputs.size() != 1) {
      invalid(sid, n.id, "expected exactly one input, got " + std::to_string(n.inputs.size()));
    }
  }
  if (!source) invalid(sid, "", "no source operator");

  for (const auto& n : spec.nodes) {
    for (const auto& in : n.inputs) {
      auto it = by_id.find(in);
      if (it == by_id.end()) invalid(sid, n.id, "unknown input '" + in + "'");
      if (it->second->kind == OpKind::Sink) invalid(sid, n.id, "sink '" + in + "' cannot feed another operator");
      ++children[in];
    }
  }

  // With one input per node, a node is on a cycle iff walking inputs never
  // reaches the source.
  for (const auto& n : spec.nodes) {
    const OperatorNode* cur = &n;
    std::size_t steps = 0;
    while (cur->kind != OpKind::Source) {
      if (++steps > spec.nodes.size()) invalid(sid, n.id, "cycle in operator graph");
      cur = by_id.at(cur->inputs.front());
    }
  }

  bool any_sink = false;
  for (const auto& n : spec.nodes) {
    if (n.kind == OpKind::Sink) {
      any_sink = true;
    } else if (children[n.id] == 0) {
      invalid(sid, n.id, std::string(op_kind_name(n.kind)) + " output is not consumed; every leaf must be a sink");
    }
  }
  if (!any_sink) invalid(sid, "", "no sink operator");

  for (const auto& n : spec.nodes) {
    if (n.kind == OpKind::Source) continue;
    FieldState st = fields_after(path_to(spec, n.id));
    auto need = [&](const std::string& f, const char* role) {
      if (f.empty()) invalid(sid, n.id, std::string("missing ") + role + " field");
      if (!st.available.count(f))
        invalid(sid, n.id, std::string(role) + " field '" + f + "' is not produced upstream");
    };
    switch (n.kind) {
      case OpKind::ParseFields:
        if (n.fields.empty()) invalid(sid, n.id, "parse_fields needs at least one field");
        for (const auto& f : n.fields)
          if (f.empty()) invalid(sid, n.id, "empty field path");
        break;
      case OpKind::Filter:
        need(n.predicate.field, "filter");
        break;
      case OpKind::Project:
        if (n.fields.empty()) invalid(sid, n.id, "project needs at least one field");
        for (const auto& f : n.fields) need(f, "projected");
        break;
      case OpKind::Transform: {
        const CatalogEntry* e = find_transform(n.token);
        if (!e) invalid(sid, n.id, "unknown transform '" + n.token + "'");
        need(param_string(n, "input"), "transform input");
        if (param_string(n, "output").empty()) invalid(sid, n.id, "transform needs an output field");
        for (const auto& r : e->required)
          if (!n.params.contains(r)) invalid(sid, n.id, "transform '" + n.token + "' requires param '" + r + "'");
        try {
          e->make(n.params);
        } catch (const std::exception& ex) {
          invalid(sid, n.id, ex.what());
        }
        break;
      }
      case OpKind::Sink:
        switch (n.structure) {
          case StructureKind::HashIndex:
            need(param_string(n, "field"), "index key");
            break;
          case StructureKind::MaterializedAggregate: {
            need(param_string(n, "group_by"), "group_by");
            auto it = n.params.find("bucket_records");
            if (it != n.params.end() && (!it->is_number_unsigned() || it->get<std::uint64_t>() == 0 ||
                                         it->get<std::uint64_t>() > (1u << 30)))
              invalid(sid, n.id, "bucket_records must be a positive integer");
            break;
          }
          case StructureKind::PreFilteredLog: {
            auto it = n.params.find("fields");
            if (it == n.params.end() || !it->is_array() || it->empty())
              invalid(sid, n.id, "prefiltered_log needs a non-empty 'fields' list");
            for (const auto& f : *it) {
              if (!f.is_string()) invalid(sid, n.id, "stored fields must be strings");
              need(f.get<std::string>(), "stored");
            }
            break;
          }
        }
        break;
      case OpKind::Source:
        break;
    }
  }
}

StructureDescriptor sink_descriptor(const DprSpec& spec, std::string_view sink_id) {
  const OperatorNode* s = spec.node(sink_id);
  if (!s || s->kind != OpKind::Sink) throw Error(ErrorCode::NotFound, "no sink '" + std::string(sink_id) + "'");
  auto path = path_to(spec, sink_id);
  FieldState st = fields_after(path);

  StructureDescriptor d;
  d.kind = s->structure;
  std::vector<std::string> used;
  switch (s->structure) {
    case StructureKind::HashIndex:
      d.field = param_string(*s, "field");
      used.push_back(d.field);
      break;
    case StructureKind::MaterializedAggregate:
      d.group_by = param_string(*s, "group_by");
      d.bucket_records = s->params.value("bucket_records", 4096u);
      used.push_back(d.group_by);
      break;
    case StructureKind::PreFilteredLog:
      for (const auto& f : s->params.at("fields")) d.stored_fields.push_back(f.get<std::string>());
      used = d.stored_fields;
      break;
  }

  // A Filter guarantees its predicate for everything below it, but only if
  // the field still means the raw field at that point.
  std::vector<FilterPredicate> preds;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path[i]->kind != OpKind::Filter) continue;
    FieldState at = fields_after({path.begin(), path.begin() + static_cast<std::ptrdiff_t>(i)});
    if (at.derived.count(path[i]->predicate.field)) d.derived = true;
    preds.push_back(path[i]->predicate);
  }
  d.filters = normalize_conjunction(std::move(preds));
  for (const auto& f : used)
    if (st.derived.count(f)) d.derived = true;
  return d;
}

double static_unit_cost(const DprSpec& spec) {
  double c = 0;
  for (const auto& n : spec.nodes) c += n.unit_cost();
  return c;
}

json to_json(const OperatorNode& n) {
  json j;
  j["id"] = n.id;
  j["kind"] = op_kind_name(n.kind);
  json p = json::object();
  switch (n.kind) {
    case OpKind::ParseFields:
    case OpKind::Project:
      p["fields"] = n.fields;
      break;
    case OpKind::Filter:
      p = to_json(n.predicate);
      break;
    case OpKind::Transform:
      p = n.params;
      p["fn"] = n.token;
      break;
    case OpKind::Sink:
      p = n.params;
      p["structure"] = structure_kind_name(n.structure);
      break;
    case OpKind::Source:
      break;
  }
  j["params"] = p;
  j["inputs"] = n.inputs;
  return j;
}

json to_json(const DprSpec& spec) {
  json j;
  j["id"] = spec.id;
  j["nodes"] = json::array();
  for (const auto& n : spec.nodes) j["nodes"].push_back(to_json(n));
  if (spec.declared_cost_hint) j["cost_hint"] = *spec.declared_cost_hint;
  return j;
}

DprSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "dpr spec must be a JSON object");
  DprSpec spec;
  if (auto it = j.find("id"); it != j.end()) {
    if (!it->is_string()) throw Error(ErrorCode::InvalidArgument, "dpr id must be a string");
    spec.id = it->get<std::string>();
  }
  if (auto it = j.find("cost_hint"); it != j.end() && it->is_number()) spec.declared_cost_hint = it->get<double>();
  auto nodes = j.find("nodes");
  if (nodes == j.end() || !nodes->is_array()) throw Error(ErrorCode::InvalidArgument, "dpr spec needs a 'nodes' array");
  for (const auto& jn : *nodes) {
    if (!jn.is_object()) throw Error(ErrorCode::InvalidArgument, "operator must be a JSON object");
    OperatorNode n;
    n.id = jn.value("id", "");
    auto kind = jn.find("kind");
    if (kind == jn.end() || !kind->is_string())
      throw Error(ErrorCode::InvalidArgument, "operator '" + n.id + "' needs a string 'kind'");
    n.kind = parse_op_kind(kind->get<std::string>());
    json p = jn.value("params", json::object());
    if (!p.is_object()) throw Error(ErrorCode::InvalidArgument, "operator '" + n.id + "' params must be an object");
    if (auto in = jn.find("inputs"); in != jn.end()) n.inputs = string_list(*in, "inputs");
    try {
      switch (n.kind) {
        case OpKind::ParseFields:
        case OpKind::Project:
          n.fields = string_list(p.value("fields", json::array()), "fields");
          break;
        case OpKind::Filter:
          n.predicate = predicate_from_json(p);
          break;
        case OpKind::Transform: {
          auto fn = p.find("fn");
          if (fn == p.end() || !fn->is_string()) throw Error(ErrorCode::InvalidArgument, "transform needs 'fn'");
          n.token = fn->get<std::string>();
          p.erase("fn");
          n.params = p;
          break;
        }
        case OpKind::Sink: {
          auto st = p.find("structure");
          if (st == p.end() || !st->is_string()) throw Error(ErrorCode::InvalidArgument, "sink needs 'structure'");
          n.structure = parse_structure_kind(st->get<std::string>());
          p.erase("structure");
          n.params = p;
          break;
        }
        case OpKind::Source:
          break;
      }
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidArgument, "operator '" + n.id + "': " + e.what());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidArgument, "operator '" + n.id + "': " + e.what());
    }
    spec.nodes.push_back(std::move(n));
  }
  return spec;
}

std::string spec_shape_key(const DprSpec& spec) {
  DprSpec copy = spec;
  copy.id.clear();
  copy.declared_cost_hint.reset();
  return to_json(copy).dump();
}

namespace {

DprSpec chain(std::string id, std::vector<std::string> parse, const std::vector<FilterPredicate>& filters,
              OperatorNode sink) {
  DprSpec s;
  s.id = std::move(id);
  OperatorNode src;
  src.id = "src";
  src.kind = OpKind::Source;
  s.nodes.push_back(src);

  OperatorNode p;
  p.id = "parse";
  p.kind = OpKind::ParseFields;
  p.fields = sorted_fields(std::move(parse));
  p.inputs = {"src"};
  s.nodes.push_back(p);

  std::string prev = "parse";
  auto preds = normalize_conjunction(filters);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    OperatorNode f;
    f.id = "filter" + std::to_string(i);
    f.kind = OpKind::Filter;
    f.predicate = preds[i];
    f.inputs = {prev};
    prev = f.id;
    s.nodes.push_back(f);
  }
  sink.id = "sink";
  sink.kind = OpKind::Sink;
  sink.inputs = {prev};
  s.nodes.push_back(std::move(sink));
  return s;
}

std::vector<std::string> filter_fields(const std::vector<FilterPredicate>& filters) {
  std::vector<std::string> f;
  for (const auto& p : filters) f.push_back(p.field);
  return f;
}

}  // namespace

DprSpec make_index_spec(std::string id, const std::string& field, std::vector<FilterPredicate> filters) {
  OperatorNode sink;
  sink.structure = StructureKind::HashIndex;
  sink.params = {{"field", field}};
  auto parse = filter_fields(filters);
  parse.push_back(field);
  return chain(std::move(id), std::move(parse), filters, std::move(sink));
}

DprSpec make_prefilter_spec(std::string id, std::vector<FilterPredicate> filters, std::vector<std::string> stored) {
  OperatorNode sink;
  sink.structure = StructureKind::PreFilteredLog;
  sink.params = {{"fields", stored}};
  auto parse = filter_fields(filters);
  parse.insert(parse.end(), stored.begin(), stored.end());
  return chain(std::move(id), std::move(parse), filters, std::move(sink));
}

DprSpec make_aggregate_spec(std::string id, const std::string& group_by, std::vector<FilterPredicate> filters,
                            std::uint32_t bucket_records) {
  OperatorNode sink;
  sink.structure = StructureKind::MaterializedAggregate;
  sink.params = {{"group_by", group_by}, {"bucket_records", bucket_records}};
  auto parse = filter_fields(filters);
  parse.push_back(group_by);
  return chain(std::move(id), std::move(parse), filters, std::move(sink));
}

}  // namespace fluid
