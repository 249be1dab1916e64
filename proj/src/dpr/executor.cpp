// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/dpr/executor.hpp"

#include <algorithm>
#include <map>

namespace fluid {

namespace {

const std::string* lookup(const std::vector<std::pair<std::string, std::string>>& t, const std::string& k) {
  for (const auto& [name, v] : t)
    if (name == k) return &v;
  return nullptr;
}

void put(std::vector<std::pair<std::string, std::string>>& t, const std::string& k, std::string_view v) {
  for (auto& [name, val] : t) {
    if (name == k) {
      val.assign(v);
      return;
    }
  }
  t.emplace_back(k, std::string(v));
}

}  // namespace

DagExecutor::DagExecutor(FusedDag dag, std::vector<std::shared_ptr<Structure>> structures,
                         std::vector<std::string> instance_ids)
    : dag_(std::move(dag)), structures_(std::move(structures)), instance_ids_(std::move(instance_ids)) {
  if (structures_.size() != dag_.targets.size())
    throw Error(ErrorCode::Internal, "executor: one structure per sink target required");
  if (instance_ids_.size() != dag_.spec_count) throw Error(ErrorCode::Internal, "executor: one id per spec required");

  const std::size_t n = dag_.nodes.size();
  compiled_.resize(n);
  std::size_t max_fields = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& op = dag_.nodes[i].op;
    auto& c = compiled_[i];
    c.cost = op.unit_cost();
    c.share = dag_.nodes[i].serves.empty() ? 0.0 : c.cost / static_cast<double>(dag_.nodes[i].serves.size());
    switch (op.kind) {
      case OpKind::ParseFields:
        c.extractor = FieldExtractor(op.fields);
        max_fields = std::max(max_fields, op.fields.size());
        break;
      case OpKind::Project:
        c.keep = op.fields;
        break;
      case OpKind::Transform: {
        const CatalogEntry* e = find_transform(op.token);
        if (!e) throw Error(ErrorCode::InvalidArgument, "unknown transform '" + op.token + "'");
        c.transform = e->make(op.params);
        c.input = op.params.value("input", "");
        c.output = op.params.value("output", "");
        break;
      }
      case OpKind::Sink:
        if (op.structure == StructureKind::PreFilteredLog) {
          for (const auto& f : op.params.at("fields")) c.stored.push_back(f.get<std::string>());
          max_fields = std::max(max_fields, c.stored.size());
        } else {
          c.key = op.params.value(op.structure == StructureKind::HashIndex ? "field" : "group_by", "");
        }
        break;
      default:
        break;
    }
  }
  inv_.assign(n, 0);
  passed_.assign(n, 0);
  skip_.assign(n, 0);
  inv_pending_.assign(n, 0);
  skip_pending_.assign(n, 0);
  own_.resize(n);
  out_.assign(n, nullptr);
  fv_.resize(max_fields);
  row_.resize(max_fields);
}

bool DagExecutor::eval(std::size_t i, const RawEvent& e) {
  const FusedNode& node = dag_.nodes[i];
  Compiled& c = compiled_[i];
  const Tuple* in = out_[node.parent];
  switch (node.op.kind) {
    case OpKind::Source:
      return true;
    case OpKind::ParseFields: {
      Tuple& t = own_[i];
      t = *in;
      std::span<FieldValue> fv(fv_.data(), c.extractor.size());
      c.extractor.extract(e.payload, fv);
      for (std::size_t k = 0; k < fv.size(); ++k)
        if (fv[k].found) put(t, c.extractor.paths()[k], fv[k].value);
      out_[i] = &t;
      return true;
    }
    case OpKind::Filter: {
      const std::string* v = lookup(*in, node.op.predicate.field);
      if (!v) {
        ++skip_pending_[i];
        return false;
      }
      if (!node.op.predicate.eval(*v)) return false;
      out_[i] = in;
      return true;
    }
    case OpKind::Project: {
      Tuple& t = own_[i];
      t.clear();
      for (const auto& f : c.keep)
        if (const std::string* v = lookup(*in, f)) t.emplace_back(f, *v);
      out_[i] = &t;
      return true;
    }
    case OpKind::Transform: {
      const std::string* v = lookup(*in, c.input);
      if (!v || !c.transform->apply(*v, scratch_)) {
        ++skip_pending_[i];
        return false;
      }
      Tuple& t = own_[i];
      t = *in;
      put(t, c.output, scratch_);
      out_[i] = &t;
      return true;
    }
    case OpKind::Sink: {
      bool ok = true;
      if (node.op.structure == StructureKind::PreFilteredLog) {
        for (std::size_t k = 0; k < c.stored.size(); ++k) row_[k] = lookup(*in, c.stored[k]);
        std::span<const std::string* const> row(row_.data(), c.stored.size());
        for (std::size_t t : node.targets)
          static_cast<PreFilteredLog&>(*structures_[t]).add(e.offset, e.event_ts, row);
      } else {
        const std::string* key = lookup(*in, c.key);
        if (!key) {
          ok = false;
        } else if (node.op.structure == StructureKind::HashIndex) {
          for (std::size_t t : node.targets) static_cast<HashIndexStructure&>(*structures_[t]).add(e.offset, *key);
        } else {
          for (std::size_t t : node.targets)
            static_cast<MaterializedAggregate&>(*structures_[t]).add(e.offset, e.event_ts, *key);
        }
      }
      if (!ok) ++skip_pending_[i];
      return ok;
    }
  }
  return false;
}

void DagExecutor::flush(BudgetMeter* meter, std::int64_t interval, std::uint64_t records) {
  std::map<std::string, InstanceUsage> per;
  std::vector<InstanceUsage> spec_usage(dag_.spec_count);
  double units = 0;
  for (std::size_t i = 0; i < dag_.nodes.size(); ++i) {
    std::uint64_t k = inv_pending_[i];
    std::uint64_t s = skip_pending_[i];
    if (k == 0 && s == 0) continue;
    const auto& c = compiled_[i];
    const double u = c.cost * static_cast<double>(k);
    units += u;
    stats_.by_kind[static_cast<std::size_t>(dag_.nodes[i].op.kind)] += k;
    stats_.invocations += k;
    for (std::size_t spec : dag_.nodes[i].serves) {
      spec_usage[spec].attributed += c.share * static_cast<double>(k);
      spec_usage[spec].standalone += u;
      spec_usage[spec].skipped += s;
    }
    inv_[i] += k;
    skip_[i] += s;
    inv_pending_[i] = 0;
    skip_pending_[i] = 0;
  }
  stats_.units += units;
  stats_.records += records;
  if (!meter) return;
  for (std::size_t s = 0; s < dag_.spec_count; ++s) {
    spec_usage[s].records = records;
    per[instance_ids_[s]] += spec_usage[s];
  }
  meter->record(interval, units, records, per);
}

void DagExecutor::run(std::span<const RawEvent> events, BudgetMeter* meter) {
  if (events.empty()) return;
  std::vector<Structure*> locked;
  for (const auto& s : structures_) locked.push_back(s.get());
  std::sort(locked.begin(), locked.end());
  locked.erase(std::unique(locked.begin(), locked.end()), locked.end());
  std::vector<std::unique_lock<std::shared_mutex>> locks;
  for (Structure* s : locked) locks.push_back(s->write_lock());

  const std::size_t n = dag_.nodes.size();
  static const Tuple kEmpty;
  out_[0] = &kEmpty;
  std::vector<char> present(n, 0);
  present[0] = 1;

  std::int64_t cur = meter ? meter->interval_of(events.front().ingest_ts) : 0;
  std::uint64_t records = 0;
  for (const RawEvent& e : events) {
    if (meter) {
      std::int64_t iv = meter->interval_of(e.ingest_ts);
      if (iv != cur) {
        flush(meter, cur, records);
        cur = iv;
        records = 0;
      }
    }
    ++records;
    for (std::size_t i = 1; i < n; ++i) {
      if (!present[dag_.nodes[i].parent]) {
        present[i] = 0;
        continue;
      }
      ++inv_pending_[i];
      present[i] = eval(i, e) ? 1 : 0;
      passed_[i] += present[i];
    }
  }
  flush(meter, cur, records);
}

SelectivityProfile DagExecutor::observed_selectivity() const {
  SelectivityProfile p;
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> acc;
  for (std::size_t i = 0; i < dag_.nodes.size(); ++i) {
    if (dag_.nodes[i].op.kind != OpKind::Filter || inv_[i] == 0) continue;
    auto& a = acc[dag_.nodes[i].op.predicate.key()];
    a.first += passed_[i];
    a.second += inv_[i];
  }
  for (const auto& [k, a] : acc) p[k] = static_cast<double>(a.first) / static_cast<double>(a.second);
  return p;
}

}  // namespace fluid
