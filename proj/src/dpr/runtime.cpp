// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/dpr/runtime.hpp"

#include <algorithm>
#include <set>

namespace fluid {

using nlohmann::json;

json InstanceInfo::to_json() const {
  json j;
  j["instance_id"] = id;
  j["dpr_id"] = spec.id;
  j["owner"] = owner;
  j["activation"] = activation;
  j["deactivation"] = deactivation ? json(*deactivation) : json(nullptr);
  j["status"] = finished ? "stopped" : deactivation ? "stopping" : "running";
  j["structures"] = structure_ids;
  j["spec"] = fluid::to_json(spec);
  j["units"] = {{"attributed", usage.attributed},
                {"standalone", usage.standalone},
                {"records", usage.records},
                {"skipped", usage.skipped}};
  return j;
}

DprRuntime::DprRuntime(RawLog& log, Registry& registry, BudgetMeter& meter, RuntimeOptions options)
    : log_(log), registry_(registry), meter_(meter), options_(options) {
  if (options_.batch_records == 0) options_.batch_records = 1;
  cached_level_ = options_.fusion;
  cursor_.store(log_.hi_watermark());
}

DprRuntime::~DprRuntime() { stop_background(); }

DprRuntime::InstancePtr DprRuntime::find_locked(const std::string& id) const {
  for (const auto& i : instances_)
    if (i->id == id) return i;
  for (const auto& i : instances_)
    if (i->spec.id == id && !i->deactivation) return i;
  return nullptr;
}

std::string DprRuntime::start(DprSpec spec, std::string owner) {
  validate(spec);
  auto inst = std::make_shared<Instance>();
  std::lock_guard lk(mu_);
  for (const auto& i : instances_)
    if (i->spec.id == spec.id && !i->deactivation)
      throw Error(ErrorCode::AlreadyExists, "dpr '" + spec.id + "' is already running as " + i->id);
  inst->id = spec.id + "@" + std::to_string(++seq_);
  inst->owner = std::move(owner);
  // Activation is read under mu_; step() reads the watermark under the same
  // lock, so no batch can straddle the activation point unseen.
  inst->activation = log_.hi_watermark();
  for (const OperatorNode* s : sinks(spec)) {
    StructureDescriptor d = sink_descriptor(spec, s->id);
    std::string sid = inst->id + "/" + s->id;
    auto st = make_structure(sid, d);
    RegistryEntry e;
    e.structure_id = sid;
    e.instance_id = inst->id;
    e.spec_id = spec.id;
    e.sink_node = s->id;
    e.owner = inst->owner;
    e.descriptor = d;
    e.activation = inst->activation;
    e.processed_hi = inst->activation;
    e.structure = st;
    registry_.add(std::move(e));
    inst->sink_nodes.push_back(s->id);
    inst->structure_ids.push_back(sid);
    inst->descriptors.push_back(d);
    inst->structures.push_back(std::move(st));
  }
  inst->spec = std::move(spec);
  instances_.push_back(inst);
  return inst->id;
}

Coverage DprRuntime::stop(const std::string& id) {
  InstancePtr inst;
  {
    std::lock_guard lk(mu_);
    inst = find_locked(id);
    if (!inst) throw Error(ErrorCode::NotFound, "no dpr instance '" + id + "'");
    if (inst->deactivation) throw Error(ErrorCode::FailedPrecondition, "instance '" + inst->id + "' already stopped");
    inst->deactivation = std::max(inst->activation, log_.hi_watermark());
    registry_.deactivate(inst->id, *inst->deactivation);
    if (*inst->deactivation == inst->activation) {
      for (auto& s : inst->structures) s->seal();
      inst->finished = true;
      inst->structures.clear();
    }
  }
  return Coverage(OffsetRange{inst->activation, *inst->deactivation});
}

DagExecutor& DprRuntime::executor_for(const std::vector<InstancePtr>& set) {
  std::string key;
  for (const auto& i : set) key += i->id + "\n";
  auto it = executors_.find(key);
  if (it != executors_.end()) return *it->second;

  std::vector<DprSpec> specs;
  std::vector<std::string> ids;
  for (const auto& i : set) {
    specs.push_back(i->spec);
    ids.push_back(i->id);
  }
  FusedDag dag = fuse(specs, cached_level_);
  std::vector<std::shared_ptr<Structure>> structures;
  for (const auto& t : dag.targets) {
    const Instance& inst = *set[t.spec];
    auto pos = std::find(inst.sink_nodes.begin(), inst.sink_nodes.end(), t.node) - inst.sink_nodes.begin();
    structures.push_back(inst.structures[static_cast<std::size_t>(pos)]);
  }
  auto ex = std::make_unique<DagExecutor>(std::move(dag), std::move(structures), std::move(ids));
  return *executors_.emplace(key, std::move(ex)).first->second;
}

void DprRuntime::finish_due(Offset pos) {
  std::lock_guard lk(mu_);
  for (auto& i : instances_) {
    if (i->finished || !i->deactivation || *i->deactivation > pos) continue;
    for (auto& s : i->structures) s->seal();
    i->finished = true;
    // The registry owns the data from here on; releasing it there frees it.
    i->structures.clear();
  }
  // Drop cached executors whose instance set contains a finished instance.
  std::set<std::string> done;
  for (const auto& i : instances_)
    if (i->finished) done.insert(i->id);
  std::erase_if(executors_, [&](const auto& kv) {
    std::size_t b = 0;
    const std::string& k = kv.first;
    while (b < k.size()) {
      std::size_t e = k.find('\n', b);
      if (done.count(k.substr(b, e - b))) return true;
      b = e + 1;
    }
    return false;
  });
}

std::size_t DprRuntime::step(Offset until) {
  std::vector<InstancePtr> candidates;
  Offset hi;
  {
    std::lock_guard lk(mu_);
    hi = std::min(log_.hi_watermark(), until);
    if (options_.fusion != cached_level_) {
      executors_.clear();
      cached_level_ = options_.fusion;
    }
    for (const auto& i : instances_)
      if (!i->finished) candidates.push_back(i);
  }
  const Offset c = cursor_.load(std::memory_order_relaxed);
  if (c >= hi) {
    finish_due(c);
    return 0;
  }
  const Offset end = std::min<Offset>(hi, c + options_.batch_records);

  std::vector<InstancePtr> active;
  std::set<Offset> cuts{c, end};
  for (const auto& i : candidates) {
    // deactivation was fixed before we copied the list or is >= hi.
    std::optional<Offset> deact;
    {
      std::lock_guard lk(mu_);
      deact = i->deactivation;
    }
    if (i->activation >= end || (deact && *deact <= c)) continue;
    active.push_back(i);
    if (i->activation > c) cuts.insert(i->activation);
    if (deact && *deact < end) cuts.insert(*deact);
  }

  if (!active.empty()) {
    batch_.clear();
    log_.read(c, end - c, batch_);
    std::vector<Offset> pts(cuts.begin(), cuts.end());
    for (std::size_t p = 0; p + 1 < pts.size(); ++p) {
      const Offset a = pts[p], b = pts[p + 1];
      std::vector<InstancePtr> set;
      for (const auto& i : active) {
        std::optional<Offset> deact;
        {
          std::lock_guard lk(mu_);
          deact = i->deactivation;
        }
        if (i->activation <= a && (!deact || *deact >= b)) set.push_back(i);
      }
      if (set.empty()) continue;
      DagExecutor& ex = executor_for(set);
      const ExecStats before = ex.stats();
      ex.run(std::span<const RawEvent>(batch_).subspan(a - c, b - a), &meter_);
      const ExecStats& after = ex.stats();
      std::lock_guard lk(totals_mu_);
      totals_.records += after.records - before.records;
      totals_.invocations += after.invocations - before.invocations;
      totals_.units += after.units - before.units;
      for (std::size_t k = 0; k < kOpKindCount; ++k) totals_.by_kind[k] += after.by_kind[k] - before.by_kind[k];
    }
    for (const auto& i : active) registry_.advance(i->id, end);
  }
  cursor_.store(end, std::memory_order_release);
  finish_due(end);
  return end - c;
}

std::size_t DprRuntime::pump(std::optional<Offset> until) {
  std::lock_guard lk(exec_mu_);
  const Offset target = std::min(log_.hi_watermark(), until.value_or(std::numeric_limits<Offset>::max()));
  std::size_t n = 0;
  while (cursor() < target) n += step(target);
  finish_due(cursor());
  return n;
}

void DprRuntime::start_background() {
  if (thread_.joinable()) return;
  stop_.store(false);
  thread_ = std::thread([this] {
    while (!stop_.load(std::memory_order_acquire)) {
      std::size_t n;
      {
        std::lock_guard lk(exec_mu_);
        n = step(std::numeric_limits<Offset>::max());
      }
      if (n == 0) log_.wait_for(cursor(), std::chrono::milliseconds(20));
    }
  });
}

void DprRuntime::stop_background() {
  if (!thread_.joinable()) return;
  stop_.store(true, std::memory_order_release);
  thread_.join();
}

bool DprRuntime::wait_caught_up(std::chrono::milliseconds timeout) {
  const Offset target = log_.hi_watermark();
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (cursor() < target) {
    if (!background()) {
      pump(target);
      continue;
    }
    if (std::chrono::steady_clock::now() >= deadline) return false;
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  return true;
}

InstanceInfo DprRuntime::info(const Instance& inst) const {
  InstanceInfo out;
  out.id = inst.id;
  out.spec = inst.spec;
  out.owner = inst.owner;
  out.activation = inst.activation;
  out.deactivation = inst.deactivation;
  out.finished = inst.finished;
  out.structure_ids = inst.structure_ids;
  out.descriptors = inst.descriptors;
  out.usage = meter_.instance_total(inst.id);
  return out;
}

std::vector<InstanceInfo> DprRuntime::instances() const {
  std::lock_guard lk(mu_);
  std::vector<InstanceInfo> out;
  for (const auto& i : instances_) out.push_back(info(*i));
  return out;
}

std::optional<InstanceInfo> DprRuntime::instance(const std::string& id) const {
  std::lock_guard lk(mu_);
  if (auto i = find_locked(id)) return info(*i);
  return std::nullopt;
}

std::optional<std::string> DprRuntime::running_instance_of(const std::string& spec_id) const {
  std::lock_guard lk(mu_);
  for (const auto& i : instances_)
    if (i->spec.id == spec_id && !i->deactivation) return i->id;
  return std::nullopt;
}

void DprRuntime::set_fusion_level(FusionLevel level) {
  std::lock_guard lk(mu_);
  options_.fusion = level;
}

FusionLevel DprRuntime::fusion_level() const {
  std::lock_guard lk(mu_);
  return options_.fusion;
}

std::pair<FusedDag, std::vector<DprSpec>> DprRuntime::current_dag() const {
  std::vector<DprSpec> specs;
  FusionLevel level;
  {
    std::lock_guard lk(mu_);
    level = options_.fusion;
    for (const auto& i : instances_)
      if (!i->deactivation) specs.push_back(i->spec);
  }
  FusedDag dag = fuse(specs, level);
  return {std::move(dag), std::move(specs)};
}

ExecStats DprRuntime::totals() const {
  std::lock_guard lk(totals_mu_);
  return totals_;
}

}  // namespace fluid
