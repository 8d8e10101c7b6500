#include "srm/branch/fanout.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <semaphore>
#include <thread>

namespace srm {

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

struct Slot {
  std::mutex mutex;
  std::condition_variable cv;
  bool done = false;
  bool failed = false;
  AuxiliaryRecord record;
  double wall_ms = 0.0;
};

void sort_by_ordinal(FanOutResult& result) {
  std::vector<size_t> index(result.records.size());
  for (size_t i = 0; i < index.size(); ++i) index[i] = i;
  std::sort(index.begin(), index.end(), [&](size_t a, size_t b) {
    return ordinal(result.records[a].kind) < ordinal(result.records[b].kind);
  });
  FanOutResult sorted;
  sorted.latency.total_wall_ms = result.latency.total_wall_ms;
  for (size_t i : index) {
    sorted.records.push_back(std::move(result.records[i]));
    sorted.latency.branches.push_back(result.latency.branches[i]);
  }
  result = std::move(sorted);
}

}  // namespace

FanOutResult fan_out(const BranchRegistry& registry, const Prompt& p, const Response& r) {
  if (registry.specs().empty()) throw ContractError("fan_out requires a non-empty registry");

  const auto start = Clock::now();
  auto semaphore = std::make_shared<std::counting_semaphore<>>(registry.concurrency_limit());
  std::vector<std::shared_ptr<Slot>> slots;
  slots.reserve(registry.specs().size());

  for (const auto& spec : registry.specs()) {
    auto slot = std::make_shared<Slot>();
    slots.push_back(slot);
    // Detached worker: a branch that outlives its deadline finishes quietly
    // against its own shared slot instead of blocking the gather.
    std::thread([slot, semaphore, spec, p, r, start] {
      semaphore->acquire();
      AuxiliaryRecord rec;
      bool failed = false;
      try {
        rec = generate_record(spec, p, r);
      } catch (...) {
        failed = true;
      }
      const double wall = ms_between(start, Clock::now());
      {
        std::lock_guard<std::mutex> lock(slot->mutex);
        slot->record = std::move(rec);
        slot->failed = failed;
        slot->wall_ms = wall;
        slot->done = true;
      }
      slot->cv.notify_all();
      semaphore->release();
    }).detach();
  }

  FanOutResult result;
  for (size_t i = 0; i < slots.size(); ++i) {
    const auto& spec = registry.specs()[i];
    auto& slot = *slots[i];
    const auto deadline = start + spec.timeout;
    std::unique_lock<std::mutex> lock(slot.mutex);
    const bool completed = slot.cv.wait_until(lock, deadline, [&] { return slot.done; });

    BranchLatency latency;
    latency.kind = spec.kind;
    if (!completed) {
      latency.timed_out = true;
      latency.wall_ms = ms_between(start, Clock::now());
      result.records.push_back(degraded_record(spec.kind, /*timed_out=*/true));
    } else if (slot.failed) {
      latency.failed = true;
      latency.wall_ms = slot.wall_ms;
      result.records.push_back(degraded_record(spec.kind, /*timed_out=*/false));
    } else {
      latency.wall_ms = slot.wall_ms;
      result.records.push_back(slot.record);
    }
    result.latency.branches.push_back(latency);
  }
  result.latency.total_wall_ms = ms_between(start, Clock::now());
  sort_by_ordinal(result);
  return result;
}

FanOutResult run_sequential(const BranchRegistry& registry, const Prompt& p, const Response& r) {
  if (registry.specs().empty()) throw ContractError("run_sequential requires a non-empty registry");
  const auto start = Clock::now();
  FanOutResult result;
  for (const auto& spec : registry.specs()) {
    const auto branch_start = Clock::now();
    BranchLatency latency;
    latency.kind = spec.kind;
    try {
      result.records.push_back(generate_record(spec, p, r));
    } catch (...) {
      latency.failed = true;
      result.records.push_back(degraded_record(spec.kind, /*timed_out=*/false));
    }
    latency.wall_ms = ms_between(branch_start, Clock::now());
    result.latency.branches.push_back(latency);
  }
  result.latency.total_wall_ms = ms_between(start, Clock::now());
  sort_by_ordinal(result);
  return result;
}

EnhancedInput enhance(const BranchRegistry& registry, const Prompt& p, const Response& r) {
  FanOutResult result = fan_out(registry, p, r);
  EnhancedInput input(p, r);
  for (auto& rec : result.records) input.add_auxiliary(std::move(rec));
  return input;
}

}  // namespace srm
