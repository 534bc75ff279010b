#include "swr/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <stdexcept>
#include <string>
#include <thread>

namespace swr {

PipelinePlan::PipelinePlan(BlockPartition part, int worker_count, Index blocks_per_segment)
    : partition(part), workers(worker_count), segment_len(blocks_per_segment) {
  if (workers < 1) throw DomainError("pipeline needs at least one worker");
  if (segment_len < 1) throw DomainError("segment length must be at least one block");
}

PipelinePlan::PipelinePlan(BlockPartition part, int worker_count)
    : PipelinePlan(part, worker_count, part.blocks()) {}

Index PipelinePlan::segments() const { return (partition.blocks() + segment_len - 1) / segment_len; }

void CommunicationLog::validate(const PipelinePlan& plan) const {
  const Index b = plan.partition.blocks();
  std::vector<int> received(static_cast<std::size_t>(b), 0);
  for (const CarrierMessage& m : messages) {
    if (m.receiver != m.sender + 1) {
      throw std::logic_error("non-local message " + std::to_string(m.sender) + " -> " + std::to_string(m.receiver));
    }
    if (m.receiver < 1 || m.receiver >= b) throw std::logic_error("message to a block outside the plan");
    if (m.barrier != plan.segment_of(m.sender)) throw std::logic_error("message published at the wrong barrier");
    ++received[static_cast<std::size_t>(m.receiver)];
  }
  for (Index t = 1; t < b; ++t) {
    if (received[static_cast<std::size_t>(t)] != 1) {
      throw std::logic_error("block " + std::to_string(t) + " received " +
                             std::to_string(received[static_cast<std::size_t>(t)]) + " carriers");
    }
  }
  if (barriers != plan.segments()) {
    throw std::logic_error("expected " + std::to_string(plan.segments()) + " barriers, saw " +
                           std::to_string(barriers));
  }
}

States pipeline_b2p(const Coefficients& a, const Inputs& u, const PipelinePlan& plan, CommunicationLog* log) {
  const BlockPartition& part = plan.partition;
  detail::check_partition(a, part);
  const TimeMajor<double> uf = u.folded(a);
  const Index l = part.block_size();
  const Index b = part.blocks();
  const Index d = uf.cols();
  const int workers = static_cast<int>(std::min<Index>(plan.workers, b));

  TimeMajor<double> x(uf.rows(), d);
  TimeMajor<double> carriers(b, d);
  std::vector<std::vector<CarrierMessage>> received(static_cast<std::size_t>(workers));
  std::atomic<Index> barriers{0};
  auto on_phase = [&barriers]() noexcept { barriers.fetch_add(1, std::memory_order_relaxed); };
  std::barrier sync(workers, on_phase);

  auto run = [&](int worker) {
    for (Index seg = 0; seg < plan.segments(); ++seg) {
      const Index first = seg * plan.segment_len;
      const Index last = std::min(b, first + plan.segment_len);
      for (Index t = first; t < last; ++t) {
        if (t % workers == worker) b2p::local_pass(a.values(), uf, l, t, x, carriers);
      }
      sync.arrive_and_wait();
      for (Index t = first; t < last; ++t) {
        if (t % workers != worker || t == 0) continue;
        b2p::neighbor_pass(a.values(), l, t, carriers, x);
        if (log) received[static_cast<std::size_t>(worker)].push_back({t - 1, t, d, plan.segment_of(t - 1)});
      }
    }
  };

  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
  }

  if (log) {
    log->messages.clear();
    for (auto& part_log : received) log->messages.insert(log->messages.end(), part_log.begin(), part_log.end());
    std::sort(log->messages.begin(), log->messages.end(),
              [](const CarrierMessage& lhs, const CarrierMessage& rhs) { return lhs.receiver < rhs.receiver; });
    log->barriers = barriers.load();
  }
  return {std::move(x)};
}

CommunicationLog pipeline_trace(const PipelinePlan& plan, Index channels) {
  CommunicationLog log;
  for (Index t = 1; t < plan.partition.blocks(); ++t) {
    log.messages.push_back({t - 1, t, channels, plan.segment_of(t - 1)});
  }
  log.barriers = plan.segments();
  return log;
}

}  // namespace swr
