#pragma once

// Host-thread emulation of the fused B2P kernel: each worker owns a set of
// blocks, publishes its boundary value to a write-once carrier slot, meets
// the others at one barrier per segment, then applies the rank-one update
// from the previous block's slot.

#include <vector>

#include "swr/window.hpp"

namespace swr {

struct PipelinePlan {
  BlockPartition partition;
  int workers = 1;
  /// Blocks per synchronization segment.
  Index segment_len = 1;

  PipelinePlan(BlockPartition part, int worker_count, Index blocks_per_segment);
  /// One segment spanning every block.
  PipelinePlan(BlockPartition part, int worker_count);

  Index segments() const;
  Index segment_of(Index block) const { return block / segment_len; }
  /// Block-cyclic owner of a block.
  int owner(Index block) const { return static_cast<int>(block % workers); }
};

/// One carrier hand-off. `barrier` is the segment barrier that publishes it.
struct CarrierMessage {
  Index sender = 0;
  Index receiver = 0;
  Index payload = 0;
  Index barrier = 0;

  friend bool operator==(const CarrierMessage&, const CarrierMessage&) = default;
};

struct CommunicationLog {
  std::vector<CarrierMessage> messages;
  Index barriers = 0;

  /// Throws std::logic_error unless every message goes t -> t+1, every
  /// block after the first receives exactly one, and there is one barrier
  /// per segment.
  void validate(const PipelinePlan& plan) const;
};

/// Threaded B2P. Bitwise identical to jagged_window_solve for any plan.
/// When `log` is given it receives the hand-offs actually performed.
States pipeline_b2p(const Coefficients& a, const Inputs& u, const PipelinePlan& plan,
                    CommunicationLog* log = nullptr);

/// The hand-offs and barriers a plan performs, without running it.
CommunicationLog pipeline_trace(const PipelinePlan& plan, Index channels = 1);

}  // namespace swr
