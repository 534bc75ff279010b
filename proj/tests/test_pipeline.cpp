#include <gtest/gtest.h>

#include <cstring>

#include "swr/pipeline.hpp"

using namespace swr;

namespace {

std::pair<Coefficients, Inputs> random_problem(std::uint64_t seed, Index n, Index d) {
  SeededRng rng(seed);
  Vector<double> a(n);
  for (Index i = 0; i < n; ++i) a[i] = rng.uniform(0.0, 1.0);
  TimeMajor<double> u(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < d; ++c) u(i, c) = rng.uniform(-1.0, 1.0);
  }
  return {Coefficients(a), Inputs(u)};
}

bool bitwise_equal(const TimeMajor<double>& x, const TimeMajor<double>& y) {
  return x.rows() == y.rows() && x.cols() == y.cols() &&
         std::memcmp(x.data(), y.data(), sizeof(double) * static_cast<std::size_t>(x.size())) == 0;
}

}  // namespace

TEST(PipelinePlan, Validation) {
  const BlockPartition part(64, 16);
  EXPECT_THROW(PipelinePlan(part, 0, 1), DomainError);
  EXPECT_THROW(PipelinePlan(part, 1, 0), DomainError);
  const PipelinePlan plan(part, 3, 2);
  EXPECT_EQ(plan.segments(), 2);
  EXPECT_EQ(plan.owner(4), 1);
  EXPECT_EQ(plan.segment_of(3), 1);
  EXPECT_EQ(PipelinePlan(part, 2).segments(), 1);
}

TEST(PipelineB2P, SingleWorkerEqualsSerialBitwise) {
  const auto [a, u] = random_problem(1, 256, 3);
  const BlockPartition part(256, 16);
  EXPECT_TRUE(bitwise_equal(pipeline_b2p(a, u, PipelinePlan(part, 1)).x, jagged_window_solve(a, u, part).x));
}

TEST(PipelineB2P, ManyWorkersEqualSerialBitwise) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto [a, u] = random_problem(seed, 4096, 2);
    const BlockPartition part(4096, 16);
    const auto serial = jagged_window_solve(a, u, part).x;
    ASSERT_TRUE(bitwise_equal(pipeline_b2p(a, u, PipelinePlan(part, 8)).x, serial)) << seed;
  }
}

TEST(PipelineB2P, SegmentsKeepResultsAndCountBarriers) {
  const auto [a, u] = random_problem(7, 256, 2);
  const BlockPartition part(256, 16);
  const auto serial = jagged_window_solve(a, u, part).x;
  for (int workers : {1, 2, 3, 4}) {
    for (Index seg : {1, 3, 4, 16}) {
      const PipelinePlan plan(part, workers, seg);
      CommunicationLog log;
      EXPECT_TRUE(bitwise_equal(pipeline_b2p(a, u, plan, &log).x, serial)) << workers << ' ' << seg;
      EXPECT_EQ(log.barriers, plan.segments());
      EXPECT_NO_THROW(log.validate(plan));
      EXPECT_EQ(log.messages.size(), pipeline_trace(plan, 2).messages.size());
    }
  }
}

TEST(PipelineB2P, RejectsIndivisibleLength) {
  const auto [a, u] = random_problem(2, 100, 1);
  EXPECT_THROW(pipeline_b2p(a, u, PipelinePlan(BlockPartition(96, 16), 2)), ShapeError);
}

TEST(PipelineTrace, FourBlocksOneSegment) {
  const auto log = pipeline_trace(PipelinePlan(BlockPartition(64, 16), 2), 3);
  ASSERT_EQ(log.messages.size(), 3u);
  EXPECT_EQ(log.barriers, 1);
  for (std::size_t m = 0; m < 3; ++m) {
    EXPECT_EQ(log.messages[m].sender, static_cast<Index>(m));
    EXPECT_EQ(log.messages[m].receiver, static_cast<Index>(m + 1));
    EXPECT_EQ(log.messages[m].payload, 3);
  }
}

TEST(PipelineTrace, SingleBlockSendsNothing) {
  const auto log = pipeline_trace(PipelinePlan(BlockPartition(16, 16), 4));
  EXPECT_TRUE(log.messages.empty());
  EXPECT_EQ(log.barriers, 1);
}

TEST(PipelineTrace, SixteenBlocksFourSegments) {
  const PipelinePlan plan(BlockPartition(256, 16), 4, 4);
  const auto log = pipeline_trace(plan);
  EXPECT_EQ(log.barriers, 4);
  EXPECT_EQ(log.messages.size(), 15u);
  for (const auto& m : log.messages) EXPECT_EQ(m.receiver, m.sender + 1);
  EXPECT_NO_THROW(log.validate(plan));
}

TEST(CommunicationLog, ValidateRejectsNonLocalTraffic) {
  const PipelinePlan plan(BlockPartition(64, 16), 2);
  CommunicationLog log = pipeline_trace(plan);
  log.messages[1].receiver = 3;
  EXPECT_THROW(log.validate(plan), std::logic_error);
  log = pipeline_trace(plan);
  log.barriers = 2;
  EXPECT_THROW(log.validate(plan), std::logic_error);
  log = pipeline_trace(plan);
  log.messages.pop_back();
  EXPECT_THROW(log.validate(plan), std::logic_error);
}
