#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "egl/rng.hpp"

namespace egl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct EmptyBuffer : std::runtime_error {
  EmptyBuffer() : std::runtime_error("replay buffer is empty") {}
};

// One sampled evaluation (x, y). Coordinates may be raw or mapped; the owner
// of the containing batch knows which.
struct EvalPoint {
  Vec x;
  double y = 0.0;
};

enum class SampleMode { box, ball, cone };

// One exploration step's worth of samples around a candidate.
struct ExplorationBatch {
  std::vector<EvalPoint> points;
  Vec center;
  double epsilon = 0.0;
  SampleMode mode = SampleMode::box;

  std::size_t size() const { return points.size(); }
};

// FIFO of the most recent exploration batches. Pairs used for gradient
// training are always formed within a batch, never across batches.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
  }

  void push(ExplorationBatch batch) {
    if (batch.points.empty()) throw std::invalid_argument("cannot push an empty batch");
    batches_.push_back(std::move(batch));
    if (batches_.size() > capacity_) batches_.pop_front();
    rebuild_weights();
  }

  std::size_t size() const { return batches_.size(); }
  bool empty() const { return batches_.empty(); }
  std::size_t capacity() const { return capacity_; }

  const ExplorationBatch& batch(std::size_t i) const { return batches_.at(i); }
  ExplorationBatch& batch(std::size_t i) { return batches_.at(i); }

  std::size_t total_points() const {
    std::size_t n = 0;
    for (const auto& b : batches_) n += b.size();
    return n;
  }

  // Number of ordered within-batch pairs (i != j) across the whole buffer.
  std::size_t total_pairs() const {
    std::size_t n = 0;
    for (const auto& b : batches_) n += b.size() * (b.size() - 1);
    return n;
  }

  using PointPair = std::pair<const EvalPoint*, const EvalPoint*>;

  // Every ordered pair (i, j), i != j, both from the same batch.
  std::vector<PointPair> all_pairs() const {
    std::vector<PointPair> out;
    out.reserve(total_pairs());
    for (const auto& b : batches_)
      for (std::size_t i = 0; i < b.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
          if (i != j) out.emplace_back(&b.points[i], &b.points[j]);
    return out;
  }

  // Uniform over all stored points.
  const EvalPoint& sample_point(Rng& rng) const {
    if (batches_.empty()) throw EmptyBuffer();
    std::uint64_t pick = rng.below(total_points());
    for (const auto& b : batches_) {
      if (pick < b.size()) return b.points[pick];
      pick -= b.size();
    }
    return batches_.back().points.back();  // unreachable
  }

  // Uniform over all ordered within-batch pairs.
  PointPair sample_pair(Rng& rng) const {
    if (batches_.empty()) throw EmptyBuffer();
    if (pair_weight_total_ == 0) throw std::logic_error("no pairs available (singleton batches)");
    std::uint64_t pick = rng.below(pair_weight_total_);
    std::size_t bi = 0;
    while (pick >= pair_weights_[bi]) {
      pick -= pair_weights_[bi];
      ++bi;
    }
    const auto& b = batches_[bi];
    const std::size_t m = b.size();
    const std::size_t i = pick / (m - 1);
    std::size_t j = pick % (m - 1);
    if (j >= i) ++j;
    return {&b.points[i], &b.points[j]};
  }

 private:
  void rebuild_weights() {
    pair_weights_.clear();
    pair_weight_total_ = 0;
    for (const auto& b : batches_) {
      const std::uint64_t w = static_cast<std::uint64_t>(b.size()) * (b.size() - 1);
      pair_weights_.push_back(w);
      pair_weight_total_ += w;
    }
  }

  std::deque<ExplorationBatch> batches_;
  std::size_t capacity_;
  std::vector<std::uint64_t> pair_weights_;
  std::uint64_t pair_weight_total_ = 0;
};

struct TracePoint {
  std::int64_t t = 0;  // evaluation index, 1-based
  double y = 0.0;
  double y_best = 0.0;  // running minimum
};

// Full accounting of one optimization run. The trace holds every single
// objective evaluation, warm-up and exploration included.
struct RunRecord {
  std::vector<TracePoint> trace;
  Vec x_best;
  double y_best = std::numeric_limits<double>::infinity();
  std::int64_t evaluations_used = 0;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;

  std::string to_csv() const;
  std::string to_json_sidecar() const;
};

// FNV-1a, used to fingerprint configs in run sidecars.
std::uint64_t fnv1a(const std::string& text);

// Shortest round-trip decimal form of a double (printed identically on rerun).
std::string format_double(double v);

}  // namespace egl
