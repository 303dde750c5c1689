#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "lattice/difficulty.hpp"

namespace lattice::curriculum {

struct CurriculumConfig {
  std::size_t k = 10;                     ///< number of difficulty buckets
  std::size_t patience = 3;               ///< consecutive small deltas needed to advance
  double delta = 1e-4;                    ///< |loss_t - loss_{t-1}| convergence threshold
  std::size_t max_epochs_per_stage = 50;  ///< forced-merge cap against stalled stages
  double babystep_threshold = 0.8;        ///< accepted from configs, currently unused
  std::uint64_t rng_seed = 0;             ///< seed for the batch shuffler

  /// Throws ConfigError unless k >= 1, patience >= 1, delta > 0,
  /// max_epochs_per_stage >= 1.
  void validate() const;
};

/// Samples ordered from easy to hard and split into contiguous buckets.
/// Invariants: buckets partition all sample indices; the last score of bucket
/// i never exceeds the first score of bucket i+1; sizes differ by at most one
/// with larger buckets first.
struct Curriculum {
  std::vector<std::vector<std::size_t>> buckets;  ///< original sample indices, easy first
  std::vector<difficulty::ScoredSample> scores;   ///< the list the buckets were built from
};

/// Stable-sort the samples ascending by s_final (ties by original index) and
/// split them into k nearly equal contiguous buckets.
/// Throws ConfigError when k is 0 or exceeds the sample count, DataError when
/// scores is empty.
Curriculum build_curriculum(std::vector<difficulty::ScoredSample> scores, std::size_t k);

/// Walk the buckets in order and number consecutive groups of batch_size
/// samples 1, 2, 3, ... Returns the batch number per original sample index.
std::vector<int> assign_batch_numbers(const Curriculum& curriculum, std::size_t batch_size);

/// Stage scheduler for Baby Step training: starts on the easiest bucket,
/// serves shuffled mini-batches that partition the merged prefix within each
/// epoch, and merges the next bucket once the stage's losses converge (the
/// last `patience` consecutive deltas all below `delta`, tracked per stage)
/// or the per-stage epoch cap forces it.
class Scheduler {
 public:
  Scheduler(const Curriculum& curriculum, const CurriculumConfig& cfg);

  /// Next mini-batch of min(batch_size, remaining-in-epoch) indices drawn
  /// from the merged prefix; a fresh epoch reshuffles with `rng`.
  /// Throws InternalError once the schedule has finished.
  std::vector<std::size_t> next_batch(std::size_t batch_size, std::mt19937_64& rng);

  /// Record one epoch's training loss. Returns true when the report merged a
  /// further bucket; convergence on the last stage finishes the schedule
  /// instead. Throws DataError on NaN loss, InternalError after finishing.
  bool report_loss(double epoch_loss);

  bool is_finished() const { return finished_; }
  /// 1-based index of the current training stage (= buckets merged so far).
  std::size_t stage() const { return next_bucket_; }
  std::size_t merged_size() const { return merged_.size(); }
  std::size_t epoch_in_stage() const { return epoch_in_stage_; }
  const std::vector<double>& loss_history() const { return loss_history_; }
  /// True when the most recent advancement came from the epoch cap rather
  /// than convergence.
  bool last_advance_was_forced() const { return forced_; }

 private:
  bool stage_converged() const;
  void advance_stage();

  std::vector<std::vector<std::size_t>> buckets_;
  CurriculumConfig cfg_;
  std::vector<std::size_t> merged_;
  std::size_t next_bucket_ = 1;
  std::size_t epoch_in_stage_ = 0;
  std::vector<double> loss_history_;
  std::size_t stage_loss_start_ = 0;
  bool finished_ = false;
  bool forced_ = false;
  std::vector<std::size_t> epoch_order_;
  std::size_t cursor_ = 0;
};

}  // namespace lattice::curriculum
