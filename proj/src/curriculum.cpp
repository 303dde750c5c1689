#include "lattice/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lattice/errors.hpp"
#include "lattice/log.hpp"

namespace lattice::curriculum {

void CurriculumConfig::validate() const {
  if (k < 1) throw ConfigError("curriculum needs at least one bucket");
  if (patience < 1) throw ConfigError("patience must be at least 1 epoch");
  if (!(delta > 0.0)) {
    throw ConfigError("convergence delta must be positive, got " + std::to_string(delta));
  }
  if (max_epochs_per_stage < 1) {
    throw ConfigError("max_epochs_per_stage must be at least 1");
  }
}

Curriculum build_curriculum(std::vector<difficulty::ScoredSample> scores, std::size_t k) {
  if (scores.empty()) throw DataError("cannot build a curriculum from zero scored samples");
  if (k < 1) throw ConfigError("curriculum needs at least one bucket");
  if (k > scores.size()) {
    throw ConfigError("requested " + std::to_string(k) + " buckets for only " +
                      std::to_string(scores.size()) + " samples");
  }

  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a].s_final != scores[b].s_final) return scores[a].s_final < scores[b].s_final;
    return scores[a].index < scores[b].index;
  });

  const std::size_t n = scores.size();
  const std::size_t base = n / k;
  const std::size_t remainder = n % k;
  Curriculum curriculum;
  curriculum.scores = std::move(scores);
  std::size_t pos = 0;
  for (std::size_t b = 0; b < k; ++b) {
    std::size_t size = base + (b < remainder ? 1 : 0);
    curriculum.buckets.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(pos),
                                    order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return curriculum;
}

std::vector<int> assign_batch_numbers(const Curriculum& curriculum, std::size_t batch_size) {
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  std::vector<int> numbers(curriculum.scores.size(), 0);
  std::size_t pos = 0;
  for (const auto& bucket : curriculum.buckets) {
    for (std::size_t idx : bucket) {
      numbers[idx] = static_cast<int>(pos / batch_size) + 1;
      ++pos;
    }
  }
  return numbers;
}

Scheduler::Scheduler(const Curriculum& curriculum, const CurriculumConfig& cfg)
    : buckets_(curriculum.buckets), cfg_(cfg) {
  cfg_.validate();
  if (buckets_.empty()) throw DataError("scheduler needs a curriculum with buckets");
  merged_ = buckets_.front();
}

std::vector<std::size_t> Scheduler::next_batch(std::size_t batch_size, std::mt19937_64& rng) {
  if (finished_) throw InternalError("next_batch called on a finished schedule");
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (merged_.empty()) throw InternalError("scheduler has an empty merged set");
  if (cursor_ >= epoch_order_.size()) {
    epoch_order_ = merged_;
    std::shuffle(epoch_order_.begin(), epoch_order_.end(), rng);
    cursor_ = 0;
  }
  std::size_t take = std::min(batch_size, epoch_order_.size() - cursor_);
  std::vector<std::size_t> batch(epoch_order_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                                 epoch_order_.begin() +
                                     static_cast<std::ptrdiff_t>(cursor_ + take));
  cursor_ += take;
  return batch;
}

bool Scheduler::stage_converged() const {
  std::size_t stage_epochs = loss_history_.size() - stage_loss_start_;
  if (stage_epochs < cfg_.patience + 1) return false;
  for (std::size_t d = 0; d < cfg_.patience; ++d) {
    std::size_t t = loss_history_.size() - 1 - d;
    if (!(std::fabs(loss_history_[t] - loss_history_[t - 1]) < cfg_.delta)) return false;
  }
  return true;
}

void Scheduler::advance_stage() {
  if (next_bucket_ < buckets_.size()) {
    merged_.insert(merged_.end(), buckets_[next_bucket_].begin(), buckets_[next_bucket_].end());
    ++next_bucket_;
    epoch_in_stage_ = 0;
    stage_loss_start_ = loss_history_.size();
    epoch_order_.clear();
    cursor_ = 0;
  } else {
    finished_ = true;
  }
}

bool Scheduler::report_loss(double epoch_loss) {
  if (finished_) throw InternalError("report_loss called on a finished schedule");
  if (std::isnan(epoch_loss)) {
    throw DataError("training diverged: epoch loss is NaN at stage " +
                    std::to_string(next_bucket_));
  }
  loss_history_.push_back(epoch_loss);
  ++epoch_in_stage_;

  bool converged = stage_converged();
  bool capped = epoch_in_stage_ >= cfg_.max_epochs_per_stage;
  if (!converged && !capped) return false;

  forced_ = !converged;
  if (forced_) {
    log::info("stage " + std::to_string(next_bucket_) + " hit the " +
              std::to_string(cfg_.max_epochs_per_stage) + "-epoch cap; forcing the next merge");
  }
  std::size_t before = merged_.size();
  advance_stage();
  return merged_.size() > before;
}

}  // namespace lattice::curriculum
