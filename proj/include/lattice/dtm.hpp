#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lattice/timeseries.hpp"

namespace lattice::dtm {

/// Discrete identity of an automaton state: actuator codes (schema order)
/// followed by sensor quantization bins.
using StateKey = std::vector<int>;

/// Empirical dwell-time distribution attached to one transition. Delays are
/// whole ticks spent in the source state before the hop.
struct TimingModel {
  std::map<int, std::uint64_t> delay_counts;
  std::uint64_t total = 0;

  void record(int delay_ticks);
  int max_delay() const;  ///< 0 when empty

  /// Add-one-smoothed distribution over delays 1..max_delay():
  /// p(d) = (count(d) + 1) / (total + max_delay). Sums to 1 within 1e-12.
  std::vector<double> smoothed_pmf() const;

  /// P(delay >= ticks) under the smoothed distribution. 1 for ticks <= 1,
  /// 0 beyond max_delay() and for an empty model.
  double tail_probability(int ticks) const;

  bool operator==(const TimingModel&) const = default;
};

struct Transition {
  std::uint64_t count = 0;
  TimingModel timing;

  bool operator==(const Transition&) const = default;
};

struct StateNode {
  std::uint64_t visit_count = 0;
  EncodedState centroid;                 ///< running mean of encodings seen at this key
  std::map<StateKey, Transition> out;    ///< keyed by destination, lexicographic

  bool operator==(const StateNode&) const = default;
};

/// Prediction of the next observation: the most plausible destination
/// centroid. `fallback` is set when the queried key was unknown and the
/// nearest known key was substituted.
struct Prediction {
  EncodedState encoded;
  bool fallback = false;
};

/// Actuator codes followed by sensor bins (floor quantization against the
/// schema limits, clamped). Pure in state and schema.
StateKey quantize(const SystemState& state, const Schema& schema);

/// Timed automaton learned from observation streams. States are quantized
/// keys; transitions carry hop counts and dwell-time histograms. Learning is
/// strictly chronological, and feeding the same stream through update() one
/// sample at a time reproduces learn_offline() exactly.
class TimedAutomaton {
 public:
  TimedAutomaton() = default;
  explicit TimedAutomaton(Schema schema);

  static TimedAutomaton learn_offline(const Episode& episode, const Schema& schema);

  /// Ingest the next observation of the stream: updates the node (visit
  /// count, centroid), extends the current dwell or records a transition.
  void update(const SystemState& state);

  /// Most plausible next encoding from `key` after `ticks_in_state` dwell
  /// ticks: argmax over outgoing transitions of count * tail_probability,
  /// ties broken by lexicographically smallest destination key. A node
  /// without outgoing transitions predicts its own centroid. An unknown key
  /// falls back to the nearest known key by Hamming distance (ties:
  /// lexicographically smallest) and marks the prediction.
  /// Throws DataError when the automaton is empty.
  Prediction predict_next(const StateKey& key, int ticks_in_state) const;

  const Schema& schema() const { return schema_; }
  const std::map<StateKey, StateNode>& nodes() const { return nodes_; }
  std::uint64_t total_visits() const;

  void save(const std::string& path) const;
  static TimedAutomaton load(const std::string& path);

  bool operator==(const TimedAutomaton& other) const;

 private:
  struct Cursor {
    StateKey key;
    int ticks = 0;
  };

  Schema schema_;
  std::map<StateKey, StateNode> nodes_;
  std::optional<Cursor> cursor_;
};

/// Mean deviation between an observed encoding and a predicted one:
/// (actuator term + sensor term) / 2, where the actuator term is the mean
/// one-hot argmax mismatch indicator and the sensor term is the mean
/// |observed - predicted| / (hi - lo) over sensor values. A schema side with
/// no dimensions contributes 0.
double state_deviation(const EncodedState& observed, const EncodedState& predicted,
                       const Schema& schema);

/// Attack iff state_deviation(observed, predicted) > tau_gt.
Label ground_truth(const EncodedState& observed, const EncodedState& predicted,
                   const Schema& schema, double tau_gt);

/// Walk an episode through the automaton, emitting for every index i >= 1
/// the prediction issued from the state at i-1 given its dwell ticks there.
/// Index 0 has no prediction.
std::vector<std::optional<Prediction>> replay_predictions(const TimedAutomaton& automaton,
                                                          const Episode& episode);

/// Per-sample ground-truth labels from replay predictions; index 0 (no
/// prediction) is Normal.
std::vector<Label> ground_truth_labels(const TimedAutomaton& automaton, const Episode& episode,
                                       double tau_gt);

}  // namespace lattice::dtm
