#include "lattice/dtm.hpp"

#include <fstream>

#include "json.hpp"
#include "json_util.hpp"
#include "lattice/errors.hpp"

namespace lattice::dtm {

using ordered_json = nlohmann::ordered_json;

void TimingModel::record(int delay_ticks) {
  if (delay_ticks < 1) throw InternalError("dwell delay must be >= 1 tick");
  ++delay_counts[delay_ticks];
  ++total;
}

int TimingModel::max_delay() const {
  return delay_counts.empty() ? 0 : delay_counts.rbegin()->first;
}

std::vector<double> TimingModel::smoothed_pmf() const {
  const int support = max_delay();
  std::vector<double> pmf(static_cast<std::size_t>(support), 0.0);
  if (support == 0) return pmf;
  const double denom = static_cast<double>(total) + static_cast<double>(support);
  for (int d = 1; d <= support; ++d) {
    const auto it = delay_counts.find(d);
    const double count = it == delay_counts.end() ? 0.0 : static_cast<double>(it->second);
    pmf[static_cast<std::size_t>(d - 1)] = (count + 1.0) / denom;
  }
  return pmf;
}

double TimingModel::tail_probability(int ticks) const {
  const int support = max_delay();
  if (support == 0) return 0.0;
  if (ticks <= 1) return 1.0;
  if (ticks > support) return 0.0;
  const double denom = static_cast<double>(total) + static_cast<double>(support);
  double tail = 0.0;
  for (int d = ticks; d <= support; ++d) {
    const auto it = delay_counts.find(d);
    const double count = it == delay_counts.end() ? 0.0 : static_cast<double>(it->second);
    tail += (count + 1.0) / denom;
  }
  return tail;
}

StateKey quantize(const SystemState& state, const Schema& schema) {
  if (state.sensors.size() != schema.sensors.size() ||
      state.actuators.size() != schema.actuators.size()) {
    throw DataError("state dimension count does not match schema");
  }
  StateKey key;
  key.reserve(schema.actuators.size() + schema.sensors.size());
  for (std::size_t a = 0; a < schema.actuators.size(); ++a) {
    const int card = schema.actuators[a].cardinality;
    if (state.actuators[a] < 0 || state.actuators[a] >= card) {
      throw DataError("actuator " + schema.actuators[a].name + " code " +
                      std::to_string(state.actuators[a]) + " outside [0, " +
                      std::to_string(card) + ")");
    }
    key.push_back(state.actuators[a]);
  }
  for (std::size_t s = 0; s < schema.sensors.size(); ++s) {
    key.push_back(sensor_bin(state.sensors[s], schema.sensors[s], schema.sensor_bins));
  }
  return key;
}

TimedAutomaton::TimedAutomaton(Schema schema) : schema_(std::move(schema)) {
  schema_.validate();
}

TimedAutomaton TimedAutomaton::learn_offline(const Episode& episode, const Schema& schema) {
  if (episode.size() == 0) throw DataError("cannot learn an automaton from an empty episode");
  TimedAutomaton automaton(schema);
  for (const SystemState& state : episode.states) automaton.update(state);
  return automaton;
}

void TimedAutomaton::update(const SystemState& state) {
  const StateKey key = quantize(state, schema_);
  const EncodedState encoded = encode_state(state, schema_);

  StateNode& node = nodes_[key];
  ++node.visit_count;
  if (node.centroid.empty()) {
    node.centroid = encoded;
  } else {
    const double n = static_cast<double>(node.visit_count);
    for (std::size_t k = 0; k < encoded.size(); ++k) {
      node.centroid[k] += (encoded[k] - node.centroid[k]) / n;
    }
  }

  if (!cursor_) {
    cursor_ = Cursor{key, 1};
    return;
  }
  if (cursor_->key == key) {
    ++cursor_->ticks;
    return;
  }
  Transition& hop = nodes_[cursor_->key].out[key];
  ++hop.count;
  hop.timing.record(cursor_->ticks);
  cursor_ = Cursor{key, 1};
}

Prediction TimedAutomaton::predict_next(const StateKey& key, int ticks_in_state) const {
  if (nodes_.empty()) throw DataError("cannot predict from an empty automaton");

  auto node_it = nodes_.find(key);
  bool fallback = false;
  if (node_it == nodes_.end()) {
    fallback = true;
    std::size_t best_distance = key.size() + 1;
    auto best_it = nodes_.end();
    for (auto it = nodes_.begin(); it != nodes_.end(); ++it) {
      if (it->first.size() != key.size()) {
        throw DataError("queried key length does not match the automaton's keys");
      }
      std::size_t distance = 0;
      for (std::size_t k = 0; k < key.size(); ++k) {
        if (it->first[k] != key[k]) ++distance;
      }
      if (distance < best_distance) {  // map order makes ties lexicographic-smallest
        best_distance = distance;
        best_it = it;
      }
    }
    node_it = best_it;
  }

  const StateNode& node = node_it->second;
  if (node.out.empty()) return {node.centroid, fallback};

  const StateKey* best_key = nullptr;
  double best_score = -1.0;
  for (const auto& [dst, hop] : node.out) {
    const double score =
        static_cast<double>(hop.count) * hop.timing.tail_probability(ticks_in_state);
    if (score > best_score) {  // map order makes ties lexicographic-smallest
      best_score = score;
      best_key = &dst;
    }
  }
  return {nodes_.at(*best_key).centroid, fallback};
}

std::uint64_t TimedAutomaton::total_visits() const {
  std::uint64_t total = 0;
  for (const auto& [key, node] : nodes_) total += node.visit_count;
  return total;
}

bool TimedAutomaton::operator==(const TimedAutomaton& other) const {
  const bool cursor_equal =
      cursor_.has_value() == other.cursor_.has_value() &&
      (!cursor_ || (cursor_->key == other.cursor_->key && cursor_->ticks == other.cursor_->ticks));
  return cursor_equal && nodes_ == other.nodes_;
}

void TimedAutomaton::save(const std::string& path) const {
  ordered_json j;
  j["version"] = 1;
  j["schema"] = detail::schema_to_json(schema_);
  j["nodes"] = ordered_json::array();
  for (const auto& [key, node] : nodes_) {
    ordered_json n;
    n["key"] = key;
    n["visits"] = node.visit_count;
    n["centroid"] = node.centroid;
    j["nodes"].push_back(std::move(n));
  }
  j["transitions"] = ordered_json::array();
  for (const auto& [src, node] : nodes_) {
    for (const auto& [dst, hop] : node.out) {
      ordered_json t;
      t["src"] = src;
      t["dst"] = dst;
      t["count"] = hop.count;
      ordered_json delays = ordered_json::object();
      for (const auto& [delay, count] : hop.timing.delay_counts) {
        delays[std::to_string(delay)] = count;
      }
      t["delays"] = std::move(delays);
      j["transitions"].push_back(std::move(t));
    }
  }
  if (cursor_) {
    j["cursor"] = {{"key", cursor_->key}, {"ticks", cursor_->ticks}};
  } else {
    j["cursor"] = nullptr;
  }

  std::ofstream out(path);
  if (!out) throw IoError("cannot write automaton file: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

TimedAutomaton TimedAutomaton::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open automaton file: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& err) {
    throw DataError("malformed automaton file " + path + ": " + err.what());
  }
  try {
    if (j.at("version").get<int>() != 1) {
      throw DataError("unsupported automaton file version in " + path);
    }
    TimedAutomaton automaton(detail::schema_from_json(j.at("schema")));
    for (const auto& n : j.at("nodes")) {
      StateNode node;
      node.visit_count = n.at("visits").get<std::uint64_t>();
      node.centroid = n.at("centroid").get<EncodedState>();
      automaton.nodes_.emplace(n.at("key").get<StateKey>(), std::move(node));
    }
    for (const auto& t : j.at("transitions")) {
      const StateKey src = t.at("src").get<StateKey>();
      auto it = automaton.nodes_.find(src);
      if (it == automaton.nodes_.end()) {
        throw DataError("automaton file " + path + " references an unknown source node");
      }
      Transition hop;
      hop.count = t.at("count").get<std::uint64_t>();
      for (const auto& [delay, count] : t.at("delays").items()) {
        hop.timing.delay_counts[std::stoi(delay)] = count.get<std::uint64_t>();
        hop.timing.total += count.get<std::uint64_t>();
      }
      it->second.out.emplace(t.at("dst").get<StateKey>(), std::move(hop));
    }
    if (!j.at("cursor").is_null()) {
      automaton.cursor_ =
          Cursor{j.at("cursor").at("key").get<StateKey>(), j.at("cursor").at("ticks").get<int>()};
    }
    return automaton;
  } catch (const nlohmann::json::exception& err) {
    throw DataError("malformed automaton file " + path + ": " + err.what());
  }
}

double state_deviation(const EncodedState& observed, const EncodedState& predicted,
                       const Schema& schema) {
  if (observed.size() != schema.encoded_length() || predicted.size() != schema.encoded_length()) {
    throw DataError("encoded state length does not match schema");
  }
  const EncodingLayout layout = EncodingLayout::of(schema);

  double actuator_term = 0.0;
  if (!layout.actuator_slices.empty()) {
    double mismatched = 0.0;
    for (const auto& slice : layout.actuator_slices) {
      std::size_t observed_code = 0;
      std::size_t predicted_code = 0;
      for (std::size_t k = 1; k < slice.length; ++k) {
        if (observed[slice.offset + k] > observed[slice.offset + observed_code]) {
          observed_code = k;
        }
        if (predicted[slice.offset + k] > predicted[slice.offset + predicted_code]) {
          predicted_code = k;
        }
      }
      if (observed_code != predicted_code) mismatched += 1.0;
    }
    actuator_term = mismatched / static_cast<double>(layout.actuator_slices.size());
  }

  double sensor_term = 0.0;
  if (!layout.sensor_slices.empty()) {
    double sum = 0.0;
    for (std::size_t s = 0; s < layout.sensor_slices.size(); ++s) {
      const auto& slice = layout.sensor_slices[s];
      const SensorSpec& spec = schema.sensors[s];
      sum += std::abs(observed[slice.offset] - predicted[slice.offset]) / (spec.hi - spec.lo);
    }
    sensor_term = sum / static_cast<double>(layout.sensor_slices.size());
  }

  return (actuator_term + sensor_term) / 2.0;
}

Label ground_truth(const EncodedState& observed, const EncodedState& predicted,
                   const Schema& schema, double tau_gt) {
  return state_deviation(observed, predicted, schema) > tau_gt ? Label::Attack : Label::Normal;
}

std::vector<std::optional<Prediction>> replay_predictions(const TimedAutomaton& automaton,
                                                          const Episode& episode) {
  std::vector<std::optional<Prediction>> predictions(episode.size());
  if (episode.size() == 0) return predictions;

  StateKey current = quantize(episode.states[0], automaton.schema());
  int ticks = 1;
  for (std::size_t i = 1; i < episode.size(); ++i) {
    predictions[i] = automaton.predict_next(current, ticks);
    const StateKey key = quantize(episode.states[i], automaton.schema());
    if (key == current) {
      ++ticks;
    } else {
      current = key;
      ticks = 1;
    }
  }
  return predictions;
}

std::vector<Label> ground_truth_labels(const TimedAutomaton& automaton, const Episode& episode,
                                       double tau_gt) {
  const auto predictions = replay_predictions(automaton, episode);
  std::vector<Label> labels(episode.size(), Label::Normal);
  for (std::size_t i = 1; i < episode.size(); ++i) {
    const EncodedState observed = encode_state(episode.states[i], automaton.schema());
    labels[i] = ground_truth(observed, predictions[i]->encoded, automaton.schema(), tau_gt);
  }
  return labels;
}

}  // namespace lattice::dtm
