#include "lattice/difficulty.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "lattice/errors.hpp"

namespace lattice::difficulty {

namespace {

constexpr double kMismatchTolerance = 1e-6;
constexpr double kSigmaFloor = 1e-9;

void check_index(const Episode& episode, std::size_t i, const char* op) {
  if (i >= episode.size()) {
    throw DataError(std::string(op) + ": sample index " + std::to_string(i) +
                    " out of range for episode of " + std::to_string(episode.size()) +
                    " samples");
  }
}

// log(sum_k exp(v_k - max(v))); callers pair it with max(v) to evaluate
// softmax terms without overflow.
double log_sum_exp_shifted(const std::vector<double>& v, double max_value) {
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - max_value);
  return std::log(sum);
}

std::vector<Label> resolve_labels(const Episode& episode, const dtm::TimedAutomaton* automaton,
                                  const MeasurerConfig& cfg, Variant variant) {
  if (episode.labeled()) return episode.labels;
  if (automaton == nullptr) {
    throw DataError("variant '" + to_string(variant) +
                    "' requires attack labels: the episode is unlabeled and no automaton "
                    "was given to derive ground truth");
  }
  return dtm::ground_truth_labels(*automaton, episode, cfg.tau_gt);
}

}  // namespace

Variant variant_from_string(const std::string& name) {
  if (name == "pdm_only") return Variant::pdm_only;
  if (name == "hdm_only") return Variant::hdm_only;
  if (name == "cem_only") return Variant::cem_only;
  if (name == "cb1") return Variant::cb1;
  if (name == "cb2") return Variant::cb2;
  if (name == "none") return Variant::none;
  throw ConfigError("unknown scoring variant '" + name +
                    "' (expected pdm_only, hdm_only, cem_only, cb1, cb2, or none)");
}

std::string to_string(Variant variant) {
  switch (variant) {
    case Variant::pdm_only: return "pdm_only";
    case Variant::hdm_only: return "hdm_only";
    case Variant::cem_only: return "cem_only";
    case Variant::cb1: return "cb1";
    case Variant::cb2: return "cb2";
    case Variant::none: return "none";
  }
  throw InternalError("unhandled scoring variant");
}

void MeasurerConfig::validate() const {
  if (!(lambda > 0.0) || !(lambda < 1.0)) {
    throw ConfigError("lambda must lie strictly between 0 and 1, got " +
                      std::to_string(lambda));
  }
  if (s_window < 1) throw ConfigError("s_window must be at least 1");
  if (context_len < 2) {
    throw ConfigError("context_len must be at least 2, got " + std::to_string(context_len));
  }
}

std::vector<double> minmax_normalize(const std::vector<double>& raw) {
  if (raw.empty()) return {};
  double lo = *std::min_element(raw.begin(), raw.end());
  double hi = *std::max_element(raw.begin(), raw.end());
  std::vector<double> out(raw.size(), 0.0);
  if (hi > lo) {
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - lo) / (hi - lo);
  }
  return out;
}

double score_complexity(const Episode& episode, const Schema& schema, std::size_t i,
                        const MeasurerConfig& cfg) {
  check_index(episode, i, "score_complexity");
  std::size_t begin = i + 1 >= cfg.context_len ? i + 1 - cfg.context_len : 0;
  std::size_t count = 0;
  std::vector<int> seen;
  for (std::size_t a = 0; a < schema.actuators.size(); ++a) {
    seen.clear();
    for (std::size_t j = begin; j <= i; ++j) {
      int code = episode.states[j].actuators[a];
      if (std::find(seen.begin(), seen.end(), code) == seen.end()) seen.push_back(code);
    }
    count += seen.size();
  }
  for (std::size_t s = 0; s < schema.sensors.size(); ++s) {
    seen.clear();
    for (std::size_t j = begin; j <= i; ++j) {
      int bin = sensor_bin(episode.states[j].sensors[s], schema.sensors[s], schema.sensor_bins);
      if (std::find(seen.begin(), seen.end(), bin) == seen.end()) seen.push_back(bin);
    }
    count += seen.size();
  }
  return static_cast<double>(count);
}

double score_diversity(const Episode& episode, const Schema& schema, std::size_t i,
                       const MeasurerConfig& cfg) {
  check_index(episode, i, "score_diversity");
  const double n = static_cast<double>(episode.size());
  double p = 1.0;
  for (std::size_t a = 0; a < schema.actuators.size(); ++a) {
    int code = episode.states[i].actuators[a];
    std::size_t count = 0;
    for (const auto& state : episode.states) {
      if (state.actuators[a] == code) ++count;
    }
    double freq = static_cast<double>(count) / n;
    if (cfg.diversity_mode == DiversityMode::neg_log) {
      double floor_freq = 1.0 / (n + static_cast<double>(schema.actuators[a].cardinality));
      freq = std::max(freq, floor_freq);
    }
    p *= freq;
  }
  return cfg.diversity_mode == DiversityMode::neg_log ? -std::log(p) : p;
}

double score_noise(const Episode& episode, std::size_t i, const MeasurerConfig& cfg) {
  check_index(episode, i, "score_noise");
  if (i < cfg.context_len) return 0.0;
  const std::size_t n_sensors = episode.states[i].sensors.size();
  if (n_sensors == 0) return 0.0;
  const double len = static_cast<double>(cfg.context_len);
  double acc = 0.0;
  for (std::size_t s = 0; s < n_sensors; ++s) {
    double sum = 0.0;
    for (std::size_t j = i - cfg.context_len; j < i; ++j) sum += episode.states[j].sensors[s];
    double mean = sum / len;
    double varsum = 0.0;
    for (std::size_t j = i - cfg.context_len; j < i; ++j) {
      double dx = episode.states[j].sensors[s] - mean;
      varsum += dx * dx;
    }
    double sigma = std::sqrt(varsum / len);
    double z = (episode.states[i].sensors[s] - mean) / std::max(sigma, kSigmaFloor);
    acc += std::fabs(z);
  }
  return acc / static_cast<double>(n_sensors);
}

std::vector<std::size_t> attack_distances(const std::vector<Label>& labels) {
  const std::size_t n = labels.size();
  bool any = std::any_of(labels.begin(), labels.end(),
                         [](Label l) { return l == Label::Attack; });
  if (!any) {
    throw DataError("attack_distances: the label sequence contains no Attack samples; "
                    "provide labeled data or derive labels from an automaton");
  }
  std::vector<std::size_t> dist(n, n);
  std::size_t last = n;  // index of the most recent attack, n = none yet
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == Label::Attack) last = i;
    if (last != n) dist[i] = i - last;
  }
  last = n;
  for (std::size_t i = n; i-- > 0;) {
    if (labels[i] == Label::Attack) last = i;
    if (last != n) dist[i] = std::min(dist[i], last - i);
  }
  return dist;
}

double score_vulnerability(const Episode& episode, std::size_t i,
                           const std::vector<Label>& labels, const MeasurerConfig& cfg) {
  check_index(episode, i, "score_vulnerability");
  if (labels.size() != episode.size()) {
    throw DataError("score_vulnerability: " + std::to_string(labels.size()) +
                    " labels for an episode of " + std::to_string(episode.size()) + " samples");
  }
  auto dist = attack_distances(labels);
  std::vector<double> wdist(dist.size());
  for (std::size_t j = 0; j < dist.size(); ++j) {
    wdist[j] = static_cast<double>(dist[j] / cfg.s_window);
  }
  auto normalized = minmax_normalize(wdist);
  return cfg.vulnerability_mode == VulnerabilityMode::inverse ? 1.0 - normalized[i]
                                                              : normalized[i];
}

double score_pdm(const Episode& episode, const Schema& schema, std::size_t i,
                 const std::vector<Label>& labels, const MeasurerConfig& cfg) {
  check_index(episode, i, "score_pdm");
  std::vector<double> comp, div, noi;
  comp.reserve(episode.size());
  div.reserve(episode.size());
  noi.reserve(episode.size());
  for (std::size_t j = 0; j < episode.size(); ++j) {
    comp.push_back(score_complexity(episode, schema, j, cfg));
    div.push_back(score_diversity(episode, schema, j, cfg));
    noi.push_back(score_noise(episode, j, cfg));
  }
  auto ncomp = minmax_normalize(comp);
  auto ndiv = minmax_normalize(div);
  auto nnoi = minmax_normalize(noi);
  double vul = score_vulnerability(episode, i, labels, cfg);
  return (ncomp[i] + ndiv[i] + nnoi[i] + vul) / 4.0;
}

double score_hdm(const EncodedState& u, const EncodedState& u_hat, HdmMode mode) {
  if (u.empty()) throw DataError("score_hdm: empty encoding");
  if (u.size() != u_hat.size()) {
    throw DataError("score_hdm: encoding lengths differ (" + std::to_string(u.size()) +
                    " vs " + std::to_string(u_hat.size()) + ")");
  }
  const double n = static_cast<double>(u.size());
  double acc = 0.0;
  if (mode == HdmMode::mismatch) {
    for (std::size_t k = 0; k < u.size(); ++k) {
      if (std::fabs(u_hat[k] - u[k]) > kMismatchTolerance) acc += 1.0;
    }
  } else {
    for (std::size_t k = 0; k < u.size(); ++k) acc += u_hat[k] + u[k];
  }
  return acc / n;
}

double score_cem(const EncodedState& u, const EncodedState& u_hat) {
  if (u.empty()) throw DataError("score_cem: empty encoding");
  if (u.size() != u_hat.size()) {
    throw DataError("score_cem: encoding lengths differ (" + std::to_string(u.size()) +
                    " vs " + std::to_string(u_hat.size()) + ")");
  }
  double max_u = *std::max_element(u.begin(), u.end());
  double max_h = *std::max_element(u_hat.begin(), u_hat.end());
  double lse_u = log_sum_exp_shifted(u, max_u);
  double lse_h = log_sum_exp_shifted(u_hat, max_h);
  double sum_u = std::exp(lse_u);
  double acc = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    double p = std::exp(u[k] - max_u) / sum_u;
    double log_q = (u_hat[k] - max_h) - lse_h;
    acc += p * log_q;
  }
  return -acc;
}

double softmax_entropy(const EncodedState& u) {
  if (u.empty()) throw DataError("softmax_entropy: empty encoding");
  double max_u = *std::max_element(u.begin(), u.end());
  double lse_u = log_sum_exp_shifted(u, max_u);
  double sum_u = std::exp(lse_u);
  double acc = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    double p = std::exp(u[k] - max_u) / sum_u;
    double log_p = (u[k] - max_u) - lse_u;
    acc += p * log_p;
  }
  return -acc;
}

double score_combined(double s_auto, double s_pdm, double lambda) {
  if (!(lambda > 0.0) || !(lambda < 1.0)) {
    throw ConfigError("combined-score weight must lie strictly between 0 and 1, got " +
                      std::to_string(lambda));
  }
  return s_auto + lambda * s_pdm;
}

std::vector<ScoredSample> score_episode(const Episode& episode, const Schema& schema,
                                        const dtm::TimedAutomaton* automaton,
                                        const MeasurerConfig& cfg, Variant variant) {
  cfg.validate();
  schema.validate();
  const std::size_t n = episode.size();
  if (n == 0) return {};
  validate_episode(episode, schema);

  std::vector<ScoredSample> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    samples[i].index = i;
    samples[i].timestamp = episode.states[i].timestamp;
  }
  if (variant == Variant::none) return samples;

  const bool want_pdm =
      variant == Variant::pdm_only || variant == Variant::cb1 || variant == Variant::cb2;
  const bool want_auto =
      variant == Variant::hdm_only || variant == Variant::cem_only ||
      variant == Variant::cb1 || variant == Variant::cb2;

  std::vector<double> pdm;
  if (want_pdm) {
    std::vector<Label> labels = resolve_labels(episode, automaton, cfg, variant);

    // Complexity over a sliding distinct-value window per dimension.
    const std::size_t n_dims = schema.actuators.size() + schema.sensors.size();
    std::vector<std::unordered_map<int, std::size_t>> window_counts(n_dims);
    std::vector<std::size_t> distinct(n_dims, 0);
    auto dim_value = [&](std::size_t j, std::size_t d) {
      if (d < schema.actuators.size()) return episode.states[j].actuators[d];
      std::size_t s = d - schema.actuators.size();
      return sensor_bin(episode.states[j].sensors[s], schema.sensors[s], schema.sensor_bins);
    };
    std::vector<double> comp;
    comp.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < n_dims; ++d) {
        if (++window_counts[d][dim_value(i, d)] == 1) ++distinct[d];
      }
      if (i >= cfg.context_len) {
        for (std::size_t d = 0; d < n_dims; ++d) {
          auto it = window_counts[d].find(dim_value(i - cfg.context_len, d));
          if (--it->second == 0) {
            window_counts[d].erase(it);
            --distinct[d];
          }
        }
      }
      std::size_t count = 0;
      for (std::size_t d = 0; d < n_dims; ++d) count += distinct[d];
      comp.push_back(static_cast<double>(count));
    }

    // Diversity from one episode-wide frequency table per actuator.
    std::vector<std::unordered_map<int, std::size_t>> code_counts(schema.actuators.size());
    for (const auto& state : episode.states) {
      for (std::size_t a = 0; a < schema.actuators.size(); ++a) {
        ++code_counts[a][state.actuators[a]];
      }
    }
    const double n_d = static_cast<double>(n);
    std::vector<double> div;
    div.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      double p = 1.0;
      for (std::size_t a = 0; a < schema.actuators.size(); ++a) {
        double freq =
            static_cast<double>(code_counts[a][episode.states[i].actuators[a]]) / n_d;
        if (cfg.diversity_mode == DiversityMode::neg_log) {
          double floor_freq =
              1.0 / (n_d + static_cast<double>(schema.actuators[a].cardinality));
          freq = std::max(freq, floor_freq);
        }
        p *= freq;
      }
      div.push_back(cfg.diversity_mode == DiversityMode::neg_log ? -std::log(p) : p);
    }

    std::vector<double> noi;
    noi.reserve(n);
    for (std::size_t i = 0; i < n; ++i) noi.push_back(score_noise(episode, i, cfg));

    auto dist = attack_distances(labels);
    std::vector<double> wdist(n);
    for (std::size_t i = 0; i < n; ++i) {
      wdist[i] = static_cast<double>(dist[i] / cfg.s_window);
    }

    auto ncomp = minmax_normalize(comp);
    auto ndiv = minmax_normalize(div);
    auto nnoi = minmax_normalize(noi);
    auto nvul = minmax_normalize(wdist);
    pdm.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double vul = cfg.vulnerability_mode == VulnerabilityMode::inverse ? 1.0 - nvul[i]
                                                                        : nvul[i];
      samples[i].s_comp = ncomp[i];
      samples[i].s_div = ndiv[i];
      samples[i].s_noi = nnoi[i];
      samples[i].s_vul = vul;
      pdm[i] = (ncomp[i] + ndiv[i] + nnoi[i] + vul) / 4.0;
      samples[i].s_pdm = pdm[i];
    }
  }

  std::vector<double> nauto;
  if (want_auto) {
    if (automaton == nullptr) {
      throw DataError("variant '" + to_string(variant) +
                      "' compares observations with automaton predictions; no automaton given");
    }
    auto preds = dtm::replay_predictions(*automaton, episode);
    auto encoded = encode_episode(episode, schema);
    const bool use_hdm = variant == Variant::hdm_only || variant == Variant::cb1;
    std::vector<double> raw(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
      raw[i] = use_hdm ? score_hdm(encoded[i], preds[i]->encoded, cfg.hdm_mode)
                       : score_cem(encoded[i], preds[i]->encoded);
    }
    nauto = minmax_normalize(raw);
    for (std::size_t i = 0; i < n; ++i) samples[i].s_auto = nauto[i];
  }

  switch (variant) {
    case Variant::pdm_only:
      for (std::size_t i = 0; i < n; ++i) samples[i].s_final = samples[i].s_pdm;
      break;
    case Variant::hdm_only:
    case Variant::cem_only:
      for (std::size_t i = 0; i < n; ++i) samples[i].s_final = samples[i].s_auto;
      break;
    case Variant::cb1:
    case Variant::cb2: {
      std::vector<double> combined(n);
      for (std::size_t i = 0; i < n; ++i) {
        combined[i] = score_combined(nauto[i], pdm[i], cfg.lambda);
      }
      auto final_scores = minmax_normalize(combined);
      for (std::size_t i = 0; i < n; ++i) samples[i].s_final = final_scores[i];
      break;
    }
    case Variant::none:
      break;
  }
  return samples;
}

}  // namespace lattice::difficulty
