#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lattice/dtm.hpp"
#include "lattice/timeseries.hpp"

namespace lattice::difficulty {

/// Scoring variant: the pure predefined composite, one automatic measurer,
/// a combined score, or the disabled-curriculum baseline.
enum class Variant { pdm_only, hdm_only, cem_only, cb1, cb2, none };

Variant variant_from_string(const std::string& name);
std::string to_string(Variant variant);

enum class DiversityMode { neg_log, raw };
enum class HdmMode { mismatch, literal_sum };
enum class VulnerabilityMode { inverse, literal };

struct MeasurerConfig {
  std::size_t s_window = 60;     ///< ticks per shared-distance bucket
  double lambda = 0.5;           ///< weight of s_pdm inside combined scores
  std::size_t context_len = 50;  ///< trailing context for complexity/noise
  DiversityMode diversity_mode = DiversityMode::neg_log;
  HdmMode hdm_mode = HdmMode::mismatch;
  VulnerabilityMode vulnerability_mode = VulnerabilityMode::inverse;
  double tau_gt = 0.1;  ///< deviation threshold when labels must be derived
                        ///< from the automaton for unlabeled data

  /// Throws ConfigError unless 0 < lambda < 1, s_window >= 1, context_len >= 2.
  void validate() const;
};

/// Per-sample difficulty record. Component fields hold the min-max-normalized
/// values actually entering the composite (vulnerability after its mode is
/// applied); fields not requested by the variant stay 0. batch_number is
/// assigned later by the curriculum.
struct ScoredSample {
  std::size_t index = 0;
  double timestamp = 0.0;
  double s_comp = 0.0;
  double s_div = 0.0;
  double s_noi = 0.0;
  double s_vul = 0.0;
  double s_pdm = 0.0;
  double s_auto = 0.0;
  double s_final = 0.0;
  int batch_number = 0;
};

/// Min-max normalization over a score set: minimum maps to 0, maximum to 1,
/// via (v - min) / (max - min) element-wise in index order; a constant set
/// maps to all-0 (documented convention).
std::vector<double> minmax_normalize(const std::vector<double>& raw);

/// Effective input-space size around sample i: over the trailing context of
/// `context_len` samples ending at i (truncated at the episode start), the
/// sum over actuator dimensions of distinct observed codes plus the sum over
/// sensor dimensions of distinct occupied quantization bins.
double score_complexity(const Episode& episode, const Schema& schema, std::size_t i,
                        const MeasurerConfig& cfg);

/// Rarity of the actuator combination at sample i. With empirical per-actuator
/// code frequencies over the whole episode, p = product of frequency(code at
/// i) in actuator order. neg_log mode (default) floors each frequency at
/// 1/(n + cardinality) and returns -ln(p), so rare samples score higher; raw
/// mode returns the unfloored product unchanged.
double score_diversity(const Episode& episode, const Schema& schema, std::size_t i,
                       const MeasurerConfig& cfg);

/// Mean absolute standard score of sample i's sensors against the trailing
/// context of exactly `context_len` samples ending at i-1. Per sensor,
/// mu and sigma are the context's population statistics accumulated in index
/// order, sigma floored at 1e-9. Returns 0 when the full context does not
/// exist (i < context_len).
double score_noise(const Episode& episode, std::size_t i, const MeasurerConfig& cfg);

/// Index distance from every sample to the nearest Attack-labeled index
/// (0 inside an attack). `labels` must contain at least one Attack.
std::vector<std::size_t> attack_distances(const std::vector<Label>& labels);

/// Bucketed attack proximity of sample i: raw index distance floored by
/// s_window, min-max normalized over the whole episode; inverse mode
/// (default) returns 1 - normalized so near-attack samples score higher,
/// literal mode returns the normalized value itself.
/// Throws DataError when no Attack labels exist.
double score_vulnerability(const Episode& episode, std::size_t i,
                           const std::vector<Label>& labels, const MeasurerConfig& cfg);

/// Predefined composite of sample i: each of complexity/diversity/noise is
/// min-max normalized over the episode, vulnerability contributes its
/// mode-adjusted value, and the four are summed in that order then divided
/// by 4.
double score_pdm(const Episode& episode, const Schema& schema, std::size_t i,
                 const std::vector<Label>& labels, const MeasurerConfig& cfg);

/// Hamming-style disagreement between an observation and a prediction.
/// mismatch mode (default): mean over dimensions of [ |u_hat_k - u_k| > 1e-6 ];
/// literal_sum mode: sum(u_hat_k + u_k) / n.
/// Throws DataError on length mismatch.
double score_hdm(const EncodedState& u, const EncodedState& u_hat, HdmMode mode);

/// Cross-entropy between softmax(u) and softmax(u_hat), natural log, computed
/// with max-subtraction (log-sum-exp) so extreme magnitudes stay finite.
/// Throws DataError on length mismatch or empty input.
double score_cem(const EncodedState& u, const EncodedState& u_hat);

/// Shannon entropy of softmax(u); the lower bound of score_cem(u, anything).
double softmax_entropy(const EncodedState& u);

/// Combined difficulty: s_auto + lambda * s_pdm. Callers re-apply min-max
/// normalization over the scored set. Throws ConfigError unless 0 < lambda < 1.
double score_combined(double s_auto, double s_pdm, double lambda);

/// Score a whole episode under `variant`.
///
/// Predefined components are computed incrementally (sliding distinct-value
/// windows, one frequency table, two-sweep attack distances) and normalized
/// over the episode; the automatic component compares each observation with
/// predict_next from the previous state's dwell (index 0, having no
/// prediction, scores raw 0). s_final per variant: pdm_only -> s_pdm;
/// hdm_only/cem_only -> normalized automatic score; cb1/cb2 ->
/// minmax_normalize(s_auto + lambda * s_pdm); none -> all scores 0
/// (chronological curriculum).
///
/// `automaton` may be null only when no automatic component is requested and
/// the episode carries labels (or no labels are needed). Unlabeled episodes
/// derive labels via automaton ground truth at cfg.tau_gt when vulnerability
/// is requested.
std::vector<ScoredSample> score_episode(const Episode& episode, const Schema& schema,
                                        const dtm::TimedAutomaton* automaton,
                                        const MeasurerConfig& cfg, Variant variant);

}  // namespace lattice::difficulty
