#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <vector>

#include "doctest.h"
#include "lattice/difficulty.hpp"
#include "lattice/dtm.hpp"
#include "lattice/errors.hpp"
#include "lattice/timeseries.hpp"
#include "test_support.hpp"

using namespace lattice;
using namespace lattice::difficulty;

namespace {

Schema toy_schema() {
  Schema schema;
  schema.sensors = {{"s0", 0.0, 10.0}, {"s1", 0.0, 10.0}};
  schema.actuators = {{"a0", 2}, {"a1", 3}, {"a2", 2}};
  schema.sensor_bins = 10;
  return schema;
}

Episode make_episode(const std::vector<std::vector<double>>& sensor_rows,
                     const std::vector<std::vector<int>>& actuator_rows,
                     std::vector<Label> labels = {}) {
  Episode episode;
  for (std::size_t i = 0; i < sensor_rows.size(); ++i) {
    SystemState state;
    state.timestamp = static_cast<double>(i);
    state.sensors = sensor_rows[i];
    state.actuators = actuator_rows[i];
    episode.states.push_back(state);
  }
  episode.labels = std::move(labels);
  return episode;
}

// Independent recomputations used as oracles below. They deliberately share
// the documented evaluation order with the production code so equality can be
// checked bit-for-bit, but are written from the definitions, not the
// implementation.

double oracle_complexity(const Episode& episode, const Schema& schema, std::size_t i,
                         std::size_t context_len) {
  std::size_t begin = i + 1 >= context_len ? i + 1 - context_len : 0;
  std::size_t count = 0;
  for (std::size_t a = 0; a < schema.actuators.size(); ++a) {
    std::set<int> codes;
    for (std::size_t j = begin; j <= i; ++j) codes.insert(episode.states[j].actuators[a]);
    count += codes.size();
  }
  for (std::size_t s = 0; s < schema.sensors.size(); ++s) {
    std::set<int> bins;
    for (std::size_t j = begin; j <= i; ++j) {
      bins.insert(sensor_bin(episode.states[j].sensors[s], schema.sensors[s], schema.sensor_bins));
    }
    count += bins.size();
  }
  return static_cast<double>(count);
}

double oracle_diversity(const Episode& episode, const Schema& schema, std::size_t i,
                        DiversityMode mode) {
  const double n = static_cast<double>(episode.size());
  double p = 1.0;
  for (std::size_t a = 0; a < schema.actuators.size(); ++a) {
    int code = episode.states[i].actuators[a];
    std::size_t count = 0;
    for (const auto& state : episode.states) {
      if (state.actuators[a] == code) ++count;
    }
    double freq = static_cast<double>(count) / n;
    if (mode == DiversityMode::neg_log) {
      double floor_freq = 1.0 / (n + static_cast<double>(schema.actuators[a].cardinality));
      freq = std::max(freq, floor_freq);
    }
    p *= freq;
  }
  return mode == DiversityMode::neg_log ? -std::log(p) : p;
}

double oracle_noise(const Episode& episode, std::size_t i, std::size_t context_len) {
  if (i < context_len) return 0.0;
  std::size_t n_sensors = episode.states[i].sensors.size();
  if (n_sensors == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t s = 0; s < n_sensors; ++s) {
    double sum = 0.0;
    for (std::size_t j = i - context_len; j < i; ++j) sum += episode.states[j].sensors[s];
    double mean = sum / static_cast<double>(context_len);
    double varsum = 0.0;
    for (std::size_t j = i - context_len; j < i; ++j) {
      double dx = episode.states[j].sensors[s] - mean;
      varsum += dx * dx;
    }
    double sigma = std::sqrt(varsum / static_cast<double>(context_len));
    double z = (episode.states[i].sensors[s] - mean) / std::max(sigma, 1e-9);
    acc += std::fabs(z);
  }
  return acc / static_cast<double>(n_sensors);
}

std::vector<std::size_t> oracle_distances(const std::vector<Label>& labels) {
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::size_t best = labels.size();
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] == Label::Attack) {
        std::size_t d = i > j ? i - j : j - i;
        best = std::min(best, d);
      }
    }
    out[i] = best;
  }
  return out;
}

std::vector<double> oracle_normalize(const std::vector<double>& raw) {
  if (raw.empty()) return {};
  double lo = *std::min_element(raw.begin(), raw.end());
  double hi = *std::max_element(raw.begin(), raw.end());
  std::vector<double> out(raw.size(), 0.0);
  if (hi > lo) {
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - lo) / (hi - lo);
  }
  return out;
}

// Cross-entropy recomputed through plain softmax divisions (different algebra
// than the production log-sum-exp path), kept for moderate magnitudes.
double oracle_cem(const std::vector<double>& u, const std::vector<double>& u_hat) {
  auto softmax = [](const std::vector<double>& v) {
    double m = *std::max_element(v.begin(), v.end());
    std::vector<double> e(v.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      e[k] = std::exp(v[k] - m);
      sum += e[k];
    }
    for (auto& x : e) x /= sum;
    return e;
  };
  auto p = softmax(u);
  auto q = softmax(u_hat);
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) acc -= p[k] * std::log(q[k]);
  return acc;
}

Episode random_labeled_episode(testsup::Rng& rng, const Schema& schema, std::size_t n) {
  Episode episode = testsup::random_episode(rng, schema, n, 0.15);
  bool any_attack = std::any_of(episode.labels.begin(), episode.labels.end(),
                                [](Label l) { return l == Label::Attack; });
  if (!any_attack) episode.labels[n / 2] = Label::Attack;
  return episode;
}

}  // namespace

TEST_CASE("difficulty: complexity counts distinct codes and occupied bins") {
  Schema schema = toy_schema();
  MeasurerConfig cfg;
  cfg.context_len = 3;

  SUBCASE("constant episode scores the dimension count everywhere") {
    Episode episode = make_episode({{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}},
                                   {{0, 1, 0}, {0, 1, 0}, {0, 1, 0}, {0, 1, 0}});
    for (std::size_t i = 0; i < episode.size(); ++i) {
      CHECK(score_complexity(episode, schema, i, cfg) == 5.0);
    }
  }

  SUBCASE("one toggling binary actuator adds exactly one") {
    Episode episode = make_episode({{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}},
                                   {{0, 1, 0}, {1, 1, 0}, {0, 1, 0}});
    CHECK(score_complexity(episode, schema, 0, cfg) == 5.0);
    CHECK(score_complexity(episode, schema, 1, cfg) == 6.0);
    CHECK(score_complexity(episode, schema, 2, cfg) == 6.0);
  }

  SUBCASE("sensor movement across quantization bins is counted") {
    // s0 walks through bins 0, 1, 2 while everything else stays put.
    Episode episode = make_episode({{0.5, 2.0}, {1.5, 2.0}, {2.5, 2.0}},
                                   {{0, 1, 0}, {0, 1, 0}, {0, 1, 0}});
    CHECK(score_complexity(episode, schema, 0, cfg) == 5.0);
    CHECK(score_complexity(episode, schema, 1, cfg) == 6.0);
    CHECK(score_complexity(episode, schema, 2, cfg) == 7.0);
  }

  SUBCASE("context truncates at the episode start and slides afterwards") {
    MeasurerConfig narrow = cfg;
    narrow.context_len = 2;
    Episode episode = make_episode({{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}},
                                   {{0, 1, 0}, {1, 1, 0}, {1, 1, 0}});
    CHECK(score_complexity(episode, schema, 1, narrow) == 6.0);
    // Window [1, 2] no longer sees code 0 on a0.
    CHECK(score_complexity(episode, schema, 2, narrow) == 5.0);
  }

  SUBCASE("matches an independent distinct-set scan on random data") {
    testsup::Rng rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
      Schema rand_schema = testsup::random_schema(rng);
      Episode episode = testsup::random_episode(rng, rand_schema, 30);
      MeasurerConfig rand_cfg;
      rand_cfg.context_len = 2 + static_cast<std::size_t>(rng() % 10);
      for (std::size_t i = 0; i < episode.size(); ++i) {
        CHECK(score_complexity(episode, rand_schema, i, rand_cfg) ==
              oracle_complexity(episode, rand_schema, i, rand_cfg.context_len));
      }
    }
  }
}

TEST_CASE("difficulty: diversity scores rare actuator combinations higher") {
  Schema schema = toy_schema();
  MeasurerConfig cfg;

  SUBCASE("constant actuators score exactly zero") {
    Episode episode = make_episode({{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}},
                                   {{0, 1, 0}, {0, 1, 0}, {0, 1, 0}});
    for (std::size_t i = 0; i < episode.size(); ++i) {
      CHECK(score_diversity(episode, schema, i, cfg) == 0.0);
    }
  }

  SUBCASE("two independent 50/50 binary actuators score -ln(1/4)") {
    Schema two = schema;
    two.actuators = {{"a0", 2}, {"a1", 2}};
    Episode episode = make_episode(
        {{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}},
        {{0, 0}, {1, 0}, {0, 1}, {1, 1}});
    for (std::size_t i = 0; i < episode.size(); ++i) {
      CHECK(score_diversity(episode, two, i, cfg) ==
            doctest::Approx(std::log(4.0)).epsilon(1e-12));
    }
  }

  SUBCASE("a code seen once in a hundred samples dominates the episode") {
    Schema one = schema;
    one.actuators = {{"a0", 2}};
    std::vector<std::vector<double>> sensors(100, {1.0, 2.0});
    std::vector<std::vector<int>> codes(100, {0});
    codes[37] = {1};
    Episode episode = make_episode(sensors, codes);
    double rare = score_diversity(episode, one, 37, cfg);
    CHECK(rare == doctest::Approx(std::log(100.0)).epsilon(1e-12));
    for (std::size_t i = 0; i < episode.size(); ++i) {
      if (i != 37) CHECK(score_diversity(episode, one, i, cfg) < rare);
    }
  }

  SUBCASE("raw mode returns the plain frequency product") {
    Schema two = schema;
    two.actuators = {{"a0", 2}, {"a1", 2}};
    MeasurerConfig raw_cfg = cfg;
    raw_cfg.diversity_mode = DiversityMode::raw;
    Episode episode = make_episode(
        {{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}},
        {{0, 0}, {1, 0}, {0, 1}, {1, 1}});
    CHECK(score_diversity(episode, two, 0, raw_cfg) == 0.25);
  }

  SUBCASE("matches an independent frequency recount on random data") {
    testsup::Rng rng(77);
    for (int trial = 0; trial < 40; ++trial) {
      Schema rand_schema = testsup::random_schema(rng);
      Episode episode = testsup::random_episode(rng, rand_schema, 25);
      MeasurerConfig mode_cfg;
      mode_cfg.diversity_mode = (trial % 2 == 0) ? DiversityMode::neg_log : DiversityMode::raw;
      for (std::size_t i = 0; i < episode.size(); ++i) {
        CHECK(score_diversity(episode, rand_schema, i, mode_cfg) ==
              oracle_diversity(episode, rand_schema, i, mode_cfg.diversity_mode));
      }
    }
  }
}

TEST_CASE("difficulty: noise measures deviation from the trailing context") {
  Schema schema = toy_schema();
  MeasurerConfig cfg;
  cfg.context_len = 2;
  auto row = [](double v) { return std::vector<double>{v, 2.0}; };
  auto acts = [](std::size_t n) { return std::vector<std::vector<int>>(n, {0, 1, 0}); };

  SUBCASE("a sample equal to its context mean scores zero") {
    Episode episode = make_episode({row(0.0), row(2.0), row(1.0)}, acts(3));
    CHECK(score_noise(episode, 2, cfg) == 0.0);
  }

  SUBCASE("a constant context scores zero through the sigma floor") {
    MeasurerConfig wide = cfg;
    wide.context_len = 4;
    Episode episode = make_episode({row(1.0), row(1.0), row(1.0), row(1.0), row(1.0)}, acts(5));
    CHECK(score_noise(episode, 4, wide) == 0.0);
  }

  SUBCASE("context {0, 2} followed by 3 scores two standard deviations") {
    Episode episode = make_episode({row(0.0), row(2.0), row(3.0)}, acts(3));
    // mu = 1, population sigma = 1, |z| for s0 = 2; s1 is constant so 0.
    CHECK(score_noise(episode, 2, cfg) == 1.0);
  }

  SUBCASE("single-sensor schema reproduces the raw standard score") {
    Schema one = schema;
    one.sensors = {{"s0", 0.0, 10.0}};
    Episode episode = make_episode({{{0.0}}, {{2.0}}, {{3.0}}},
                                   acts(3));
    CHECK(score_noise(episode, 2, cfg) == 2.0);
  }

  SUBCASE("an incomplete context scores zero") {
    Episode episode = make_episode({row(0.0), row(9.0)}, acts(2));
    CHECK(score_noise(episode, 0, cfg) == 0.0);
    CHECK(score_noise(episode, 1, cfg) == 0.0);
  }

  SUBCASE("matches an independent recomputation on random data") {
    testsup::Rng rng(4242);
    for (int trial = 0; trial < 40; ++trial) {
      Schema rand_schema = testsup::random_schema(rng);
      Episode episode = testsup::random_episode(rng, rand_schema, 30);
      MeasurerConfig rand_cfg;
      rand_cfg.context_len = 2 + static_cast<std::size_t>(rng() % 8);
      for (std::size_t i = 0; i < episode.size(); ++i) {
        CHECK(score_noise(episode, i, rand_cfg) ==
              oracle_noise(episode, i, rand_cfg.context_len));
      }
    }
  }
}

TEST_CASE("difficulty: vulnerability buckets distance to the nearest attack") {
  Schema schema = toy_schema();
  auto plain_states = [](std::size_t n) {
    return make_episode(std::vector<std::vector<double>>(n, {1.0, 2.0}),
                        std::vector<std::vector<int>>(n, {0, 1, 0}));
  };

  SUBCASE("attack_distances matches a full scan") {
    std::vector<Label> labels = {Label::Normal, Label::Attack, Label::Normal};
    CHECK(attack_distances(labels) == std::vector<std::size_t>{1, 0, 1});
    testsup::Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<Label> random_labels(1 + rng() % 40, Label::Normal);
      for (auto& l : random_labels) l = (rng() % 4 == 0) ? Label::Attack : Label::Normal;
      random_labels[rng() % random_labels.size()] = Label::Attack;
      CHECK(attack_distances(random_labels) == oracle_distances(random_labels));
    }
  }

  SUBCASE("normal-attack-normal with unit buckets scores 0, 1, 0") {
    MeasurerConfig cfg;
    cfg.s_window = 1;
    Episode episode = plain_states(3);
    std::vector<Label> labels = {Label::Normal, Label::Attack, Label::Normal};
    CHECK(score_vulnerability(episode, 0, labels, cfg) == 0.0);
    CHECK(score_vulnerability(episode, 1, labels, cfg) == 1.0);
    CHECK(score_vulnerability(episode, 2, labels, cfg) == 0.0);
  }

  SUBCASE("literal mode returns the normalized distance itself") {
    MeasurerConfig cfg;
    cfg.s_window = 1;
    cfg.vulnerability_mode = VulnerabilityMode::literal;
    Episode episode = plain_states(3);
    std::vector<Label> labels = {Label::Normal, Label::Attack, Label::Normal};
    CHECK(score_vulnerability(episode, 0, labels, cfg) == 1.0);
    CHECK(score_vulnerability(episode, 1, labels, cfg) == 0.0);
    CHECK(score_vulnerability(episode, 2, labels, cfg) == 1.0);
  }

  SUBCASE("bucket width groups nearby samples onto one score") {
    MeasurerConfig cfg;
    cfg.s_window = 2;
    Episode episode = plain_states(5);
    std::vector<Label> labels = {Label::Attack, Label::Normal, Label::Normal, Label::Normal,
                                 Label::Normal};
    // Raw distances 0,1,2,3,4 -> buckets 0,0,1,1,2 -> normalized 0,0,.5,.5,1.
    CHECK(score_vulnerability(episode, 0, labels, cfg) == 1.0);
    CHECK(score_vulnerability(episode, 1, labels, cfg) == 1.0);
    CHECK(score_vulnerability(episode, 2, labels, cfg) == 0.5);
    CHECK(score_vulnerability(episode, 3, labels, cfg) == 0.5);
    CHECK(score_vulnerability(episode, 4, labels, cfg) == 0.0);
  }

  SUBCASE("samples before, near, and inside an attack are ordered") {
    MeasurerConfig cfg;
    cfg.s_window = 1;
    Episode episode = plain_states(5);
    std::vector<Label> labels = {Label::Normal, Label::Normal, Label::Attack, Label::Attack,
                                 Label::Normal};
    double far = score_vulnerability(episode, 0, labels, cfg);
    double near = score_vulnerability(episode, 1, labels, cfg);
    double inside = score_vulnerability(episode, 2, labels, cfg);
    CHECK(far < near);
    CHECK(near < inside);
    CHECK(inside == 1.0);
  }

  SUBCASE("inverse scores never increase as raw distance grows") {
    MeasurerConfig cfg;
    cfg.s_window = 3;
    testsup::Rng rng(31);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<Label> labels(20, Label::Normal);
      labels[rng() % labels.size()] = Label::Attack;
      labels[rng() % labels.size()] = Label::Attack;
      Episode episode = plain_states(labels.size());
      auto dists = attack_distances(labels);
      for (std::size_t i = 0; i < labels.size(); ++i) {
        for (std::size_t j = 0; j < labels.size(); ++j) {
          if (dists[i] < dists[j]) {
            CHECK(score_vulnerability(episode, i, labels, cfg) >=
                  score_vulnerability(episode, j, labels, cfg));
          }
        }
      }
    }
  }

  SUBCASE("an episode without any attack label is rejected") {
    MeasurerConfig cfg;
    Episode episode = plain_states(3);
    std::vector<Label> labels(3, Label::Normal);
    CHECK_THROWS_AS(score_vulnerability(episode, 0, labels, cfg), DataError);
  }
}

TEST_CASE("difficulty: predefined composite averages four normalized parts") {
  Schema schema = toy_schema();
  MeasurerConfig cfg;
  cfg.context_len = 2;
  cfg.s_window = 1;

  SUBCASE("flat episode leaves only the vulnerability term") {
    Episode episode = make_episode(
        std::vector<std::vector<double>>(4, {1.0, 2.0}),
        std::vector<std::vector<int>>(4, {0, 1, 0}));
    std::vector<Label> labels = {Label::Attack, Label::Normal, Label::Normal, Label::Normal};
    // Complexity, diversity, and noise are constant -> all normalize to 0;
    // inverse vulnerability runs 1, 2/3, 1/3, 0 over the window distances.
    CHECK(score_pdm(episode, schema, 0, labels, cfg) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(score_pdm(episode, schema, 3, labels, cfg) == 0.0);
  }

  SUBCASE("matches the per-component recomputation exactly") {
    testsup::Rng rng(555);
    for (int trial = 0; trial < 10; ++trial) {
      Schema rand_schema = testsup::random_schema(rng);
      Episode episode = random_labeled_episode(rng, rand_schema, 20);
      MeasurerConfig rand_cfg;
      rand_cfg.context_len = 3;
      rand_cfg.s_window = 2;

      std::vector<double> comp, div, noi, wdist;
      for (std::size_t i = 0; i < episode.size(); ++i) {
        comp.push_back(oracle_complexity(episode, rand_schema, i, rand_cfg.context_len));
        div.push_back(oracle_diversity(episode, rand_schema, i, rand_cfg.diversity_mode));
        noi.push_back(oracle_noise(episode, i, rand_cfg.context_len));
      }
      for (std::size_t d : oracle_distances(episode.labels)) {
        wdist.push_back(static_cast<double>(d / rand_cfg.s_window));
      }
      auto ncomp = oracle_normalize(comp);
      auto ndiv = oracle_normalize(div);
      auto nnoi = oracle_normalize(noi);
      auto nvul = oracle_normalize(wdist);
      for (std::size_t i = 0; i < episode.size(); ++i) {
        double vul = 1.0 - nvul[i];
        double expected = (ncomp[i] + ndiv[i] + nnoi[i] + vul) / 4.0;
        CHECK(score_pdm(episode, rand_schema, i, episode.labels, rand_cfg) == expected);
      }
    }
  }
}

TEST_CASE("difficulty: hamming disagreement between observation and prediction") {
  SUBCASE("one differing slot out of three scores one third") {
    CHECK(score_hdm({1.0, 0.0, 1.0}, {1.0, 1.0, 1.0}, HdmMode::mismatch) == 1.0 / 3.0);
  }

  SUBCASE("literal_sum mode adds the vectors instead") {
    CHECK(score_hdm({1.0, 0.0, 1.0}, {1.0, 1.0, 1.0}, HdmMode::literal_sum) == 5.0 / 3.0);
  }

  SUBCASE("identical vectors score zero and the measure is symmetric") {
    testsup::Rng rng(12);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> u(5), v(5);
      for (auto& x : u) x = static_cast<double>(rng() % 7) / 3.0;
      for (auto& x : v) x = static_cast<double>(rng() % 7) / 3.0;
      CHECK(score_hdm(u, u, HdmMode::mismatch) == 0.0);
      CHECK(score_hdm(u, v, HdmMode::mismatch) == score_hdm(v, u, HdmMode::mismatch));
    }
  }

  SUBCASE("differences at the tolerance are not mismatches") {
    CHECK(score_hdm({0.0}, {1e-6}, HdmMode::mismatch) == 0.0);
    CHECK(score_hdm({0.0}, {2e-6}, HdmMode::mismatch) == 1.0);
  }

  SUBCASE("length mismatch is rejected") {
    CHECK_THROWS_AS(score_hdm({1.0, 2.0}, {1.0}, HdmMode::mismatch), DataError);
  }
}

TEST_CASE("difficulty: cross-entropy disagreement over softmax encodings") {
  SUBCASE("two uniform two-slot vectors score ln 2 exactly") {
    CHECK(score_cem({0.0, 0.0}, {0.0, 0.0}) == std::log(2.0));
  }

  SUBCASE("self cross-entropy equals the softmax entropy") {
    testsup::Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> u(4);
      for (auto& x : u) x = static_cast<double>(rng() % 200) / 10.0 - 10.0;
      CHECK(score_cem(u, u) == doctest::Approx(softmax_entropy(u)).epsilon(1e-12));
    }
  }

  SUBCASE("strongly opposed vectors score near their logit gap") {
    double value = score_cem({10.0, 0.0}, {0.0, 10.0});
    CHECK(value == doctest::Approx(oracle_cem({10.0, 0.0}, {0.0, 10.0})).epsilon(1e-12));
    CHECK(value == doctest::Approx(10.0001).epsilon(1e-4));
  }

  SUBCASE("never drops below the observation's softmax entropy") {
    testsup::Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> u(6), v(6);
      for (auto& x : u) x = static_cast<double>(rng() % 400) / 10.0 - 20.0;
      for (auto& x : v) x = static_cast<double>(rng() % 400) / 10.0 - 20.0;
      CHECK(score_cem(u, v) >= softmax_entropy(u) - 1e-9);
    }
  }

  SUBCASE("stays finite under encoding-scale magnitudes") {
    double value = score_cem({1200.0, 0.0, 3.0}, {0.0, 1200.0, 5.0});
    CHECK(std::isfinite(value));
    CHECK(value > 1000.0);
  }

  SUBCASE("bad shapes are rejected") {
    CHECK_THROWS_AS(score_cem({}, {}), DataError);
    CHECK_THROWS_AS(score_cem({1.0, 2.0}, {1.0}), DataError);
  }
}

TEST_CASE("difficulty: combined score weights the composite by lambda") {
  SUBCASE("0.4 plus half of 0.6 gives 0.7") {
    CHECK(score_combined(0.4, 0.6, 0.5) == doctest::Approx(0.7).epsilon(1e-12));
  }

  SUBCASE("weights outside the open unit interval are rejected") {
    CHECK_THROWS_AS(score_combined(0.4, 0.6, 0.0), ConfigError);
    CHECK_THROWS_AS(score_combined(0.4, 0.6, 1.0), ConfigError);
    CHECK_THROWS_AS(score_combined(0.4, 0.6, -0.5), ConfigError);
    CHECK_THROWS_AS(score_combined(0.4, 0.6, 1.5), ConfigError);
    CHECK_NOTHROW(score_combined(0.4, 0.6, 0.999));
  }

  SUBCASE("ordering follows the automatic score at fixed composite") {
    CHECK(score_combined(0.9, 0.5, 0.5) > score_combined(0.2, 0.5, 0.5));
  }
}

TEST_CASE("difficulty: measurer config validation") {
  MeasurerConfig cfg;
  CHECK_NOTHROW(cfg.validate());

  MeasurerConfig bad_lambda = cfg;
  bad_lambda.lambda = 1.0;
  CHECK_THROWS_AS(bad_lambda.validate(), ConfigError);
  bad_lambda.lambda = 0.0;
  CHECK_THROWS_AS(bad_lambda.validate(), ConfigError);

  MeasurerConfig bad_window = cfg;
  bad_window.s_window = 0;
  CHECK_THROWS_AS(bad_window.validate(), ConfigError);

  MeasurerConfig bad_context = cfg;
  bad_context.context_len = 1;
  CHECK_THROWS_AS(bad_context.validate(), ConfigError);

  CHECK(variant_from_string("cb2") == Variant::cb2);
  CHECK(variant_from_string("none") == Variant::none);
  CHECK(to_string(Variant::pdm_only) == "pdm_only");
  CHECK(to_string(variant_from_string(to_string(Variant::hdm_only))) == "hdm_only");
  CHECK_THROWS_AS(variant_from_string("bogus"), ConfigError);
}

TEST_CASE("difficulty: episode scoring across variants") {
  // A small cyclic plant: one ternary actuator driving one sensor.
  Schema schema;
  schema.sensors = {{"level", 0.0, 10.0}};
  schema.actuators = {{"valve", 3}};
  schema.sensor_bins = 5;

  auto cyclic_episode = [&](std::size_t n, std::vector<Label> labels) {
    std::vector<std::vector<double>> sensors;
    std::vector<std::vector<int>> acts;
    for (std::size_t i = 0; i < n; ++i) {
      int phase = static_cast<int>(i % 6);
      acts.push_back({phase / 2});
      sensors.push_back({1.0 + static_cast<double>(phase)});
    }
    return make_episode(sensors, acts, std::move(labels));
  };

  MeasurerConfig cfg;
  cfg.context_len = 3;
  cfg.s_window = 2;
  cfg.lambda = 0.5;

  Episode train = cyclic_episode(60, {});
  dtm::TimedAutomaton automaton = dtm::TimedAutomaton::learn_offline(train, schema);

  std::vector<Label> labels(30, Label::Normal);
  for (std::size_t i = 10; i < 14; ++i) labels[i] = Label::Attack;
  Episode scored_episode = cyclic_episode(30, labels);

  SUBCASE("variant none zeroes every score but keeps identity fields") {
    auto samples = score_episode(scored_episode, schema, nullptr, cfg, Variant::none);
    REQUIRE(samples.size() == scored_episode.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      CHECK(samples[i].index == i);
      CHECK(samples[i].timestamp == scored_episode.states[i].timestamp);
      CHECK(samples[i].s_comp == 0.0);
      CHECK(samples[i].s_div == 0.0);
      CHECK(samples[i].s_noi == 0.0);
      CHECK(samples[i].s_vul == 0.0);
      CHECK(samples[i].s_pdm == 0.0);
      CHECK(samples[i].s_auto == 0.0);
      CHECK(samples[i].s_final == 0.0);
      CHECK(samples[i].batch_number == 0);
    }
  }

  SUBCASE("pdm_only equals the per-sample composite op") {
    auto samples = score_episode(scored_episode, schema, nullptr, cfg, Variant::pdm_only);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      CHECK(samples[i].s_pdm == score_pdm(scored_episode, schema, i, labels, cfg));
      CHECK(samples[i].s_final == samples[i].s_pdm);
      CHECK(samples[i].s_auto == 0.0);
    }
  }

  SUBCASE("hdm_only and cem_only normalize the automatic measurer") {
    auto preds = dtm::replay_predictions(automaton, scored_episode);
    auto encoded = encode_episode(scored_episode, schema);
    for (Variant variant : {Variant::hdm_only, Variant::cem_only}) {
      std::vector<double> raw(scored_episode.size(), 0.0);
      for (std::size_t i = 1; i < scored_episode.size(); ++i) {
        raw[i] = variant == Variant::hdm_only
                     ? score_hdm(encoded[i], preds[i]->encoded, cfg.hdm_mode)
                     : score_cem(encoded[i], preds[i]->encoded);
      }
      auto expected = oracle_normalize(raw);
      auto samples = score_episode(scored_episode, schema, &automaton, cfg, variant);
      for (std::size_t i = 0; i < samples.size(); ++i) {
        CHECK(samples[i].s_auto == expected[i]);
        CHECK(samples[i].s_final == expected[i]);
        CHECK(samples[i].s_pdm == 0.0);
      }
    }
  }

  SUBCASE("cb2 matches a full independent pipeline recomputation") {
    auto preds = dtm::replay_predictions(automaton, scored_episode);
    auto encoded = encode_episode(scored_episode, schema);
    std::vector<double> comp, div, noi, wdist, raw_auto(scored_episode.size(), 0.0);
    for (std::size_t i = 0; i < scored_episode.size(); ++i) {
      comp.push_back(oracle_complexity(scored_episode, schema, i, cfg.context_len));
      div.push_back(oracle_diversity(scored_episode, schema, i, cfg.diversity_mode));
      noi.push_back(oracle_noise(scored_episode, i, cfg.context_len));
      if (i > 0) raw_auto[i] = score_cem(encoded[i], preds[i]->encoded);
    }
    for (std::size_t d : oracle_distances(labels)) {
      wdist.push_back(static_cast<double>(d / cfg.s_window));
    }
    auto ncomp = oracle_normalize(comp);
    auto ndiv = oracle_normalize(div);
    auto nnoi = oracle_normalize(noi);
    auto nvul = oracle_normalize(wdist);
    auto nauto = oracle_normalize(raw_auto);
    std::vector<double> cb(scored_episode.size());
    std::vector<double> pdm(scored_episode.size());
    for (std::size_t i = 0; i < scored_episode.size(); ++i) {
      double vul = 1.0 - nvul[i];
      pdm[i] = (ncomp[i] + ndiv[i] + nnoi[i] + vul) / 4.0;
      cb[i] = nauto[i] + cfg.lambda * pdm[i];
    }
    auto final_scores = oracle_normalize(cb);

    auto samples = score_episode(scored_episode, schema, &automaton, cfg, Variant::cb2);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      CHECK(samples[i].s_comp == ncomp[i]);
      CHECK(samples[i].s_div == ndiv[i]);
      CHECK(samples[i].s_noi == nnoi[i]);
      CHECK(samples[i].s_vul == 1.0 - nvul[i]);
      CHECK(samples[i].s_pdm == pdm[i]);
      CHECK(samples[i].s_auto == nauto[i]);
      CHECK(samples[i].s_final == final_scores[i]);
    }
  }

  SUBCASE("all normalized fields stay inside the unit interval") {
    testsup::Rng rng(321);
    for (int trial = 0; trial < 5; ++trial) {
      Schema rand_schema = testsup::random_schema(rng);
      Episode train_ep = testsup::random_episode(rng, rand_schema, 80);
      dtm::TimedAutomaton rand_auto = dtm::TimedAutomaton::learn_offline(train_ep, rand_schema);
      Episode eval_ep = random_labeled_episode(rng, rand_schema, 40);
      for (Variant variant : {Variant::pdm_only, Variant::hdm_only, Variant::cem_only,
                              Variant::cb1, Variant::cb2}) {
        auto samples = score_episode(eval_ep, rand_schema, &rand_auto, cfg, variant);
        for (const auto& s : samples) {
          CHECK(s.s_comp >= 0.0);
          CHECK(s.s_comp <= 1.0);
          CHECK(s.s_div >= 0.0);
          CHECK(s.s_div <= 1.0);
          CHECK(s.s_noi >= 0.0);
          CHECK(s.s_noi <= 1.0);
          CHECK(s.s_vul >= 0.0);
          CHECK(s.s_vul <= 1.0);
          CHECK(s.s_pdm >= 0.0);
          CHECK(s.s_pdm <= 1.0);
          CHECK(s.s_auto >= 0.0);
          CHECK(s.s_auto <= 1.0);
          CHECK(s.s_final >= 0.0);
          CHECK(s.s_final <= 1.0);
        }
      }
    }
  }

  SUBCASE("incremental scoring equals the brute-force path on a long episode") {
    testsup::Rng rng(2718);
    Schema rand_schema = testsup::random_schema(rng);
    Episode train_ep = testsup::random_episode(rng, rand_schema, 200);
    dtm::TimedAutomaton rand_auto = dtm::TimedAutomaton::learn_offline(train_ep, rand_schema);
    Episode eval_ep = random_labeled_episode(rng, rand_schema, 300);
    MeasurerConfig wide = cfg;
    wide.context_len = 25;
    wide.s_window = 5;

    auto preds = dtm::replay_predictions(rand_auto, eval_ep);
    auto encoded = encode_episode(eval_ep, rand_schema);
    std::vector<double> comp, div, noi, wdist, raw_auto(eval_ep.size(), 0.0);
    for (std::size_t i = 0; i < eval_ep.size(); ++i) {
      comp.push_back(oracle_complexity(eval_ep, rand_schema, i, wide.context_len));
      div.push_back(oracle_diversity(eval_ep, rand_schema, i, wide.diversity_mode));
      noi.push_back(oracle_noise(eval_ep, i, wide.context_len));
      if (i > 0) raw_auto[i] = score_cem(encoded[i], preds[i]->encoded);
    }
    for (std::size_t d : oracle_distances(eval_ep.labels)) {
      wdist.push_back(static_cast<double>(d / wide.s_window));
    }
    auto ncomp = oracle_normalize(comp);
    auto ndiv = oracle_normalize(div);
    auto nnoi = oracle_normalize(noi);
    auto nvul = oracle_normalize(wdist);
    auto nauto = oracle_normalize(raw_auto);
    std::vector<double> cb(eval_ep.size());
    for (std::size_t i = 0; i < eval_ep.size(); ++i) {
      double pdm = (ncomp[i] + ndiv[i] + nnoi[i] + (1.0 - nvul[i])) / 4.0;
      cb[i] = nauto[i] + wide.lambda * pdm;
    }
    auto final_scores = oracle_normalize(cb);

    auto samples = score_episode(eval_ep, rand_schema, &rand_auto, wide, Variant::cb2);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      CHECK(samples[i].s_final == final_scores[i]);
    }
  }

  SUBCASE("unlabeled episodes fall back to automaton-derived labels") {
    Episode unlabeled = scored_episode;
    unlabeled.labels.clear();
    // Make the automaton see genuine deviations so derived labels contain
    // attacks: corrupt a stretch of sensor readings.
    for (std::size_t i = 12; i < 16; ++i) unlabeled.states[i].sensors[0] = 9.5;
    auto derived = dtm::ground_truth_labels(automaton, unlabeled, cfg.tau_gt);
    REQUIRE(std::count(derived.begin(), derived.end(), Label::Attack) > 0);

    Episode relabeled = unlabeled;
    relabeled.labels = derived;
    auto from_unlabeled = score_episode(unlabeled, schema, &automaton, cfg, Variant::cb2);
    auto from_labeled = score_episode(relabeled, schema, &automaton, cfg, Variant::cb2);
    REQUIRE(from_unlabeled.size() == from_labeled.size());
    for (std::size_t i = 0; i < from_unlabeled.size(); ++i) {
      CHECK(from_unlabeled[i].s_final == from_labeled[i].s_final);
      CHECK(from_unlabeled[i].s_vul == from_labeled[i].s_vul);
    }
  }

  SUBCASE("missing prerequisites are reported") {
    Episode unlabeled = scored_episode;
    unlabeled.labels.clear();
    CHECK_THROWS_AS(score_episode(unlabeled, schema, nullptr, cfg, Variant::cb2), DataError);
    CHECK_THROWS_AS(score_episode(scored_episode, schema, nullptr, cfg, Variant::cem_only),
                    DataError);
    std::vector<Label> calm(30, Label::Normal);
    Episode no_attacks = cyclic_episode(30, calm);
    CHECK_THROWS_AS(score_episode(no_attacks, schema, &automaton, cfg, Variant::pdm_only),
                    DataError);
    MeasurerConfig bad = cfg;
    bad.lambda = 2.0;
    CHECK_THROWS_AS(score_episode(scored_episode, schema, &automaton, bad, Variant::cb2),
                    ConfigError);
  }

  SUBCASE("empty episodes score to an empty list") {
    Episode empty;
    CHECK(score_episode(empty, schema, &automaton, cfg, Variant::cb2).empty());
  }
}
