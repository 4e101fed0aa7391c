#include <cmath>
#include <random>

#include "apil/nn/random.hpp"
#include "apil/query/baselines.hpp"
#include "apil/query/labels.hpp"
#include "apil/query/query_net.hpp"
#include "doctest.h"
#include "label_fixtures.hpp"
#include "oracles.hpp"

using namespace apil;
using namespace apil::query;
using fixtures::trajectory;

namespace {
constexpr auto C = AskLabel::continue_;
constexpr auto Q = AskLabel::query;

std::vector<AskLabel> oracle_apil_labels(const std::vector<std::optional<double>>& dist, double d_T,
                                         const ApilConfig& cfg) {
  std::vector<AskLabel> out;
  for (std::size_t t = 0; t < dist.size(); ++t) {
    out.push_back(oracle::progress_at(t, dist, d_T, cfg.sigma, cfg.epsilon, cfg.teacher_final_distance,
                                      cfg.rule == ProgressRule::listing)
                      ? C
                      : Q);
  }
  return out;
}

QueryNetConfig small_net_config() {
  QueryNetConfig q;
  q.feature_width = 4;
  q.n_actions = 2;
  q.horizon = 8;
  q.time_width = 3;
  q.hidden = 6;
  return q;
}

QueryInput random_input(const QueryNetConfig& q, nn::Rng& rng) {
  QueryInput in;
  for (std::size_t i = 0; i < q.feature_width; ++i) in.features.push_back(nn::uniform01(rng));
  const double p = nn::uniform01(rng);
  in.mean_policy = {p, 1 - p};
  in.remaining = static_cast<int>(rng() % static_cast<std::uint64_t>(q.horizon + 1));
  return in;
}
}  // namespace

TEST_CASE("apil labels on hand-traced trajectories") {
  const ApilConfig cfg;
  SUBCASE("always-query GRID run") {
    const auto t = trajectory({8, 7, 6, 5, 4, 3, 2, 1}, 0.0);
    CHECK(apil_labels(t, cfg) == std::vector<AskLabel>(8, C));
  }
  SUBCASE("no queries, reached the goal") {
    const auto t = trajectory(std::vector<std::optional<double>>(8), 0.0);
    CHECK(apil_labels(t, cfg) == std::vector<AskLabel>(8, C));
  }
  SUBCASE("two queries, stopped short") {
    std::vector<std::optional<double>> d(8);
    d[0] = 8;
    d[3] = 2;
    const auto t = trajectory(d, 1.0);
    CHECK(apil_labels(t, cfg) == std::vector<AskLabel>{C, C, C, C, Q, Q, Q, Q});
  }
  SUBCASE("missing final distance") {
    auto t = trajectory({3.0}, std::nullopt);
    CHECK_THROWS_AS(apil_labels(t, cfg), std::invalid_argument);
  }
}

TEST_CASE("apil labels agree with the brute-force conditions") {
  auto rng = nn::make_stream(1, 0);
  auto check = [](const std::vector<std::optional<double>>& d, double d_T, const ApilConfig& cfg) {
    const auto got = apil_labels(trajectory(d, d_T), cfg);
    const auto want = oracle_apil_labels(d, d_T, cfg);
    CHECK(got == want);
  };

  SUBCASE("exhaustive for T <= 4") {
    for (auto rule : {ProgressRule::gap_reduction, ProgressRule::listing}) {
      for (double d_star : {0.0, 1.0}) {
        ApilConfig cfg;
        cfg.rule = rule;
        cfg.teacher_final_distance = d_star;
        for (int T = 1; T <= 4; ++T) {
          // Distances 0..4 at every step plus the end, every query subset.
          int combos = 1;
          for (int i = 0; i <= T; ++i) combos *= 5;
          for (int code = 0; code < combos; ++code) {
            std::vector<double> all;
            int c = code;
            for (int i = 0; i <= T; ++i, c /= 5) all.push_back(c % 5);
            for (int mask = 0; mask < (1 << T); ++mask) {
              std::vector<std::optional<double>> d(T);
              for (int i = 0; i < T; ++i) {
                if (mask >> i & 1) d[i] = all[i];
              }
              check(d, all[T], cfg);
            }
          }
        }
      }
    }
  }

  SUBCASE("random trajectories up to T = 8") {
    std::uniform_int_distribution<int> len(1, 8), dist(0, 12);
    std::uniform_real_distribution<double> sig(1.1, 3.0), eps(0.0, 2.0);
    for (int i = 0; i < 1000; ++i) {
      ApilConfig cfg;
      cfg.sigma = sig(rng);
      cfg.epsilon = i % 2 ? 0.0 : eps(rng);
      const int T = len(rng);
      std::vector<std::optional<double>> d(T);
      for (auto& x : d) {
        if (rng() % 2) x = dist(rng);
      }
      check(d, dist(rng), cfg);
    }
  }
}

TEST_CASE("apil labels are monotone in the backward direction") {
  auto rng = nn::make_stream(2, 0);
  std::uniform_int_distribution<int> dist(0, 10);
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::optional<double>> d(8);
    for (auto& x : d) {
      if (rng() % 2) x = dist(rng);
    }
    const auto labels = apil_labels(trajectory(d, dist(rng)), ApilConfig{});
    bool seen_continue = false;
    for (std::size_t t = labels.size(); t-- > 0;) {
      if (seen_continue) CHECK(labels[t] == C);
      seen_continue = seen_continue || labels[t] == C;
    }
  }
}

TEST_CASE("ignore table") {
  CHECK(ignore_label(true, AskAction::continue_) == C);
  CHECK(ignore_label(true, AskAction::query) == AskLabel::ignore);
  CHECK(ignore_label(false, AskAction::continue_) == Q);
  CHECK(ignore_label(false, AskAction::query) == C);
}

TEST_CASE("ignore labels differ from apil labels only in the ignore cell") {
  auto rng = nn::make_stream(3, 0);
  std::uniform_int_distribution<int> dist(0, 10);
  for (int i = 0; i < 500; ++i) {
    std::vector<std::optional<double>> d(8);
    for (auto& x : d) {
      if (rng() % 2) x = dist(rng);
    }
    const auto t = trajectory(d, dist(rng));
    const auto prog = progressable(t, ApilConfig{});
    const auto a = apil_labels(t, ApilConfig{});
    const auto b = ignore_labels(t, ApilConfig{});
    for (std::size_t s = 0; s < 8; ++s) {
      const bool ignore_cell = prog[s] && t.steps[s].ask == AskAction::query;
      if (ignore_cell) {
        CHECK(b[s] == AskLabel::ignore);
      } else if (t.steps[s].ask == AskAction::continue_) {
        CHECK(b[s] == a[s]);
      } else {
        CHECK(b[s] == C);
      }
    }
  }
}

TEST_CASE("ignore labels follow one-step deviations") {
  // For every step of every short trajectory, flip the agent's action at that
  // step and ask the brute-force conditions which actions make it progressable.
  const ApilConfig cfg;
  for (int T = 1; T <= 4; ++T) {
    int combos = 1;
    for (int i = 0; i <= T; ++i) combos *= 4;
    for (int code = 0; code < combos; ++code) {
      std::vector<double> all;
      int c = code;
      for (int i = 0; i <= T; ++i, c /= 4) all.push_back(c % 4);
      for (int mask = 0; mask < (1 << T); ++mask) {
        std::vector<std::optional<double>> d(T);
        for (int i = 0; i < T; ++i) {
          if (mask >> i & 1) d[i] = all[i];
        }
        const auto labels = ignore_labels(trajectory(d, all[T]), cfg);
        for (int t = 0; t < T; ++t) {
          auto as_query = d, as_continue = d;
          as_query[t] = all[t];
          as_continue[t].reset();
          const bool q_ok = oracle::progress_at(t, as_query, all[T], 2.0, 0.0, 0.0);
          const bool c_ok = oracle::progress_at(t, as_continue, all[T], 2.0, 0.0, 0.0);
          const bool queried = d[t].has_value();
          const bool mine = queried ? q_ok : c_ok;
          if (mine) {
            CHECK(labels[t] == (queried ? AskLabel::ignore : C));
          } else if (!queried && q_ok) {
            CHECK(labels[t] == Q);
          } else {
            CHECK(labels[t] == (queried ? C : Q));
          }
        }
      }
    }
  }
}

TEST_CASE("query imitation loss") {
  auto rng = nn::make_stream(4, 0);
  const auto cfg = small_net_config();
  QueryNet net(cfg, rng);
  std::vector<QueryInput> inputs;
  for (int t = 0; t < 8; ++t) inputs.push_back(random_input(cfg, rng));

  SUBCASE("all ignore") {
    net.zero_grad();
    CHECK(query_imitation_loss(net, inputs, std::vector<AskLabel>(8, AskLabel::ignore)) == 0.0);
    for (double g : net.flat_grad()) CHECK(g == 0.0);
  }
  SUBCASE("uniform net") {
    for (auto& p : net.params()) p.value.fill(0.0);
    CHECK(query_imitation_loss(net, inputs, std::vector<AskLabel>(8, C)) ==
          doctest::Approx(8 * std::log(2.0)));
  }
  SUBCASE("gradient matches finite differences") {
    const std::vector<AskLabel> labels{C, Q, AskLabel::ignore, Q, C, C, AskLabel::ignore, Q};
    net.zero_grad();
    query_imitation_loss(net, inputs, labels);
    const auto analytic = net.flat_grad();
    std::vector<double> numeric;
    for (auto& p : net.params()) {
      for (auto& v : p.value.values()) {
        const double saved = v;
        v = saved + 1e-5;
        QueryNet up = net;
        const double lu = query_imitation_loss(up, inputs, labels);
        v = saved - 1e-5;
        QueryNet down = net;
        const double ld = query_imitation_loss(down, inputs, labels);
        v = saved;
        numeric.push_back((lu - ld) / 2e-5);
      }
    }
    CHECK(oracle::rel_error(analytic, numeric) < 1e-4);
  }
  SUBCASE("length mismatch") {
    CHECK_THROWS(query_imitation_loss(net, inputs, std::vector<AskLabel>(3, C)));
  }
}

TEST_CASE("query net input and sampling") {
  auto rng = nn::make_stream(5, 0);
  const auto cfg = small_net_config();
  const QueryNet net(cfg, rng);
  const auto in = random_input(cfg, rng);
  const auto p = net.probs(in);
  CHECK(std::abs(p[0] + p[1] - 1.0) < 1e-12);
  CHECK(net.greedy(in) == (p[1] > p[0] ? AskAction::query : AskAction::continue_));
  auto bad = in;
  bad.remaining = cfg.horizon + 1;
  CHECK_THROWS(net.logits(bad));
}

TEST_CASE("ignore labels share the reinforce gradient at progressable states") {
  auto rng = nn::make_stream(6, 0);
  const auto cfg = small_net_config();
  for (int i = 0; i < 200; ++i) {
    QueryNet net(cfg, rng);
    const auto in = random_input(cfg, rng);
    CHECK(ignore_reinforce_gradient_gap(net, in, AskAction::query) == 0.0);
    CHECK(ignore_reinforce_gradient_gap(net, in, AskAction::continue_) < 1e-10);
  }
}

TEST_CASE("reinforce surrogate gradient is the negative log-policy gradient") {
  auto rng = nn::make_stream(7, 0);
  const auto cfg = small_net_config();
  QueryNet net(cfg, rng);
  const auto in = random_input(cfg, rng);
  net.zero_grad();
  reinforce_query_min_loss(net, in, AskAction::continue_);
  const auto analytic = net.flat_grad();
  std::vector<double> numeric;
  for (auto& p : net.params()) {
    for (auto& v : p.value.values()) {
      const double saved = v;
      v = saved + 1e-5;
      const double up = -std::log(net.probs(in)[0]);
      v = saved - 1e-5;
      const double down = -std::log(net.probs(in)[0]);
      v = saved;
      numeric.push_back((up - down) / 2e-5);
    }
  }
  CHECK(oracle::rel_error(analytic, numeric) < 1e-4);
}

TEST_CASE("threshold policies") {
  uncertainty::UncertaintyReport r;
  r.intrinsic = 0.8;
  r.extrinsic = 0.0;
  r.behavioral = 0.8;
  CHECK(threshold_policy(ThresholdKind::intrinsic, 0.5, r) == AskAction::query);
  CHECK(threshold_policy(ThresholdKind::extrinsic, 0.01, r) == AskAction::continue_);
  CHECK(threshold_policy(ThresholdKind::behavioral, 0.8, r) == AskAction::continue_);
  CHECK(always_query() == AskAction::query);
  CHECK(never_query() == AskAction::continue_);
}

TEST_CASE("error predictor") {
  auto rng = nn::make_stream(8, 0);
  ErrorPredictorConfig cfg;
  cfg.feature_width = 3;
  cfg.n_actions = 2;
  ErrorPredictor e(cfg, rng);
  const std::vector<double> f{0.5, 0.0, 1.0}, mean{0.9, 0.1};
  CHECK(e.predict(f, mean) == 1.0);
  CHECK(e.decide(f, mean) == AskAction::query);
  CHECK(margin(mean, 0) == doctest::Approx(0.1));

  // A perfectly imitated state has margin 0; the predictor learns to continue.
  for (int i = 0; i < 3000; ++i) {
    e.accumulate(f, std::vector<double>{1.0, 0.0}, margin(std::vector<double>{1.0, 0.0}, 0));
    e.update();
  }
  CHECK(e.predict(f, std::vector<double>{1.0, 0.0}) < 0.5);
  CHECK(e.decide(f, std::vector<double>{1.0, 0.0}) == AskAction::continue_);
  CHECK_THROWS(e.predict(std::vector<double>{1.0}, mean));
}
