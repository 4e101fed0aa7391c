#include <cmath>

#include "agent_fixtures.hpp"
#include "apil/agent/persona_agent.hpp"
#include "apil/env/grid_world.hpp"
#include "apil/nn/random.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace apil;
using env::ExeAction;

namespace {
agent::PersonaAgent grid_agent(std::size_t k, std::uint64_t seed = 1) {
  auto rng = nn::make_stream(seed, 0);
  return agent::PersonaAgent(agent::agent_config_for(env::GridWorld::grid(), k), rng);
}
const std::vector<double> kFeatures = env::GridWorld::grid().encode(env::GridWorld::grid().reset());
}  // namespace

TEST_CASE("grid agent shapes") {
  const auto a = grid_agent(2);
  CHECK(a.config().hidden == 100);
  CHECK(a.config().persona_width == 50);
  CHECK(a.config().dropout_rate == 0.2);
  CHECK(a.policy_input_width() == 75);
  CHECK(agent::is_prob_vec(a.identity_distribution(kFeatures)));
  CHECK(agent::is_prob_vec(a.persona_policy(kFeatures, 1)));
}

TEST_CASE("policy sampling") {
  SUBCASE("single teacher always samples identity 0") {
    const auto a = grid_agent(1);
    auto rng = nn::make_stream(2, 0);
    for (int i = 0; i < 50; ++i) CHECK(a.sample_policy(kFeatures, rng, true).identity == 0);
    const auto mean = a.mean_exe_policy(kFeatures, 7, rng);
    const auto single = a.persona_policy(kFeatures, 0);
    for (std::size_t i = 0; i < mean.size(); ++i) CHECK(mean[i] == doctest::Approx(single[i]));
  }
  SUBCASE("identical persona rows give identical policies") {
    auto a = grid_agent(2);
    auto& table = a.policy_params().value(a.personas().table_index());
    for (std::size_t c = 0; c < 50; ++c) table.at(1, c) = table.at(0, c);
    CHECK(a.persona_policy(kFeatures, 0) == a.persona_policy(kFeatures, 1));
  }
  SUBCASE("seeded sampling is reproducible") {
    const auto a = grid_agent(2);
    auto r1 = nn::make_stream(3, 0), r2 = nn::make_stream(3, 0);
    for (int i = 0; i < 20; ++i) {
      const auto x = a.sample_policy(kFeatures, r1, true);
      const auto y = a.sample_policy(kFeatures, r2, true);
      CHECK(x.identity == y.identity);
      CHECK(x.probs == y.probs);
    }
  }
}

TEST_CASE("mean policy of two delta personas") {
  const auto a = fixtures::delta_agent();
  const std::vector<double> f{0.0, 0.0};
  CHECK(a.persona_policy(f, 0)[0] > 1 - 1e-12);
  CHECK(a.persona_policy(f, 1)[1] > 1 - 1e-12);
  auto rng = nn::make_stream(4, 0);
  const auto mean = a.mean_exe_policy(f, 10000, rng);
  CHECK(mean[0] >= 0.48);
  CHECK(mean[0] <= 0.52);
  CHECK(std::abs(mean[0] + mean[1] - 1.0) <= 1e-9);
}

TEST_CASE("execution losses") {
  SUBCASE("uniform policy gives ln 2") {
    auto a = grid_agent(1);
    for (auto& p : a.policy_params()) p.value.fill(0.0);
    const auto l = a.exe_losses(kFeatures, {ExeAction::down, 0, 8.0});
    CHECK(l.policy == doctest::Approx(std::log(2.0)));
    CHECK(l.identity == doctest::Approx(0.0));
  }
  SUBCASE("non-observed persona row gets no gradient") {
    auto a = grid_agent(2);
    a.exe_losses(kFeatures, {ExeAction::right, 1, 8.0});
    const auto& g = a.policy_params().grad(a.personas().table_index());
    for (std::size_t c = 0; c < 50; ++c) CHECK(g.at(0, c) == 0.0);
    double row1 = 0;
    for (std::size_t c = 0; c < 50; ++c) row1 += std::abs(g.at(1, c));
    CHECK(row1 > 0.0);
  }
  SUBCASE("gradients match finite differences") {
    auto a = grid_agent(2, 9);
    const teachers::TeacherResponse resp{ExeAction::down, 1, 6.0};
    a.exe_losses(kFeatures, resp);
    for (auto* set : {&a.policy_params(), &a.identity_params()}) {
      for (std::size_t i = 0; i < set->size(); ++i) {
        auto& value = set->value(i);
        std::vector<double> x(value.values().begin(), value.values().end());
        // Probe a slice of each tensor to keep the test quick.
        const std::size_t n = std::min<std::size_t>(x.size(), 40);
        std::vector<double> analytic(set->grad(i).values().begin(),
                                     set->grad(i).values().begin() + n);
        std::vector<double> numeric(n);
        for (std::size_t j = 0; j < n; ++j) {
          const double saved = value[j];
          auto eval = [&] {
            agent::PersonaAgent copy = a;
            const auto l = copy.exe_losses(kFeatures, resp);
            return l.policy + l.identity;
          };
          value[j] = saved + 1e-5;
          const double up = eval();
          value[j] = saved - 1e-5;
          const double down = eval();
          value[j] = saved;
          numeric[j] = (up - down) / 2e-5;
        }
        CHECK(oracle::rel_error(analytic, numeric) < 1e-4);
      }
    }
  }
  SUBCASE("invalid responses") {
    auto a = grid_agent(2);
    CHECK_THROWS(a.exe_losses(kFeatures, {ExeAction::up, 0, 8.0}));
    CHECK_THROWS(a.exe_losses(kFeatures, {ExeAction::down, 2, 8.0}));
  }
}

TEST_CASE("identity loss vanishes for a single teacher") {
  auto a = grid_agent(1);
  CHECK(a.exe_losses(kFeatures, {ExeAction::right, 0, 8.0}).identity == doctest::Approx(0.0));
}

TEST_CASE("acting") {
  const auto a = fixtures::delta_agent(1);
  auto rng = nn::make_stream(5, 0);
  const std::vector<double> f{0.0, 0.0};
  const teachers::TeacherResponse resp{ExeAction::down, 0, 3.0};
  CHECK(a.act(f, true, resp, rng, 5) == ExeAction::down);
  for (int i = 0; i < 20; ++i) CHECK(a.act(f, false, std::nullopt, rng, 5) == ExeAction::right);
  CHECK_THROWS_AS(a.act(f, true, std::nullopt, rng, 5), std::invalid_argument);

  const auto g = grid_agent(2);
  auto r1 = nn::make_stream(6, 0), r2 = nn::make_stream(6, 0);
  for (int i = 0; i < 20; ++i) {
    CHECK(g.act(kFeatures, false, std::nullopt, r1, 5) == g.act(kFeatures, false, std::nullopt, r2, 5));
  }
}

TEST_CASE("update applies only after loss terms") {
  auto a = grid_agent(2);
  const auto before = a.policy_params();
  CHECK_FALSE(a.update());
  CHECK(a.policy_params() == before);
  a.exe_losses(kFeatures, {ExeAction::right, 0, 8.0});
  CHECK(a.pending_terms() == 1);
  CHECK(a.update());
  CHECK_FALSE(a.policy_params() == before);
  CHECK(a.pending_terms() == 0);
}
