#include <benchmark/benchmark.h>

#include "apil/agent/persona_agent.hpp"
#include "apil/env/grid_world.hpp"
#include "apil/training/run.hpp"
#include "apil/uncertainty/estimators.hpp"

using namespace apil;

namespace {

struct Fixture {
  env::GridWorld world = env::GridWorld::grid();
  nn::Rng rng = nn::make_stream(0, 0);
  agent::PersonaAgent agent{agent::agent_config_for(world, 2), rng};
  std::vector<double> features = world.encode(world.reset());
};

void BM_PersonaPolicyForward(benchmark::State& state) {
  Fixture f;
  for (auto _ : state) benchmark::DoNotOptimize(f.agent.persona_policy(f.features, 1));
}
BENCHMARK(BM_PersonaPolicyForward);

void BM_ExeLossBackward(benchmark::State& state) {
  Fixture f;
  teachers::TeacherResponse response;
  response.exe_action = env::ExeAction::down;
  response.identity = 1;
  for (auto _ : state) benchmark::DoNotOptimize(f.agent.exe_losses(f.features, response));
}
BENCHMARK(BM_ExeLossBackward);

void BM_UncertaintyEstimate(benchmark::State& state) {
  Fixture f;
  uncertainty::UncertaintyConfig cfg;
  cfg.n1 = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(uncertainty::estimate(f.agent, f.features, cfg, f.rng));
}
BENCHMARK(BM_UncertaintyEstimate)->Arg(5)->Arg(50);

void BM_TrainEpisode(benchmark::State& state) {
  training::RunConfig cfg;
  cfg.method = static_cast<training::Method>(state.range(0));
  cfg.teacher = teachers::TeacherModel::two_dif_detm;
  training::Learner learner(cfg);
  int episode = 0;
  for (auto _ : state) benchmark::DoNotOptimize(learner.train_episode(episode++));
}
BENCHMARK(BM_TrainEpisode)
    ->Arg(static_cast<int>(training::Method::apil))
    ->Arg(static_cast<int>(training::Method::dagger))
    ->Arg(static_cast<int>(training::Method::intrun));

}  // namespace
BENCHMARK_MAIN();
