#include "apil/harness/reports.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <map>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "apil/harness/csv.hpp"
#include "apil/training/metrics_csv.hpp"

namespace apil::harness {
namespace {

constexpr int kStreamVisitedEstimate = 48;

struct ReferenceValues {
  teachers::TeacherModel teacher;
  double intrinsic;
  double extrinsic;
};

constexpr ReferenceValues kReferenceTable1[] = {
    {teachers::TeacherModel::detm, 0.04, 0.00},
    {teachers::TeacherModel::rand, 0.72, 0.00},
    {teachers::TeacherModel::two_rand, 0.72, 0.00},
    {teachers::TeacherModel::two_dif_detm, 0.05, 0.56},
};

}  // namespace

VisitedUncertainty visited_state_uncertainty(training::Learner& learner, int eval_episodes,
                                             std::uint64_t seed) {
  const auto summary = training::evaluate(learner, eval_episodes, seed);
  const auto& world = learner.world();
  std::vector<env::EnvState> order;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<int> visits;
  for (const auto& s : summary.visited) {
    const auto id = env::state_id(s);
    auto [it, inserted] = index.emplace(id, order.size());
    if (inserted) {
      order.push_back(s);
      visits.push_back(0);
    }
    ++visits[it->second];
  }

  auto rng = nn::make_stream(seed, kStreamVisitedEstimate);
  VisitedUncertainty out;
  std::vector<uncertainty::UncertaintyReport> weighted;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto f = world.encode(order[i]);
    auto r = uncertainty::estimate(learner.agent(), f, learner.config().uncertainty, rng);
    r.state_id = env::state_id(order[i]);
    for (int v = 0; v < visits[i]; ++v) weighted.push_back(r);
    out.states.push_back({std::move(r), visits[i]});
  }
  if (weighted.empty()) throw std::runtime_error("evaluation visited no decision states");
  out.aggregate = uncertainty::mean_report(weighted);
  out.aggregate.state_id = "mean";
  return out;
}

void write_uncertainty_csv(std::ostream& out, const VisitedUncertainty& v,
                           teachers::TeacherModel teacher) {
  out << "state_id,intrinsic,extrinsic,behavioral,total,model,n1,n2,teacher,visits\n";
  auto row = [&](const uncertainty::UncertaintyReport& r, int visits) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.state_id, r.intrinsic, r.extrinsic,
                       r.behavioral, r.total, r.model, r.config.n1, r.config.n2,
                       teachers::to_string(teacher), visits);
  };
  int total_visits = 0;
  for (const auto& s : v.states) {
    row(s.report, s.visits);
    total_visits += s.visits;
  }
  row(v.aggregate, total_visits);
}

std::vector<Table1Row> make_table1(std::span<const std::filesystem::path> csvs) {
  std::map<teachers::TeacherModel, std::vector<std::pair<double, double>>> by_teacher;
  for (const auto& path : csvs) {
    const auto t = read_csv(path);
    const auto ci = t.column("intrinsic");
    const auto ce = t.column("extrinsic");
    const auto ct = t.column("teacher");
    const std::vector<std::string>* pick = nullptr;
    if (t.has_column("state_id")) {
      const auto cs = t.column("state_id");
      for (const auto& r : t.rows) {
        if (r[cs] == "mean") pick = &r;
      }
    } else {
      for (const auto& r : t.rows) {
        if (!r[ci].empty()) pick = &r;
      }
    }
    if (pick == nullptr) throw std::runtime_error(path.string() + " has no uncertainty row");
    by_teacher[teachers::parse_teacher_model((*pick)[ct])].emplace_back(parse_real((*pick)[ci]),
                                                                        parse_real((*pick)[ce]));
  }

  std::vector<std::string> missing;
  std::vector<Table1Row> rows;
  for (const auto& ref : kReferenceTable1) {
    const auto it = by_teacher.find(ref.teacher);
    if (it == by_teacher.end()) {
      missing.emplace_back(teachers::to_string(ref.teacher));
      continue;
    }
    Table1Row row{ref.teacher, 0.0, 0.0, static_cast<int>(it->second.size()), ref.intrinsic,
                  ref.extrinsic};
    for (const auto& [i, e] : it->second) {
      row.intrinsic += i;
      row.extrinsic += e;
    }
    row.intrinsic /= row.runs;
    row.extrinsic /= row.runs;
    rows.push_back(row);
  }
  if (!missing.empty()) {
    throw std::runtime_error(fmt::format("table1 inputs are missing teachers: {}",
                                         fmt::join(missing, ", ")));
  }
  return rows;
}

void write_table1(std::ostream& out, std::span<const Table1Row> rows) {
  out << "teacher,intrinsic,extrinsic,runs,reference_intrinsic,reference_extrinsic\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{},{}\n", teachers::to_string(r.teacher), r.intrinsic,
                       r.extrinsic, r.runs, r.reference_intrinsic, r.reference_extrinsic);
  }
}

std::vector<Fig4Point> make_fig4(std::span<const std::filesystem::path> metrics_csvs) {
  std::map<std::tuple<std::string, std::string, int>, Fig4Point> acc;
  for (const auto& path : metrics_csvs) {
    const auto t = read_csv(path);
    const auto cm = t.column("method");
    const auto ct = t.column("teacher");
    const auto cep = t.column("episode");
    const auto cq = t.column("query_rate");
    const auto cs = t.column("success");
    for (const auto& r : t.rows) {
      const int ep = std::stoi(r[cep]);
      auto& p = acc[{r[cm], r[ct], ep}];
      p.method = r[cm];
      p.teacher = r[ct];
      p.episode = ep;
      p.query_rate += parse_real(r[cq]);
      p.success += parse_real(r[cs]);
      ++p.runs;
    }
  }
  std::vector<Fig4Point> out;
  out.reserve(acc.size());
  for (auto& [key, p] : acc) {
    p.query_rate /= p.runs;
    p.success /= p.runs;
    out.push_back(p);
  }
  return out;
}

void write_fig4(std::ostream& out, std::span<const Fig4Point> points) {
  out << "method,teacher,episode,query_rate,success,runs\n";
  for (const auto& p : points) {
    out << fmt::format("{},{},{},{},{},{}\n", p.method, p.teacher, p.episode, p.query_rate,
                       p.success, p.runs);
  }
}

std::vector<Fig5Point> make_fig5(std::span<const std::filesystem::path> probe_csvs) {
  std::map<std::pair<int, int>, Fig5Point> acc;
  for (const auto& path : probe_csvs) {
    const auto t = read_csv(path);
    const auto cn = t.column("n1");
    const auto cep = t.column("episode");
    const auto cm = t.column("model");
    for (const auto& r : t.rows) {
      const int n1 = std::stoi(r[cn]);
      const int ep = std::stoi(r[cep]);
      auto& p = acc[{n1, ep}];
      p.n1 = n1;
      p.episode = ep;
      p.model += parse_real(r[cm]);
      ++p.runs;
    }
  }
  std::vector<Fig5Point> out;
  for (auto& [key, p] : acc) {
    p.model /= p.runs;
    out.push_back(p);
  }
  return out;
}

std::vector<Fig5Trend> fig5_trends(std::span<const Fig5Point> points) {
  std::map<int, std::vector<Fig5Point>> series;
  for (const auto& p : points) series[p.n1].push_back(p);
  std::vector<Fig5Trend> out;
  for (auto& [n1, s] : series) {
    std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.episode < b.episode; });
    const std::size_t third = std::max<std::size_t>(1, s.size() / 3);
    auto mean = [](auto first, auto last) {
      double sum = 0.0;
      int n = 0;
      for (auto it = first; it != last; ++it, ++n) sum += it->model;
      return sum / n;
    };
    out.push_back({n1, mean(s.begin(), s.begin() + third), mean(s.end() - third, s.end())});
  }
  return out;
}

void write_fig5(std::ostream& out, std::span<const Fig5Point> points) {
  out << "n1,episode,model,runs\n";
  for (const auto& p : points) out << fmt::format("{},{},{},{}\n", p.n1, p.episode, p.model, p.runs);
}

}  // namespace apil::harness
