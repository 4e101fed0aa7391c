#include "apil/harness/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace apil::harness {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw std::invalid_argument("invalid config field '" + field + "': " + why);
}

template <typename T>
T get(const json& v, const std::string& field) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    fail(field, "has the wrong type");
  }
}

std::string rule_name(query::ProgressRule r) {
  return r == query::ProgressRule::listing ? "listing" : "gap_reduction";
}

}  // namespace

void apply_json(training::RunConfig& cfg, std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");

  for (const auto& [key, v] : doc.items()) {
    try {
      if (key == "env") {
        cfg.env = env::parse_env_kind(get<std::string>(v, key));
      } else if (key == "map") {
        cfg.map_path = get<std::string>(v, key);
      } else if (key == "horizon") {
        if (v.is_null()) cfg.horizon.reset();
        else cfg.horizon = get<int>(v, key);
      } else if (key == "teacher") {
        cfg.teacher = teachers::parse_teacher_model(get<std::string>(v, key));
      } else if (key == "method") {
        cfg.method = training::parse_method(get<std::string>(v, key));
      } else if (key == "episodes") {
        cfg.episodes = get<int>(v, key);
      } else if (key == "seed") {
        cfg.seed = get<std::uint64_t>(v, key);
      } else if (key == "lr") {
        cfg.lr = get<double>(v, key);
      } else if (key == "sigma") {
        cfg.apil.sigma = get<double>(v, key);
      } else if (key == "epsilon") {
        cfg.apil.epsilon = get<double>(v, key);
      } else if (key == "rule") {
        const auto r = get<std::string>(v, key);
        if (r == "gap_reduction") cfg.apil.rule = query::ProgressRule::gap_reduction;
        else if (r == "listing") cfg.apil.rule = query::ProgressRule::listing;
        else fail(key, "expected gap_reduction or listing");
      } else if (key == "tau") {
        cfg.tau = get<double>(v, key);
      } else if (key == "teacher_final_distance") {
        if (v.is_null()) cfg.teacher_final_distance.reset();
        else cfg.teacher_final_distance = get<double>(v, key);
      } else if (key == "teacher_rollouts") {
        cfg.teacher_rollouts = get<int>(v, key);
      } else if (key == "n1") {
        cfg.uncertainty.n1 = get<int>(v, key);
      } else if (key == "n2") {
        cfg.uncertainty.n2 = get<int>(v, key);
      } else if (key == "uncertainty_every") {
        cfg.uncertainty_every = get<int>(v, key);
      } else if (key == "probe_n1") {
        cfg.probe_n1 = get<std::vector<int>>(v, key);
      } else if (key == "errpred_threshold") {
        cfg.errpred_threshold = get<double>(v, key);
      } else if (key == "dropout") {
        cfg.dropout_rate = get<double>(v, key);
      } else if (key == "train_dropout") {
        cfg.train_with_dropout = get<bool>(v, key);
      } else if (key == "persona_init") {
        cfg.persona_init_scale = get<double>(v, key);
      } else if (key == "greedy") {
        cfg.greedy = get<bool>(v, key);
      } else {
        fail(key, "unknown key");
      }
    } catch (const std::invalid_argument& e) {
      if (std::string_view(e.what()).starts_with("invalid config field")) throw;
      fail(key, e.what());
    }
  }
}

training::RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  training::RunConfig cfg;
  apply_json(cfg, buf.str());
  return cfg;
}

std::string to_json(const training::RunConfig& cfg, int indent) {
  json j;
  j["env"] = std::string(env::to_string(cfg.env));
  j["map"] = cfg.map_path;
  j["horizon"] = cfg.horizon ? json(*cfg.horizon) : json(nullptr);
  j["teacher"] = std::string(teachers::to_string(cfg.teacher));
  j["method"] = std::string(training::to_string(cfg.method));
  j["episodes"] = cfg.episodes;
  j["seed"] = cfg.seed;
  j["lr"] = cfg.lr;
  j["sigma"] = cfg.apil.sigma;
  j["epsilon"] = cfg.apil.epsilon;
  j["rule"] = rule_name(cfg.apil.rule);
  j["tau"] = cfg.tau;
  j["teacher_final_distance"] =
      cfg.teacher_final_distance ? json(*cfg.teacher_final_distance) : json(nullptr);
  j["teacher_rollouts"] = cfg.teacher_rollouts;
  j["n1"] = cfg.uncertainty.n1;
  j["n2"] = cfg.uncertainty.n2;
  j["uncertainty_every"] = cfg.uncertainty_every;
  j["probe_n1"] = cfg.probe_n1;
  j["errpred_threshold"] = cfg.errpred_threshold;
  j["dropout"] = cfg.dropout_rate;
  j["train_dropout"] = cfg.train_with_dropout;
  j["persona_init"] = cfg.persona_init_scale;
  j["greedy"] = cfg.greedy;
  return j.dump(indent);
}

}  // namespace apil::harness
