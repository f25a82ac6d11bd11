#include "rlbalance/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rlbalance/policies.hpp"

namespace rlbalance {

namespace {

using nlohmann::json;

/// Walks a JSON object, remembering which keys were consumed so leftovers
/// can be reported as unknown.
class Reader {
 public:
  Reader(const json& node, std::string path, std::vector<std::string>& errors)
      : node_(node), path_(std::move(path)), errors_(errors) {
    if (!node_.is_object()) errors_.push_back(where() + ": expected an object");
  }

  ~Reader() {
    if (!node_.is_object()) return;
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) errors_.push_back(key_path(key) + ": unknown key");
    }
  }

  Reader(const Reader&) = delete;
  Reader& operator=(const Reader&) = delete;

  const json* find(const std::string& key) {
    seen_.insert(key);
    if (!node_.is_object()) return nullptr;
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  const json* require(const std::string& key) {
    const json* v = find(key);
    if (v == nullptr && node_.is_object()) errors_.push_back(key_path(key) + ": missing required key");
    return v;
  }

  template <class T>
  void number(const std::string& key, T& out, bool required) {
    const json* v = required ? require(key) : find(key);
    if (v == nullptr) return;
    if constexpr (std::is_integral_v<T>) {
      const bool ok = std::is_unsigned_v<T> ? v->is_number_unsigned() : v->is_number_integer();
      if (!ok) {
        errors_.push_back(key_path(key) + ": expected an integer");
        return;
      }
      out = v->get<T>();
    } else {
      if (!v->is_number()) {
        errors_.push_back(key_path(key) + ": expected a number");
        return;
      }
      out = v->get<T>();
    }
  }

  std::optional<std::string> string(const std::string& key, bool required) {
    const json* v = required ? require(key) : find(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_string()) {
      errors_.push_back(key_path(key) + ": expected a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void error(const std::string& key, const std::string& message) {
    errors_.push_back(key_path(key) + ": " + message);
  }

  std::vector<std::string>& errors() { return errors_; }

 private:
  std::string where() const { return path_.empty() ? "<root>" : path_; }

  const json& node_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

void read_cluster(const json& node, ExperimentConfig& config, std::vector<std::string>& errors) {
  if (!node.is_array() || node.empty()) {
    errors.push_back("cluster: expected a non-empty list of servers");
    return;
  }
  for (std::size_t i = 0; i < node.size(); ++i) {
    Reader r(node[i], "cluster[" + std::to_string(i) + "]", errors);
    ServerSpec spec;
    spec.server_id = i;
    r.number("speed", spec.speed, true);
    r.number("slots", spec.slots, false);
    spec.weight = spec.speed;
    r.number("weight", spec.weight, false);
    if (!(spec.speed > 0.0)) r.error("speed", "must be > 0");
    if (spec.slots < 1) r.error("slots", "must be >= 1");
    if (!(spec.weight > 0.0)) r.error("weight", "must be > 0");
    config.cluster.push_back(spec);
  }
}

void read_workload(const json& node, ExperimentConfig& config, std::vector<std::string>& errors) {
  Reader r(node, "workload", errors);
  const auto kind = r.string("kind", true);
  if (kind == "steady") {
    SteadyArrivals a;
    r.number("rate", a.rate, true);
    config.workload.arrivals = a;
  } else if (kind == "bursty") {
    BurstyArrivals a;
    r.number("rate_low", a.rate_low, true);
    r.number("rate_high", a.rate_high, true);
    r.number("mean_dwell_low", a.mean_dwell_low, false);
    r.number("mean_dwell_high", a.mean_dwell_high, false);
    config.workload.arrivals = a;
  } else if (kind) {
    r.error("kind", "expected 'steady' or 'bursty', got '" + *kind + "'");
  }

  if (const json* sizes = r.find("size_dist")) {
    Reader s(*sizes, "workload.size_dist", errors);
    const auto size_kind = s.string("kind", true);
    if (size_kind == "exponential") {
      ExponentialSizes e;
      s.number("mean", e.mean, true);
      config.workload.sizes = e;
    } else if (size_kind == "lognormal") {
      LogNormalSizes l;
      s.number("mu", l.mu, true);
      s.number("sigma", l.sigma, true);
      config.workload.sizes = l;
    } else if (size_kind) {
      s.error("kind", "expected 'exponential' or 'lognormal', got '" + *size_kind + "'");
    }
  } else {
    config.workload.sizes = ExponentialSizes{1.0};
  }
}

struct AgentOverrides {
  std::optional<double> t_ref;
  std::optional<std::uint64_t> epsilon_decay_tasks;
};

AgentOverrides read_agent(const json& node, AgentConfig& agent, std::vector<std::string>& errors) {
  AgentOverrides o;
  Reader r(node, "agent", errors);
  r.number("alpha", agent.alpha, false);
  r.number("gamma", agent.gamma, false);
  r.number("epsilon_start", agent.epsilon_start, false);
  r.number("epsilon_end", agent.epsilon_end, false);
  if (r.find("epsilon_decay_tasks")) {
    std::uint64_t v = 0;
    r.number("epsilon_decay_tasks", v, true);
    o.epsilon_decay_tasks = v;
  }
  r.number("util_bins", agent.util_bins, false);
  r.number("active_bins", agent.active_bins, false);
  r.number("queue_bins", agent.queue_bins, false);
  if (const json* eval = r.find("evaluation_mode")) {
    if (*eval == "online") {
      agent.learn_during_evaluation = true;
    } else if (*eval == "greedy") {
      agent.learn_during_evaluation = false;
    } else {
      r.error("evaluation_mode", "expected 'online' or 'greedy'");
    }
  }
  if (const json* reward = r.find("reward")) {
    Reader rr(*reward, "agent.reward", errors);
    if (rr.find("t_ref")) {
      double v = 0.0;
      rr.number("t_ref", v, true);
      o.t_ref = v;
    }
    rr.number("kappa", agent.reward.kappa, false);
  }
  return o;
}

void collect_validation(const std::string& key, const std::function<void()>& check,
                        std::vector<std::string>& errors) {
  try {
    check();
  } catch (const ValidationError& e) {
    errors.push_back(key + ": " + e.what());
  }
}

}  // namespace

void validate_config(const ExperimentConfig& c) {
  std::vector<std::string> errors;
  collect_validation("cluster", [&] { validate_cluster(c.cluster); }, errors);
  collect_validation("workload", [&] { validate_workload(c.workload); }, errors);
  collect_validation("agent", [&] { validate_agent(c.agent); }, errors);
  if (c.policies.empty()) errors.push_back("policies: at least one policy is required");
  for (const auto& p : c.policies) {
    if (!is_known_policy(p)) errors.push_back("policies: unknown policy '" + p + "'");
  }
  if (c.seeds.empty()) errors.push_back("seeds: at least one seed is required");
  for (double m : c.load_multipliers) {
    if (!(m > 0.0) || !std::isfinite(m)) errors.push_back("load_multipliers: values must be > 0");
  }
  if (!(c.sample_interval > 0.0)) errors.push_back("sample_interval: must be > 0");
  if (!errors.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ValidationError(msg);
  }
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not well-formed: ") + e.what());
  }

  ExperimentConfig config;
  std::vector<std::string> errors;
  AgentOverrides overrides;
  {
    Reader root(doc, "", errors);
    int version = 0;
    root.number("config_version", version, true);
    if (root.find("config_version") && version != kConfigVersion) {
      root.error("config_version", "unsupported version " + std::to_string(version) +
                                       " (expected " + std::to_string(kConfigVersion) + ")");
    }
    if (const json* cluster = root.require("cluster")) read_cluster(*cluster, config, errors);
    if (const json* workload = root.require("workload")) read_workload(*workload, config, errors);
    root.number("evaluation_horizon", config.workload.horizon, true);

    if (const json* policies = root.require("policies")) {
      if (!policies->is_array()) {
        root.error("policies", "expected a list of policy names");
      } else {
        for (const auto& p : *policies) {
          if (p.is_string()) {
            config.policies.push_back(p.get<std::string>());
          } else {
            root.error("policies", "entries must be strings");
          }
        }
      }
    }
    if (const json* agent = root.find("agent")) overrides = read_agent(*agent, config.agent, errors);
    root.number("training_tasks", config.training_tasks, false);

    if (const json* seeds = root.require("seeds")) {
      if (!seeds->is_array()) {
        root.error("seeds", "expected a list of integers");
      } else {
        for (const auto& s : *seeds) {
          if (s.is_number_unsigned()) {
            config.seeds.push_back(s.get<std::uint64_t>());
          } else {
            root.error("seeds", "entries must be non-negative integers");
          }
        }
      }
    }
    if (const json* mult = root.find("load_multipliers")) {
      if (!mult->is_array()) {
        root.error("load_multipliers", "expected a list of numbers");
      } else {
        for (const auto& m : *mult) {
          if (m.is_number()) {
            config.load_multipliers.push_back(m.get<double>());
          } else {
            root.error("load_multipliers", "entries must be numbers");
          }
        }
      }
    }
    root.number("sample_interval", config.sample_interval, false);
    if (auto out = root.string("out_dir", false)) config.out_dir = *out;
  }
  if (!errors.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ValidationError(msg);
  }

  // Derived defaults: t_ref is the mean service time on an average server;
  // exploration decays over the first half of training.
  if (overrides.t_ref) {
    config.agent.reward.t_ref = *overrides.t_ref;
  } else {
    double speed_sum = 0.0;
    for (const auto& s : config.cluster) speed_sum += s.speed;
    config.agent.reward.t_ref =
        mean_task_size(config.workload) / (speed_sum / static_cast<double>(config.cluster.size()));
  }
  config.agent.epsilon_decay_tasks = overrides.epsilon_decay_tasks
                                         ? *overrides.epsilon_decay_tasks
                                         : std::max<std::uint64_t>(1, config.training_tasks / 2);

  validate_config(config);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace rlbalance
