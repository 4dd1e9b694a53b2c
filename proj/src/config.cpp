#include "aimdsync/config.hpp"

#include <cstdlib>
#include <stdexcept>

namespace aimdsync {

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& msg) {
  throw std::invalid_argument(path + ": " + msg);
}

const toml::Value* find(const toml::Table& t, const std::string& key) {
  auto it = t.find(key);
  return it == t.end() ? nullptr : &it->second;
}

const toml::Table& require_table(const toml::Table& t, const std::string& key,
                                 const std::string& path) {
  const toml::Value* v = find(t, key);
  if (!v || !v->is_table()) bad(path + key, "missing table");
  return v->as_table();
}

double get_double(const toml::Table& t, const std::string& key, const std::string& path,
                  double fallback, bool required = false) {
  const toml::Value* v = find(t, key);
  if (!v) {
    if (required) bad(path + key, "missing value");
    return fallback;
  }
  if (!v->is_number()) bad(path + key, "expected a number");
  return v->as_double();
}

std::int64_t get_int(const toml::Table& t, const std::string& key, const std::string& path,
                     std::int64_t fallback) {
  const toml::Value* v = find(t, key);
  if (!v) return fallback;
  if (!v->is_int()) bad(path + key, "expected an integer");
  return v->as_int();
}

bool get_bool(const toml::Table& t, const std::string& key, const std::string& path,
              bool fallback) {
  const toml::Value* v = find(t, key);
  if (!v) return fallback;
  if (!v->is_bool()) bad(path + key, "expected true or false");
  return v->as_bool();
}

std::string get_string(const toml::Table& t, const std::string& key, const std::string& path,
                       std::string fallback) {
  const toml::Value* v = find(t, key);
  if (!v) return fallback;
  if (!v->is_string()) bad(path + key, "expected a string");
  return v->as_string();
}

Vec get_number_array(const toml::Table& t, const std::string& key, const std::string& path,
                     bool required) {
  const toml::Value* v = find(t, key);
  if (!v) {
    if (required) bad(path + key, "missing array");
    return {};
  }
  if (!v->is_array()) bad(path + key, "expected an array of numbers");
  Vec out;
  for (size_t i = 0; i < v->as_array().size(); ++i) {
    const toml::Value& e = v->as_array()[i];
    if (!e.is_number()) bad(path + key + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(e.as_double());
  }
  return out;
}

ResourceParams parse_resource(const toml::Table& t, const std::string& path) {
  const Vec alpha = get_number_array(t, "alpha", path, true);
  const Vec beta = get_number_array(t, "beta", path, true);
  if (alpha.size() != beta.size()) bad(path + "beta", "length differs from alpha");
  const double capacity = get_double(t, "capacity", path, 1.0);
  try {
    return ResourceParams::from_vectors(alpha, beta, capacity);
  } catch (const std::invalid_argument& e) {
    bad(path.substr(0, path.size() - 1), e.what());
  }
}

toml::Array to_array(const Vec& v) {
  toml::Array arr;
  for (double x : v) arr.emplace_back(x);
  return arr;
}

}  // namespace

std::vector<UtilitySpec> PolicySpec::utility_specs(int n) const {
  Vec w = weights;
  if (w.empty()) w.assign(static_cast<size_t>(n), 1.0);
  if (w.size() == 1) w.assign(static_cast<size_t>(n), w[0]);
  if (static_cast<int>(w.size()) != n)
    throw std::invalid_argument("policy.weights: expected 1 or " + std::to_string(n) +
                                " entries");
  std::vector<UtilitySpec> specs;
  specs.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double wi = w[static_cast<size_t>(i)];
    if (utility == "quadratic")
      specs.push_back(UtilitySpec::quadratic(wi));
    else if (utility == "log_barrier")
      specs.push_back(UtilitySpec::log_barrier(wi));
    else if (utility == "power") {
      UtilitySpec s = UtilitySpec::power(exponent);
      s.weight = wi;
      specs.push_back(s);
    } else
      throw std::invalid_argument("policy.utility: unknown family '" + utility + "'");
  }
  return specs;
}

void ExperimentConfig::validate() const {
  try {
    resource_a.validate();
  } catch (const std::invalid_argument& e) {
    bad("resource.a", e.what());
  }
  try {
    resource_b.validate();
  } catch (const std::invalid_argument& e) {
    bad("resource.b", e.what());
  }
  if (resource_a.size() != resource_b.size())
    bad("resource.b.alpha", "both resources need the same number of agents");
  if (window < 1) bad("run.window", "must be >= 1");
  if (meta_events < 1) bad("run.meta_events", "must be >= 1");
  if (replicas < 1) bad("run.replicas", "must be >= 1");
  if (threads < 0) bad("run.threads", "must be >= 0");
  if (!(policy.floor_eps > 0.0) || !(policy.floor_eps < 1.0))
    bad("policy.floor", "must lie in (0, 1)");
  if (init.low < 0.0 || init.high < init.low) bad("init.high", "need 0 <= low <= high");

  const int n = agents();
  switch (policy.kind) {
    case PolicySpec::Kind::constant:
      if (static_cast<int>(policy.constant_probs.size()) != n)
        bad("policy.probs", "expected " + std::to_string(n) + " entries");
      for (double p : policy.constant_probs)
        if (!(p >= 0.0) || !(p <= 1.0)) bad("policy.probs", "entries must lie in [0, 1]");
      break;
    case PolicySpec::Kind::window_mean:
      break;
    case PolicySpec::Kind::utility_gradient:
      if (policy.xi < 0.0) bad("policy.xi", "must be >= 0 (0 = auto)");
      try {
        policy.utility_specs(n);
      } catch (const std::invalid_argument& e) {
        bad("policy", e.what());
      }
      break;
  }
}

std::shared_ptr<DropPolicy> ExperimentConfig::make_policy() const {
  const int n = agents();
  switch (policy.kind) {
    case PolicySpec::Kind::constant:
      return std::make_shared<ConstantPolicy>(policy.constant_probs, policy.floor_eps);
    case PolicySpec::Kind::window_mean:
      return std::make_shared<WindowMeanPolicy>(window, policy.floor_eps);
    case PolicySpec::Kind::utility_gradient: {
      auto specs = policy.utility_specs(n);
      const double xi = policy.xi > 0.0 ? policy.xi : default_xi(specs, n);
      return std::make_shared<UtilityGradientPolicy>(std::move(specs), xi, policy.floor_eps);
    }
  }
  throw std::logic_error("make_policy: unreachable");
}

std::string ExperimentConfig::resolved_out_dir() const {
  if (!out_dir.empty()) return out_dir;
  if (const char* env = std::getenv("AIMDSYNC_OUT"); env && *env) return env;
  return "out";
}

ExperimentConfig ExperimentConfig::from_toml(const toml::Table& table) {
  ExperimentConfig cfg;
  const toml::Table& resource = require_table(table, "resource", "");
  cfg.resource_a = parse_resource(require_table(resource, "a", "resource."), "resource.a.");
  cfg.resource_b = parse_resource(require_table(resource, "b", "resource."), "resource.b.");

  if (const toml::Value* p = find(table, "policy")) {
    const toml::Table& pt = p->as_table();
    const std::string kind = get_string(pt, "kind", "policy.", "window_mean");
    if (kind == "constant")
      cfg.policy.kind = PolicySpec::Kind::constant;
    else if (kind == "window_mean")
      cfg.policy.kind = PolicySpec::Kind::window_mean;
    else if (kind == "utility_gradient")
      cfg.policy.kind = PolicySpec::Kind::utility_gradient;
    else
      bad("policy.kind", "unknown kind '" + kind + "'");
    cfg.policy.floor_eps = get_double(pt, "floor", "policy.", cfg.policy.floor_eps);
    cfg.policy.constant_probs = get_number_array(pt, "probs", "policy.", false);
    cfg.policy.xi = get_double(pt, "xi", "policy.", cfg.policy.xi);
    cfg.policy.utility = get_string(pt, "utility", "policy.", cfg.policy.utility);
    cfg.policy.weights = get_number_array(pt, "weights", "policy.", false);
    cfg.policy.exponent = get_double(pt, "exponent", "policy.", cfg.policy.exponent);
  }

  if (const toml::Value* r = find(table, "run")) {
    const toml::Table& rt = r->as_table();
    cfg.window = static_cast<int>(get_int(rt, "window", "run.", cfg.window));
    cfg.meta_events = get_int(rt, "meta_events", "run.", cfg.meta_events);
    cfg.replicas = static_cast<int>(get_int(rt, "replicas", "run.", cfg.replicas));
    cfg.seed = static_cast<std::uint64_t>(get_int(rt, "seed", "run.", 0));
    cfg.out_dir = get_string(rt, "out_dir", "run.", cfg.out_dir);
    cfg.global_md = get_bool(rt, "global_md", "run.", cfg.global_md);
    cfg.threads = static_cast<int>(get_int(rt, "threads", "run.", cfg.threads));
  }

  if (const toml::Value* i = find(table, "init")) {
    const toml::Table& it = i->as_table();
    cfg.init.low = get_double(it, "low", "init.", cfg.init.low);
    cfg.init.high = get_double(it, "high", "init.", cfg.init.high);
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  return from_toml(toml::parse_file(path));
}

toml::Table ExperimentConfig::to_toml() const {
  toml::Table root;

  toml::Table res_a, res_b;
  auto fill = [](toml::Table& t, const ResourceParams& p) {
    Vec alpha, beta;
    for (const auto& ag : p.agents) {
      alpha.push_back(ag.alpha);
      beta.push_back(ag.beta);
    }
    t.emplace("alpha", to_array(alpha));
    t.emplace("beta", to_array(beta));
    t.emplace("capacity", toml::Value(p.capacity));
  };
  fill(res_a, resource_a);
  fill(res_b, resource_b);
  toml::Table resource;
  resource.emplace("a", std::move(res_a));
  resource.emplace("b", std::move(res_b));
  root.emplace("resource", std::move(resource));

  toml::Table pt;
  switch (policy.kind) {
    case PolicySpec::Kind::constant: pt.emplace("kind", "constant"); break;
    case PolicySpec::Kind::window_mean: pt.emplace("kind", "window_mean"); break;
    case PolicySpec::Kind::utility_gradient: pt.emplace("kind", "utility_gradient"); break;
  }
  pt.emplace("floor", toml::Value(policy.floor_eps));
  if (!policy.constant_probs.empty()) pt.emplace("probs", to_array(policy.constant_probs));
  if (policy.kind == PolicySpec::Kind::utility_gradient) {
    pt.emplace("xi", toml::Value(policy.xi));
    pt.emplace("utility", toml::Value(policy.utility));
    if (!policy.weights.empty()) pt.emplace("weights", to_array(policy.weights));
    pt.emplace("exponent", toml::Value(policy.exponent));
  }
  root.emplace("policy", std::move(pt));

  toml::Table rt;
  rt.emplace("window", toml::Value(static_cast<std::int64_t>(window)));
  rt.emplace("meta_events", toml::Value(static_cast<std::int64_t>(meta_events)));
  rt.emplace("replicas", toml::Value(static_cast<std::int64_t>(replicas)));
  rt.emplace("seed", toml::Value(static_cast<std::int64_t>(seed)));
  if (!out_dir.empty()) rt.emplace("out_dir", toml::Value(out_dir));
  rt.emplace("global_md", toml::Value(global_md));
  rt.emplace("threads", toml::Value(static_cast<std::int64_t>(threads)));
  root.emplace("run", std::move(rt));

  toml::Table it;
  it.emplace("low", toml::Value(init.low));
  it.emplace("high", toml::Value(init.high));
  root.emplace("init", std::move(it));

  return root;
}

}  // namespace aimdsync
