#include "cdc/config_io.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace cdc {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Typed access to one JSON object; rejects keys outside `allowed`.
class Fields {
 public:
  Fields(const json& j, std::string path, std::initializer_list<const char*> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(fmt::format("{}: expected an object", path_));
    for (const auto& [key, value] : j.items()) {
      bool known = false;
      for (const char* a : allowed) known = known || key == a;
      if (!known) throw ConfigError(fmt::format("{}: unknown field '{}'", path_, key));
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& at(const char* key) const { return j_.at(key); }
  std::string path(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void number(const char* key, double& out) const {
    if (!has(key)) return;
    if (!at(key).is_number()) throw ConfigError(fmt::format("{}: expected a number", path(key)));
    out = at(key).get<double>();
  }

  template <typename Int>
  void integer(const char* key, Int& out) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ConfigError(fmt::format("{}: expected a non-negative integer", path(key)));
    }
    out = static_cast<Int>(v.get<std::uint64_t>());
  }

  void signed_integer(const char* key, int& out) const {
    if (!has(key)) return;
    if (!at(key).is_number_integer()) {
      throw ConfigError(fmt::format("{}: expected an integer", path(key)));
    }
    out = at(key).get<int>();
  }

  void boolean(const char* key, bool& out) const {
    if (!has(key)) return;
    if (!at(key).is_boolean()) throw ConfigError(fmt::format("{}: expected true or false", path(key)));
    out = at(key).get<bool>();
  }

  std::string string(const char* key, std::string fallback = {}) const {
    if (!has(key)) return fallback;
    if (!at(key).is_string()) throw ConfigError(fmt::format("{}: expected a string", path(key)));
    return at(key).get<std::string>();
  }

  const json& array(const char* key) const {
    if (!at(key).is_array()) throw ConfigError(fmt::format("{}: expected an array", path(key)));
    return at(key);
  }

 private:
  const json& j_;
  std::string path_;
};

ClusterHeadSpec parse_head(const json& j, const std::string& path) {
  Fields f(j, path, {"id", "cpu_power", "reward_pool"});
  ClusterHeadSpec h;
  h.id = f.string("id");
  f.number("cpu_power", h.cpu_power);
  f.number("reward_pool", h.reward_pool);
  return h;
}

WorkerSpec parse_worker(const json& j, const std::string& path) {
  Fields f(j, path, {"id", "cpu_power", "unit_cost", "comm_cost"});
  WorkerSpec w;
  w.id = f.string("id");
  f.number("cpu_power", w.cpu_power);
  f.number("unit_cost", w.unit_cost);
  if (f.has("comm_cost") && f.at("comm_cost").is_object()) {
    Fields c(f.at("comm_cost"), f.path("comm_cost"), {"default", "per_head"});
    c.number("default", w.comm_cost);
  } else {
    f.number("comm_cost", w.comm_cost);
  }
  return w;
}

// per_head keys are head ids, so they cannot go through Fields.
void parse_comm_overrides(const json& j, WorkerSpec& w, const std::string& path) {
  if (!j.contains("comm_cost") || !j.at("comm_cost").is_object()) return;
  const json& c = j.at("comm_cost");
  if (!c.contains("per_head")) return;
  const json& per = c.at("per_head");
  if (!per.is_object()) throw ConfigError(fmt::format("{}.comm_cost.per_head: expected an object", path));
  for (const auto& [head, value] : per.items()) {
    if (!value.is_number()) {
      throw ConfigError(fmt::format("{}.comm_cost.per_head.{}: expected a number", path, head));
    }
    w.comm_cost_overrides[head] = value.get<double>();
  }
}

CostModel parse_cost(const json& j) {
  Fields f(j, "cost", {"kind", "theta_p", "theta_c", "kappa", "cycles", "comm_energy", "scale",
                       "linear_coeff"});
  CostModel c;
  std::string kind = f.string("kind", "quadratic");
  if (kind == "quadratic") {
    c.kind = CostModel::Kind::quadratic;
  } else if (kind == "linear") {
    c.kind = CostModel::Kind::linear;
  } else {
    throw ConfigError(fmt::format("cost.kind: '{}' is not quadratic or linear", kind));
  }
  f.number("theta_p", c.theta_p);
  f.number("theta_c", c.theta_c);
  f.number("kappa", c.kappa);
  f.number("cycles", c.cycles);
  f.number("comm_energy", c.comm_energy);
  f.number("scale", c.scale);
  f.number("linear_coeff", c.linear_coeff);
  return c;
}

ValuationDistribution parse_valuation(const json& j) {
  Fields f(j, "valuation", {"kind", "lo", "hi", "knots"});
  std::string kind = f.string("kind", "uniform");
  if (kind == "uniform") {
    if (f.has("knots")) throw ConfigError("valuation.knots: only valid for kind tabulated");
    double lo = 0.0, hi = 1.0;
    f.number("lo", lo);
    f.number("hi", hi);
    return ValuationDistribution::uniform(lo, hi);
  }
  if (kind == "tabulated") {
    if (f.has("lo") || f.has("hi")) {
      throw ConfigError("valuation: lo/hi are implied by the knots of a tabulated distribution");
    }
    if (!f.has("knots")) throw ConfigError("valuation.knots: required for kind tabulated");
    std::vector<std::pair<double, double>> knots;
    for (const auto& k : f.array("knots")) {
      if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number()) {
        throw ConfigError("valuation.knots: each knot must be [v, F(v)]");
      }
      knots.emplace_back(k[0].get<double>(), k[1].get<double>());
    }
    return ValuationDistribution::tabulated(std::move(knots));
  }
  throw ConfigError(fmt::format("valuation.kind: '{}' is not uniform or tabulated", kind));
}

RewardSpec parse_rewards(const json& j) {
  Fields f(j, "rewards", {"kind", "K", "sigma", "param", "values"});
  RewardSpec r;
  std::string kind = f.string("kind", "homogeneous");
  auto parsed = parse_reward_kind(kind);
  if (!parsed) {
    throw ConfigError(fmt::format(
        "rewards.kind: '{}' is not homogeneous, arithmetic, geometric, winner_take_all or explicit",
        kind));
  }
  r.kind = *parsed;
  f.signed_integer("K", r.count);
  f.number("sigma", r.sigma);
  f.number("param", r.param);
  if (f.has("values")) {
    if (r.kind != RewardKind::explicit_values) {
      throw ConfigError("rewards.values: only valid for kind explicit");
    }
    for (const auto& v : f.array("values")) {
      if (!v.is_number()) throw ConfigError("rewards.values: expected numbers");
      r.values.push_back(v.get<double>());
    }
    if (!f.has("K")) r.count = static_cast<int>(r.values.size());
    if (!f.has("sigma")) {
      r.sigma = 0.0;
      for (double v : r.values) r.sigma += v;
    }
  } else if (r.kind == RewardKind::explicit_values) {
    throw ConfigError("rewards.values: required for kind explicit");
  }
  if (r.kind == RewardKind::winner_take_all && !f.has("K")) r.count = 1;
  return r;
}

CodeSpec parse_code(const json& j) {
  Fields f(j, "code", {"m", "n", "modulus", "s", "r", "t"});
  CodeSpec c;
  f.integer("m", c.m);
  f.integer("n", c.n);
  f.integer("modulus", c.modulus);
  f.integer("s", c.s);
  f.integer("r", c.r);
  f.integer("t", c.t);
  return c;
}

LatencyModel parse_latency(const json& j) {
  Fields f(j, "latency", {"kind", "jitter_rate"});
  LatencyModel l;
  std::string kind = f.string("kind", "deterministic");
  if (kind == "deterministic") {
    l.kind = LatencyModel::Kind::deterministic;
  } else if (kind == "shifted_exponential") {
    l.kind = LatencyModel::Kind::shifted_exponential;
  } else {
    throw ConfigError(
        fmt::format("latency.kind: '{}' is not deterministic or shifted_exponential", kind));
  }
  f.number("jitter_rate", l.jitter_rate);
  return l;
}

AuctionOptions parse_auction(const json& j) {
  Fields f(j, "auction", {"phi", "quad_tol", "grid_points", "include_comm_cost_on_loss"});
  AuctionOptions a;
  f.number("phi", a.phi);
  f.number("quad_tol", a.quad_tol);
  f.signed_integer("grid_points", a.grid_points);
  f.boolean("include_comm_cost_on_loss", a.include_comm_cost_on_loss);
  return a;
}

HedonicOptions parse_hedonic(const json& j) {
  Fields f(j, "hedonic", {"initial"});
  HedonicOptions h;
  if (!f.has("initial")) return h;
  const json& init = f.at("initial");
  if (init.is_string()) {
    if (init.get<std::string>() != "random") {
      throw ConfigError("hedonic.initial: expected \"random\" or an object of head -> workers");
    }
    return h;
  }
  if (!init.is_object()) {
    throw ConfigError("hedonic.initial: expected \"random\" or an object of head -> workers");
  }
  Partition p;
  for (const auto& [head, members] : init.items()) {
    if (!members.is_array()) {
      throw ConfigError(fmt::format("hedonic.initial.{}: expected an array of worker ids", head));
    }
    auto& set = p.coalitions[head];
    for (const auto& m : members) {
      if (!m.is_string()) {
        throw ConfigError(fmt::format("hedonic.initial.{}: expected worker id strings", head));
      }
      set.insert(m.get<std::string>());
    }
  }
  h.initial = std::move(p);
  return h;
}

SweepSpec parse_sweep(const json& j) {
  Fields f(j, "sweep", {"axis", "values"});
  SweepSpec s;
  s.axis = f.string("axis");
  if (!f.has("values")) throw ConfigError("sweep.values: required");
  for (const auto& v : f.array("values")) {
    if (v.is_string()) {
      s.values.push_back(v.get<std::string>());
    } else if (v.is_number_integer()) {
      s.values.push_back(v.dump());
    } else if (v.is_number()) {
      s.values.push_back(fmt::format("{}", v.get<double>()));
    } else {
      throw ConfigError("sweep.values: expected numbers or strings");
    }
  }
  return s;
}

ScenarioConfig parse(const json& root) {
  Fields f(root, "", {"rng_seed", "mc_rounds", "heads", "workers", "cost", "valuation", "rewards",
                      "code", "latency", "auction", "hedonic", "sweep"});
  ScenarioConfig c;
  if (f.has("rng_seed")) {
    std::uint64_t seed = 0;
    f.integer("rng_seed", seed);
    c.rng_seed = seed;
  }
  f.integer("mc_rounds", c.mc_rounds);
  if (f.has("heads")) {
    std::size_t i = 0;
    for (const auto& h : f.array("heads")) c.heads.push_back(parse_head(h, fmt::format("heads[{}]", i++)));
  }
  if (f.has("workers")) {
    std::size_t i = 0;
    for (const auto& w : f.array("workers")) {
      std::string path = fmt::format("workers[{}]", i++);
      WorkerSpec spec = parse_worker(w, path);
      parse_comm_overrides(w, spec, path);
      c.workers.push_back(std::move(spec));
    }
  }
  if (f.has("cost")) c.cost = parse_cost(f.at("cost"));
  if (f.has("valuation")) c.valuation = parse_valuation(f.at("valuation"));
  if (f.has("rewards")) c.rewards = parse_rewards(f.at("rewards"));
  if (f.has("code")) c.code = parse_code(f.at("code"));
  if (f.has("latency")) c.latency = parse_latency(f.at("latency"));
  if (f.has("auction")) c.auction = parse_auction(f.at("auction"));
  if (f.has("hedonic")) c.hedonic = parse_hedonic(f.at("hedonic"));
  if (f.has("sweep")) c.sweep = parse_sweep(f.at("sweep"));
  return c;
}

}  // namespace

ScenarioConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config: invalid JSON ({})", e.what()));
  }
  try {
    return parse(root);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config: {}", e.what()));
  }
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("config: cannot open '{}'", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string dump_config(const ScenarioConfig& c) {
  ordered_json root;
  if (c.rng_seed) root["rng_seed"] = *c.rng_seed;
  root["mc_rounds"] = c.mc_rounds;
  root["heads"] = ordered_json::array();
  for (const auto& h : c.heads) {
    root["heads"].push_back({{"id", h.id}, {"cpu_power", h.cpu_power}, {"reward_pool", h.reward_pool}});
  }
  root["workers"] = ordered_json::array();
  for (const auto& w : c.workers) {
    ordered_json wj{{"id", w.id}, {"cpu_power", w.cpu_power}, {"unit_cost", w.unit_cost}};
    if (w.comm_cost_overrides.empty()) {
      wj["comm_cost"] = w.comm_cost;
    } else {
      ordered_json per = ordered_json::object();
      for (const auto& [head, mu] : w.comm_cost_overrides) per[head] = mu;
      wj["comm_cost"] = {{"default", w.comm_cost}, {"per_head", per}};
    }
    root["workers"].push_back(wj);
  }
  const auto& cost = c.cost;
  root["cost"] = {{"kind", cost.kind == CostModel::Kind::linear ? "linear" : "quadratic"},
                  {"theta_p", cost.theta_p},
                  {"theta_c", cost.theta_c},
                  {"kappa", cost.kappa},
                  {"cycles", cost.cycles},
                  {"comm_energy", cost.comm_energy},
                  {"scale", cost.scale},
                  {"linear_coeff", cost.linear_coeff}};
  if (c.valuation.kind() == ValuationDistribution::Kind::uniform) {
    root["valuation"] = {{"kind", "uniform"}, {"lo", c.valuation.lo()}, {"hi", c.valuation.hi()}};
  } else {
    ordered_json knots = ordered_json::array();
    for (const auto& [v, F] : c.valuation.knots()) knots.push_back({v, F});
    root["valuation"] = {{"kind", "tabulated"}, {"knots", knots}};
  }
  ordered_json rewards{{"kind", to_string(c.rewards.kind)},
                       {"K", c.rewards.count},
                       {"sigma", c.rewards.sigma},
                       {"param", c.rewards.param}};
  if (c.rewards.kind == RewardKind::explicit_values) rewards["values"] = c.rewards.values;
  root["rewards"] = rewards;
  root["code"] = {{"m", c.code.m}, {"n", c.code.n}, {"modulus", c.code.modulus},
                  {"s", c.code.s}, {"r", c.code.r}, {"t", c.code.t}};
  root["latency"] = {
      {"kind", c.latency.kind == LatencyModel::Kind::deterministic ? "deterministic"
                                                                    : "shifted_exponential"},
      {"jitter_rate", c.latency.jitter_rate}};
  root["auction"] = {{"phi", c.auction.phi},
                     {"quad_tol", c.auction.quad_tol},
                     {"grid_points", c.auction.grid_points},
                     {"include_comm_cost_on_loss", c.auction.include_comm_cost_on_loss}};
  if (c.hedonic.initial) {
    ordered_json init = ordered_json::object();
    for (const auto& [head, members] : c.hedonic.initial->coalitions) {
      init[head] = std::vector<std::string>(members.begin(), members.end());
    }
    root["hedonic"] = {{"initial", init}};
  } else {
    root["hedonic"] = {{"initial", "random"}};
  }
  if (c.sweep) root["sweep"] = {{"axis", c.sweep->axis}, {"values", c.sweep->values}};
  return root.dump(2) + "\n";
}

}  // namespace cdc
