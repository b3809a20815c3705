#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "cdc/config_io.hpp"
#include "cdc/csv.hpp"
#include "cdc/hedonic.hpp"
#include "cdc/numeric.hpp"
#include "cdc/polycode.hpp"
#include "cdc/selftest.hpp"
#include "cdc/simulate.hpp"

namespace cdc::cli {
namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string log;
  std::string shares;
  std::string method = "formula";
  std::string scheme = "coalition_auction";
  std::uint64_t seed = 0;
  std::size_t rounds = 0;
  std::size_t threads = 1;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* rounds_opt = nullptr;
};

// Usage and configuration problems; reported with exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_to(const std::string& path, std::ostream& fallback,
              const std::function<void(std::ostream&)>& emit) {
  if (path.empty()) {
    emit(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
  emit(file);
  if (!file) throw std::runtime_error("failed writing '" + path + "'");
}

ScenarioConfig load(const Flags& f, std::ostream& err) {
  if (f.config.empty()) throw UsageError("--config is required");
  ScenarioConfig config;
  try {
    config = load_config(f.config);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  if (f.seed_opt->count() > 0) config.rng_seed = f.seed;
  auto problems = validate(config);
  if (!problems.empty()) {
    for (const auto& p : problems) err << p << '\n';
    throw UsageError(fmt::format("{}: {} validation error(s)", f.config, problems.size()));
  }
  return config;
}

std::size_t rounds_of(const Flags& f, const ScenarioConfig& config) {
  std::size_t rounds = f.rounds_opt->count() > 0 ? f.rounds : config.mc_rounds;
  if (rounds < 1) throw UsageError("--rounds must be >= 1");
  return rounds;
}

int cmd_coalition(const Flags& f, std::ostream& out, std::ostream& err) {
  auto config = load(f, err);
  hedonic::Roster roster(config.workers, config.heads);
  hedonic::InitialAssignment init =
      config.hedonic.initial
          ? hedonic::InitialAssignment{*config.hedonic.initial}
          : hedonic::InitialAssignment{hedonic::RandomInit{
                simulate::stream_seed(*config.rng_seed, 0, simulate::Stream::hedonic)}};
  auto result = hedonic::form_coalitions(roster, init);
  spdlog::info("coalition: {} switches over {} phase(s), Nash-stable: {}", result.log.size(),
               result.phases, hedonic::is_nash_stable(roster, result.partition) ? "yes" : "no");
  if (!f.log.empty()) {
    write_to(f.log, out, [&](std::ostream& o) { hedonic::write_switch_log_csv(o, result.log); });
  }
  write_to(f.out, out, [&](std::ostream& o) {
    o << "head_id,members,coalition_value\n";
    for (const auto& [head, members] : result.partition.coalitions) {
      std::vector<std::string> ids(members.begin(), members.end());
      o << head << ',' << join_strings(ids) << ','
        << format_real(hedonic::coalition_value(result.partition, roster, head)) << '\n';
    }
  });
  return 0;
}

int cmd_equilibrium(const Flags& f, std::ostream& out, std::ostream& err) {
  auto config = load(f, err);
  auto rows = simulate::equilibrium_curves(config);
  write_to(f.out, out, [&](std::ostream& o) { simulate::write_curves_csv(o, rows); });
  return 0;
}

int cmd_rewards(const Flags& f, std::ostream& out, std::ostream& err) {
  auto config = load(f, err);
  auto method = f.method == "mc" ? auction::Method::monte_carlo : auction::Method::formula;
  auto rows = simulate::reward_comparison(config, method, rounds_of(f, config), *config.rng_seed);
  write_to(f.out, out, [&](std::ostream& o) { simulate::write_rewards_csv(o, rows); });
  return 0;
}

simulate::Scheme parse_scheme(const std::string& name) {
  for (auto s : simulate::kAllSchemes) {
    if (name == simulate::to_string(s)) return s;
  }
  throw UsageError("--scheme must be coalition_auction, coalition_random or no_coalition_random");
}

int cmd_simulate(const Flags& f, std::ostream& out, std::ostream& err) {
  auto config = load(f, err);
  auto scheme = parse_scheme(f.scheme);
  simulate::Simulation sim(config);
  auto results = simulate::simulate_rounds(sim, scheme, rounds_of(f, config), f.threads);
  std::size_t ok = 0;
  for (const auto& r : results) ok += r.decode_ok ? 1 : 0;
  spdlog::info("simulate: {} rounds of {}, decode ok in {}", results.size(),
               simulate::to_string(scheme), ok);
  write_to(f.out, out, [&](std::ostream& o) { simulate::write_rounds_csv(o, results); });
  if (!f.shares.empty()) {
    std::filesystem::create_directories(f.shares);
    for (const auto& share : simulate::coded_task(config, 0).shares) {
      auto path = std::filesystem::path(f.shares) / polycode::share_file_name(share.head);
      write_to(path.string(), out, [&](std::ostream& o) { polycode::write_share_csv(o, share); });
    }
  }
  return 0;
}

int cmd_compare(const Flags& f, std::ostream& out, std::ostream& err) {
  auto config = load(f, err);
  simulate::Simulation sim(config);
  auto rows = simulate::compare_schemes(sim, rounds_of(f, config), f.threads);
  write_to(f.out, out, [&](std::ostream& o) { simulate::write_schemes_csv(o, rows); });
  return 0;
}

int cmd_selftest(const Flags&, std::ostream& out, std::ostream&) {
  return selftest::report(out, selftest::run_all());
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Incentive mechanism and coded-computation simulator", "cdc_incent"};
  app.require_subcommand(1, 1);
  Flags f;

  using Handler = int (*)(const Flags&, std::ostream&, std::ostream&);
  const std::vector<std::tuple<const char*, const char*, Handler>> commands{
      {"coalition", "Form worker coalitions with the switch rule", cmd_coalition},
      {"equilibrium", "Tabulate equilibrium bid curves", cmd_equilibrium},
      {"rewards", "Master utility of reward schedules", cmd_rewards},
      {"simulate", "Run end-to-end rounds", cmd_simulate},
      {"compare", "Compare the three allocation schemes", cmd_compare},
      {"selftest", "Run the embedded oracle checks", cmd_selftest},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help, handler] : commands) {
    auto* sub = app.add_subcommand(name, help);
    subs.push_back(sub);
    if (std::string(name) == "selftest") continue;
    sub->add_option("--config", f.config, "Scenario JSON file")->required();
    sub->add_option("--out", f.out, "Output CSV (default: stdout)");
    f.seed_opt = sub->add_option("--seed", f.seed, "Overrides rng_seed from the config");
    if (std::string(name) == "coalition") {
      sub->add_option("--log", f.log, "Switch-log CSV");
    }
    if (std::string(name) == "rewards") {
      sub->add_option("--method", f.method, "formula or mc")
          ->check(CLI::IsMember({"formula", "mc"}));
    }
    if (std::string(name) == "rewards" || std::string(name) == "simulate" ||
        std::string(name) == "compare") {
      f.rounds_opt = sub->add_option("--rounds", f.rounds, "Rounds (default: mc_rounds)");
    }
    if (std::string(name) == "simulate" || std::string(name) == "compare") {
      sub->add_option("--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber);
    }
    if (std::string(name) == "simulate") {
      sub->add_option("--scheme", f.scheme, "coalition_auction, coalition_random or no_coalition_random");
      sub->add_option("--shares", f.shares, "Directory for the round-0 share files");
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  // Options are registered per subcommand; point the shared handles at the
  // ones of the subcommand that actually ran.
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    const auto& [name, help, handler] = commands[i];
    f.seed_opt = subs[i]->get_option_no_throw("--seed");
    f.rounds_opt = subs[i]->get_option_no_throw("--rounds");
    try {
      return handler(f, out, err);
    } catch (const UsageError& e) {
      err << "error: " << e.what() << '\n';
      return 1;
    } catch (const QuadratureError& e) {
      err << "error in " << name << " (quadrature): " << e.what() << '\n';
      return 2;
    } catch (const polycode::DecodeError& e) {
      err << "error in " << name << " (decode): " << e.what() << '\n';
      return 2;
    } catch (const std::exception& e) {
      err << "error in " << name << ": " << e.what() << '\n';
      return 2;
    }
  }
  return 1;
}

}  // namespace cdc::cli
