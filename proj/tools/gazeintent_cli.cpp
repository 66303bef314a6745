#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "gazeintent/error.hpp"
#include "gazeintent/fusion.hpp"
#include "gazeintent/harness.hpp"

namespace fs = std::filesystem;
using namespace gazeintent;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kMissed = 1, kUsage = 2, kInvalid = 3 };

std::string sigma_tag(double sigma) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", sigma);
  return buf;
}

std::vector<fs::path> expand(const std::vector<std::string>& args) {
  std::vector<fs::path> out;
  for (const std::string& a : args) {
    if (fs::is_directory(a)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(a)) {
        if (e.path().extension() == ".json") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.emplace_back(a);
    }
  }
  return out;
}

struct Batch {
  std::vector<const Scenario*> scenario;  // one per result
  std::vector<RunResult> results;
};

// Runs everything and writes outputs; returns the exit code.
int execute(const std::vector<Scenario>& scenarios, const RunConfig& cfg, long trials,
            const std::vector<double>& sigmas, const std::string& out_dir) {
  Batch batch;
  if (trials == 1 && sigmas.empty()) {
    batch.results = run_batch(scenarios, cfg);
    for (const Scenario& s : scenarios) batch.scenario.push_back(&s);
  } else {
    for (const Scenario& s : scenarios) {
      auto rs = monte_carlo(s, trials, sigmas, cfg);
      for (auto& r : rs) {
        batch.scenario.push_back(&s);
        batch.results.push_back(std::move(r));
      }
    }
  }

  bool all_met = true;
  for (std::size_t i = 0; i < batch.results.size(); ++i) {
    const RunResult& r = batch.results[i];
    if (!r.expectation_met(*batch.scenario[i])) {
      all_met = false;
      if (trials == 1) {
        std::cerr << r.scenario_id << ": expectation not met"
                  << (r.failure_stage ? " (stage " + std::string(to_string(*r.failure_stage)) + ")" : "")
                  << (r.diagnostic.empty() ? "" : ": " + r.diagnostic) << '\n';
      }
    }
  }

  // group per sigma so each CSV keeps the fixed column set
  std::map<double, std::vector<RunResult>> by_sigma;
  for (const RunResult& r : batch.results) by_sigma[r.sigma_cm].push_back(r);
  const bool sweep = !sigmas.empty();

  if (out_dir.empty()) {
    for (const auto& [sigma, rs] : by_sigma) {
      if (sweep) std::cout << "# sigma_cm=" << sigma_tag(sigma) << '\n';
      write_csv(std::cout, rs);
    }
  } else {
    fs::create_directories(out_dir);
    for (const auto& [sigma, rs] : by_sigma) {
      const std::string name = sweep ? "metrics_sigma" + sigma_tag(sigma) + ".csv" : "metrics.csv";
      std::ofstream f(fs::path(out_dir) / name);
      write_csv(f, rs);
    }
    std::ofstream summary(fs::path(out_dir) / "summary.csv");
    summary << "scenario_id,sigma_cm,trials,success_rate,mean_gaze_error_cm,sd_gaze_error_cm,complexity\n";
    std::map<std::pair<std::string, double>, std::vector<RunResult>> groups;
    std::map<std::string, const Scenario*> by_id;
    for (std::size_t i = 0; i < batch.results.size(); ++i) {
      const RunResult& r = batch.results[i];
      groups[{r.scenario_id, r.sigma_cm}].push_back(r);
      by_id[r.scenario_id] = batch.scenario[i];
    }
    for (const auto& [key, rs] : groups) {
      const Metrics m = success_rate(rs);
      const Scenario* s = by_id[key.first];
      std::string cx;
      if (s->expected.template_id) cx = std::to_string(find_complexity_row(*s->expected.template_id)->complexity());
      char line[256];
      std::snprintf(line, sizeof line, "%s,%s,%zu,%.4f,%.6f,%.6f,%s\n", key.first.c_str(), sigma_tag(key.second).c_str(),
                    rs.size(), m.success_rate, m.mean_gaze_error_cm, m.sd_gaze_error_cm, cx.c_str());
      summary << line;
    }
    if (trials == 1 && !sweep) {
      json all = json::array();
      for (const RunResult& r : batch.results) all.push_back(to_json(r));
      std::ofstream(fs::path(out_dir) / "results.json") << all.dump(2) << '\n';
    }
  }
  // misses are the measurement in noisy sweeps, not a failure
  if (trials != 1 || sweep) return kOk;
  return all_met ? kOk : kMissed;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument(item);
    out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaze and speech intent pipeline: scenario runs, fusion weights, agent journal replay."};
  app.require_subcommand(1);

  std::vector<std::string> run_paths;
  std::uint64_t seed = 0;
  std::string agent = "mock";
  std::string sigma_list;
  long trials = 1;
  std::string out_dir;
  std::string journal_path;
  auto* run = app.add_subcommand("run", "Run scenarios end to end and write per-slot CSV rows");
  run->add_option("scenarios", run_paths, "Scenario JSON files or directories of them")->required();
  run->add_option("--seed", seed, "Base seed (default 0)");
  run->add_option("--agent", agent, "mock (offline, default), remote (GAZEINTENT_ENDPOINT etc.) or rule")
      ->check(CLI::IsMember({"mock", "remote", "rule"}));
  run->add_option("--noise-sigma-cm", sigma_list,
                  "Comma-separated gaze noise sigmas in cm; overrides the scenario noise and writes one CSV per value");
  run->add_option("--trials", trials, "Trials per scenario and sigma (default 1)")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Output directory (default: CSV on stdout)");
  run->add_option("--journal", journal_path, "Append agent exchanges to this JSON-lines file");

  std::string weight_list = "2,5,10,20";
  std::string weights_out;
  auto* weights = app.add_subcommand("weights", "Print normalized fusion weights per index bound N as CSV");
  weights->add_option("--n", weight_list, "Comma-separated index bounds N (default 2,5,10,20)");
  weights->add_option("--out", weights_out, "Write to this file instead of stdout");

  std::string replay_path;
  std::string replay_out;
  auto* replay = app.add_subcommand("replay", "Re-run the sessions of a journal against its recorded agent replies");
  replay->add_option("journal", replay_path, "Journal written by run --journal")->required();
  replay->add_option("--out", replay_out, "Output directory (default: CSV on stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*weights) {
      std::vector<double> ns;
      try {
        ns = parse_list(weight_list);
      } catch (const std::exception&) {
        std::cerr << "--n: expected comma-separated integers\n";
        return kUsage;
      }
      std::ostringstream csv;
      csv << "N,n,weight\n";
      for (double nd : ns) {
        const long n_bound = static_cast<long>(nd);
        if (nd != static_cast<double>(n_bound) || n_bound < 0) {
          std::cerr << "--n: " << nd << " is not a non-negative integer\n";
          return kUsage;
        }
        const auto w = normalized_weights(n_bound);
        char line[128];
        for (long n = 0; n <= n_bound; ++n) {
          std::snprintf(line, sizeof line, "%ld,%ld,%.12f\n", n_bound, n, w[static_cast<std::size_t>(n)]);
          csv << line;
        }
      }
      if (weights_out.empty()) {
        std::cout << csv.str();
      } else {
        std::ofstream(weights_out) << csv.str();
      }
      return kOk;
    }

    if (*run) {
      std::vector<double> sigmas;
      try {
        sigmas = parse_list(sigma_list);
      } catch (const std::exception&) {
        std::cerr << "--noise-sigma-cm: expected comma-separated numbers\n";
        return kUsage;
      }
      if (std::any_of(sigmas.begin(), sigmas.end(), [](double v) { return v < 0; })) {
        std::cerr << "--noise-sigma-cm: values must be >= 0\n";
        return kUsage;
      }
      std::vector<Scenario> scenarios;
      for (const fs::path& p : expand(run_paths)) {
        try {
          scenarios.push_back(load_scenario(p));
        } catch (const Error& e) {
          std::cerr << e.what() << '\n';
          return kInvalid;
        }
      }
      RunConfig cfg;
      cfg.agent = *agent_choice_from(agent);
      cfg.seed = seed;
      if (cfg.agent == AgentChoice::Mock) cfg.transport = std::make_shared<FailingTransport>();
      if (!journal_path.empty()) {
        cfg.journal = std::make_shared<Journal>(journal_path);
        for (const Scenario& s : scenarios) {
          cfg.journal->append({{"type", "session"},
                               {"scenario", s.source},
                               {"seed", seed},
                               {"agent", agent},
                               {"sigma_cm", sigmas},
                               {"trials", trials}});
        }
      }
      return execute(scenarios, cfg, trials, sigmas, out_dir);
    }

    if (*replay) {
      const auto lines = Journal::load(replay_path);
      RunConfig cfg;
      cfg.gateway = Journal::replay_agent(lines);
      int code = kOk;
      bool any = false;
      for (const json& line : lines) {
        if (line.value("type", "") != "session") continue;
        any = true;
        std::vector<Scenario> one;
        try {
          one.push_back(scenario_from_json(line.at("scenario")));
        } catch (const Error& e) {
          std::cerr << "journal session: " << e.what() << '\n';
          return kInvalid;
        }
        cfg.seed = line.value("seed", std::uint64_t{0});
        const auto sigmas = line.value("sigma_cm", std::vector<double>{});
        const long n = line.value("trials", 1L);
        const std::string dir = replay_out.empty() ? "" : (fs::path(replay_out) / one.front().id).string();
        code = std::max(code, execute(one, cfg, n, sigmas, dir));
      }
      if (!any) {
        std::cerr << replay_path << ": no session records\n";
        return kInvalid;
      }
      return code;
    }
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return kInvalid;
  }
  return kUsage;
}
