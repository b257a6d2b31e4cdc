#include "cobra/io/commands.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

enum Exit { kOk = 0, kConfigError = 2, kRuntimeError = 3 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Snake robot simulation, model matching and loco-manipulation"};
  app.require_subcommand(1);

  std::string config;
  std::string out, method;
  std::uint64_t seed = 0;
  int episodes = 0, budget = 0;

  const std::vector<std::pair<std::string, std::string>> verbs = {
      {"simulate", "run the configured gait at each frequency and write trajectories"},
      {"make-twin", "generate reference trajectories from hidden parameters"},
      {"tune", "match simulation parameters to a reference dataset"},
      {"locomanip", "run seeded box-pushing episodes"},
      {"metrics", "compare two trajectory files"},
  };
  std::vector<CLI::App*> subs;
  std::vector<CLI::Option*> seed_opt, ep_opt, method_opt, budget_opt, out_opt;
  for (const auto& [name, help] : verbs) {
    auto* s = app.add_subcommand(name, help);
    s->add_option("--config", config, "run configuration (INI)")->required();
    out_opt.push_back(s->add_option("--out", out, "output directory"));
    seed_opt.push_back(s->add_option("--seed", seed, "seed override"));
    ep_opt.push_back(s->add_option("--episodes", episodes, "episode count override"));
    method_opt.push_back(s->add_option("--method", method, "tuning method: ppo, random or cem"));
    budget_opt.push_back(s->add_option("--budget", budget, "tuning budget in rollouts"));
    subs.push_back(s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  std::size_t k = 0;
  while (!subs[k]->parsed()) ++k;
  const std::string verb = verbs[k].first;

  try {
    cobra::io::RunConfig c = cobra::io::load_config(config);
    cobra::io::Overrides o;
    if (*out_opt[k]) o.out = out;
    if (*seed_opt[k]) o.seed = seed;
    if (*ep_opt[k]) o.episodes = episodes;
    if (*method_opt[k]) o.method = method;
    if (*budget_opt[k]) o.budget = budget;
    cobra::io::apply(c, o);

    if (verb == "simulate") {
      cobra::io::cmd_simulate(c);
    } else if (verb == "make-twin") {
      cobra::io::cmd_make_twin(c);
    } else if (verb == "tune") {
      const auto r = cobra::io::cmd_tune(c);
      std::printf("best reward %.6g (internal %.6g, external %.6g) after %zu rollouts\n", r.best_score.total(),
                  r.best_score.r_internal, r.best_score.r_external, r.episodes.size());
    } else if (verb == "locomanip") {
      const auto s = cobra::io::cmd_locomanip(c);
      std::printf("success rate %.4f (%d/%d), mean steps %.2f\n", s.success_rate, s.successes, s.episodes, s.mean_steps);
    } else if (verb == "metrics") {
      const auto m = cobra::io::cmd_metrics(c);
      std::printf("final error %.6g m, mean error %.6g m, mean correlation %.6f\n", m.final_error, m.mean_error,
                  m.mean_corr);
    }
    std::printf("wrote %s\n", c.output_dir.c_str());
    return kOk;
  } catch (const cobra::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}
