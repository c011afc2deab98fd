#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "pilat/error.hpp"
#include "pilat/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Polynomial loop invariant generator"};
  app.require_subcommand(1);
  CLI::App* analyze = app.add_subcommand("analyze", "Infer invariants for a loop program");

  pilat::Config cfg;
  std::string file;
  std::string float_model = "real", mode = "all", output = "acsl", k_init = "50", magnitude;
  std::vector<std::string> inits;
  analyze->add_option("file", file, "Loop program")->required();
  analyze->add_option("--degree", cfg.degree, "Maximal monomial degree")->required()->check(CLI::PositiveNumber);
  analyze->add_option("--opt-iters", cfg.dichotomy.iterations, "Dichotomy iterations")->check(CLI::PositiveNumber);
  analyze->add_option("--k-init", k_init, "First bound tested by the dichotomy");
  analyze->add_option("--float-model", float_model, "real, single or double")
      ->check(CLI::IsMember({"real", "single", "double"}));
  analyze->add_option("--init", inits, "Initial value: var=value or var=[lo,hi]");
  analyze->add_option("--mode", mode, "exact, convergent, divergent or all")
      ->check(CLI::IsMember({"exact", "convergent", "divergent", "all"}));
  analyze->add_option("--output", output, "acsl, json or both")->check(CLI::IsMember({"acsl", "json", "both"}));
  analyze->add_option("--trials", cfg.trials, "Simulation trials per invariant");
  analyze->add_option("--seed", cfg.seed, "Simulation seed");
  analyze->add_option("--magnitude-bound", magnitude, "Default magnitude bound for rounding sites");
  analyze->add_flag("--override-precheck", cfg.override_precheck, "Run the dichotomy even if the precheck fails");
  analyze->add_flag("--approximate-eigenpairs", cfg.approximate_eigenpairs,
                    "Report floating-point eigenpairs skipped by the exact path (unverified)");

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.float_model = pilat::float_model_from_string(float_model);
    cfg.mode = pilat::mode_from_string(mode);
    cfg.output = pilat::output_format_from_string(output);
    cfg.dichotomy.k_init = pilat::parse_rational(k_init);
    if (!magnitude.empty()) cfg.magnitude_bound = pilat::parse_rational(magnitude);
    for (const auto& s : inits) cfg.init.push_back(pilat::parse_init_assignment(s));
    if (const char* cap = std::getenv("PILAT_MONOMIAL_CAP")) cfg.monomial_cap = std::stoul(cap);
  } catch (const pilat::Error& e) {
    std::cerr << "pilat: " << e.render() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "pilat: " << e.what() << "\n";
    return 1;
  }
  return pilat::run_analysis(cfg, file, std::cout, std::cerr);
}
