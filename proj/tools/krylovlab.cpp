// krylovlab command-line tool.
//
//   krylovlab list [--format json]
//   krylovlab solve --problem ID [--method M] [--max-iter N] [--rtol R]
//   krylovlab diagnose --problem ID [--Ns 5,10,20] [--tol T] [--boundary-margin B]
//   krylovlab profile --problem ID [--k-max K]
//   krylovlab reproduce-examples [--seed S]
//
// Every task accepts --config FILE (flat JSON), --output FILE, --format json|csv.
// Flags override the config file.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "krylovlab/experiment.hpp"

namespace {

struct Flags {
  std::optional<std::string> problem;
  std::optional<long long> M;
  std::optional<int> n_grid;
  std::optional<int> n_quad;
  std::optional<double> decay;
  std::optional<std::string> method;
  std::optional<long long> max_iter;
  std::optional<double> rtol;
  std::optional<std::string> orders;
  std::optional<double> tol;
  std::optional<long long> boundary_margin;
  std::optional<int> k_max;
  std::optional<std::string> config;
  std::optional<std::string> output;
  std::optional<std::string> format;
  std::optional<unsigned long long> seed;
};

void add_shared_options(CLI::App* cmd, Flags& f) {
  cmd->add_option("--problem", f.problem, "gallery problem id (see `list`)");
  cmd->add_option("--M", f.M, "truncation order");
  cmd->add_option("--n-grid", f.n_grid, "angular grid size (multiplication)");
  cmd->add_option("--n-quad", f.n_quad, "quadrature nodes (volterra)");
  cmd->add_option("--decay", f.decay, "special-vector decay (escape)");
  cmd->add_option("--method", f.method, "auto | cg-psd | selfadjoint-square | skewadjoint-square");
  cmd->add_option("--max-iter", f.max_iter, "CG iteration limit");
  cmd->add_option("--rtol", f.rtol, "relative residual target");
  cmd->add_option("--Ns", f.orders, "Krylov orders, comma separated");
  cmd->add_option("--tol", f.tol, "principal-angle tolerance");
  cmd->add_option("--boundary-margin", f.boundary_margin, "indices excluded at window edges");
  cmd->add_option("--k-max", f.k_max, "largest power in the growth series");
  cmd->add_option("--config", f.config, "flat JSON configuration file");
  cmd->add_option("--output", f.output, "write the report here instead of stdout");
  cmd->add_option("--format", f.format, "json | csv");
  cmd->add_option("--seed", f.seed, "random seed (default: KRYLOVLAB_SEED or 0)");
}

krylovlab::ExperimentConfig resolve(const std::string& task, const Flags& f) {
  krylovlab::ExperimentConfig cfg;
  cfg.seed = krylovlab::env_seed();
  if (f.config) krylovlab::load_config_file(cfg, *f.config);
  cfg.task = task;
  if (f.problem) cfg.problem = *f.problem;
  if (f.M) cfg.params.M = static_cast<krylovlab::Index>(*f.M);
  if (f.n_grid) cfg.params.n_grid = *f.n_grid;
  if (f.n_quad) cfg.params.n_quad = *f.n_quad;
  if (f.decay) cfg.params.decay = *f.decay;
  if (f.method) cfg.method = *f.method;
  if (f.max_iter) cfg.max_iter = static_cast<krylovlab::Index>(*f.max_iter);
  if (f.rtol) cfg.rtol = *f.rtol;
  if (f.orders) cfg.orders = krylovlab::parse_orders(*f.orders);
  if (f.tol) cfg.tol = *f.tol;
  if (f.boundary_margin) cfg.boundary_margin = static_cast<krylovlab::Index>(*f.boundary_margin);
  if (f.k_max) cfg.k_max = *f.k_max;
  if (f.output) cfg.output = *f.output;
  if (f.format) cfg.format = *f.format;
  if (f.seed) cfg.seed = *f.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Krylov solvability lab: gallery problems, CG solvers and Krylov diagnostics"};
  app.require_subcommand(1);
  Flags flags;
  const char* tasks[] = {"list", "solve", "diagnose", "profile", "reproduce-examples"};
  const char* help[] = {"list gallery problems", "solve Af = g with a CG driver",
                        "Krylov subspace diagnostics", "spectral measure and growth profile",
                        "evaluate every recorded fact of every gallery problem"};
  for (int i = 0; i < 5; ++i) add_shared_options(app.add_subcommand(tasks[i], help[i]), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return krylovlab::kExitValidation;
  }

  const std::string task = app.get_subcommands().front()->get_name();
  krylovlab::ExperimentConfig cfg;
  try {
    cfg = resolve(task, flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return krylovlab::kExitValidation;
  }
  return krylovlab::run(cfg, std::cout, std::cerr);
}
