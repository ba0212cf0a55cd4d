#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "stochem/bench.hpp"
#include "stochem/errors.hpp"

namespace {

int dispatch(const stochem::ExperimentConfig& cfg) {
  if (cfg.experiment == stochem::kGmmFixedN) return stochem::cmd_gmm_fixed_n(cfg);
  if (cfg.experiment == stochem::kGmmScaling) return stochem::cmd_gmm_scaling(cfg);
  if (cfg.experiment == stochem::kPlsaElbo) return stochem::cmd_plsa_elbo(cfg);
  return stochem::cmd_verify(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic EM benchmarks and verification checks"};
  std::string experiment;
  std::optional<std::filesystem::path> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::size_t> n;
  std::optional<double> epochs;

  app.add_option("experiment", experiment, "gmm-fixed-n | gmm-scaling | plsa-elbo | verify")
      ->required()
      ->check(CLI::IsMember({std::string(stochem::kGmmFixedN), std::string(stochem::kGmmScaling),
                             std::string(stochem::kPlsaElbo), std::string(stochem::kVerify)}));
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--seed", seed, "first seed; the seed count of the config is kept");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--n", n, "sample count (a one-point grid for gmm-scaling)");
  app.add_option("--epochs", epochs, "epoch budget, initialization pass included");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    stochem::ExperimentConfig cfg = config_path
                                        ? stochem::load_config(experiment, *config_path)
                                        : stochem::default_config(experiment);
    if (seed) {
      for (std::size_t i = 0; i < cfg.seeds.size(); ++i) cfg.seeds[i] = *seed + i;
    }
    if (out_dir) cfg.out_dir = *out_dir;
    if (n) {
      cfg.n = *n;
      cfg.corpus.tokens = *n;
      cfg.n_grid = {*n};
    }
    if (epochs) cfg.epochs = *epochs;
    cfg.validate();
    return dispatch(cfg);
  } catch (const stochem::ParseError& e) {
    std::cerr << "config error";
    if (e.line() > 0) std::cerr << " (line " << e.line() << ")";
    std::cerr << ": " << e.what() << '\n';
  } catch (const stochem::ValidationError& e) {
    std::cerr << "invalid input";
    if (e.line() > 0) std::cerr << " (line " << e.line() << ")";
    std::cerr << ": " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return 2;
}
