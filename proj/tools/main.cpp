#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"vp1d: Picard solver for the 1D Vlasov-Poisson system with a neutralizing background"};
  app.require_subcommand(1);

  vp1d::cli::CommandOptions options;
  std::string out;
  auto add = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", options.config, "flat JSON run configuration")->required();
    sub->add_option("--out", out, "output directory (overrides \"out\" in the config)");
    sub->add_option("--threads", options.threads, "OpenMP threads; results do not depend on it")
        ->check(CLI::NonNegativeNumber);
    return sub;
  };
  auto* run = add("run", "solve on [0, T_end] and write solution, field, summary and trace files");
  auto* verify = add("verify", "check stored artifacts and run the lemma experiments");
  auto* study = add("converge-study", "solve and cross-check at every listed resolution");
  auto* ext = add("extend", "solve on [0, T_end], then continue by extend_delta");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : vp1d::cli::kInvalidInput;
  }
  if (!out.empty()) options.out = out;

  if (run->parsed()) return vp1d::cli::cmd_run(options, std::cerr);
  if (verify->parsed()) return vp1d::cli::cmd_verify(options, std::cerr);
  if (study->parsed()) return vp1d::cli::cmd_converge_study(options, std::cerr);
  if (ext->parsed()) return vp1d::cli::cmd_extend(options, std::cerr);
  return vp1d::cli::kInvalidInput;
}
