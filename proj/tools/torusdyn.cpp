#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "torusdyn/torusdyn.hpp"

namespace td = torusdyn;

int main(int argc, char** argv) {
  CLI::App app{"torusdyn: entropy and dilatation diagnostics for torus maps"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> format;

  const std::pair<const char*, const char*> commands[] = {
      {"entropy", "separated-set counts and fitted entropy slope"},
      {"bound-chain", "entropy rate against the dilatation and Przytycki bounds"},
      {"check-domains", "verify a wandering-domain family file"},
      {"mu-field", "grid dump of mu, theta and K"},
      {"build-family", "construct a translation orbit family"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "config file (TOML-style or JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? td::kExitOk : td::kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    auto cfg = td::load_config(config_path);
    if (seed) cfg.seed = *seed;
    td::OutputOptions out{out_dir, format};
    td::CommandResult res;
    if (command == "entropy") {
      res = td::cmd_entropy(cfg, out);
    } else if (command == "bound-chain") {
      res = td::cmd_bound_chain(cfg, out);
    } else if (command == "check-domains") {
      res = td::cmd_check_domains(cfg, out);
    } else if (command == "mu-field") {
      res = td::cmd_mu_field(cfg, out);
    } else {
      res = td::cmd_build_family(cfg, out);
    }
    for (const auto& p : res.written) std::cout << "wrote " << p.string() << "\n";
    for (const auto& f : res.flags) std::cerr << "flagged: " << f << "\n";
    return res.exit_code;
  } catch (const td::Error& e) {
    std::cerr << "error (" << td::to_string(e.kind()) << "): " << e.what() << "\n";
    return td::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return td::kExitUsage;
  }
}
