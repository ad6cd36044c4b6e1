#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "chj/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"chjlab: contact Hamilton-Jacobi experiments on the circle"};
  app.require_subcommand(1);

  std::string config_path;
  chj::cli::RunFlags flags;
  for (const std::string& name : chj::cli::commands()) {
    CLI::App* sub = app.add_subcommand(name, "run the '" + name + "' experiment");
    sub->add_option("--config", config_path, "experiment config file")->required();
    sub->add_option("--out", flags.out_dir, "output directory");
    sub->add_flag("--normalize-c", flags.normalize_c, "subtract the estimated critical value from H");
    sub->add_option("--jobs", flags.jobs, "worker threads for the bifurcation sweep")->check(CLI::PositiveNumber);
    sub->add_flag("--plot", flags.plot, "also write a gnuplot script");
  }

  std::string level = "fast";
  bool seed_fault = false;
  CLI::App* st = app.add_subcommand("selftest", "run the built-in check suites");
  st->add_option("--level", level, "fast or full")->check(CLI::IsMember({"fast", "full"}));
  st->add_flag("--seed-fault", seed_fault, "flip the sign of d_u in every model (the suite must then fail)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 4;
  }

  if (st->parsed()) {
    return chj::cli::selftest(level == "full" ? chj::cli::SelftestLevel::full : chj::cli::SelftestLevel::fast,
                              seed_fault, std::cout);
  }
  const std::string command = app.get_subcommands().front()->get_name();
  return chj::cli::run(command, config_path, flags, std::cerr);
}
