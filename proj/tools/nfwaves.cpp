// nfwaves: traveling fronts and pulses of a lateral-inhibition neural field.
//
//   nfwaves [--config FILE] [flags] <subcommand>
//
// Exit codes: 0 ok, 1 numerical failure, 2 usage or configuration error.

#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "nfwaves/commands.hpp"
#include "nfwaves/config.hpp"

namespace {

struct Flag {
  const char* name;
  const char* section;
  const char* key;
  const char* help;
};

const Flag kFlags[] = {
    {"--out", "", "output_dir", "output directory"},
    {"--seed-policy", "", "seed_policy", "heaviside | continuation | file"},
    {"--seed-file", "", "seed_file", "front JSON used as Newton guess"},
    {"--A", "kernel", "A", "excitatory amplitude"},
    {"--a", "kernel", "a", "excitatory rate"},
    {"--B", "kernel", "B", "inhibitory amplitude"},
    {"--b", "kernel", "b", "inhibitory rate"},
    {"--normalize", "kernel", "normalize", "rescale the kernel to unit mass (true | false)"},
    {"--norm-tol", "kernel", "norm_tol", "allowed |mass - 1| without normalization"},
    {"--theta", "rate", "theta", "firing threshold"},
    {"--tau", "rate", "tau", "smoothing width"},
    {"--r", "rate", "r", "bump steepness"},
    {"--N", "rate", "N", "Heaviside levels in the staircase"},
    {"--spacing", "rate", "spacing", "equal | quantile"},
    {"--tau-max", "rate", "tau_max", "continuation end"},
    {"--tau-step", "rate", "tau_step", "continuation step"},
    {"--epsilon", "pulse", "epsilon", "adaptation rate"},
    {"--gamma", "pulse", "gamma", "adaptation decay"},
    {"--re-min", "evans", "re_min", "scan rectangle"},
    {"--re-max", "evans", "re_max", "scan rectangle"},
    {"--im-min", "evans", "im_min", "scan rectangle"},
    {"--im-max", "evans", "im_max", "scan rectangle"},
    {"--resolution", "evans", "resolution", "samples per axis"},
    {"--L", "sim", "L", "half-domain length"},
    {"--n", "sim", "n", "grid points"},
    {"--dt", "sim", "dt", "time step"},
    {"--T", "sim", "T", "final time"},
    {"--boundary", "sim", "boundary", "clamped | periodic"},
    {"--sim-rate", "sim", "rate", "smooth | staircase"},
    {"--initial", "sim", "initial", "solver-front | solver-pulse | step-function | file"},
    {"--initial-file", "sim", "initial_file", "CSV x,u[,q] on the grid"},
    {"--x0", "sim", "x0", "initial threshold crossing"},
    {"--snapshot-every", "sim", "snapshot_every", "steps between snapshots"},
    {"--probe-amplitude", "sim", "probe_amplitude", "stability probe size (0 = off)"},
};

const std::map<std::string, std::string> kHelp = {
    {"kernel", "excitation radius, sigma constants and speed-index table"},
    {"fixed-points", "roots of u = S(u - theta) and the rate table"},
    {"front", "staircase front at tau"},
    {"continue", "continuation in tau until the span bound fails"},
    {"pulse", "traveling pulse of the adaptation system"},
    {"evans", "Evans function scan about the front"},
    {"simulate", "direct simulation with speed and stability report"},
    {"reproduce-paper", "full worked-example pipeline with comparison summary"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Traveling waves of a lateral-inhibition neural field", "nfwaves"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "INI-style run configuration")->check(CLI::ExistingFile);
  std::map<std::string, std::string> values;
  for (const Flag& f : kFlags) app.add_option(f.name, values[f.name], f.help);
  for (const auto& name : nfwaves::command_names()) app.add_subcommand(name, kHelp.at(name));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  std::vector<nfwaves::Override> overrides;
  for (const Flag& f : kFlags) {
    if (app.count(f.name) > 0) overrides.push_back({f.section, f.key, values[f.name], f.name});
  }
  std::string command = app.get_subcommands().front()->get_name();

  try {
    nfwaves::RunConfig cfg = config_path.empty() ? nfwaves::parse_config("", overrides)
                                                 : nfwaves::load_config(config_path, overrides);
    nlohmann::json out = nfwaves::run_command(command, cfg);
    std::cout << out.dump(2) << '\n';
    return 0;
  } catch (const nfwaves::ConfigError& e) {
    std::cerr << nfwaves::error_json(e).dump(2) << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << nfwaves::error_json(e).dump(2) << '\n';
    return 1;
  }
}
