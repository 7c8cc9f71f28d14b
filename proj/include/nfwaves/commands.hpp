#pragma once

// Subcommand drivers behind the nfwaves executable. Each writes its CSV files
// and <name>.json into cfg.output_dir and returns the JSON it wrote.

#include <string>
#include <vector>

#include "json.hpp"
#include "nfwaves/config.hpp"
#include "nfwaves/front.hpp"

namespace nfwaves {

const std::vector<std::string>& command_names();

/// Throws InvalidArgument for an unknown name.
nlohmann::json run_command(const std::string& name, const RunConfig& cfg);

/// Front at cfg.tau according to cfg.seed_policy.
FrontSolution front_from_config(const RunConfig& cfg, double tau);

nlohmann::json error_json(const std::exception& e);

}  // namespace nfwaves
