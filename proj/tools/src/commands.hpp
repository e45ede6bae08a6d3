#pragma once

#include <ostream>

#include "json.hpp"
#include "rundir.hpp"

namespace toda::cli {

using nlohmann::json;

// Each command validates its own config (unknown keys are rejected) and
// returns an exit code.
int cmd_solve(const json& cfg, RunDir& run, std::ostream& out);
int cmd_dirichlet(const json& cfg, RunDir& run, std::ostream& out);
int cmd_continue(const json& cfg, RunDir& run, std::ostream& out);
int cmd_minimax(const json& cfg, RunDir& run, std::ostream& out);
int cmd_diagnose(const json& cfg, RunDir& run, std::ostream& out);
int cmd_bubble(const json& cfg, RunDir& run, std::ostream& out);
int cmd_entire(const json& cfg, RunDir& run, std::ostream& out);
int cmd_holonomy(const json& cfg, RunDir& run, std::ostream& out);

int cmd_check_condition(const json& cfg, std::ostream& out);
int cmd_selftest(std::ostream& out);
int cmd_report(const std::string& dir, bool force, std::ostream& out);

}  // namespace toda::cli
