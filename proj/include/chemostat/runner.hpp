#pragma once

#include <string>
#include <vector>

#include "chemostat/config.hpp"
#include "chemostat/output.hpp"
#include "chemostat/trajectory.hpp"
#include "json.hpp"

namespace chemostat {

// In-memory result of one config execution.
struct RunBundle {
    std::vector<Trajectory> trajectories;  // empty for the compare scenario
    nlohmann::ordered_json summary;
    TimingReport timing;
};

// Validate and execute a config. Replicate r runs on RngStream(seed, r), so
// results are independent of the worker count and schedule. Analyses write
// into summary; wall times into timing.
RunBundle run_scenario(const RunConfig& cfg);

// run_scenario plus serialization of the bundle into out_dir (created if
// needed): trajectories.csv, summary.json, timing.json. The CSV and summary
// depend only on the config and seed; timing.json is the only output that
// varies between identical runs.
void run_to_directory(const RunConfig& cfg, const std::string& out_dir);

}  // namespace chemostat
