#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chemostat/trajectory.hpp"

namespace chemostat {

// One timed ensemble. For jump models `events` counts births plus deaths;
// diffusions count integrator steps instead.
struct TimingEntry {
    std::string label;
    std::string model;
    double volume = 0.0;
    double population = 0.0;  // initial head count
    std::size_t replicates = 0;
    std::uint64_t events = 0;
    std::uint64_t steps = 0;
    double wall_seconds = 0.0;
};

struct TimingReport {
    std::vector<TimingEntry> entries;
    // Always the sum over entries; recomputed by finalize().
    double total_wall_seconds = 0.0;

    void finalize();
};

// Trajectory table: versioned header line, then
//   time,model,replicate,n,s,q,r
// one row per frame, q/r blank when undefined. `limit` caps the number of
// replicates written (-1 writes all, 0 only the header).
std::string trajectory_csv(std::span<const Trajectory> ensemble, std::int64_t limit);

std::string timing_json(const TimingReport& report);

// Atomic-ish text write: fails loudly instead of leaving partial files.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace chemostat
