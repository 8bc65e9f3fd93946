#include "chemostat/output.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "chemostat/format.hpp"
#include "json.hpp"

namespace chemostat {

void TimingReport::finalize() {
    total_wall_seconds = 0.0;
    for (const auto& e : entries) total_wall_seconds += e.wall_seconds;
}

std::string trajectory_csv(std::span<const Trajectory> ensemble, std::int64_t limit) {
    std::ostringstream out;
    out << "# chemostat-trajectory v1\n";
    out << "time,model,replicate,n,s,q,r\n";
    std::size_t written = 0;
    for (std::size_t rep = 0; rep < ensemble.size(); ++rep) {
        if (limit >= 0 && written >= static_cast<std::uint64_t>(limit)) break;
        ++written;
        for (const auto& frame : ensemble[rep].frames) {
            out << format_double(frame.time) << ',' << ensemble[rep].model << ',' << rep << ','
                << format_double(frame.population) << ',' << format_double(frame.substrate) << ',';
            if (std::isfinite(frame.q)) out << format_double(frame.q);
            out << ',';
            if (std::isfinite(frame.r)) out << format_double(frame.r);
            out << '\n';
        }
    }
    return out.str();
}

std::string timing_json(const TimingReport& report) {
    nlohmann::ordered_json j;
    j["schema"] = "chemostat-timing v1";
    j["units"] = {{"wall", "s"}};
    j["entries"] = nlohmann::ordered_json::array();
    for (const auto& e : report.entries) {
        nlohmann::ordered_json entry;
        entry["label"] = e.label;
        entry["model"] = e.model;
        entry["volume"] = e.volume;
        entry["population"] = e.population;
        entry["replicates"] = e.replicates;
        entry["events"] = e.events;
        entry["steps"] = e.steps;
        entry["wall_seconds"] = e.wall_seconds;
        j["entries"].push_back(std::move(entry));
    }
    j["total_wall_seconds"] = report.total_wall_seconds;
    return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace chemostat
