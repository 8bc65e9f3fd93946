#include "chemostat/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "chemostat/format.hpp"

namespace chemostat {

namespace {

const std::map<std::string, Scenario>& scenario_table() {
    static const std::map<std::string, Scenario> table{
        {"ode", Scenario::ode},
        {"crump_young", Scenario::crump_young},
        {"ibm", Scenario::ibm},
        {"sde_cyeds", Scenario::sde_cyeds},
        {"sde_hat", Scenario::sde_hat},
        {"sde_feller", Scenario::sde_feller},
        {"compare", Scenario::compare},
    };
    return table;
}

}  // namespace

const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::ode: return "ode";
        case Scenario::crump_young: return "crump_young";
        case Scenario::ibm: return "ibm";
        case Scenario::sde_cyeds: return "sde_cyeds";
        case Scenario::sde_hat: return "sde_hat";
        case Scenario::sde_feller: return "sde_feller";
        case Scenario::compare: return "compare";
    }
    return "?";
}

Scenario scenario_from_name(const std::string& name) {
    const auto& table = scenario_table();
    if (const auto it = table.find(name); it != table.end()) return it->second;
    std::string valid;
    for (const auto& [key, value] : table) {
        if (!valid.empty()) valid += ", ";
        valid += key;
    }
    throw std::invalid_argument("unknown scenario '" + name + "' (expected one of: " + valid + ")");
}

Kinetics KineticsSpec::build() const {
    if (type == "monod") return Kinetics::monod(mu_max, half_saturation);
    if (type == "haldane") return Kinetics::haldane(mu_max, half_saturation, inhibition);
    if (type == "tabulated") return Kinetics::tabulated(s, mu);
    throw std::invalid_argument("unknown kinetics type '" + type +
                                "' (expected monod, haldane, or tabulated)");
}

MassKinetics MassKineticsSpec::build(const Kinetics& kin, const ChemostatParams& params,
                                     double s_cap) const {
    MassKinetics mk;
    if (growth == "crump_young_reduction") {
        mk = MassKinetics::crump_young_reduction(kin, params.cell_mass, s_cap);
    } else if (growth == "pinned_growth") {
        mk = MassKinetics::pinned_growth(kin, max_mass, rate_scale, s_cap);
    } else {
        throw std::invalid_argument("unknown growth rule '" + growth +
                                    "' (expected crump_young_reduction or pinned_growth)");
    }
    if (kernel == "uniform") {
        mk.kernel = DivisionKernel::uniform();
    } else if (kernel == "symmetric_beta") {
        mk.kernel = DivisionKernel::symmetric_beta(beta_shape);
    } else if (kernel == "dirac_half") {
        mk.kernel = DivisionKernel::dirac_half();
    } else {
        throw std::invalid_argument("unknown division kernel '" + kernel +
                                    "' (expected uniform, symmetric_beta, or dirac_half)");
    }
    return mk;
}

ConfigError::ConfigError(const std::string& file, int line, const std::string& message)
    : std::runtime_error(file + ":" + std::to_string(line) + ": " + message),
      file_(file),
      line_(line),
      message_(message) {}

// ---------------------------------------------------------------------------
// scanner

namespace {

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

struct Raw {
    std::string file;
    std::map<std::string, std::map<std::string, Entry>> sections;
    std::map<std::string, int> section_lines;

    int line_of(const std::string& section, const std::string& key) const {
        if (const auto sit = sections.find(section); sit != sections.end())
            if (const auto kit = sit->second.find(key); kit != sit->second.end())
                return kit->second.line;
        if (const auto sit = section_lines.find(section); sit != section_lines.end())
            return sit->second;
        return 0;
    }
};

const char* kKnownSections[] = {"scenario", "params",  "kinetics", "mass_kinetics", "init",
                                "run",      "analysis", "compare",  "output"};

bool known_section(const std::string& name) {
    for (const char* s : kKnownSections)
        if (name == s) return true;
    return false;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

Raw scan(const std::string& text, const std::string& filename) {
    Raw raw;
    raw.file = filename;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto cut = line.find_first_of("#;"); cut != std::string::npos)
            line.erase(cut);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(filename, lineno, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!known_section(section))
                throw ConfigError(filename, lineno, "unknown section [" + section + "]");
            raw.section_lines.emplace(section, lineno);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(filename, lineno, "expected 'key = value' or '[section]'");
        if (section.empty())
            throw ConfigError(filename, lineno, "key outside any section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(filename, lineno, "empty key");
        if (value.empty()) throw ConfigError(filename, lineno, "empty value for key '" + key + "'");
        const auto [it, inserted] = raw.sections[section].emplace(key, Entry{value, lineno});
        if (!inserted)
            throw ConfigError(filename, lineno,
                              "duplicate key '" + key + "' in [" + section + "] (first on line " +
                                  std::to_string(it->second.line) + ")");
    }
    return raw;
}

// Typed access to scanned entries; conversion failures are anchored to the
// entry's line, and every access marks the entry as consumed so leftovers can
// be reported as unknown keys.
class Fields {
  public:
    explicit Fields(Raw& raw) : raw_(raw) {}

    bool has(const std::string& sec, const std::string& key) const {
        const auto sit = raw_.sections.find(sec);
        return sit != raw_.sections.end() && sit->second.count(key) > 0;
    }

    std::string str(const std::string& sec, const std::string& key, std::string def) {
        if (Entry* e = find(sec, key)) return e->value;
        return def;
    }

    double num(const std::string& sec, const std::string& key, double def) {
        Entry* e = find(sec, key);
        if (!e) return def;
        return parse_double(sec, key, *e);
    }

    std::int64_t integer(const std::string& sec, const std::string& key, std::int64_t def) {
        Entry* e = find(sec, key);
        if (!e) return def;
        char* end = nullptr;
        errno = 0;
        const long long v = std::strtoll(e->value.c_str(), &end, 10);
        if (end != e->value.c_str() + e->value.size() || errno == ERANGE)
            fail(*e, sec, key, "not an integer");
        return v;
    }

    std::uint64_t uinteger(const std::string& sec, const std::string& key, std::uint64_t def) {
        Entry* e = find(sec, key);
        if (!e) return def;
        if (!e->value.empty() && e->value.front() == '-')
            fail(*e, sec, key, "must be nonnegative");
        char* end = nullptr;
        errno = 0;
        const unsigned long long v = std::strtoull(e->value.c_str(), &end, 10);
        if (end != e->value.c_str() + e->value.size() || errno == ERANGE)
            fail(*e, sec, key, "not an integer");
        return v;
    }

    bool flag(const std::string& sec, const std::string& key, bool def) {
        Entry* e = find(sec, key);
        if (!e) return def;
        if (e->value == "true" || e->value == "1") return true;
        if (e->value == "false" || e->value == "0") return false;
        fail(*e, sec, key, "not a boolean (expected true/false/1/0)");
        return def;
    }

    std::vector<double> list(const std::string& sec, const std::string& key) {
        Entry* e = find(sec, key);
        if (!e) return {};
        std::vector<double> out;
        std::istringstream in(e->value);
        std::string item;
        while (std::getline(in, item, ',')) {
            Entry piece{trim(item), e->line};
            if (piece.value.empty()) fail(*e, sec, key, "empty list item");
            out.push_back(parse_double(sec, key, piece));
        }
        return out;
    }

    int line(const std::string& sec, const std::string& key) const {
        return raw_.line_of(sec, key);
    }

    // Every key must have been consumed by now; anything left is a typo.
    void finish() const {
        for (const auto& [sec, entries] : raw_.sections)
            for (const auto& [key, entry] : entries)
                if (!entry.used)
                    throw ConfigError(raw_.file, entry.line,
                                      "unknown key '" + key + "' in [" + sec + "]");
    }

  private:
    Entry* find(const std::string& sec, const std::string& key) {
        const auto sit = raw_.sections.find(sec);
        if (sit == raw_.sections.end()) return nullptr;
        const auto kit = sit->second.find(key);
        if (kit == sit->second.end()) return nullptr;
        kit->second.used = true;
        return &kit->second;
    }

    double parse_double(const std::string& sec, const std::string& key, const Entry& e) {
        char* end = nullptr;
        const double v = std::strtod(e.value.c_str(), &end);
        if (end != e.value.c_str() + e.value.size() || !std::isfinite(v))
            fail(e, sec, key, "not a finite number");
        return v;
    }

    [[noreturn]] void fail(const Entry& e, const std::string& sec, const std::string& key,
                           const std::string& why) const {
        throw ConfigError(raw_.file, e.line,
                          "[" + sec + "] " + key + ": " + why + ": '" + e.value + "'");
    }

    Raw& raw_;
};

struct Problem {
    std::string section, key, message;
};

bool is_count(double v) { return std::isfinite(v) && v >= 0.0 && std::floor(v) == v; }

std::vector<Problem> semantic_problems(const RunConfig& cfg) {
    std::vector<Problem> out;
    const auto bad = [&out](const std::string& sec, const std::string& key, std::string msg) {
        out.push_back({sec, key, std::move(msg)});
    };

    const auto positive = [&](const std::string& sec, const std::string& key, double v) {
        if (!(std::isfinite(v) && v > 0.0)) bad(sec, key, "must be positive");
    };
    positive("params", "dilution", cfg.params.dilution);
    positive("params", "substrate_in", cfg.params.substrate_in);
    positive("params", "stoichiometry", cfg.params.stoichiometry);
    positive("params", "cell_mass", cfg.params.cell_mass);
    positive("params", "volume", cfg.params.volume);
    positive("params", "scale", cfg.params.scale);

    try {
        (void)cfg.kinetics.build();
    } catch (const std::exception& e) {
        bad("kinetics", "type", e.what());
    }

    positive("run", "horizon", cfg.horizon);
    positive("run", "dt", cfg.dt);
    positive("run", "macro_step", cfg.macro_step);
    if (cfg.frames < 2) bad("run", "frames", "need at least 2 frames");
    if (cfg.replicates < 1) bad("run", "replicates", "need at least 1 replicate");

    if (!(std::isfinite(cfg.init.substrate) && cfg.init.substrate >= 0.0))
        bad("init", "substrate", "must be nonnegative");
    if (!std::isfinite(cfg.init.q) || !std::isfinite(cfg.init.r))
        bad("init", "q", "fluctuation coordinates must be finite");

    const bool count_model = cfg.scenario == Scenario::crump_young || cfg.scenario == Scenario::ibm;
    if (count_model && !is_count(cfg.init.population))
        bad("init", "population", "must be a nonnegative whole number of individuals");
    if (!count_model && !(std::isfinite(cfg.init.population) && cfg.init.population >= 0.0))
        bad("init", "population", "must be nonnegative");

    if (cfg.scenario == Scenario::ibm) {
        try {
            const auto kin = cfg.kinetics.build();
            (void)cfg.mass_kinetics.build(kin, cfg.params,
                                          cfg.params.substrate_cap(cfg.init.substrate));
        } catch (const std::exception& e) {
            bad("mass_kinetics", "growth", e.what());
        }
    }

    if (cfg.scenario == Scenario::compare) {
        if (cfg.compare.volumes.empty()) bad("compare", "volumes", "need at least one volume");
        if (cfg.compare.volumes.size() != cfg.compare.populations.size())
            bad("compare", "populations", "must list one population per volume");
        for (double v : cfg.compare.volumes)
            if (!(std::isfinite(v) && v > 0.0)) bad("compare", "volumes", "must be positive");
        for (double p : cfg.compare.populations)
            if (!is_count(p) || p < 1.0)
                bad("compare", "populations", "must be positive whole numbers");
    }

    const auto allow = [&](bool on, const char* key, std::initializer_list<Scenario> ok) {
        if (!on) return;
        for (Scenario s : ok)
            if (cfg.scenario == s) return;
        bad("analysis", key,
            std::string("not available for scenario '") + scenario_name(cfg.scenario) + "'");
    };
    allow(cfg.analysis.qsd, "qsd",
          {Scenario::crump_young, Scenario::ibm, Scenario::sde_hat, Scenario::sde_feller});
    allow(cfg.analysis.fluctuations, "fluctuations",
          {Scenario::crump_young, Scenario::ibm, Scenario::sde_cyeds});
    allow(cfg.analysis.qv, "qv", {Scenario::ibm});
    allow(cfg.analysis.extinction, "extinction",
          {Scenario::crump_young, Scenario::ibm, Scenario::sde_feller});
    allow(cfg.analysis.ellipse, "ellipse",
          {Scenario::ode, Scenario::crump_young, Scenario::ibm, Scenario::sde_cyeds,
           Scenario::sde_hat, Scenario::sde_feller});
    if (!(cfg.analysis.ellipse_level > 0.0 && cfg.analysis.ellipse_level < 1.0))
        bad("analysis", "ellipse_level", "must lie strictly between 0 and 1");

    if (cfg.trajectory_limit < -1) bad("output", "trajectories", "must be -1, 0, or positive");
    return out;
}

std::string problem_text(const Problem& p) {
    return "[" + p.section + "] " + p.key + ": " + p.message;
}

}  // namespace

void RunConfig::validate() const {
    const auto problems = semantic_problems(*this);
    if (!problems.empty()) throw ConfigError("<config>", 0, problem_text(problems.front()));
}

RunConfig parse_config(const std::string& text, const std::string& filename) {
    Raw raw = scan(text, filename);
    Fields f(raw);
    RunConfig cfg;

    {
        const std::string name = f.str("scenario", "type", "ode");
        try {
            cfg.scenario = scenario_from_name(name);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(filename, raw.line_of("scenario", "type"), e.what());
        }
    }

    cfg.params.dilution = f.num("params", "dilution", cfg.params.dilution);
    cfg.params.substrate_in = f.num("params", "substrate_in", cfg.params.substrate_in);
    cfg.params.stoichiometry = f.num("params", "stoichiometry", cfg.params.stoichiometry);
    cfg.params.cell_mass = f.num("params", "cell_mass", cfg.params.cell_mass);
    cfg.params.volume = f.num("params", "volume", cfg.params.volume);
    cfg.params.scale = f.num("params", "scale", cfg.params.scale);

    cfg.kinetics.type = f.str("kinetics", "type", cfg.kinetics.type);
    cfg.kinetics.mu_max = f.num("kinetics", "mu_max", cfg.kinetics.mu_max);
    cfg.kinetics.half_saturation = f.num("kinetics", "half_saturation", cfg.kinetics.half_saturation);
    cfg.kinetics.inhibition = f.num("kinetics", "inhibition", cfg.kinetics.inhibition);
    if (f.has("kinetics", "s")) cfg.kinetics.s = f.list("kinetics", "s");
    if (f.has("kinetics", "mu")) cfg.kinetics.mu = f.list("kinetics", "mu");

    cfg.mass_kinetics.growth = f.str("mass_kinetics", "growth", cfg.mass_kinetics.growth);
    cfg.mass_kinetics.max_mass = f.num("mass_kinetics", "max_mass", cfg.mass_kinetics.max_mass);
    cfg.mass_kinetics.rate_scale = f.num("mass_kinetics", "rate_scale", cfg.mass_kinetics.rate_scale);
    cfg.mass_kinetics.kernel = f.str("mass_kinetics", "kernel", cfg.mass_kinetics.kernel);
    cfg.mass_kinetics.beta_shape = f.num("mass_kinetics", "beta_shape", cfg.mass_kinetics.beta_shape);

    cfg.init.population = f.num("init", "population", cfg.init.population);
    cfg.init.substrate = f.num("init", "substrate", cfg.init.substrate);
    cfg.init.q = f.num("init", "q", cfg.init.q);
    cfg.init.r = f.num("init", "r", cfg.init.r);

    cfg.horizon = f.num("run", "horizon", cfg.horizon);
    cfg.dt = f.num("run", "dt", cfg.dt);
    cfg.macro_step = f.num("run", "macro_step", cfg.macro_step);
    {
        const std::int64_t frames = f.integer("run", "frames", static_cast<std::int64_t>(cfg.frames));
        if (frames < 0) throw ConfigError(filename, f.line("run", "frames"),
                                          "[run] frames: must be nonnegative");
        cfg.frames = static_cast<std::size_t>(frames);
        const std::int64_t reps =
            f.integer("run", "replicates", static_cast<std::int64_t>(cfg.replicates));
        if (reps < 0) throw ConfigError(filename, f.line("run", "replicates"),
                                        "[run] replicates: must be nonnegative");
        cfg.replicates = static_cast<std::size_t>(reps);
        const std::int64_t threads = f.integer("run", "threads", cfg.threads);
        if (threads < 0) throw ConfigError(filename, f.line("run", "threads"),
                                           "[run] threads: must be nonnegative");
        cfg.threads = static_cast<unsigned>(threads);
    }
    cfg.seed = f.uinteger("run", "seed", cfg.seed);

    cfg.analysis.qsd = f.flag("analysis", "qsd", cfg.analysis.qsd);
    cfg.analysis.fluctuations = f.flag("analysis", "fluctuations", cfg.analysis.fluctuations);
    cfg.analysis.qv = f.flag("analysis", "qv", cfg.analysis.qv);
    cfg.analysis.extinction = f.flag("analysis", "extinction", cfg.analysis.extinction);
    cfg.analysis.ellipse = f.flag("analysis", "ellipse", cfg.analysis.ellipse);
    cfg.analysis.ellipse_level = f.num("analysis", "ellipse_level", cfg.analysis.ellipse_level);

    cfg.compare.volumes = f.list("compare", "volumes");
    cfg.compare.populations = f.list("compare", "populations");

    cfg.trajectory_limit = f.integer("output", "trajectories", cfg.trajectory_limit);

    f.finish();

    const auto problems = semantic_problems(cfg);
    if (!problems.empty())
        throw ConfigError(filename, raw.line_of(problems.front().section, problems.front().key),
                          problem_text(problems.front()));
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path, 0, "cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

std::string RunConfig::serialize() const {
    std::ostringstream out;
    const auto d = [](double v) { return format_double(v); };
    const auto joined = [&](const std::vector<double>& xs) {
        std::string s;
        for (double x : xs) {
            if (!s.empty()) s += ", ";
            s += format_double(x);
        }
        return s;
    };

    out << "[scenario]\ntype = " << scenario_name(scenario) << "\n\n";

    out << "[params]\n";
    out << "dilution = " << d(params.dilution) << "\n";
    out << "substrate_in = " << d(params.substrate_in) << "\n";
    out << "stoichiometry = " << d(params.stoichiometry) << "\n";
    out << "cell_mass = " << d(params.cell_mass) << "\n";
    out << "volume = " << d(params.volume) << "\n";
    out << "scale = " << d(params.scale) << "\n\n";

    out << "[kinetics]\n";
    out << "type = " << kinetics.type << "\n";
    if (kinetics.type == "tabulated") {
        out << "s = " << joined(kinetics.s) << "\n";
        out << "mu = " << joined(kinetics.mu) << "\n";
    } else {
        out << "mu_max = " << d(kinetics.mu_max) << "\n";
        out << "half_saturation = " << d(kinetics.half_saturation) << "\n";
        if (kinetics.type == "haldane") out << "inhibition = " << d(kinetics.inhibition) << "\n";
    }
    out << "\n";

    if (scenario == Scenario::ibm) {
        out << "[mass_kinetics]\n";
        out << "growth = " << mass_kinetics.growth << "\n";
        if (mass_kinetics.growth == "pinned_growth") {
            out << "max_mass = " << d(mass_kinetics.max_mass) << "\n";
            out << "rate_scale = " << d(mass_kinetics.rate_scale) << "\n";
        }
        out << "kernel = " << mass_kinetics.kernel << "\n";
        if (mass_kinetics.kernel == "symmetric_beta")
            out << "beta_shape = " << d(mass_kinetics.beta_shape) << "\n";
        out << "\n";
    }

    out << "[init]\n";
    out << "population = " << d(init.population) << "\n";
    out << "substrate = " << d(init.substrate) << "\n";
    if (scenario == Scenario::sde_cyeds) {
        out << "q = " << d(init.q) << "\n";
        out << "r = " << d(init.r) << "\n";
    }
    out << "\n";

    out << "[run]\n";
    out << "horizon = " << d(horizon) << "\n";
    out << "dt = " << d(dt) << "\n";
    out << "macro_step = " << d(macro_step) << "\n";
    out << "frames = " << frames << "\n";
    out << "replicates = " << replicates << "\n";
    out << "seed = " << seed << "\n";
    out << "threads = " << threads << "\n\n";

    out << "[analysis]\n";
    const auto b = [](bool v) { return v ? "true" : "false"; };
    out << "qsd = " << b(analysis.qsd) << "\n";
    out << "fluctuations = " << b(analysis.fluctuations) << "\n";
    out << "qv = " << b(analysis.qv) << "\n";
    out << "extinction = " << b(analysis.extinction) << "\n";
    out << "ellipse = " << b(analysis.ellipse) << "\n";
    out << "ellipse_level = " << d(analysis.ellipse_level) << "\n\n";

    if (scenario == Scenario::compare) {
        out << "[compare]\n";
        out << "volumes = " << joined(compare.volumes) << "\n";
        out << "populations = " << joined(compare.populations) << "\n\n";
    }

    out << "[output]\n";
    out << "trajectories = " << trajectory_limit << "\n";
    return out.str();
}

}  // namespace chemostat
