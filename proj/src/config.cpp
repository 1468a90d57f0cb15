#include "sdapd/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace sdapd {

const char* to_string(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::DeadTime: return "deadtime";
    case ExperimentKind::DelaySweep: return "delaysweep";
    case ExperimentKind::Saturation: return "saturation";
    case ExperimentKind::Hbt: return "hbt";
    }
    return "unknown";
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

struct Entry {
    std::string value;
    int line = 0;
    bool consumed = false;
};

struct Section {
    std::map<std::string, Entry> entries;
    int line = 0;
    bool present = false;
};

class Reader {
public:
    explicit Reader(Section& section) : section_(&section) {}

    bool has(const std::string& key) const { return section_->entries.count(key) != 0; }

    std::string raw(const std::string& key) {
        auto& e = section_->entries.at(key);
        e.consumed = true;
        return e.value;
    }

    int line(const std::string& key) const { return section_->entries.at(key).line; }

    double number(const std::string& key) {
        const std::string v = raw(key);
        try {
            std::size_t pos = 0;
            const double x = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return x;
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': expected a number, got '" + v + "'", line(key));
        }
    }

    double number_in(const std::string& key, double lo, double hi) {
        const double x = number(key);
        if (!(x >= lo && x <= hi))
            throw ConfigError("key '" + key + "': value " + std::to_string(x) + " outside [" +
                                  std::to_string(lo) + ", " + std::to_string(hi) + "]",
                              line(key));
        return x;
    }

    std::uint64_t unsigned_integer(const std::string& key) {
        const double x = number(key);
        if (x < 0.0 || x != std::floor(x))
            throw ConfigError("key '" + key + "': expected a non-negative integer", line(key));
        return static_cast<std::uint64_t>(x);
    }

    std::vector<double> number_list(const std::string& key) {
        const std::string v = raw(key);
        std::vector<double> out;
        std::string token;
        std::istringstream in(v);
        while (std::getline(in, token, ',')) {
            std::istringstream ws(token);
            std::string piece;
            while (ws >> piece) {
                try {
                    std::size_t pos = 0;
                    out.push_back(std::stod(piece, &pos));
                    if (pos != piece.size()) throw std::invalid_argument("");
                } catch (const std::exception&) {
                    throw ConfigError("key '" + key + "': expected a list of numbers", line(key));
                }
            }
        }
        if (out.empty()) throw ConfigError("key '" + key + "': empty list", line(key));
        return out;
    }

private:
    Section* section_;
};

void require_known_keys(const Section& section, const std::set<std::string>& known,
                        const std::string& section_name) {
    for (const auto& [key, entry] : section.entries)
        if (!known.count(key))
            throw ConfigError("unknown key '" + key + "' in [" + section_name + "]", entry.line);
}

} // namespace

RunConfig parse_config(const std::string& text) {
    std::map<std::string, Section> sections;
    for (const char* name : {"detector", "source", "experiment"}) sections[name];

    std::istringstream in(text);
    std::string line;
    std::string current;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        const std::string s = trim(line);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError("malformed section header", line_no);
            current = trim(s.substr(1, s.size() - 2));
            auto it = sections.find(current);
            if (it == sections.end()) throw ConfigError("unknown section [" + current + "]", line_no);
            it->second.present = true;
            it->second.line = line_no;
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
        if (current.empty()) throw ConfigError("key outside any section", line_no);
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError("empty key", line_no);
        auto& section = sections[current];
        if (section.entries.count(key))
            throw ConfigError("duplicate key '" + key + "' in [" + current + "]", line_no);
        section.entries[key] = Entry{value, line_no, false};
    }

    require_known_keys(sections["detector"],
                       {"efficiency", "dark_prob", "afterpulse_total", "afterpulse_decay_gates",
                        "sd_residual", "sd_residual_per_photon", "clock_hz"},
                       "detector");
    require_known_keys(sections["source"], {"type", "mean_photons", "mode_count"}, "source");
    require_known_keys(sections["experiment"],
                       {"type", "frames", "seed", "out_dir", "frame_gates", "separation_gates",
                        "mu_grid", "delta_grid", "target_click_prob", "pulse_period_gates",
                        "amzi_delay_gates", "amzi_survival", "max_lag", "normalization"},
                       "experiment");

    RunConfig config;

    {
        Reader d(sections["detector"]);
        if (d.has("efficiency")) config.detector.efficiency = d.number_in("efficiency", 0.0, 1.0);
        if (d.has("dark_prob")) config.detector.dark_prob = d.number_in("dark_prob", 0.0, 1.0);
        if (d.has("afterpulse_total"))
            config.detector.afterpulse_total = d.number_in("afterpulse_total", 0.0, 0.999999);
        if (d.has("afterpulse_decay_gates")) {
            config.detector.afterpulse_decay_gates = d.number("afterpulse_decay_gates");
            if (config.detector.afterpulse_decay_gates <= 0.0)
                throw ConfigError("key 'afterpulse_decay_gates': must be positive",
                                  d.line("afterpulse_decay_gates"));
        }
        if (d.has("sd_residual")) config.detector.sd_residual = d.number_in("sd_residual", 0.0, 1.0);
        if (d.has("sd_residual_per_photon"))
            config.detector.sd_residual_per_photon = d.number_in("sd_residual_per_photon", 0.0, 1.0);
        if (d.has("clock_hz")) {
            config.detector.clock_hz = d.number("clock_hz");
            if (config.detector.clock_hz <= 0.0)
                throw ConfigError("key 'clock_hz': must be positive", d.line("clock_hz"));
        }
    }

    {
        auto& section = sections["source"];
        Reader s(section);
        std::string type = "coherent";
        if (section.present) {
            if (!s.has("type")) throw ConfigError("missing key 'type' in [source]", section.line);
            type = s.raw("type");
        }
        const double mean = s.has("mean_photons") ? s.number("mean_photons") : 0.1;
        if (type == "coherent") {
            config.source = SourceSpec::coherent(mean);
            if (s.has("mode_count"))
                throw ConfigError("key 'mode_count' only applies to thermal sources", s.line("mode_count"));
        } else if (type == "thermal") {
            const double modes = s.has("mode_count") ? s.number("mode_count") : 1.0;
            if (modes < 1.0) throw ConfigError("key 'mode_count': must be >= 1", s.line("mode_count"));
            config.source = SourceSpec::thermal(mean, modes);
        } else if (type == "vacuum") {
            config.source = SourceSpec::vacuum();
            if (s.has("mean_photons"))
                throw ConfigError("key 'mean_photons' does not apply to a vacuum source",
                                  s.line("mean_photons"));
        } else {
            throw ConfigError("key 'type': unknown source type '" + type + "'", s.line("type"));
        }
    }

    {
        auto& section = sections["experiment"];
        Reader e(section);
        if (!e.has("type"))
            throw ConfigError("missing key 'type' in [experiment]",
                              section.present ? section.line : 0);
        const std::string type = e.raw("type");
        if (type == "deadtime")
            config.experiment = ExperimentKind::DeadTime;
        else if (type == "delaysweep")
            config.experiment = ExperimentKind::DelaySweep;
        else if (type == "saturation")
            config.experiment = ExperimentKind::Saturation;
        else if (type == "hbt")
            config.experiment = ExperimentKind::Hbt;
        else
            throw ConfigError("key 'type': unknown experiment '" + type + "'", e.line("type"));

        if (e.has("frames")) {
            config.frames = e.unsigned_integer("frames");
            if (config.frames == 0) throw ConfigError("key 'frames': must be positive", e.line("frames"));
        }
        if (e.has("seed")) config.seed = e.unsigned_integer("seed");
        if (e.has("out_dir")) config.out_dir = e.raw("out_dir");
        if (e.has("frame_gates")) {
            config.frame_gates = static_cast<int>(e.unsigned_integer("frame_gates"));
            if (config.frame_gates < 2)
                throw ConfigError("key 'frame_gates': must be >= 2", e.line("frame_gates"));
        }
        if (e.has("separation_gates"))
            config.separation_gates = static_cast<int>(e.unsigned_integer("separation_gates"));
        if (e.has("mu_grid")) config.mu_grid = e.number_list("mu_grid");
        if (e.has("delta_grid")) {
            for (double v : e.number_list("delta_grid")) {
                if (v < 1.0 || v != std::floor(v))
                    throw ConfigError("key 'delta_grid': separations must be positive integers",
                                      e.line("delta_grid"));
                config.delta_grid.push_back(static_cast<int>(v));
            }
        }
        if (e.has("target_click_prob"))
            config.target_click_prob = e.number_in("target_click_prob", 1e-12, 0.999999);
        if (e.has("pulse_period_gates")) {
            config.pulse_period_gates = static_cast<int>(e.unsigned_integer("pulse_period_gates"));
            if (config.pulse_period_gates < 2)
                throw ConfigError("key 'pulse_period_gates': must be >= 2", e.line("pulse_period_gates"));
        }
        if (e.has("amzi_delay_gates"))
            config.amzi_delay_gates = static_cast<int>(e.unsigned_integer("amzi_delay_gates"));
        if (e.has("amzi_survival")) config.amzi_survival = e.number_in("amzi_survival", 0.0, 1.0);
        if (e.has("max_lag")) {
            config.max_lag = static_cast<int>(e.unsigned_integer("max_lag"));
            if (config.max_lag < 1) throw ConfigError("key 'max_lag': must be >= 1", e.line("max_lag"));
        }
        if (e.has("normalization")) {
            const std::string n = e.raw("normalization");
            if (n == "singles")
                config.normalization = G2Normalization::Singles;
            else if (n == "longlag")
                config.normalization = G2Normalization::LongLag;
            else
                throw ConfigError("key 'normalization': expected 'singles' or 'longlag'",
                                  e.line("normalization"));
        }

        // Per-experiment requirements.
        switch (config.experiment) {
        case ExperimentKind::DeadTime:
        case ExperimentKind::Saturation:
            if (config.mu_grid.empty())
                throw ConfigError("missing key 'mu_grid' in [experiment] (flux sweep required)",
                                  section.line);
            for (double mu : config.mu_grid)
                if (mu < 0.0) throw ConfigError("key 'mu_grid': flux must be >= 0", e.line("mu_grid"));
            if (config.source.kind != SourceSpec::Kind::Coherent)
                throw ConfigError("flux sweeps drive a coherent source; set [source] type = coherent",
                                  sections["source"].line);
            break;
        case ExperimentKind::DelaySweep:
            if (config.delta_grid.empty())
                for (int d = 1; d <= 10; ++d) config.delta_grid.push_back(d);
            if (config.source.kind != SourceSpec::Kind::Coherent)
                throw ConfigError("the delay sweep drives a coherent source; set [source] type = coherent",
                                  sections["source"].line);
            break;
        case ExperimentKind::Hbt:
            if (config.amzi_delay_gates < 1 || config.amzi_delay_gates >= config.pulse_period_gates)
                throw ConfigError("key 'amzi_delay_gates': must be in [1, pulse_period_gates)",
                                  e.has("amzi_delay_gates") ? e.line("amzi_delay_gates") : section.line);
            break;
        }

        if (config.experiment == ExperimentKind::DeadTime) {
            if (config.separation_gates < 1 || config.separation_gates >= config.frame_gates)
                throw ConfigError("key 'separation_gates': must be in [1, frame_gates)",
                                  e.has("separation_gates") ? e.line("separation_gates") : section.line);
        }
        if (config.experiment == ExperimentKind::DelaySweep) {
            for (int d : config.delta_grid)
                if (d >= config.frame_gates)
                    throw ConfigError("key 'delta_grid': separations must stay below frame_gates",
                                      e.has("delta_grid") ? e.line("delta_grid") : section.line);
        }
    }

    config.detector.validate();
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

} // namespace sdapd
