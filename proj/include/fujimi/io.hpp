#pragma once

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fujimi/dtmc.hpp"

namespace fujimi {

namespace detail {

// Shortest decimal that round-trips the exact double (17 significant digits
// always suffices; %.17g keeps the export byte-stable across platforms).
inline std::string format_probability(double p) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", p);
    return buf;
}

}  // namespace detail

// states file: two header lines `states <count>` and `initial <index>`.
inline void write_states_file(std::ostream& os, const Dtmc& d) {
    os << "states " << d.state_count() << "\n";
    os << "initial " << d.initial() << "\n";
}

// transitions file: one `src dst prob` triple per line, row-major order.
inline void write_transitions_file(std::ostream& os, const Dtmc& d) {
    for (StateIndex s = 0; s < d.state_count(); ++s)
        for (const auto& [t, p] : d.row(s))
            os << s << " " << t << " " << detail::format_probability(p) << "\n";
}

// labels file: one `name: i1 i2 ...` line per label, empty labels included.
inline void write_labels_file(std::ostream& os, const Dtmc& d) {
    for (const auto& [name, set] : d.labels()) {
        os << name << ":";
        for (StateIndex s : set.indices()) os << " " << s;
        os << "\n";
    }
}

inline void export_model(const Dtmc& d, const std::string& prefix) {
    auto open = [](const std::string& path) {
        std::ofstream os(path);
        if (!os) throw IoError(path, "cannot open for writing");
        return os;
    };
    auto st = open(prefix + ".states");
    write_states_file(st, d);
    auto tr = open(prefix + ".transitions");
    write_transitions_file(tr, d);
    auto lb = open(prefix + ".labels");
    write_labels_file(lb, d);
}

inline Dtmc import_model(const std::string& prefix) {
    std::ifstream st(prefix + ".states");
    if (!st) throw IoError(prefix + ".states", "cannot open");
    std::string word;
    std::size_t count = 0;
    StateIndex initial = 0;
    if (!(st >> word >> count) || word != "states")
        throw IoError(prefix + ".states", "expected 'states <count>'");
    if (!(st >> word >> initial) || word != "initial")
        throw IoError(prefix + ".states", "expected 'initial <index>'");

    std::ifstream tr(prefix + ".transitions");
    if (!tr) throw IoError(prefix + ".transitions", "cannot open");
    std::vector<Transition> transitions;
    StateIndex src, dst;
    double p;
    while (tr >> src >> dst >> p) transitions.push_back({src, dst, p});

    std::ifstream lb(prefix + ".labels");
    if (!lb) throw IoError(prefix + ".labels", "cannot open");
    std::map<std::string, StateSet> labels;
    std::string line;
    while (std::getline(lb, line)) {
        if (line.empty()) continue;
        auto colon = line.find(':');
        if (colon == std::string::npos) throw IoError(prefix + ".labels", "missing ':' in line");
        std::string name = line.substr(0, colon);
        std::istringstream rest(line.substr(colon + 1));
        StateSet& set = labels[name];
        StateIndex s;
        while (rest >> s) set.insert(s);
    }
    return Dtmc(count, initial, transitions, std::move(labels));
}

// One reward value per line: `<state> <value>`.
inline void write_rewards_file(std::ostream& os, const RewardStructure& r,
                               std::size_t state_count) {
    for (StateIndex s = 0; s < state_count; ++s) {
        double v = r.at(s);
        if (v != 0.0) os << s << " " << detail::format_probability(v) << "\n";
    }
}

}  // namespace fujimi
