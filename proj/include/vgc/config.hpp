#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "vgc/bench.hpp"
#include "vgc/error.hpp"
#include "vgc/ppe.hpp"
#include "vgc/yield.hpp"
#include "vgc/zones.hpp"

namespace vgc {

struct Settings {
    ZoneConfig zones;
    bench::ExperimentConfig experiment;
    std::size_t scratch_slots = kDefaultScratchSlots;
    std::size_t cores = 0;  // 0 = detect
    bool pin = true;
    double rebalance_factor = 1.5;
    RebalanceMode rebalance_mode = RebalanceMode::normalized;

    void validate() const {
        zones.validate();
        if (scratch_slots == 0) fail(Errc::invalid_config, "scratch_slots must be at least 1");
        if (experiment.sweep_interval == 0) fail(Errc::invalid_config, "sweep_interval must be at least 1");
        if (!(rebalance_factor > 1.0)) fail(Errc::invalid_config, "rebalance_factor must exceed 1");
    }
};

namespace detail {
inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double to_double(std::string_view key, std::string_view v) {
    double d = 0.0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), d);
    if (r.ec != std::errc{} || r.ptr != v.data() + v.size())
        fail(Errc::invalid_config, std::string(key) + ": '" + std::string(v) + "' is not a number");
    return d;
}

inline std::size_t to_size(std::string_view key, std::string_view v) {
    std::size_t n = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), n);
    if (r.ec != std::errc{} || r.ptr != v.data() + v.size())
        fail(Errc::invalid_config, std::string(key) + ": '" + std::string(v) + "' is not a count");
    return n;
}

inline bool to_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    fail(Errc::invalid_config, std::string(key) + ": '" + std::string(v) + "' is not a boolean");
}

using Setter = std::function<void(Settings&, std::string_view key, std::string_view value)>;

inline Setter real(double ThresholdSet::*field, bool predicates) {
    return [=](Settings& s, std::string_view k, std::string_view v) {
        ThresholdSet& t = predicates ? s.zones.predicates : s.zones.simple;
        t.*field = to_double(k, v);
    };
}

inline Setter weight(ZoneId z, double ZoneWeights::*field) {
    return [=](Settings& s, std::string_view k, std::string_view v) { s.zones.costs[z].*field = to_double(k, v); };
}

inline const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = [] {
        std::map<std::string, Setter, std::less<>> t;
        const std::pair<const char*, double ThresholdSet::*> fields[] = {
            {"tau_R", &ThresholdSet::tau_R}, {"tau_G", &ThresholdSet::tau_G}, {"mu_R", &ThresholdSet::mu_R},
            {"mu_G", &ThresholdSet::mu_G},   {"a_R", &ThresholdSet::a_R},     {"a_G", &ThresholdSet::a_G},
            {"s_R", &ThresholdSet::s_R},     {"s_G", &ThresholdSet::s_G}};
        for (const auto& [name, f] : fields) {
            t[std::string("simple.") + name] = real(f, false);
            t[std::string("predicate.") + name] = real(f, true);
        }
        for (ZoneId z : kZones) {
            const std::string zl(zone_letter(z));
            t["alpha_" + zl] = weight(z, &ZoneWeights::alpha);
            t["beta_" + zl] = weight(z, &ZoneWeights::beta);
            t["gamma_" + zl] = weight(z, &ZoneWeights::gamma);
            t["pi_" + zl] = [z](Settings& s, std::string_view k, std::string_view v) {
                s.zones.costs.pi[zone_index(z)] = to_double(k, v);
            };
            t["entries_" + zl] = [z](Settings& s, std::string_view k, std::string_view v) {
                s.zones.layout.entries[zone_index(z)] = to_size(k, v);
            };
            t["partitions_" + zl] = [z](Settings& s, std::string_view k, std::string_view v) {
                s.zones.layout.partitions[zone_index(z)] = to_size(k, v);
            };
            t["collect_idle_" + zl] = [z](Settings& s, std::string_view k, std::string_view v) {
                s.zones.collect_idle[zone_index(z)] = to_bool(k, v);
            };
            t["ttl_" + zl] = [z](Settings& s, std::string_view k, std::string_view v) {
                s.experiment.ttl[zone_index(z)] = static_cast<std::uint32_t>(to_size(k, v));
            };
        }
        t["alpha_tolerance"] = [](Settings& s, std::string_view k, std::string_view v) {
            s.zones.costs.alpha_tolerance = to_double(k, v);
        };
        t["gen_alpha"] = [](Settings& s, std::string_view k, std::string_view v) {
            s.zones.layout.alpha_gen = to_double(k, v);
        };
        t["gen_beta"] = [](Settings& s, std::string_view k, std::string_view v) {
            s.zones.layout.beta_gen = to_double(k, v);
        };
        t["policy"] = [](Settings& s, std::string_view k, std::string_view v) {
            if (v == "simple") s.zones.policy = Policy::simple;
            else if (v == "predicates") s.zones.policy = Policy::predicates;
            else fail(Errc::invalid_config, std::string(k) + ": expected simple or predicates");
        };
        t["pool_discipline"] = [](Settings& s, std::string_view k, std::string_view v) {
            if (v == "lifo") s.zones.discipline = PoolDiscipline::lifo;
            else if (v == "fifo") s.zones.discipline = PoolDiscipline::fifo;
            else fail(Errc::invalid_config, std::string(k) + ": expected lifo or fifo");
        };
        t["ema_omega"] = [](Settings& s, std::string_view k, std::string_view v) {
            s.zones.profile.ema = EmaConfig(to_double(k, v));
        };
        t["window_seconds"] = [](Settings& s, std::string_view k, std::string_view v) {
            s.zones.profile.window_seconds = to_double(k, v);
        };
        t["sweep_interval"] = [](Settings& s, std::string_view k, std::string_view v) {
            s.experiment.sweep_interval = to_size(k, v);
        };
        t["pressure_seed"] = [](Settings& s, std::string_view k, std::string_view v) {
            s.experiment.pressure_seed = to_size(k, v);
        };
        t["scratch_slots"] = [](Settings& s, std::string_view k, std::string_view v) { s.scratch_slots = to_size(k, v); };
        t["cores"] = [](Settings& s, std::string_view k, std::string_view v) { s.cores = to_size(k, v); };
        t["pin"] = [](Settings& s, std::string_view k, std::string_view v) { s.pin = to_bool(k, v); };
        t["rebalance_factor"] = [](Settings& s, std::string_view k, std::string_view v) {
            s.rebalance_factor = to_double(k, v);
        };
        t["rebalance_mode"] = [](Settings& s, std::string_view k, std::string_view v) {
            if (v == "normalized") s.rebalance_mode = RebalanceMode::normalized;
            else if (v == "raw") s.rebalance_mode = RebalanceMode::raw;
            else fail(Errc::invalid_config, std::string(k) + ": expected normalized or raw");
        };
        return t;
    }();
    return table;
}
} // namespace detail

inline void apply_setting(Settings& s, std::string_view key, std::string_view value) {
    const auto& t = detail::setters();
    const auto it = t.find(key);
    if (it == t.end()) fail(Errc::invalid_config, "unknown key '" + std::string(key) + "'");
    it->second(s, key, value);
}

/// Parses `key = value` lines; '#' starts a comment. The result is validated.
inline Settings load_settings(std::istream& in, Settings s = {}) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view v(line);
        if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
        v = detail::trim(v);
        if (v.empty()) continue;
        const auto eq = v.find('=');
        if (eq == std::string_view::npos)
            fail(Errc::invalid_config, "line " + std::to_string(lineno) + ": expected key = value");
        apply_setting(s, detail::trim(v.substr(0, eq)), detail::trim(v.substr(eq + 1)));
    }
    s.validate();
    return s;
}

inline Settings load_settings_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::invalid_config, "cannot open config file '" + path + "'");
    return load_settings(in);
}

inline Settings load_settings_string(std::string_view text) {
    std::istringstream in{std::string(text)};
    return load_settings(in);
}

} // namespace vgc
