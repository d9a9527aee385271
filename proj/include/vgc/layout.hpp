#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "vgc/error.hpp"

namespace vgc {

// Table regions are laid out in this order: [R | G | B].
enum class ZoneId : std::uint8_t { red = 0, green = 1, blue = 2 };

inline constexpr std::array<ZoneId, 3> kZones{ZoneId::red, ZoneId::green, ZoneId::blue};

constexpr std::size_t zone_index(ZoneId z) noexcept { return static_cast<std::size_t>(z); }

constexpr std::string_view zone_letter(ZoneId z) noexcept {
    switch (z) {
    case ZoneId::red: return "R";
    case ZoneId::green: return "G";
    case ZoneId::blue: return "B";
    }
    return "?";
}

constexpr std::string_view zone_name(ZoneId z) noexcept {
    switch (z) {
    case ZoneId::red: return "red";
    case ZoneId::green: return "green";
    case ZoneId::blue: return "blue";
    }
    return "?";
}

inline ZoneId parse_zone(std::string_view s) {
    if (s == "R" || s == "r" || s == "red") return ZoneId::red;
    if (s == "G" || s == "g" || s == "green") return ZoneId::green;
    if (s == "B" || s == "b" || s == "blue") return ZoneId::blue;
    fail(Errc::invalid_input, "unknown zone '" + std::string(s) + "'");
}

enum class Generation : std::uint8_t { gen0 = 0, gen1 = 1, gen2 = 2 };

constexpr std::string_view to_string(Generation g) noexcept {
    switch (g) {
    case Generation::gen0: return "Gen0";
    case Generation::gen1: return "Gen1";
    case Generation::gen2: return "Gen2";
    }
    return "?";
}

// Start of chunk p when [0, n) is cut into `parts` contiguous chunks: floor(p*n/parts).
constexpr std::size_t split_point(std::size_t n, std::size_t parts, std::size_t p) noexcept {
    return static_cast<std::size_t>((static_cast<unsigned __int128>(p) * n) / parts);
}

struct ZoneLayout {
    std::array<std::size_t, 3> entries{4096, 4096, 4096};   // N_R, N_G, N_B
    double alpha_gen = 0.25;
    double beta_gen = 0.75;
    std::array<std::size_t, 3> partitions{1, 1, 1};         // P_R, P_G, P_B

    std::size_t size(ZoneId z) const noexcept { return entries[zone_index(z)]; }
    std::size_t start(ZoneId z) const noexcept {
        std::size_t s = 0;
        for (std::size_t i = 0; i < zone_index(z); ++i) s += entries[i];
        return s;
    }
    std::size_t end(ZoneId z) const noexcept { return start(z) + size(z); }
    std::size_t capacity() const noexcept { return entries[0] + entries[1] + entries[2]; }

    // Index offset (from the zone start) where Gen1 and Gen2 begin; fractional bounds floor.
    std::size_t gen1_offset(ZoneId z) const noexcept {
        return static_cast<std::size_t>(std::floor(alpha_gen * static_cast<double>(size(z))));
    }
    std::size_t gen2_offset(ZoneId z) const noexcept {
        return static_cast<std::size_t>(std::floor(beta_gen * static_cast<double>(size(z))));
    }

    void validate() const {
        if (!(alpha_gen > 0.0 && alpha_gen < beta_gen && beta_gen < 1.0))
            fail(Errc::invalid_config, "generation fractions must satisfy 0 < alpha < beta < 1");
        for (ZoneId z : kZones) {
            const auto p = partitions[zone_index(z)];
            if (p < 1 || p > size(z))
                fail(Errc::invalid_config,
                     "zone " + std::string(zone_name(z)) + " needs 1 <= partitions <= entries");
        }
    }
};

} // namespace vgc
