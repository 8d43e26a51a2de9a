#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace wignerbox {

/// A protocol time "n:xx": round n in minutes, tick xx in seconds 0-59.
/// Total order is lexicographic on (round, tick).
struct TimeStamp {
    uint32_t round = 0;
    uint32_t tick = 0;

    auto operator<=>(const TimeStamp &) const = default;

    std::string str() const { return std::to_string(round) + ":" + two_digit(); }

    static TimeStamp parse(const std::string &text);

  private:
    std::string two_digit() const {
        return (tick < 10 ? "0" : "") + std::to_string(tick);
    }
};

inline TimeStamp TimeStamp::parse(const std::string &text) {
    auto colon = text.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= text.size()) {
        throw std::invalid_argument("bad timestamp: " + text);
    }
    TimeStamp t;
    t.round = static_cast<uint32_t>(std::stoul(text.substr(0, colon)));
    t.tick = static_cast<uint32_t>(std::stoul(text.substr(colon + 1)));
    if (t.tick > 59) {
        throw std::invalid_argument("timestamp tick out of range: " + text);
    }
    return t;
}

} // namespace wignerbox
