// Shared test helpers: warning capture/suppression.

#pragma once

#include <string>
#include <vector>

#include "etsim/operators.hpp"

namespace etsim_test {

inline void quiet_handler(const std::string&) {}

inline std::vector<std::string>& warning_log() {
    static std::vector<std::string> log;
    return log;
}

inline void log_handler(const std::string& msg) { warning_log().push_back(msg); }

// Routes warnings into warning_log() for the lifetime of the fixture, then
// silences them again.
struct WarningCapture {
    WarningCapture() {
        warning_log().clear();
        etsim::set_warning_handler(&log_handler);
    }
    ~WarningCapture() { etsim::set_warning_handler(&quiet_handler); }
};

}  // namespace etsim_test
