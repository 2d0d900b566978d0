// Copyright (c) the sdl authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SDL_REPORT_HPP
#define SDL_REPORT_HPP

#include <cmath>
#include <string>

#include <json.hpp>

namespace sdl {

enum class Verdict { pass, fail, inconclusive };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

/// Structured record of a single numerical witness. standard_error is NaN
/// when the statistic is deterministic. The tolerance rule that produced the
/// verdict is recorded in metadata so reports are self-describing.
struct DiagnosticsReport {
    std::string name;
    double statistic = 0.0;
    double bound_or_target = 0.0;
    double standard_error = std::nan("");
    Verdict verdict = Verdict::inconclusive;
    nlohmann::json metadata = nlohmann::json::object();

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["name"] = name;
        j["statistic"] = statistic;
        j["bound_or_target"] = bound_or_target;
        if (std::isnan(standard_error))
            j["standard_error"] = nullptr;
        else
            j["standard_error"] = standard_error;
        j["verdict"] = verdict_name(verdict);
        j["metadata"] = metadata;
        return j;
    }
};

} // namespace sdl

#endif
