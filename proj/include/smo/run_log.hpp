#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smo/param_space.hpp"

namespace smo {

enum class StopReason { none, budget, stagnation, diversity, objective_failure };

inline const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::budget: return "budget";
        case StopReason::stagnation: return "stagnation";
        case StopReason::diversity: return "diversity";
        case StopReason::objective_failure: return "objective_failure";
        default: return "none";
    }
}

enum class PhaseEventKind { lld_reset, fission, fusion };

inline const char* to_string(PhaseEventKind k) {
    switch (k) {
        case PhaseEventKind::lld_reset: return "lld_reset";
        case PhaseEventKind::fission: return "fission";
        case PhaseEventKind::fusion: return "fusion";
    }
    return "?";
}

struct PhaseEvent {
    PhaseEventKind kind = PhaseEventKind::lld_reset;
    std::size_t group = 0;

    bool operator==(const PhaseEvent&) const = default;
};

/// State at the end of one iteration. Iteration 0 is the freshly
/// initialized swarm. best_objective/best_position are best-ever.
struct IterationRecord {
    int iteration = 0;
    std::uint64_t evaluations = 0;
    double best_objective = 0.0;
    Position best_position;
    std::size_t group_count = 1;
    std::vector<PhaseEvent> events;

    bool operator==(const IterationRecord&) const = default;
};

struct RunLog {
    std::vector<IterationRecord> records;
    std::uint64_t total_evaluations = 0;
    StopReason stop_reason = StopReason::none;
    std::string stop_detail;

    bool operator==(const RunLog&) const = default;
};

/// CSV serialization; the stop reason appears only on the final row.
inline std::string runlog_csv(const RunLog& log) {
    std::string out = "iteration,evaluations,best_objective,group_count,stop_reason\n";
    for (std::size_t i = 0; i < log.records.size(); ++i) {
        const auto& r = log.records[i];
        out += std::to_string(r.iteration);
        out += ',';
        out += std::to_string(r.evaluations);
        out += ',';
        out += format_double(r.best_objective);
        out += ',';
        out += std::to_string(r.group_count);
        out += ',';
        if (i + 1 == log.records.size()) out += to_string(log.stop_reason);
        out += '\n';
    }
    return out;
}

}  // namespace smo
