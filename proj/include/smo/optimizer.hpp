#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "smo/errors.hpp"
#include "smo/param_space.hpp"
#include "smo/rng.hpp"
#include "smo/run_log.hpp"

namespace smo {

/// Objective to minimize; must be pure and return a finite value for every
/// in-domain position.
using ObjectiveFn = std::function<double(const Position&)>;

struct SmoConfig {
    std::size_t population_size = 40;
    std::size_t max_groups = 5;
    int local_leader_limit = 30;
    int global_leader_limit = 50;
    double perturbation_rate = 1.0;  // per-dimension update probability
    int max_iterations = 1000;
    std::uint64_t max_evaluations = 100000;  // 0 disables the budget rule
    double stagnation_epsilon = 1e-8;        // 0 disables the best-window rule
    int stagnation_window = 25;
    double diversity_epsilon = 1e-10;        // 0 disables the diversity rule
    std::uint64_t seed = 0;

    void validate() const {
        if (population_size < 4) throw ConfigError("population_size must be >= 4");
        if (max_groups < 1) throw ConfigError("max_groups must be >= 1");
        if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
        if (!(perturbation_rate > 0.0) || perturbation_rate > 1.0)
            throw ConfigError("perturbation_rate must be in (0, 1]");
        if (stagnation_window < 1) throw ConfigError("stagnation_window must be >= 1");
        if (stagnation_epsilon < 0.0) throw ConfigError("stagnation_epsilon must be >= 0");
        if (diversity_epsilon < 0.0) throw ConfigError("diversity_epsilon must be >= 0");
    }
};

/// Maximization-oriented fitness for a minimized objective: 1/(1+f) for
/// f >= 0 and 1+|f| otherwise. Strictly decreasing in f and always positive.
inline double fitness_transform(double objective) {
    if (!std::isfinite(objective))
        throw NonFiniteObjective("fitness_transform: objective is not finite");
    return objective >= 0.0 ? 1.0 / (1.0 + objective) : 1.0 + std::fabs(objective);
}

struct Monkey {
    Position position;
    double objective = std::numeric_limits<double>::infinity();
    double fitness = 0.0;

    bool operator==(const Monkey&) const = default;
};

/// A fission-fusion subgroup. The leader snapshot is the position stored at
/// the last learning phase; phase updates read the snapshot, not the live
/// monkey.
struct Group {
    std::vector<std::size_t> members;
    std::size_t local_leader = 0;
    Position leader_position;
    double leader_fitness = -1.0;
    double leader_objective = std::numeric_limits<double>::infinity();
    int local_limit_count = 0;
};

struct Swarm {
    std::vector<Monkey> monkeys;
    std::vector<Group> groups;
    std::size_t global_leader = 0;
    Position global_leader_position;
    double global_leader_fitness = -1.0;
    double global_leader_objective = std::numeric_limits<double>::infinity();
    int global_limit_count = 0;
};

/// Selection probabilities prob_i = 0.9 * fitness_i / max_fitness + 0.1,
/// always in [0.1, 1.0] with 1.0 attained by the fittest monkey.
inline std::vector<double> selection_probability(const Swarm& swarm) {
    double max_fitness = 0.0;
    for (const auto& m : swarm.monkeys) {
        if (!std::isfinite(m.fitness) || m.fitness <= 0.0)
            throw InvalidFitness("selection_probability: fitness must be finite and positive");
        if (m.fitness > max_fitness) max_fitness = m.fitness;
    }
    std::vector<double> probs(swarm.monkeys.size());
    for (std::size_t i = 0; i < probs.size(); ++i)
        probs[i] = 0.9 * (swarm.monkeys[i].fitness / max_fitness) + 0.1;
    return probs;
}

struct RunResult {
    Position best_position;
    double best_objective = std::numeric_limits<double>::infinity();
    RunLog log;
    StopReason stop_reason = StopReason::none;
    std::string stop_detail;
    std::string error;  // set when stop_reason == objective_failure
};

/// Spider Monkey Optimization over a mixed-variable ParamSpace.
///
/// Each iteration runs Local Leader -> Global Leader -> leader learning ->
/// Local Leader Decision -> Global Leader Decision. Continuous and discrete
/// dimensions follow
///   new_j = x_j + R*(leader_j - x_j) + U(-1,1)*(other_j - x_j)
/// while categorical dimensions drop the social term and move on the index
/// only, with the leader's category adopted outright with probability
/// leader_fitness / sum(fitness). Candidates go through ParamSpace::repair
/// before evaluation; LL/GL acceptance is greedy, the decision phase
/// replaces unconditionally (it exists to diversify).
class Optimizer {
public:
    Optimizer(ObjectiveFn objective, ParamSpace space, SmoConfig config)
        : objective_(std::move(objective)),
          space_(std::move(space)),
          config_(config),
          rng_(config.seed) {
        config_.validate();
        if (space_.dim() == 0) throw InvalidSpace("optimizer needs a non-empty parameter space");
        initialize();
    }

    const Swarm& swarm() const { return swarm_; }
    Swarm& swarm() { return swarm_; }
    const ParamSpace& space() const { return space_; }
    const SmoConfig& config() const { return config_; }
    const RunLog& log() const { return log_; }
    std::uint64_t evaluations() const { return evaluations_; }
    int iteration() const { return iteration_; }
    double best_objective() const { return best_objective_; }
    const Position& best_position() const { return best_position_; }

    /// Overwrite monkey i with the repaired raw vector and re-evaluate it.
    /// Leader snapshots are not touched; call leader_learning() afterwards.
    void set_position(std::size_t i, std::vector<double> raw) {
        Position pos = space_.repair(std::move(raw));
        const double v = evaluate(pos);
        swarm_.monkeys[i] = Monkey{std::move(pos), v, fitness_transform(v)};
    }

    void local_leader_phase() {
        const double fitness_sum = total_fitness();
        for (auto& group : swarm_.groups) {
            for (std::size_t mi = 0; mi < group.members.size(); ++mi) {
                if (!budget_left()) return;
                const std::size_t i = group.members[mi];
                std::vector<double> cand = swarm_.monkeys[i].position.raw;
                const bool social = group.members.size() > 1;
                const std::size_t r = social ? draw_other(group.members, mi) : 0;
                for (std::size_t j = 0; j < space_.dim(); ++j) {
                    if (rng_.uniform() >= config_.perturbation_rate) continue;
                    if (space_.is_categorical(j)) {
                        cand[j] = categorical_step(cand[j], j, group.leader_position,
                                                   group.leader_fitness, fitness_sum);
                    } else {
                        const double R = rng_.uniform();
                        double v = cand[j] + R * (group.leader_position.raw[j] - cand[j]);
                        if (social)
                            v += rng_.uniform(-1.0, 1.0) *
                                 (swarm_.monkeys[r].position.raw[j] - cand[j]);
                        cand[j] = v;
                    }
                }
                try_improve(i, std::move(cand));
            }
        }
    }

    void global_leader_phase() {
        const auto probs = selection_probability(swarm_);
        const double fitness_sum = total_fitness();
        for (auto& group : swarm_.groups) {
            const std::size_t n = group.members.size();
            std::size_t attempts = 0;
            // prob_i >= 0.1 keeps the pass count tiny; the cap only guards
            // against a pathological rng stream.
            for (int pass = 0; pass < 1000 && attempts < n && budget_left(); ++pass) {
                for (std::size_t mi = 0; mi < n && attempts < n; ++mi) {
                    if (!budget_left()) break;
                    const std::size_t i = group.members[mi];
                    if (rng_.uniform() >= probs[i]) continue;
                    ++attempts;
                    const std::size_t j = rng_.uniform_index(space_.dim());
                    std::vector<double> cand = swarm_.monkeys[i].position.raw;
                    if (space_.is_categorical(j)) {
                        cand[j] = categorical_step(cand[j], j, swarm_.global_leader_position,
                                                   swarm_.global_leader_fitness, fitness_sum);
                    } else {
                        const double R = rng_.uniform();
                        double v = cand[j] + R * (swarm_.global_leader_position.raw[j] - cand[j]);
                        if (n > 1) {
                            const std::size_t r = draw_other(group.members, mi);
                            v += rng_.uniform(-1.0, 1.0) *
                                 (swarm_.monkeys[r].position.raw[j] - cand[j]);
                        }
                        cand[j] = v;
                    }
                    try_improve(i, std::move(cand));
                }
            }
        }
    }

    /// Greedy leader update (GLL + LLL). Counters increment when a leader's
    /// fitness did not improve, and reset otherwise.
    void leader_learning() {
        bool any_change = false;
        const std::size_t best = best_monkey(indices_all());
        if (swarm_.monkeys[best].fitness > swarm_.global_leader_fitness) {
            swarm_.global_leader = best;
            swarm_.global_leader_position = swarm_.monkeys[best].position;
            swarm_.global_leader_fitness = swarm_.monkeys[best].fitness;
            swarm_.global_leader_objective = swarm_.monkeys[best].objective;
            swarm_.global_limit_count = 0;
            any_change = true;
        } else {
            ++swarm_.global_limit_count;
        }
        for (auto& group : swarm_.groups) {
            const std::size_t gb = best_monkey(group.members);
            if (swarm_.monkeys[gb].fitness > group.leader_fitness) {
                set_group_leader(group, gb);
                group.local_limit_count = 0;
                any_change = true;
            } else {
                ++group.local_limit_count;
            }
        }
        leader_frozen_streak_ = any_change ? 0 : leader_frozen_streak_ + 1;
    }

    /// Re-diversifies groups whose local leader stagnated past the limit:
    /// each dimension is re-initialized with probability perturbation_rate
    /// and otherwise attracted by the global leader away from the local one.
    /// Replacement is unconditional. Returns the number of groups reset.
    int local_leader_decision() {
        int resets = 0;
        for (std::size_t k = 0; k < swarm_.groups.size(); ++k) {
            auto& group = swarm_.groups[k];
            if (group.local_limit_count <= config_.local_leader_limit) continue;
            ++resets;
            pending_events_.push_back({PhaseEventKind::lld_reset, k});
            for (std::size_t mi = 0; mi < group.members.size(); ++mi) {
                if (!budget_left()) break;
                const std::size_t i = group.members[mi];
                std::vector<double> cand = swarm_.monkeys[i].position.raw;
                const bool social = group.members.size() > 1;
                const std::size_t r = social ? draw_other(group.members, mi) : 0;
                for (std::size_t j = 0; j < space_.dim(); ++j) {
                    if (rng_.uniform() < config_.perturbation_rate) {
                        cand[j] = space_.working_lo(j) +
                                  rng_.uniform() * (space_.working_hi(j) - space_.working_lo(j));
                    } else {
                        const double R = rng_.uniform();
                        double v = cand[j] + R * (swarm_.global_leader_position.raw[j] - cand[j]);
                        if (social)
                            v += rng_.uniform() * (swarm_.monkeys[r].position.raw[j] -
                                                   group.leader_position.raw[j]);
                        cand[j] = v;
                    }
                }
                Position pos = space_.repair(std::move(cand));
                const double v = evaluate(pos);
                swarm_.monkeys[i] = Monkey{std::move(pos), v, fitness_transform(v)};
            }
            group.local_limit_count = 0;
        }
        return resets;
    }

    /// Fission/fusion when the global leader stagnated past the limit: split
    /// the largest group while below max_groups, otherwise merge everything
    /// back into a single group.
    std::optional<PhaseEventKind> global_leader_decision() {
        if (swarm_.global_limit_count <= config_.global_leader_limit) return std::nullopt;
        swarm_.global_limit_count = 0;
        std::size_t largest = 0;
        for (std::size_t k = 1; k < swarm_.groups.size(); ++k)
            if (swarm_.groups[k].members.size() > swarm_.groups[largest].members.size())
                largest = k;
        if (swarm_.groups.size() < config_.max_groups &&
            swarm_.groups[largest].members.size() >= 2) {
            auto members = std::move(swarm_.groups[largest].members);
            const std::size_t half = (members.size() + 1) / 2;
            Group left, right;
            left.members.assign(members.begin(), members.begin() + half);
            right.members.assign(members.begin() + half, members.end());
            swarm_.groups[largest] = std::move(left);
            swarm_.groups.insert(swarm_.groups.begin() + largest + 1, std::move(right));
            refresh_group_leader(swarm_.groups[largest]);
            refresh_group_leader(swarm_.groups[largest + 1]);
            pending_events_.push_back({PhaseEventKind::fission, largest});
            leader_frozen_streak_ = 0;
            return PhaseEventKind::fission;
        }
        Group merged;
        merged.members.resize(swarm_.monkeys.size());
        for (std::size_t i = 0; i < merged.members.size(); ++i) merged.members[i] = i;
        swarm_.groups.assign(1, std::move(merged));
        refresh_group_leader(swarm_.groups[0]);
        pending_events_.push_back({PhaseEventKind::fusion, 0});
        leader_frozen_streak_ = 0;
        return PhaseEventKind::fusion;
    }

    /// Mean Euclidean distance between raw vectors over all monkey pairs.
    double mean_pairwise_raw_distance() const {
        const std::size_t n = swarm_.monkeys.size();
        double sum = 0.0;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) {
                double d2 = 0.0;
                for (std::size_t j = 0; j < space_.dim(); ++j) {
                    const double d = swarm_.monkeys[a].position.raw[j] -
                                     swarm_.monkeys[b].position.raw[j];
                    d2 += d * d;
                }
                sum += std::sqrt(d2);
            }
        return sum / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
    }

    /// Stop decision after a completed iteration; nullopt while running.
    std::optional<std::pair<StopReason, std::string>> check_stop() const {
        if (iteration_ >= config_.max_iterations)
            return std::pair{StopReason::budget, "max_iterations"};
        if (config_.max_evaluations > 0 && evaluations_ >= config_.max_evaluations)
            return std::pair{StopReason::budget, "max_evaluations"};
        const std::size_t w = static_cast<std::size_t>(config_.stagnation_window);
        if (config_.stagnation_epsilon > 0.0 && log_.records.size() > w) {
            const double now = log_.records.back().best_objective;
            const double then = log_.records[log_.records.size() - 1 - w].best_objective;
            if (std::fabs(now - then) < config_.stagnation_epsilon)
                return std::pair{StopReason::stagnation, "best_window"};
        }
        if (config_.diversity_epsilon > 0.0 &&
            mean_pairwise_raw_distance() < config_.diversity_epsilon)
            return std::pair{StopReason::diversity, "diversity_collapse"};
        if (leader_frozen_streak_ >= config_.stagnation_window)
            return std::pair{StopReason::stagnation, "leaders_frozen"};
        return std::nullopt;
    }

    /// One full iteration; appends a log record. Returns false once a stop
    /// rule fired (the log then carries the reason).
    bool iterate() {
        ++iteration_;
        pending_events_.clear();
        local_leader_phase();
        global_leader_phase();
        leader_learning();
        local_leader_decision();
        global_leader_decision();
        append_record();
        if (auto stop = check_stop()) {
            log_.stop_reason = stop->first;
            log_.stop_detail = stop->second;
            return false;
        }
        return true;
    }

    RunResult run() {
        RunResult result;
        try {
            while (iterate()) {
            }
        } catch (const ObjectiveFailure& e) {
            log_.stop_reason = StopReason::objective_failure;
            log_.stop_detail = "objective_failure";
            result.error = e.what();
        }
        log_.total_evaluations = evaluations_;
        result.best_position = best_position_;
        result.best_objective = best_objective_;
        result.log = log_;
        result.stop_reason = log_.stop_reason;
        result.stop_detail = log_.stop_detail;
        return result;
    }

private:
    void initialize() {
        swarm_.monkeys.reserve(config_.population_size);
        for (std::size_t i = 0; i < config_.population_size; ++i) {
            Position pos = space_.sample(rng_);
            const double v = evaluate(pos);
            swarm_.monkeys.push_back(Monkey{std::move(pos), v, fitness_transform(v)});
        }
        Group all;
        all.members.resize(config_.population_size);
        for (std::size_t i = 0; i < all.members.size(); ++i) all.members[i] = i;
        swarm_.groups.push_back(std::move(all));
        leader_learning();
        append_record();  // iteration 0
    }

    double evaluate(const Position& pos) {
        if (!space_.in_domain(pos))
            throw Error("internal: evaluated position escaped its domain");
        double v;
        try {
            v = objective_(pos);
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw ObjectiveFailure(std::string("objective threw: ") + e.what());
        }
        if (!std::isfinite(v)) throw ObjectiveFailure("objective returned a non-finite value");
        ++evaluations_;
        if (v < best_objective_) {
            best_objective_ = v;
            best_position_ = pos;
        }
        return v;
    }

    void try_improve(std::size_t i, std::vector<double> cand) {
        Position pos = space_.repair(std::move(cand));
        const double v = evaluate(pos);
        const double f = fitness_transform(v);
        if (f > swarm_.monkeys[i].fitness)
            swarm_.monkeys[i] = Monkey{std::move(pos), v, f};
    }

    /// Index update for a categorical dimension: leader attraction on the
    /// raw index, then probabilistic adoption of the leader's category. The
    /// raw value keeps its fractional part unless adoption fires.
    double categorical_step(double raw, std::size_t j, const Position& leader,
                            double leader_fitness, double fitness_sum) {
        const double R = rng_.uniform();
        const double updated = raw + R * (leader.raw[j] - raw);
        long long snapped = round_half_up(updated);
        const long long top = static_cast<long long>(space_.working_hi(j));
        if (snapped < 0) snapped = 0;
        if (snapped > top) snapped = top;
        const std::size_t current = static_cast<std::size_t>(snapped);
        const std::size_t adopted =
            adopt_category(current, leader.category_index(j), leader_fitness, fitness_sum, rng_);
        return adopted == current ? updated : static_cast<double>(adopted);
    }

    std::size_t draw_other(const std::vector<std::size_t>& members, std::size_t self_pos) {
        std::size_t idx = rng_.uniform_index(members.size() - 1);
        if (idx >= self_pos) ++idx;
        return members[idx];
    }

    std::vector<std::size_t> indices_all() const {
        std::vector<std::size_t> ids(swarm_.monkeys.size());
        for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
        return ids;
    }

    std::size_t best_monkey(const std::vector<std::size_t>& ids) const {
        std::size_t best = ids.front();
        for (const std::size_t i : ids)
            if (swarm_.monkeys[i].fitness > swarm_.monkeys[best].fitness) best = i;
        return best;  // ties keep the lowest index
    }

    void set_group_leader(Group& group, std::size_t i) {
        group.local_leader = i;
        group.leader_position = swarm_.monkeys[i].position;
        group.leader_fitness = swarm_.monkeys[i].fitness;
        group.leader_objective = swarm_.monkeys[i].objective;
    }

    void refresh_group_leader(Group& group) {
        set_group_leader(group, best_monkey(group.members));
        group.local_limit_count = 0;
    }

    double total_fitness() const {
        double sum = 0.0;
        for (const auto& m : swarm_.monkeys) sum += m.fitness;
        return sum;
    }

    bool budget_left() const {
        return config_.max_evaluations == 0 || evaluations_ < config_.max_evaluations;
    }

    void append_record() {
        IterationRecord rec;
        rec.iteration = iteration_;
        rec.evaluations = evaluations_;
        rec.best_objective = best_objective_;
        rec.best_position = best_position_;
        rec.group_count = swarm_.groups.size();
        rec.events = pending_events_;
        log_.records.push_back(std::move(rec));
        pending_events_.clear();
    }

    ObjectiveFn objective_;
    ParamSpace space_;
    SmoConfig config_;
    Rng rng_;
    Swarm swarm_;
    RunLog log_;
    std::vector<PhaseEvent> pending_events_;
    std::uint64_t evaluations_ = 0;
    int iteration_ = 0;
    int leader_frozen_streak_ = 0;
    double best_objective_ = std::numeric_limits<double>::infinity();
    Position best_position_;
};

/// Convenience wrapper: build an optimizer and run it to completion.
inline RunResult run(ObjectiveFn objective, ParamSpace space, const SmoConfig& config) {
    Optimizer opt(std::move(objective), std::move(space), config);
    return opt.run();
}

/// Structured-text result file: run summary plus one param.<name> line per
/// parameter of the best position.
inline std::string result_text(const ParamSpace& space, const RunResult& result) {
    std::string out;
    out += "stop_reason = ";
    out += to_string(result.stop_reason);
    out += "\nstop_detail = " + result.stop_detail;
    out += "\nbest_objective = " + format_double(result.best_objective);
    out += "\nevaluations = " + std::to_string(result.log.total_evaluations);
    out += "\niterations = " +
           std::to_string(result.log.records.empty() ? 0 : result.log.records.back().iteration);
    out += '\n';
    for (std::size_t j = 0; j < space.dim(); ++j)
        out += "param." + space.name(j) + " = " +
               space.value_string(result.best_position, j) + "\n";
    return out;
}

}  // namespace smo
