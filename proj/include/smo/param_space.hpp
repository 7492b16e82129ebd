#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <variant>
#include <vector>

#include "smo/errors.hpp"

namespace smo {

/// Real-valued parameter with inclusive bounds. When log_scale is set the
/// optimizer works in log10(value) space, which keeps step sizes comparable
/// across ranges spanning several decades (e.g. learning rates).
struct ContinuousParam {
    std::string name;
    double lo = 0.0;
    double hi = 1.0;
    bool log_scale = false;
};

/// Integer parameter with inclusive bounds. Raw updates are real-valued;
/// repair rounds half-up and then clamps.
struct DiscreteParam {
    std::string name;
    long long lo = 0;
    long long hi = 1;
};

/// Parameter taking one of an ordered list of category labels. The working
/// representation is a real-valued index into {0, ..., m-1}.
struct CategoricalParam {
    std::string name;
    std::vector<std::string> categories;
};

using ParamDesc = std::variant<ContinuousParam, DiscreteParam, CategoricalParam>;

/// Repaired value of one parameter: real for continuous, integer for
/// discrete, category index for categorical.
using ParamValue = std::variant<double, long long, std::size_t>;

/// One candidate solution. `raw` is the optimizer's working vector, clamped
/// to the per-dimension box; `values` is the repaired in-domain value per
/// parameter. Categorical/discrete raw entries keep their fractional part so
/// drift toward a neighbouring value can accumulate across updates.
struct Position {
    std::vector<double> raw;
    std::vector<ParamValue> values;

    double real(std::size_t j) const { return std::get<double>(values[j]); }
    long long integer(std::size_t j) const { return std::get<long long>(values[j]); }
    std::size_t category_index(std::size_t j) const { return std::get<std::size_t>(values[j]); }

    bool operator==(const Position& other) const = default;
};

inline long long round_half_up(double x) {
    return static_cast<long long>(std::floor(x + 0.5));
}

/// Ordered, immutable mixed-variable search domain.
class ParamSpace {
public:
    ParamSpace() = default;

    explicit ParamSpace(std::vector<ParamDesc> params) : params_(std::move(params)) {
        for (std::size_t j = 0; j < params_.size(); ++j) {
            validate_param(params_[j]);
            for (std::size_t k = 0; k < j; ++k) {
                if (name(k) == name(j))
                    throw InvalidSpace("duplicate parameter name '" + name(j) + "'");
            }
        }
    }

    std::size_t dim() const { return params_.size(); }
    const ParamDesc& param(std::size_t j) const { return params_.at(j); }
    const std::vector<ParamDesc>& params() const { return params_; }

    const std::string& name(std::size_t j) const {
        return std::visit([](const auto& p) -> const std::string& { return p.name; }, params_[j]);
    }

    bool is_categorical(std::size_t j) const {
        return std::holds_alternative<CategoricalParam>(params_[j]);
    }

    /// Category label for a categorical dimension.
    const std::string& category(std::size_t j, std::size_t index) const {
        return std::get<CategoricalParam>(params_[j]).categories.at(index);
    }

    /// Lower bound of the working (raw) domain: log10 space for log-scaled
    /// continuous parameters, index space {0..m-1} for categoricals.
    double working_lo(std::size_t j) const {
        return std::visit(
            [](const auto& p) -> double {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, ContinuousParam>)
                    return p.log_scale ? std::log10(p.lo) : p.lo;
                else if constexpr (std::is_same_v<T, DiscreteParam>)
                    return static_cast<double>(p.lo);
                else
                    return 0.0;
            },
            params_[j]);
    }

    double working_hi(std::size_t j) const {
        return std::visit(
            [](const auto& p) -> double {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, ContinuousParam>)
                    return p.log_scale ? std::log10(p.hi) : p.hi;
                else if constexpr (std::is_same_v<T, DiscreteParam>)
                    return static_cast<double>(p.hi);
                else
                    return static_cast<double>(p.categories.size() - 1);
            },
            params_[j]);
    }

    /// Random position: raw[j] = lo_j + R * (hi_j - lo_j) with R ~ U(0,1) in
    /// the working domain, then repaired.
    template <class RngT>
    Position sample(RngT& rng) const {
        std::vector<double> raw(dim());
        for (std::size_t j = 0; j < dim(); ++j)
            raw[j] = working_lo(j) + rng.uniform() * (working_hi(j) - working_lo(j));
        return repair(std::move(raw));
    }

    /// Maps an arbitrary raw vector back into the domain. Continuous entries
    /// are clamped (in the working domain); discrete and categorical entries
    /// are rounded half-up and then clamped for the repaired value, while the
    /// stored raw keeps its fractional part (clamped to the box).
    Position repair(std::vector<double> raw) const {
        if (raw.size() != dim())
            throw LengthMismatch("repair: raw vector has length " + std::to_string(raw.size()) +
                                 ", space has dim " + std::to_string(dim()));
        Position pos;
        pos.values.resize(dim());
        for (std::size_t j = 0; j < dim(); ++j) {
            if (!std::isfinite(raw[j]))
                raw[j] = raw[j] > 0 ? working_hi(j) : working_lo(j);
            const double snapped = clamp(raw[j], working_lo(j), working_hi(j));
            std::visit(
                [&](const auto& p) {
                    using T = std::decay_t<decltype(p)>;
                    if constexpr (std::is_same_v<T, ContinuousParam>) {
                        const double v = p.log_scale ? std::pow(10.0, snapped) : snapped;
                        pos.values[j] = clamp(v, p.lo, p.hi);
                    } else if constexpr (std::is_same_v<T, DiscreteParam>) {
                        // Round first, then clamp (9.4 -> 9 -> lo). Stay in
                        // the double domain until clamped so huge raws cannot
                        // overflow the integer cast.
                        double v = std::floor(raw[j] + 0.5);
                        if (v < double(p.lo)) v = double(p.lo);
                        if (v > double(p.hi)) v = double(p.hi);
                        pos.values[j] = static_cast<long long>(v);
                    } else {
                        const double m = double(p.categories.size());
                        double idx = std::floor(raw[j] + 0.5);
                        if (idx < 0.0) idx = 0.0;
                        if (idx > m - 1.0) idx = m - 1.0;
                        pos.values[j] = static_cast<std::size_t>(idx);
                    }
                },
                params_[j]);
            raw[j] = snapped;
        }
        pos.raw = std::move(raw);
        return pos;
    }

    /// True when every repaired value lies inside its parameter's domain.
    bool in_domain(const Position& pos) const {
        if (pos.values.size() != dim()) return false;
        for (std::size_t j = 0; j < dim(); ++j) {
            const bool ok = std::visit(
                [&](const auto& p) -> bool {
                    using T = std::decay_t<decltype(p)>;
                    if constexpr (std::is_same_v<T, ContinuousParam>) {
                        const double v = std::get<double>(pos.values[j]);
                        return v >= p.lo && v <= p.hi;
                    } else if constexpr (std::is_same_v<T, DiscreteParam>) {
                        const long long v = std::get<long long>(pos.values[j]);
                        return v >= p.lo && v <= p.hi;
                    } else {
                        return std::get<std::size_t>(pos.values[j]) < p.categories.size();
                    }
                },
                params_[j]);
            if (!ok) return false;
        }
        return true;
    }

    /// Repaired value rendered as text (result files, logs).
    std::string value_string(const Position& pos, std::size_t j) const;

private:
    static double clamp(double x, double lo, double hi) {
        if (x < lo) return lo;
        if (x > hi) return hi;
        return x;
    }

    static void validate_param(const ParamDesc& desc) {
        std::visit(
            [](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if (p.name.empty()) throw InvalidSpace("parameter name must be non-empty");
                if constexpr (std::is_same_v<T, ContinuousParam>) {
                    if (!(p.lo < p.hi))
                        throw InvalidSpace("continuous '" + p.name + "': requires lo < hi");
                    if (!std::isfinite(p.lo) || !std::isfinite(p.hi))
                        throw InvalidSpace("continuous '" + p.name + "': bounds must be finite");
                    if (p.log_scale && p.lo <= 0.0)
                        throw InvalidSpace("continuous '" + p.name + "': log scale requires lo > 0");
                } else if constexpr (std::is_same_v<T, DiscreteParam>) {
                    if (!(p.lo < p.hi))
                        throw InvalidSpace("discrete '" + p.name + "': requires lo < hi");
                } else {
                    if (p.categories.size() < 2)
                        throw InvalidSpace("categorical '" + p.name + "': needs at least 2 categories");
                    for (std::size_t a = 0; a < p.categories.size(); ++a)
                        for (std::size_t b = a + 1; b < p.categories.size(); ++b)
                            if (p.categories[a] == p.categories[b])
                                throw InvalidSpace("categorical '" + p.name + "': duplicate category '" +
                                                   p.categories[a] + "'");
                }
            },
            desc);
    }

    std::vector<ParamDesc> params_;
};

/// Probabilistic adoption of the leader's category: with p = leader_fitness /
/// population_fitness_sum the leader's index replaces the rounded update
/// result, otherwise the current index is kept.
template <class RngT>
std::size_t adopt_category(std::size_t current_idx, std::size_t leader_idx, double leader_fitness,
                           double population_fitness_sum, RngT& rng) {
    if (!std::isfinite(leader_fitness) || leader_fitness < 0.0)
        throw InvalidFitness("adopt_category: leader fitness must be finite and non-negative");
    if (!std::isfinite(population_fitness_sum) || population_fitness_sum <= 0.0)
        throw InvalidFitness("adopt_category: population fitness sum must be finite and positive");
    double p = leader_fitness / population_fitness_sum;
    if (p > 1.0) p = 1.0;
    return rng.uniform() < p ? leader_idx : current_idx;
}

/// The three-hyperparameter space used throughout: log-scaled learning rate
/// in [1e-5, 1e-2], batch size in {4,...,128}, epochs in [10, 100].
inline ParamSpace paper_preset() {
    std::vector<ParamDesc> params;
    params.emplace_back(ContinuousParam{"learning_rate", 1e-5, 1e-2, true});
    params.emplace_back(CategoricalParam{"batch_size", {"4", "8", "16", "32", "64", "128"}});
    params.emplace_back(DiscreteParam{"epochs", 10, 100});
    return ParamSpace(std::move(params));
}

inline std::string format_double(double v);

inline std::string ParamSpace::value_string(const Position& pos, std::size_t j) const {
    return std::visit(
        [&](const auto& p) -> std::string {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ContinuousParam>)
                return format_double(std::get<double>(pos.values[j]));
            else if constexpr (std::is_same_v<T, DiscreteParam>)
                return std::to_string(std::get<long long>(pos.values[j]));
            else
                return p.categories.at(std::get<std::size_t>(pos.values[j]));
        },
        params_[j]);
}

/// Shortest representation that round-trips the double exactly.
inline std::string format_double(double v) {
    char buf[32];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

}  // namespace smo
