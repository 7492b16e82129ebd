#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "smo/param_space.hpp"
#include "smo/rng.hpp"
#include "../support/fake_rng.hpp"

using namespace smo;
using smo::test::ConstRng;

namespace {

ParamSpace mixed_space() {
    std::vector<ParamDesc> params;
    params.emplace_back(ContinuousParam{"x", 0.0, 1.0, false});
    params.emplace_back(DiscreteParam{"epochs", 10, 100});
    params.emplace_back(CategoricalParam{"batch", {"4", "8", "16", "32", "64", "128"}});
    return ParamSpace(std::move(params));
}

}  // namespace

TEST_CASE("construction rejects invalid descriptors", "[param_space]") {
    REQUIRE_THROWS_AS(ParamSpace({ContinuousParam{"x", 1.0, 1.0, false}}), InvalidSpace);
    REQUIRE_THROWS_AS(ParamSpace({ContinuousParam{"x", 2.0, 1.0, false}}), InvalidSpace);
    REQUIRE_THROWS_AS(ParamSpace({ContinuousParam{"x", 0.0, 1.0, true}}), InvalidSpace);
    REQUIRE_THROWS_AS(ParamSpace({DiscreteParam{"n", 5, 5}}), InvalidSpace);
    REQUIRE_THROWS_AS(ParamSpace({CategoricalParam{"k", {"a"}}}), InvalidSpace);
    REQUIRE_THROWS_AS(ParamSpace({CategoricalParam{"k", {"a", "a"}}}), InvalidSpace);
    REQUIRE_THROWS_AS(ParamSpace({ContinuousParam{"x", 0.0, 1.0, false},
                                  DiscreteParam{"x", 0, 1}}),
                      InvalidSpace);
}

TEST_CASE("sample follows lo + R*(hi - lo) per dimension", "[param_space]") {
    const ParamSpace space = mixed_space();

    ConstRng mid{0.5};
    Position p = space.sample(mid);
    REQUIRE(p.real(0) == 0.5);

    ConstRng low{0.0};
    p = space.sample(low);
    REQUIRE(p.integer(1) == 10);

    ConstRng high{1.0};
    p = space.sample(high);
    REQUIRE(p.category_index(2) == 5);
    REQUIRE(space.category(2, p.category_index(2)) == "128");
}

TEST_CASE("repair rounds then clamps discrete values", "[param_space]") {
    const ParamSpace space = mixed_space();
    REQUIRE(space.repair({0.5, 54.3, 0.0}).integer(1) == 54);
    REQUIRE(space.repair({0.5, 104.0, 0.0}).integer(1) == 100);
    REQUIRE(space.repair({0.5, 3.0, 0.0}).integer(1) == 10);
    // 9.4 rounds to 9 before clamping to the lower bound
    REQUIRE(space.repair({0.5, 9.4, 0.0}).integer(1) == 10);
    REQUIRE(space.repair({0.5, 100.5, 0.0}).integer(1) == 100);
}

TEST_CASE("repair maps categorical raw to the nearest index", "[param_space]") {
    const ParamSpace space = mixed_space();
    const Position p = space.repair({0.5, 50.0, 2.6});
    REQUIRE(p.category_index(2) == 3);
    REQUIRE(space.category(2, 3) == "32");
    // raw keeps its fractional part so drift can accumulate
    REQUIRE(p.raw[2] == 2.6);
}

TEST_CASE("repair rejects wrong-length vectors", "[param_space]") {
    REQUIRE_THROWS_AS(mixed_space().repair({0.5, 50.0}), LengthMismatch);
}

TEST_CASE("repair clamps log-scaled parameters in log10 space", "[param_space]") {
    ParamSpace space({ContinuousParam{"lr", 1e-5, 1e-2, true}});
    REQUIRE(space.working_lo(0) == Catch::Approx(-5.0));
    REQUIRE(space.working_hi(0) == Catch::Approx(-2.0));
    REQUIRE(space.repair({-10.0}).real(0) == 1e-5);
    REQUIRE(space.repair({0.0}).real(0) == 1e-2);
    REQUIRE(space.repair({-3.0}).real(0) == Catch::Approx(1e-3));
}

TEST_CASE("repair is idempotent and closed over the domain", "[param_space]") {
    const ParamSpace space = mixed_space();
    Rng rng(99);
    for (int trial = 0; trial < 10000; ++trial) {
        std::vector<double> raw(3);
        for (auto& v : raw) v = rng.uniform(-1e6, 1e6);
        const Position p = space.repair(raw);
        REQUIRE(space.in_domain(p));
        const Position again = space.repair(p.raw);
        REQUIRE(again == p);
    }
    // extreme values, including infinities
    for (const double v : {1e308, -1e308, std::numeric_limits<double>::infinity(),
                           -std::numeric_limits<double>::infinity()}) {
        const Position p = space.repair({v, v, v});
        REQUIRE(space.in_domain(p));
        REQUIRE(space.repair(p.raw) == p);
    }
}

TEST_CASE("categorical index mapping is a bijection onto the set", "[param_space]") {
    const ParamSpace space = mixed_space();
    std::vector<std::string> seen;
    for (int i = 0; i < 6; ++i) {
        const Position p = space.repair({0.5, 50.0, double(i)});
        REQUIRE(p.category_index(2) == std::size_t(i));
        seen.push_back(space.category(2, p.category_index(2)));
    }
    std::sort(seen.begin(), seen.end());
    REQUIRE(std::unique(seen.begin(), seen.end()) == seen.end());
}

TEST_CASE("adopt_category endpoints", "[param_space]") {
    Rng rng(1);
    // leader fitness equals the population sum: always adopted
    for (int i = 0; i < 100; ++i) REQUIRE(adopt_category(2, 5, 1.0, 1.0, rng) == 5);
    // zero leader fitness: never adopted
    for (int i = 0; i < 100; ++i) REQUIRE(adopt_category(2, 5, 0.0, 1.0, rng) == 2);
}

TEST_CASE("adopt_category validates fitness", "[param_space]") {
    Rng rng(1);
    REQUIRE_THROWS_AS(adopt_category(0, 1, -0.5, 1.0, rng), InvalidFitness);
    REQUIRE_THROWS_AS(adopt_category(0, 1, 0.5, 0.0, rng), InvalidFitness);
    REQUIRE_THROWS_AS(adopt_category(0, 1, std::nan(""), 1.0, rng), InvalidFitness);
}

TEST_CASE("adopt_category frequency matches the adoption probability", "[param_space]") {
    // Monte Carlo check of the p = 0.25 case plus a chi-square bound at 1%.
    Rng rng(2024);
    const int trials = 10000;
    int adopted = 0;
    for (int i = 0; i < trials; ++i)
        if (adopt_category(0, 1, 0.25, 1.0, rng) == 1) ++adopted;
    const double rate = double(adopted) / trials;
    REQUIRE(rate > 0.23);
    REQUIRE(rate < 0.27);
    const double expected = 0.25 * trials;
    const double chi2 = (adopted - expected) * (adopted - expected) / expected +
                        ((trials - adopted) - 0.75 * trials) *
                            ((trials - adopted) - 0.75 * trials) / (0.75 * trials);
    REQUIRE(chi2 < 6.635);  // chi-square critical value, 1 dof, alpha = 0.01
}

TEST_CASE("paper preset exposes the three tuned hyperparameters", "[param_space]") {
    const ParamSpace space = paper_preset();
    REQUIRE(space.dim() == 3);
    REQUIRE(space.name(0) == "learning_rate");
    REQUIRE(std::get<DiscreteParam>(space.param(2)).lo == 10);
    REQUIRE(std::get<DiscreteParam>(space.param(2)).hi == 100);
    REQUIRE(std::get<CategoricalParam>(space.param(1)).categories.size() == 6);
    REQUIRE(std::get<ContinuousParam>(space.param(0)).log_scale);
    REQUIRE(std::get<ContinuousParam>(space.param(0)).hi == 1e-2);
}

TEST_CASE("value_string renders each kind", "[param_space]") {
    const ParamSpace space = paper_preset();
    const Position p = space.repair({-3.0, 3.2, 50.0});
    REQUIRE(space.value_string(p, 0) == "0.001");
    REQUIRE(space.value_string(p, 1) == "32");
    REQUIRE(space.value_string(p, 2) == "50");
}
