#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "lddr/dual_na.hpp"
#include "lddr/dual_sw.hpp"
#include "lddr/io.hpp"
#include "lddr/master.hpp"
#include "lddr/stats.hpp"
#include "test_support.hpp"

using namespace lddr;
using testsupport::oracle_instance;
using testsupport::oracle_tree;

namespace {

// f(b) = min(b, 2 - b): concave kink at b = 1 with optimum value 1.
class RoofOracle final : public DualOracle {
  public:
    int scenarioCount() const override { return 1; }
    double probability(int) const override { return 1.0; }
    int dimension() const override { return 1; }
    ScenarioCut evaluate(int, std::span<const double> b) const override {
        ScenarioCut cut;
        if (b[0] <= 2.0 - b[0]) {
            cut.value = b[0];
            cut.gradient = {1.0};
        } else {
            cut.value = 2.0 - b[0];
            cut.gradient = {-1.0};
        }
        return cut;
    }
};

// Two scenarios with kinks at different points; expectation peaks between.
class TentOracle final : public DualOracle {
  public:
    int scenarioCount() const override { return 2; }
    double probability(int) const override { return 0.5; }
    int dimension() const override { return 2; }
    ScenarioCut evaluate(int scenario, std::span<const double> b) const override {
        const double shift = scenario == 0 ? 0.5 : -0.5;
        ScenarioCut cut;
        cut.gradient.assign(2, 0.0);
        cut.value = 0.0;
        for (int k = 0; k < 2; ++k) {
            const double centered = b[k] - shift;
            cut.value -= std::abs(centered);
            cut.gradient[k] = centered > 0 ? -1.0 : 1.0;
        }
        return cut;
    }
};

class ZeroDimOracle final : public DualOracle {
  public:
    int scenarioCount() const override { return 3; }
    double probability(int) const override { return 1.0 / 3.0; }
    int dimension() const override { return 0; }
    ScenarioCut evaluate(int scenario, std::span<const double>) const override {
        return {static_cast<double>(scenario + 1), {}};
    }
};

}  // namespace

TEST_CASE("one-dimensional roof converges in a few iterations") {
    RoofOracle oracle;
    MasterOptions opts;
    opts.tolerance = 1e-9;
    opts.mode = ExecMode::Serial;
    const TrainResult r = train(oracle, opts);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(r.coeffs[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(r.iterations <= 5);
    CHECK(r.audit.tightFailures == 0);
}

TEST_CASE("zero-dimensional space returns the sample value immediately") {
    ZeroDimOracle oracle;
    const TrainResult r = train(oracle);
    CHECK(r.converged);
    CHECK(r.iterations == 0);
    CHECK(r.value == doctest::Approx(2.0));
    CHECK(r.coeffs.empty());
}

TEST_CASE("master LP behaviour") {
    SUBCASE("zero radius returns the incumbent") {
        std::vector<Cut> pool;
        pool.push_back({0, 5.0, {1.0}, 0});
        const double prob[] = {1.0};
        const double center[] = {2.0};
        const MasterLpSolution sol = master_lp(pool, prob, 1, center, 0.0, 1e3);
        CHECK(sol.coeffs[0] == doctest::Approx(2.0));
        CHECK(sol.modelValue == doctest::Approx(7.0));
    }

    SUBCASE("box bounds clip the candidate") {
        std::vector<Cut> pool;
        pool.push_back({0, 0.0, {1.0}, 0});
        const double prob[] = {1.0};
        const double center[] = {0.0};
        const MasterLpSolution sol = master_lp(pool, prob, 1, center, 100.0, 0.5);
        CHECK(sol.coeffs[0] == doctest::Approx(0.5));
        CHECK(sol.modelValue == doctest::Approx(0.5));
    }

    SUBCASE("missing scenario cuts are a configuration error") {
        std::vector<Cut> pool;
        pool.push_back({0, 0.0, {1.0}, 0});
        const double prob[] = {0.5, 0.5};
        const double center[] = {0.0};
        CHECK_THROWS_AS(master_lp(pool, prob, 1, center, 1.0, 1e3), std::invalid_argument);
    }

    SUBCASE("model value is nonincreasing as cuts accumulate") {
        RoofOracle oracle;
        std::vector<Cut> pool;
        const double prob[] = {1.0};
        const double center[] = {0.0};
        double last = kInfinity;
        const double probes[] = {0.0, 4.0, 1.5, 0.75};
        for (double p : probes) {
            const double at[] = {p};
            const ScenarioCut sc = oracle.evaluate(0, at);
            pool.push_back({0, sc.value - sc.gradient[0] * p, sc.gradient, 0});
            const MasterLpSolution sol = master_lp(pool, prob, 1, center, 50.0, 1e3);
            CHECK(sol.modelValue <= last + 1e-12);
            last = sol.modelValue;
        }
    }
}

TEST_CASE("two-dimensional tent trains to the midpoint optimum") {
    TentOracle oracle;
    MasterOptions opts;
    opts.tolerance = 1e-10;
    opts.mode = ExecMode::Serial;
    const TrainResult r = train(oracle, opts);
    CHECK(r.converged);
    // max over b of 0.5*(-|b-0.5| - |b+0.5|) per dimension = -0.5 each.
    CHECK(r.value == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(r.audit.tightFailures == 0);
}

TEST_CASE("checkpoint resume reproduces the uninterrupted run") {
    TentOracle oracle;
    const std::string ck = (std::filesystem::temp_directory_path() / "lddr_ck.json").string();

    MasterOptions full;
    full.tolerance = 1e-10;
    full.mode = ExecMode::Serial;
    const TrainResult whole = train(oracle, full);

    MasterOptions first = full;
    first.maxIterations = 3;
    first.checkpointPath = ck;
    const TrainResult part = train(oracle, first);
    REQUIRE(!part.converged);

    const MasterState resumed = master_state_from_json(json::parse(read_text(ck)));
    const TrainResult rest = train(oracle, full, &resumed);
    CHECK(rest.converged);
    CHECK(rest.value == doctest::Approx(whole.value).epsilon(1e-12));
    for (size_t k = 0; k < whole.coeffs.size(); ++k)
        CHECK(rest.coeffs[k] == doctest::Approx(whole.coeffs[k]).epsilon(1e-9));
    std::filesystem::remove(ck);
}

TEST_CASE("training log rows are recorded") {
    RoofOracle oracle;
    MasterOptions opts;
    opts.mode = ExecMode::Serial;
    const TrainResult r = train(oracle, opts);
    REQUIRE(!r.log.empty());
    CHECK(r.log.front().step == 'i');
    bool sawSerious = false;
    for (const TrainLogRow& row : r.log) sawSerious = sawSerious || row.step == 's';
    CHECK(sawSerious);
}

TEST_CASE("richer bases and variable sets never train worse") {
    const FiniteSupportProcess tree = oracle_tree();
    const MslotInstance inst = oracle_instance(tree);
    const CondMean cm = tree_cond_mean(tree);
    const auto leaves = tree.enumerate_paths();
    MasterOptions opts;
    opts.tolerance = 1e-7;
    opts.maxIterations = 400;

    auto trainSw = [&](int option) {
        BasisSpec spec;
        spec.kind = DualKind::Stagewise;
        spec.option = option;
        SwOracle oracle(inst, leaves,
                        std::make_shared<DualLayout>(make_layout(spec, inst.T, inst.J)), cm);
        return train(oracle, opts).value;
    };
    auto trainNa = [&](int option, NaVarSet vars) {
        BasisSpec spec;
        spec.kind = DualKind::Nonanticipative;
        spec.option = option;
        spec.naVars = vars;
        NaOracle oracle(inst, leaves,
                        std::make_shared<DualLayout>(make_layout(spec, inst.T, inst.J)), cm);
        return train(oracle, opts).value;
    };

    const double sw1 = trainSw(1), sw4 = trainSw(4);
    CHECK(sw1 >= sw4 - 1e-6 * (1.0 + std::abs(sw4)));

    const double naX = trainNa(1, NaVarSet::XOnly);
    const double naAll = trainNa(1, NaVarSet::All);
    const double na4 = trainNa(4, NaVarSet::XOnly);
    CHECK(naAll >= naX - 1e-6 * (1.0 + std::abs(naX)));
    CHECK(naX >= na4 - 1e-6 * (1.0 + std::abs(na4)));
}

TEST_CASE("model value stays above the candidate evaluation") {
    TentOracle oracle;
    MasterOptions opts;
    opts.tolerance = 1e-10;
    opts.mode = ExecMode::Serial;
    const TrainResult r = train(oracle, opts);
    for (const TrainLogRow& row : r.log)
        if (row.step == 's' || row.step == 'n')
            CHECK(row.modelValue >= row.candidateValue - 1e-9 * (1.0 + std::abs(row.modelValue)));
}

TEST_CASE("trained duals respect the oracle chain") {
    const FiniteSupportProcess tree = oracle_tree();
    const MslotInstance inst = oracle_instance(tree);
    const CondMean cm = tree_cond_mean(tree);
    const auto leaves = tree.enumerate_paths();
    const double optimum = extensive_optimum(tree, inst);

    BasisSpec swSpec;
    swSpec.kind = DualKind::Stagewise;
    swSpec.option = 4;
    auto swLayout = std::make_shared<DualLayout>(make_layout(swSpec, inst.T, inst.J));
    SwOracle swOracle(inst, leaves, swLayout, cm);

    auto naLayout =
        std::make_shared<DualLayout>(make_layout(lift_sw_to_na(swSpec), inst.T, inst.J));
    NaOracle naOracle(inst, leaves, naLayout, cm);

    MasterOptions opts;
    opts.tolerance = 1e-7;
    opts.maxIterations = 400;
    const TrainResult sw = train(swOracle, opts);
    const TrainResult na = train(naOracle, opts);

    CHECK(sw.converged);
    CHECK(na.converged);
    CHECK(sw.value <= na.value + 1e-6 * std::abs(na.value));
    CHECK(na.value <= optimum + 1e-6 * std::abs(optimum));

    double pi = 0.0;
    for (const auto& leaf : leaves) pi += leaf.prob * perfect_information_value(inst, leaf);
    CHECK(pi <= na.value + 1e-6 * std::abs(na.value));
}
