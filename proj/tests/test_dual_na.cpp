#include <cmath>
#include <memory>

#include "doctest.h"
#include "lddr/dual_na.hpp"
#include "lddr/stats.hpp"
#include "test_support.hpp"

using namespace lddr;
using testsupport::oracle_instance;
using testsupport::oracle_tree;
using testsupport::random_coeffs;
using testsupport::with_weights;

namespace {

std::shared_ptr<const DualLayout> na_layout(const MslotInstance& inst, int option,
                                            NaVarSet vars = NaVarSet::XOnly) {
    BasisSpec spec;
    spec.kind = DualKind::Nonanticipative;
    spec.option = option;
    spec.naVars = vars;
    return std::make_shared<DualLayout>(make_layout(spec, inst.T, inst.J));
}

}  // namespace

TEST_CASE("zero coefficients recover perfect information") {
    const FiniteSupportProcess tree = oracle_tree();
    const MslotInstance inst = oracle_instance(tree);
    const CondMean cm = tree_cond_mean(tree);
    const auto leaves = tree.enumerate_paths();
    const DualCoefficients zero = zero_coefficients(na_layout(inst, 3));

    for (const auto& leaf : leaves) {
        const NaEvaluation eval = evaluate_na(zero, inst, leaf, cm);
        CHECK(eval.value == doctest::Approx(perfect_information_value(inst, leaf)));
        // Path solution satisfies the stage rows.
        const ExtensiveForm single = extensive_form(inst, {leaf});
        const SolveResult direct = solve(single.model);
        REQUIRE(direct.status == SolveStatus::Optimal);
        CHECK(eval.value == doctest::Approx(direct.objective).epsilon(1e-9));
    }
}

TEST_CASE("weak duality for random coefficients") {
    const FiniteSupportProcess tree = oracle_tree();
    const MslotInstance inst = oracle_instance(tree);
    const CondMean cm = tree_cond_mean(tree);
    const auto leaves = tree.enumerate_paths();
    const double optimum = extensive_optimum(tree, inst);

    for (NaVarSet vars : {NaVarSet::XOnly, NaVarSet::All}) {
        auto layout = na_layout(inst, 1, vars);
        for (int round = 0; round < 20; ++round) {
            const DualCoefficients coeffs =
                with_weights(layout, random_coeffs(layout->dim, 1000.0, 31, round));
            double expected = 0.0;
            for (const auto& leaf : leaves)
                expected += leaf.prob * evaluate_na(coeffs, inst, leaf, cm).value;
            CHECK(expected <= optimum + 1e-6 * std::abs(optimum));
        }
    }
}

TEST_CASE("last-stage weights are inert") {
    const FiniteSupportProcess tree = oracle_tree();
    const MslotInstance inst = oracle_instance(tree);
    auto layout = na_layout(inst, 1);
    CHECK(layout->rows[layout->rowAt(inst.T, NaVar::Production, 1)].basis.empty());
}

TEST_CASE("cuts are tight and valid; inert entries have zero gradient") {
    const FiniteSupportProcess tree = oracle_tree();
    const MslotInstance inst = oracle_instance(tree);
    const CondMean cm = tree_cond_mean(tree);
    const auto leaves = tree.enumerate_paths();

    // Lifted layout keeps constants and observed demands, which must carry
    // exactly zero gradient.
    BasisSpec sw;
    sw.kind = DualKind::Stagewise;
    sw.option = 4;
    auto layout = std::make_shared<DualLayout>(make_layout(lift_sw_to_na(sw), inst.T, inst.J));

    const DualCoefficients at = with_weights(layout, random_coeffs(layout->dim, 20.0, 37, 0));
    const std::vector<Cut> cuts = na_cuts(at, inst, leaves, cm);

    SUBCASE("tightness") {
        for (size_t i = 0; i < leaves.size(); ++i) {
            const double value = evaluate_na(at, inst, leaves[i], cm).value;
            CHECK(cuts[i].value(at.w) == doctest::Approx(value).epsilon(1e-9));
        }
    }

    SUBCASE("validity at random probes") {
        for (int probe = 0; probe < 50; ++probe) {
            const auto w = random_coeffs(layout->dim, 400.0, 41, probe);
            const DualCoefficients c = with_weights(layout, w);
            for (size_t i = 0; i < leaves.size(); ++i) {
                const double value = evaluate_na(c, inst, leaves[i], cm).value;
                CHECK(value <= cuts[i].value(w) + 1e-6 * (1.0 + std::abs(value)));
            }
        }
    }

    SUBCASE("constant and observed entries are inert") {
        for (size_t i = 0; i < leaves.size(); ++i)
            for (const DualRow& row : layout->rows)
                for (size_t k = 0; k < row.basis.size(); ++k)
                    if (row.basis[k].constant || row.basis[k].s <= row.t)
                        CHECK(cuts[i].gradient[row.offset + k] == 0.0);
    }

    SUBCASE("perturbing inert weights leaves values unchanged") {
        DualCoefficients shifted = at;
        for (const DualRow& row : layout->rows)
            for (size_t k = 0; k < row.basis.size(); ++k)
                if (row.basis[k].constant) shifted.w[row.offset + k] += 123.0;
        for (const auto& leaf : leaves)
            CHECK(evaluate_na(shifted, inst, leaf, cm).value ==
                  doctest::Approx(evaluate_na(at, inst, leaf, cm).value).epsilon(1e-10));
    }
}

TEST_CASE("perfect-information bound") {
    const FiniteSupportProcess tree = oracle_tree();
    const MslotInstance inst = oracle_instance(tree);
    const auto leaves = tree.enumerate_paths();

    SUBCASE("single path has zero halfwidth") {
        const std::vector<ScenarioPath> one{leaves[0]};
        const BoundEstimate b = pi_bound(inst, one);
        CHECK(b.halfwidth == 0.0);
        CHECK(b.degenerate);
        CHECK(b.mean == doctest::Approx(perfect_information_value(inst, leaves[0])));
    }

    SUBCASE("exact expectation is below the optimum") {
        const double optimum = extensive_optimum(tree, inst);
        double exact = 0.0;
        for (const auto& leaf : leaves)
            exact += leaf.prob * perfect_information_value(inst, leaf);
        CHECK(exact <= optimum + 1e-9 * std::abs(optimum));
    }

    SUBCASE("sample bound reports the lower side") {
        const BoundEstimate b = pi_bound(inst, leaves);
        CHECK(b.side == BoundSide::Lower);
        CHECK(b.bound() <= b.mean);
        CHECK(b.n == 4);
    }
}

TEST_CASE("evaluations run identically serial and parallel") {
    const FiniteSupportProcess tree = oracle_tree();
    const MslotInstance inst = oracle_instance(tree);
    const CondMean cm = tree_cond_mean(tree);
    const auto leaves = tree.enumerate_paths();
    auto layout = na_layout(inst, 1, NaVarSet::All);
    const DualCoefficients at = with_weights(layout, random_coeffs(layout->dim, 50.0, 43, 0));

    const std::vector<Cut> serial = na_cuts(at, inst, leaves, cm, {}, ExecMode::Serial);
    const std::vector<Cut> parallel = na_cuts(at, inst, leaves, cm, {}, ExecMode::Parallel);
    REQUIRE(serial.size() == parallel.size());
    for (size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].intercept == parallel[i].intercept);
        CHECK(serial[i].gradient == parallel[i].gradient);
    }
}
