// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria 5/6/9 run the desk-scale pipeline through the same runner
// entry points the CLI uses.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "lddr/dual_na.hpp"
#include "lddr/dual_sw.hpp"
#include "lddr/io.hpp"
#include "lddr/master.hpp"
#include "lddr/runner.hpp"
#include "lddr/stats.hpp"

using namespace lddr;
namespace fs = std::filesystem;

namespace {

int failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void report(const char* name, bool pass, double seconds, const std::string& detail) {
    std::printf("%-4s %-44s (%6.1fs) %s\n", pass ? "PASS" : "FAIL", name, seconds,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

FiniteSupportProcess oracle_tree() {
    FiniteSupportProcess tree;
    tree.T = 3;
    tree.J = 1;
    tree.outcomes = {{{{75.0}, 1.0}},
                     {{{40.0}, 0.5}, {{110.0}, 0.5}},
                     {{{30.0}, 0.4}, {{130.0}, 0.6}}};
    return tree;
}

MslotInstance oracle_instance(const FiniteSupportProcess& tree) {
    ProcessParams p;
    p.T = tree.T;
    p.J = tree.J;
    p.rho = 0.5;
    p.rhoY = 0.5;
    p.seed = 99;
    p.mu = Matrix(tree.T, tree.J);
    for (int t = 1; t <= tree.T; ++t)
        for (int j = 1; j <= tree.J; ++j) p.mu(t, j) = tree.stage_mean(t, j);
    return build_mslot(p);
}

std::vector<double> box_point(const StreamKey& key, int dim, double box, uint64_t round) {
    std::vector<double> w(dim);
    for (int k = 0; k < dim; ++k) w[k] = (2.0 * key.uniform(round, k) - 1.0) * box;
    return w;
}

// Criterion 1: exact weak duality for random coefficients on the 4-leaf tree.
void criterion1() {
    Timer timer;
    const FiniteSupportProcess tree = oracle_tree();
    const MslotInstance inst = oracle_instance(tree);
    const CondMean cm = tree_cond_mean(tree);
    const auto leaves = tree.enumerate_paths();
    const double optimum = extensive_optimum(tree, inst);
    const StreamKey key(101, "criterion1");

    BasisSpec sw;
    sw.kind = DualKind::Stagewise;
    sw.option = 2;
    auto swLayout = std::make_shared<DualLayout>(make_layout(sw, inst.T, inst.J));
    BasisSpec na;
    na.kind = DualKind::Nonanticipative;
    na.option = 1;
    na.naVars = NaVarSet::All;
    auto naLayout = std::make_shared<DualLayout>(make_layout(na, inst.T, inst.J));

    bool pass = true;
    double worstSlack = kInfinity;
    for (int round = 0; round < 20; ++round) {
        DualCoefficients b;
        b.layout = swLayout;
        b.w = box_point(key, swLayout->dim, 1000.0, round);
        double swVal = 0.0;
        for (const auto& leaf : leaves) swVal += leaf.prob * evaluate_sw(b, inst, leaf, cm).total;
        pass = pass && swVal <= optimum + 1e-6 * std::abs(optimum);

        DualCoefficients a;
        a.layout = naLayout;
        a.w = box_point(key, naLayout->dim, 1000.0, 100 + round);
        double naVal = 0.0;
        for (const auto& leaf : leaves) naVal += leaf.prob * evaluate_na(a, inst, leaf, cm).value;
        pass = pass && naVal <= optimum + 1e-6 * std::abs(optimum);
        worstSlack = std::min({worstSlack, optimum - swVal, optimum - naVal});
    }
    std::ostringstream detail;
    detail << "optimum=" << format_double(optimum) << " minSlack=" << format_double(worstSlack);
    report("C1 weak duality (exact, 20+20 draws)", pass, timer.seconds(), detail.str());
}

// Criteria 2 and 4: trained ordering on the lifted basis, with every cut
// audited for tightness and probe validity.
void criterion2_and_4() {
    Timer timer;
    const FiniteSupportProcess tree = oracle_tree();
    const MslotInstance inst = oracle_instance(tree);
    const CondMean cm = tree_cond_mean(tree);
    const auto leaves = tree.enumerate_paths();
    const double optimum = extensive_optimum(tree, inst);

    BasisSpec sw4;
    sw4.kind = DualKind::Stagewise;
    sw4.option = 4;
    auto swLayout = std::make_shared<DualLayout>(make_layout(sw4, inst.T, inst.J));
    auto naLayout =
        std::make_shared<DualLayout>(make_layout(lift_sw_to_na(sw4), inst.T, inst.J));

    MasterOptions opts;
    opts.tolerance = 1e-8;
    opts.maxIterations = 800;
    opts.auditCuts = true;
    opts.auditProbes = 50;

    SwOracle swOracle(inst, leaves, swLayout, cm);
    NaOracle naOracle(inst, leaves, naLayout, cm);
    const TrainResult swT = train(swOracle, opts);
    const TrainResult naT = train(naOracle, opts);

    const bool ordering = swT.converged && naT.converged &&
                          swT.value <= naT.value + 1e-6 * std::abs(naT.value) &&
                          naT.value <= optimum + 1e-6 * std::abs(optimum);
    std::ostringstream d2;
    d2 << "sw=" << format_double(swT.value) << " na=" << format_double(naT.value)
       << " optimum=" << format_double(optimum);
    report("C2 lifted-basis dual ordering", ordering, timer.seconds(), d2.str());

    Timer t4;
    const CutAudit& a = swT.audit;
    const CutAudit& b = naT.audit;
    const bool audit = a.cuts > 0 && b.cuts > 0 && a.tightFailures == 0 &&
                       b.tightFailures == 0 && a.probes > 0 && b.probes > 0 &&
                       a.validityFailures == 0 && b.validityFailures == 0;
    std::ostringstream d4;
    d4 << "cuts=" << (a.cuts + b.cuts) << " probes=" << (a.probes + b.probes)
       << " tightFail=" << (a.tightFailures + b.tightFailures)
       << " validFail=" << (a.validityFailures + b.validityFailures);
    report("C4 cut tightness and probe validity", audit, t4.seconds(), d4.str());
}

void criterion3() {
    Timer timer;
    const bool pass = cmd_verify("dualcheck", 2024);
    report("C3 restricted-dual equivalence (20 MIPs)", pass, timer.seconds(), "");
}

struct DeskResults {
    RunConfig config;
    BoundEstimate pi, sw, na;
};

std::vector<DeskResults> run_desk_pipeline(const std::string& root) {
    std::vector<DeskResults> out;
    for (int T : {2, 3, 4}) {
        RunConfig c;
        c.T = T;
        c.J = 3;
        c.rho = 0.6;
        c.rhoY = 0.2;
        c.seed = 9000 + T;
        c.trainScenarios = 200;
        c.evalScenarios = 500;
        c.masterTolerance = 1e-3;
        c.out = root + "/T" + std::to_string(T);
        fs::remove_all(c.out);
        fs::create_directories(c.out);
        cmd_gen(c);

        RunConfig sw = c;
        sw.dual = DualKind::Stagewise;
        cmd_train(sw);
        RunConfig na = c;
        na.dual = DualKind::Nonanticipative;
        cmd_train(na);

        DeskResults r;
        r.config = c;
        r.pi = cmd_bound(c, BoundMethod::Pi);
        r.sw = cmd_bound(c, BoundMethod::Sw);
        r.na = cmd_bound(c, BoundMethod::Na);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<DeskResults> criterion5(const std::string& root) {
    Timer timer;
    const auto results = run_desk_pipeline(root);
    int naBeatsPi = 0, swBelowNa = 0;
    std::ostringstream detail;
    for (const DeskResults& r : results) {
        naBeatsPi += r.na.mean >= r.pi.mean ? 1 : 0;
        swBelowNa += r.sw.mean <= r.na.mean ? 1 : 0;
        detail << "T" << r.config.T << "[pi=" << std::lround(r.pi.mean)
               << " sw=" << std::lround(r.sw.mean) << " na=" << std::lround(r.na.mean) << "] ";
    }
    detail << "na>=pi " << naBeatsPi << "/3, sw<=na " << swBelowNa << "/3";
    report("C5 PI dominance on desk instances", naBeatsPi == 3 && swBelowNa == 3,
           timer.seconds(), detail.str());
    return results;
}

void criterion6(const std::vector<DeskResults>& desk) {
    Timer timer;
    int swImproves = 0;
    bool ubAboveLb = true;
    std::ostringstream detail;
    for (const DeskResults& r : desk) {
        const BoundEstimate ce = cmd_simulate(r.config, PolicyKind::CondExp);
        RunConfig swConfig = r.config;
        swConfig.lambda = 0.25;
        const BoundEstimate sw = cmd_simulate(swConfig, PolicyKind::SwDriven);
        swImproves += sw.mean <= ce.mean ? 1 : 0;
        for (const BoundEstimate* ub : {&ce, &sw})
            for (const BoundEstimate* lb : {&r.pi, &r.sw, &r.na})
                ubAboveLb =
                    ubAboveLb && ub->mean >= lb->mean - (ub->halfwidth + lb->halfwidth);
        detail << "T" << r.config.T << "[ce=" << std::lround(ce.mean)
               << " sw=" << std::lround(sw.mean) << "] ";
    }
    detail << "sw<=ce " << swImproves << "/3";
    report("C6 policy ordering (lambda=0.25)", swImproves >= 2 && ubAboveLb, timer.seconds(),
           detail.str());
}

void criterion7(const std::string& root) {
    Timer timer;
    RunConfig c;
    c.T = 3;
    c.J = 3;
    c.rho = 0.6;
    c.rhoY = 0.2;
    c.seed = 9003;
    c.trainScenarios = 200;
    c.masterTolerance = 1e-3;
    c.out = root + "/options";
    fs::remove_all(c.out);
    fs::create_directories(c.out);
    cmd_gen(c);

    auto trained = [&](DualKind kind, int option) {
        RunConfig t = c;
        t.dual = kind;
        t.basisOption = option;
        return cmd_train(t).value;
    };
    const double sw1 = trained(DualKind::Stagewise, 1);
    const double sw4 = trained(DualKind::Stagewise, 4);
    const double na3 = trained(DualKind::Nonanticipative, 3);
    const double na4 = trained(DualKind::Nonanticipative, 4);

    auto slack = [&](double a, double b) {
        return c.masterTolerance * (2.0 + std::abs(a) + std::abs(b));
    };
    const bool pass = sw1 >= sw4 - slack(sw1, sw4) && na3 >= na4 - slack(na3, na4);
    std::ostringstream detail;
    detail << "sw1=" << format_double(sw1) << " sw4=" << format_double(sw4)
           << " na3=" << format_double(na3) << " na4=" << format_double(na4);
    report("C7 basis-option monotonicity", pass, timer.seconds(), detail.str());
}

void criterion8() {
    Timer timer;
    const bool pass = cmd_verify("condexp", 2024);
    report("C8 conditional-expectation Monte Carlo", pass, timer.seconds(), "");
}

void criterion9(const std::string& rootA) {
    Timer timer;
    const std::string rootB = rootA + "_repeat";
    run_desk_pipeline(rootB);
    bool identical = true;
    std::string firstDiff;
    for (int T : {2, 3, 4}) {
        for (const char* name :
             {"instance.json", "coeffs_sw.json", "coeffs_na.json", "results.csv",
              "train_sw_log.csv", "train_na_log.csv", "cuts_sw.csv", "cuts_na.csv"}) {
            const std::string a = rootA + "/T" + std::to_string(T) + "/" + name;
            const std::string b = rootB + "/T" + std::to_string(T) + "/" + name;
            if (!fs::exists(a) || !fs::exists(b) || read_text(a) != read_text(b)) {
                identical = false;
                if (firstDiff.empty()) firstDiff = a;
            }
        }
    }
    report("C9 pipeline byte determinism", identical, timer.seconds(),
           identical ? "all artifacts identical" : "first difference: " + firstDiff);
}

}  // namespace

int main() {
    const std::string root = (fs::temp_directory_path() / "lddr_acceptance").string();
    fs::remove_all(root);
    fs::create_directories(root);

    Timer total;
    criterion1();
    criterion2_and_4();
    criterion3();
    const auto desk = criterion5(root);
    criterion9(root);  // compare before criterion 6 appends policy rows
    criterion6(desk);
    criterion7(root);
    criterion8();
    std::printf("%d criterion failure(s); total %.1fs\n", failures, total.seconds());
    return failures == 0 ? 0 : 1;
}
