#include "lddr/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "lddr/dual_na.hpp"
#include "lddr/dual_sw.hpp"
#include "lddr/io.hpp"
#include "lddr/rng.hpp"

namespace lddr {

namespace {

namespace fs = std::filesystem;

std::string config_hash(const RunConfig& c) {
    std::ostringstream ss;
    ss << c.T << '|' << c.J << '|' << c.rho << '|' << c.rhoY << '|' << c.seed << '|' << c.muLow
       << '|' << c.muHigh << '|' << static_cast<int>(c.dual) << '|' << c.basisOption << '|'
       << static_cast<int>(c.naVars) << '|' << c.liftFromSw << '|' << c.coeffBound << '|'
       << c.masterTolerance << '|' << c.trainScenarios << '|' << c.evalScenarios << '|'
       << c.lambda << '|' << c.rawSamples << '|' << c.clusters;
    return hash_hex(ss.str());
}

int effective_option(const RunConfig& c, DualKind kind) {
    if (c.basisOption >= 1) return c.basisOption;
    return kind == DualKind::Stagewise ? 1 : 3;
}

BasisSpec make_spec(const RunConfig& c, DualKind kind) {
    if (kind == DualKind::Nonanticipative && c.liftFromSw) {
        BasisSpec sw;
        sw.kind = DualKind::Stagewise;
        sw.option = effective_option(c, DualKind::Stagewise);
        return lift_sw_to_na(sw);
    }
    BasisSpec spec;
    spec.kind = kind;
    spec.option = effective_option(c, kind);
    spec.naVars = c.naVars;
    return spec;
}

// Default sample sizes scale with the coefficient count: ceil(50/T) per
// stagewise weight for training, ceil(100/T) per nonanticipative weight,
// and ceil(250/T) per nonanticipative weight for evaluation.
int default_train_size(const RunConfig& c, int dim) {
    const int perStage = (c.dual == DualKind::Stagewise ? 50 : 100);
    const int factor = (perStage + c.T - 1) / c.T;
    return std::max(1, factor * std::max(dim, 1));
}

int default_eval_size(const RunConfig& c, const MslotInstance& inst) {
    BasisSpec na = make_spec(c, DualKind::Nonanticipative);
    const DualLayout layout = make_layout(na, inst.T, inst.J);
    const int factor = (250 + c.T - 1) / c.T;
    return std::max(2, factor * std::max(layout.dim, 1));
}

void append_results_row(const RunConfig& c, const MslotInstance& inst, const std::string& method,
                        const BoundEstimate& b, double wallSec, const std::string& flags) {
    const std::string path = c.resultsFile();
    std::string body;
    if (fs::exists(path)) body = read_text(path);
    if (body.empty())
        body = "instance,method,side,mean,halfwidth,n,level,wallTime,flags,configHash,evalHash\n";
    std::ostringstream row;
    row << inst.id << ',' << method << ','
        << (b.side == BoundSide::Lower ? "lower" : "upper") << ',' << format_double(b.mean)
        << ',' << format_double(b.halfwidth) << ',' << b.n << ',' << format_double(b.level)
        << ',' << (c.recordTiming ? format_double(wallSec) : std::string("0")) << ',' << flags
        << ',' << config_hash(c) << ',' << evaluation_hash(c, inst) << '\n';
    atomic_write_text(path, body + row.str());
}

MslotInstance load_instance(const RunConfig& c) {
    return instance_from_json(json::parse(read_text(c.instanceFile())));
}

DualCoefficients load_coefficients(const RunConfig& c, DualKind kind) {
    const std::string path = c.coefficientFile(kind);
    if (!fs::exists(path))
        throw EnvironmentError("missing coefficient file: " + path + " (run train first)");
    return coefficients_from_json(json::parse(read_text(path)));
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

bool report_check(const char* name, bool pass, const std::string& detail = {}) {
    std::printf("%s %s%s%s\n", pass ? "PASS" : "FAIL", name, detail.empty() ? "" : ": ",
                detail.c_str());
    return pass;
}

FiniteSupportProcess verify_tree() {
    FiniteSupportProcess tree;
    tree.T = 3;
    tree.J = 1;
    tree.outcomes = {{{{75.0}, 1.0}},
                     {{{40.0}, 0.5}, {{110.0}, 0.5}},
                     {{{30.0}, 0.4}, {{130.0}, 0.6}}};
    return tree;
}

MslotInstance verify_instance(const FiniteSupportProcess& tree) {
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

std::vector<double> random_box_point(int dim, double box, const StreamKey& key, uint64_t round) {
    std::vector<double> w(dim);
    for (int k = 0; k < dim; ++k) w[k] = (2.0 * key.uniform(round, k) - 1.0) * box;
    return w;
}

bool verify_oracle(uint64_t seed);
bool verify_dualcheck(uint64_t seed);
bool verify_gradient(uint64_t seed);
bool verify_condexp(uint64_t seed);
bool verify_process(uint64_t seed);

}  // namespace

std::string RunConfig::instanceFile() const {
    return instancePath.empty() ? out + "/instance.json" : instancePath;
}

std::string RunConfig::coefficientFile(DualKind kind) const {
    return out + (kind == DualKind::Stagewise ? "/coeffs_sw.json" : "/coeffs_na.json");
}

std::string RunConfig::resultsFile() const { return out + "/results.csv"; }

MslotInstance generate_instance(const RunConfig& config) {
    ProcessParams p;
    p.T = config.T;
    p.J = config.J;
    p.rho = config.rho;
    p.rhoY = config.rhoY;
    p.seed = config.seed;
    p.mu = Matrix(config.T, config.J);
    const StreamKey muKey(config.seed, "mu-draw");
    for (int t = 1; t <= config.T; ++t)
        for (int j = 1; j <= config.J; ++j)
            p.mu(t, j) = config.muLow + (config.muHigh - config.muLow) * muKey.uniform(t, j);
    MslotInstance inst = build_mslot(p, config.knobs);
    std::ostringstream id;
    id << "T" << config.T << "J" << config.J << "r" << config.rho << "ry" << config.rhoY << "s"
       << config.seed;
    inst.id = id.str();
    return inst;
}

std::vector<ScenarioPath> evaluation_sample(const RunConfig& config, const MslotInstance& inst) {
    const int n = config.evalScenarios > 0 ? config.evalScenarios
                                           : default_eval_size(config, inst);
    return sample_paths(inst.process, n, "eval");
}

std::string evaluation_hash(const RunConfig& config, const MslotInstance& inst) {
    const int n = config.evalScenarios > 0 ? config.evalScenarios
                                           : default_eval_size(config, inst);
    std::ostringstream ss;
    ss << inst.process.seed << "|eval|" << n;
    return hash_hex(ss.str());
}

void cmd_gen(const RunConfig& config) {
    const MslotInstance inst = generate_instance(config);
    atomic_write_text(config.instanceFile(), to_json(inst).dump(2) + "\n");
}

TrainResult cmd_train(const RunConfig& config) {
    const MslotInstance inst = load_instance(config);
    const BasisSpec spec = make_spec(config, config.dual);
    auto layout = std::make_shared<DualLayout>(make_layout(spec, inst.T, inst.J));

    const int nTrain = config.trainScenarios > 0 ? config.trainScenarios
                                                 : default_train_size(config, layout->dim);
    const auto paths = sample_paths(inst.process,
                                    nTrain,
                                    config.dual == DualKind::Stagewise ? "train-sw" : "train-na");
    const CondMean cm = ar_cond_mean(inst.process);

    MasterOptions opts;
    opts.tolerance = config.masterTolerance;
    opts.maxIterations = config.masterMaxIters;
    opts.coeffBound = config.coeffBound;
    opts.mode = config.mode;
    opts.recordTiming = config.recordTiming;
    opts.logPath = config.out + (config.dual == DualKind::Stagewise ? "/train_sw_log.csv"
                                                                    : "/train_na_log.csv");
    opts.cutLogPath = config.out + (config.dual == DualKind::Stagewise ? "/cuts_sw.csv"
                                                                       : "/cuts_na.csv");
    opts.checkpointPath =
        config.out + (config.dual == DualKind::Stagewise ? "/checkpoint_sw.json"
                                                         : "/checkpoint_na.json");

    std::optional<MasterState> resume;
    if (config.resumeTraining && fs::exists(opts.checkpointPath))
        resume = master_state_from_json(json::parse(read_text(opts.checkpointPath)));

    TrainResult result;
    if (config.dual == DualKind::Stagewise) {
        SwOracle oracle(inst, paths, layout, cm);
        result = train(oracle, opts, resume ? &*resume : nullptr);
    } else {
        NaOracle oracle(inst, paths, layout, cm);
        result = train(oracle, opts, resume ? &*resume : nullptr);
    }

    DualCoefficients coeffs;
    coeffs.layout = layout;
    coeffs.w = result.coeffs;
    atomic_write_text(config.coefficientFile(config.dual),
                      coefficients_to_json(coeffs, instance_hash(inst)).dump(2) + "\n");
    return result;
}

BoundEstimate cmd_bound(const RunConfig& config, BoundMethod method) {
    Timer timer;
    const MslotInstance inst = load_instance(config);
    const auto evalPaths = evaluation_sample(config, inst);
    const CondMean cm = ar_cond_mean(inst.process);

    BoundEstimate b;
    std::string name;
    switch (method) {
        case BoundMethod::Pi:
            b = pi_bound(inst, evalPaths, 0.95, {}, config.mode);
            name = "pi";
            break;
        case BoundMethod::Sw: {
            const DualCoefficients coeffs = load_coefficients(config, DualKind::Stagewise);
            b = lower_bound(coeffs, inst, evalPaths, cm, 0.95, {}, config.mode);
            name = "sw";
            break;
        }
        case BoundMethod::Na: {
            const DualCoefficients coeffs = load_coefficients(config, DualKind::Nonanticipative);
            b = lower_bound(coeffs, inst, evalPaths, cm, 0.95, {}, config.mode);
            name = "na";
            break;
        }
    }
    append_results_row(config, inst, name, b, timer.seconds(),
                       b.degenerate ? "degenerate" : "");
    return b;
}

BoundEstimate cmd_simulate(const RunConfig& config, PolicyKind policy) {
    Timer timer;
    const MslotInstance inst = load_instance(config);
    if (policy == PolicyKind::NaDriven && inst.T > config.naPolicyStageCap)
        throw std::invalid_argument(
            "simulate: the two-stage policy is capped at T <= " +
            std::to_string(config.naPolicyStageCap) + " by default");
    const auto evalPaths = evaluation_sample(config, inst);
    const CondMean cm = ar_cond_mean(inst.process);

    PolicyConfig pc;
    pc.kind = policy;
    pc.lambda = config.lambda;
    pc.rawSamples = config.rawSamples;
    pc.clusters = config.clusters;
    pc.twoStageMip.nodeLimit = config.nodeLimit;
    pc.twoStageMip.timeLimitSec = config.timeLimitSec;
    std::string name = "condexp";
    if (policy == PolicyKind::SwDriven) {
        pc.coeffs = load_coefficients(config, DualKind::Stagewise);
        name = "swpolicy";
    } else if (policy == PolicyKind::NaDriven) {
        pc.coeffs = load_coefficients(config, DualKind::Nonanticipative);
        name = "napolicy";
    }
    const ContinuationSampler sampler = ar_continuation_sampler(inst.process);

    std::vector<double> totals(evalPaths.size());
    std::vector<char> limited(evalPaths.size(), 0);
    std::vector<PolicyRun> runs(evalPaths.size());
    for_each_index(
        static_cast<int>(evalPaths.size()),
        [&](int i) {
            runs[i] = simulate(pc, inst, evalPaths[i], cm, sampler);
            totals[i] = runs[i].total;
            for (SolveStatus s : runs[i].status)
                if (s == SolveStatus::LimitReached) limited[i] = 1;
        },
        config.mode);

    // Simulation log: one row per (scenario, stage).
    {
        std::ostringstream log;
        log << "scenario,stage,stageCost,cumulativeCost,status,nodes,time\n";
        for (const PolicyRun& run : runs) {
            double cumulative = 0.0;
            for (size_t t = 0; t < run.stageCost.size(); ++t) {
                cumulative += run.stageCost[t];
                const char* st = run.status[t] == SolveStatus::Optimal ? "optimal"
                                 : run.status[t] == SolveStatus::LimitReached ? "limit"
                                                                              : "other";
                log << run.scenario << ',' << (t + 1) << ','
                    << format_double(run.stageCost[t]) << ',' << format_double(cumulative)
                    << ',' << st << ',' << run.nodes[t] << ','
                    << (config.recordTiming ? format_double(timer.seconds()) : std::string("0"))
                    << '\n';
            }
        }
        atomic_write_text(config.out + "/sim_" + name + "_log.csv", log.str());
    }

    const BoundEstimate b = confidence_interval(totals, 0.95, BoundSide::Upper, name);
    int nLimited = 0;
    for (char c : limited) nLimited += c;
    append_results_row(config, inst, name, b, timer.seconds(),
                       nLimited > 0 ? "node_limited:" + std::to_string(nLimited) : "");
    return b;
}

namespace {

bool verify_oracle(uint64_t seed) {
    const FiniteSupportProcess tree = verify_tree();
    const MslotInstance inst = verify_instance(tree);
    const CondMean cm = tree_cond_mean(tree);
    const auto leaves = tree.enumerate_paths();
    const double optimum = extensive_optimum(tree, inst);
    const StreamKey key(seed, "verify-oracle");
    bool ok = true;

    BasisSpec sw;
    sw.kind = DualKind::Stagewise;
    sw.option = 2;
    auto swLayout = std::make_shared<DualLayout>(make_layout(sw, inst.T, inst.J));
    bool swWeak = true;
    for (int round = 0; round < 20; ++round) {
        DualCoefficients c;
        c.layout = swLayout;
        c.w = random_box_point(swLayout->dim, 1000.0, key, round);
        double expected = 0.0;
        for (const auto& leaf : leaves)
            expected += leaf.prob * evaluate_sw(c, inst, leaf, cm).total;
        swWeak = swWeak && expected <= optimum + 1e-6 * std::abs(optimum);
    }
    ok &= report_check("oracle.sw_weak_duality", swWeak);

    BasisSpec na;
    na.kind = DualKind::Nonanticipative;
    na.option = 1;
    na.naVars = NaVarSet::All;
    auto naLayout = std::make_shared<DualLayout>(make_layout(na, inst.T, inst.J));
    bool naWeak = true;
    double pi = 0.0;
    for (const auto& leaf : leaves) pi += leaf.prob * perfect_information_value(inst, leaf);
    for (int round = 0; round < 20; ++round) {
        DualCoefficients c;
        c.layout = naLayout;
        c.w = random_box_point(naLayout->dim, 1000.0, key, 100 + round);
        double expected = 0.0;
        for (const auto& leaf : leaves)
            expected += leaf.prob * evaluate_na(c, inst, leaf, cm).value;
        naWeak = naWeak && expected <= optimum + 1e-6 * std::abs(optimum);
    }
    ok &= report_check("oracle.na_weak_duality", naWeak);
    ok &= report_check("oracle.pi_below_optimum", pi <= optimum + 1e-9 * std::abs(optimum));

    BasisSpec sw4;
    sw4.kind = DualKind::Stagewise;
    sw4.option = 4;
    auto sw4Layout = std::make_shared<DualLayout>(make_layout(sw4, inst.T, inst.J));
    auto liftLayout =
        std::make_shared<DualLayout>(make_layout(lift_sw_to_na(sw4), inst.T, inst.J));
    MasterOptions mopts;
    mopts.tolerance = 1e-7;
    mopts.maxIterations = 400;
    SwOracle swOracle(inst, leaves, sw4Layout, cm);
    NaOracle naOracle(inst, leaves, liftLayout, cm);
    const TrainResult swT = train(swOracle, mopts);
    const TrainResult naT = train(naOracle, mopts);
    ok &= report_check("oracle.lifted_ordering",
                       swT.value <= naT.value + 1e-6 * std::abs(naT.value),
                       "sw=" + format_double(swT.value) + " na=" + format_double(naT.value));
    ok &= report_check("oracle.na_below_optimum",
                       naT.value <= optimum + 1e-6 * std::abs(optimum),
                       "opt=" + format_double(optimum));
    ok &= report_check("oracle.pi_below_na", pi <= naT.value + 1e-6 * std::abs(naT.value));
    return ok;
}

bool verify_dualcheck(uint64_t seed) {
    const StreamKey key(seed, "verify-dualcheck");
    int passCount = 0;
    const int total = 20;
    for (int trial = 0; trial < total; ++trial) {
        const int n = 2 + static_cast<int>(key.bits(trial, 0) % 2);
        SmallMip mip;
        mip.c.resize(n);
        mip.lo.assign(n, 0);
        mip.hi.assign(n, static_cast<int>(2 + key.bits(trial, 1) % 4));
        for (int j = 0; j < n; ++j)
            mip.c[j] = std::floor(10.0 * (2.0 * key.uniform(trial, 2, j) - 1.0)) / 2.0;
        const int m = 1 + static_cast<int>(key.bits(trial, 3) % 2);
        mip.D = Matrix(m, n);
        for (int i = 1; i <= m; ++i)
            for (int j = 1; j <= n; ++j)
                mip.D(i, j) =
                    static_cast<double>(static_cast<int>(key.bits(trial, 4, i, j) % 7) - 3);
        std::vector<int> feas(n);
        for (int j = 0; j < n; ++j)
            feas[j] = static_cast<int>(key.bits(trial, 5, j) % (mip.hi[j] + 1));
        mip.d.assign(m, 0.0);
        for (int i = 1; i <= m; ++i)
            for (int j = 1; j <= n; ++j) mip.d[i - 1] += mip.D(i, j) * feas[j];
        const int gCols = static_cast<int>(key.bits(trial, 6) % 3);
        Matrix G(m, gCols);
        for (int i = 1; i <= m; ++i)
            for (int k = 1; k <= gCols; ++k)
                G(i, k) = static_cast<double>(static_cast<int>(key.bits(trial, 7, i, k) % 5) - 2);
        const RestrictedDualCheck r = restricted_dual_check(mip, G);
        passCount += r.pass ? 1 : 0;
    }
    return report_check("dualcheck.randomized",
                        passCount == total,
                        std::to_string(passCount) + "/" + std::to_string(total));
}

bool verify_gradient(uint64_t seed) {
    const FiniteSupportProcess tree = verify_tree();
    const MslotInstance inst = verify_instance(tree);
    const CondMean cm = tree_cond_mean(tree);
    const auto leaves = tree.enumerate_paths();
    const StreamKey key(seed, "verify-gradient");
    bool ok = true;

    BasisSpec sw;
    sw.kind = DualKind::Stagewise;
    sw.option = 1;
    auto swLayout = std::make_shared<DualLayout>(make_layout(sw, inst.T, inst.J));
    DualCoefficients swAt;
    swAt.layout = swLayout;
    swAt.w = random_box_point(swLayout->dim, 30.0, key, 0);
    const std::vector<Cut> swCutsAt = sw_cuts(swAt, inst, leaves, cm);
    bool swValid = true;
    for (int probe = 0; probe < 50; ++probe) {
        DualCoefficients c;
        c.layout = swLayout;
        c.w = random_box_point(swLayout->dim, 500.0, key, 1000 + probe);
        for (size_t i = 0; i < leaves.size(); ++i) {
            const double value = evaluate_sw(c, inst, leaves[i], cm).total;
            swValid = swValid && value <= swCutsAt[i].value(c.w) + 1e-6 * (1.0 + std::abs(value));
        }
    }
    ok &= report_check("gradient.sw_cut_validity", swValid, "50 probes");

    BasisSpec na;
    na.kind = DualKind::Nonanticipative;
    na.option = 3;
    auto naLayout = std::make_shared<DualLayout>(make_layout(na, inst.T, inst.J));
    DualCoefficients naAt;
    naAt.layout = naLayout;
    naAt.w = random_box_point(naLayout->dim, 30.0, key, 1);
    const std::vector<Cut> naCutsAt = na_cuts(naAt, inst, leaves, cm);
    bool naValid = true;
    for (int probe = 0; probe < 50; ++probe) {
        DualCoefficients c;
        c.layout = naLayout;
        c.w = random_box_point(naLayout->dim, 500.0, key, 2000 + probe);
        for (size_t i = 0; i < leaves.size(); ++i) {
            const double value = evaluate_na(c, inst, leaves[i], cm).value;
            naValid = naValid && value <= naCutsAt[i].value(c.w) + 1e-6 * (1.0 + std::abs(value));
        }
    }
    ok &= report_check("gradient.na_cut_validity", naValid, "50 probes");

    // Central finite differences at the expansion point.
    bool fdOk = true;
    const double eps = 1e-5;
    for (size_t i = 0; i < leaves.size(); ++i) {
        const auto dir = random_box_point(swLayout->dim, 1.0, key, 3000 + static_cast<int>(i));
        DualCoefficients plus = swAt, minus = swAt;
        for (int k = 0; k < swLayout->dim; ++k) {
            plus.w[k] += eps * dir[k];
            minus.w[k] -= eps * dir[k];
        }
        const double fd = (evaluate_sw(plus, inst, leaves[i], cm).total -
                           evaluate_sw(minus, inst, leaves[i], cm).total) /
                          (2.0 * eps);
        double gd = 0.0;
        for (int k = 0; k < swLayout->dim; ++k) gd += swCutsAt[i].gradient[k] * dir[k];
        fdOk = fdOk && std::abs(fd - gd) <= 1e-4 * (1.0 + std::abs(gd));
    }
    ok &= report_check("gradient.sw_finite_difference", fdOk);
    return ok;
}

bool verify_condexp(uint64_t seed) {
    ProcessParams p;
    p.T = 5;
    p.J = 2;
    p.rho = 0.6;
    p.rhoY = 0.2;
    p.seed = seed;
    p.mu = Matrix(p.T, p.J, 100.0);
    const StreamKey key(seed, "verify-condexp");
    const auto base = sample_paths(p, 100, "ce-base");
    int hits = 0;
    const int cases = 100;
    for (int c = 0; c < cases; ++c) {
        const ScenarioPath& path = base[c % base.size()];
        const int t = 1 + static_cast<int>(key.bits(c, 1) % (p.T - 1));
        const int h = 1 + static_cast<int>(key.bits(c, 2) % (p.T - t));
        const int j = 1 + static_cast<int>(key.bits(c, 3) % p.J);
        const double closed = conditional_mean_demand(p, path, t, h, j);
        const auto cont =
            conditional_sample(p, path, t, 100000, "ce-mc-" + std::to_string(c));
        double acc = 0.0, acc2 = 0.0;
        for (const auto& cp : cont) {
            const double v = cp.demands(t + h, j);
            acc += v;
            acc2 += v * v;
        }
        const double mean = acc / cont.size();
        const double sd = std::sqrt(std::max(0.0, acc2 / cont.size() - mean * mean));
        const double se = sd / std::sqrt(static_cast<double>(cont.size()));
        if (std::abs(mean - closed) <= 3.0 * se) ++hits;
    }
    return report_check("condexp.monte_carlo", hits >= 97,
                        std::to_string(hits) + "/" + std::to_string(cases));
}

bool verify_process(uint64_t seed) {
    bool ok = true;
    {
        ProcessParams p;
        p.T = 3;
        p.J = 1;
        p.rho = 0.0;
        p.rhoY = 1.0;
        p.seed = seed;
        p.mu = Matrix(3, 1, 100.0);
        const auto paths = sample_paths(p, 100000, "vp1");
        double acc = 0.0;
        for (const auto& path : paths) acc += path.demands(2, 1) / 100.0;
        ok &= report_check("process.unit_mean_ar", std::abs(acc / paths.size() - 1.0) <= 0.01);
    }
    {
        ProcessParams p;
        p.T = 4;
        p.J = 2;
        p.rho = 0.6;
        p.rhoY = 0.2;
        p.seed = seed + 1;
        p.mu = Matrix(4, 2, 80.0);
        const auto paths = sample_paths(p, 20000, "vp2");
        bool meanOk = true, reconOk = true;
        for (int t = 1; t <= p.T; ++t)
            for (int j = 1; j <= p.J; ++j) {
                double s = 0.0, s2 = 0.0;
                for (const auto& path : paths) {
                    s += path.demands(t, j);
                    s2 += path.demands(t, j) * path.demands(t, j);
                }
                const double mean = s / paths.size();
                const double sd = std::sqrt(s2 / paths.size() - mean * mean);
                meanOk = meanOk &&
                         std::abs(mean - 80.0) <= 3.0 * sd / std::sqrt(1.0 * paths.size());
            }
        for (const auto& path : paths)
            for (int t = 1; t <= p.T; ++t)
                for (int j = 1; j <= p.J; ++j)
                    reconOk = reconOk &&
                              path.demands(t, j) == p.rhoY * path.latentY(t, j) * p.mu(t, j) +
                                                        (1.0 - p.rhoY) * path.latentDelta(t, j);
        ok &= report_check("process.unconditional_mean", meanOk);
        ok &= report_check("process.reconstruction_identity", reconOk);
    }
    {
        const LognormalParams d = lognormal_from_mean_std(1.0, 0.5);
        const StreamKey key(seed + 2, "vp3");
        double s = 0.0, s2 = 0.0;
        const int n = 1000000;
        for (int i = 0; i < n; ++i) {
            const double v = d.value(inverse_normal_cdf(key.uniform(i)));
            s += v;
            s2 += v * v;
        }
        const double mean = s / n;
        const double sd = std::sqrt(s2 / n - mean * mean);
        ok &= report_check("process.lognormal_moments",
                           std::abs(mean - 1.0) <= 0.002 && std::abs(sd - 0.5) <= 0.002);
    }
    return ok;
}

}  // namespace

bool cmd_verify(const std::string& suite, uint64_t seed) {
    if (suite == "oracle") return verify_oracle(seed);
    if (suite == "dualcheck") return verify_dualcheck(seed);
    if (suite == "gradient") return verify_gradient(seed);
    if (suite == "condexp") return verify_condexp(seed);
    if (suite == "process") return verify_process(seed);
    if (suite == "all")
        return verify_process(seed) & verify_condexp(seed) & verify_dualcheck(seed) &
               verify_gradient(seed) & verify_oracle(seed);
    throw std::invalid_argument("unknown verify suite: " + suite);
}

RunConfig run_config_from_json_text(const std::string& text) {
    const json j = json::parse(text);
    RunConfig c;
    c.T = j.value("T", c.T);
    c.J = j.value("J", c.J);
    c.rho = j.value("rho", c.rho);
    c.rhoY = j.value("rhoY", c.rhoY);
    c.seed = j.value("seed", c.seed);
    c.muLow = j.value("muLow", c.muLow);
    c.muHigh = j.value("muHigh", c.muHigh);
    if (j.contains("dual"))
        c.dual = j.at("dual").get<std::string>() == "na" ? DualKind::Nonanticipative
                                                         : DualKind::Stagewise;
    c.basisOption = j.value("basisOption", c.basisOption);
    if (j.contains("naVars")) {
        const std::string v = j.at("naVars").get<std::string>();
        c.naVars = v == "state" ? NaVarSet::StateOnly : v == "all" ? NaVarSet::All
                                                                   : NaVarSet::XOnly;
    }
    c.liftFromSw = j.value("liftFromSw", c.liftFromSw);
    c.coeffBound = j.value("coeffBound", c.coeffBound);
    c.masterTolerance = j.value("masterTolerance", c.masterTolerance);
    c.masterMaxIters = j.value("masterMaxIters", c.masterMaxIters);
    c.resumeTraining = j.value("resumeTraining", c.resumeTraining);
    c.trainScenarios = j.value("trainScenarios", c.trainScenarios);
    c.evalScenarios = j.value("evalScenarios", c.evalScenarios);
    c.lambda = j.value("lambda", c.lambda);
    c.rawSamples = j.value("rawSamples", c.rawSamples);
    c.clusters = j.value("clusters", c.clusters);
    c.nodeLimit = j.value("nodeLimit", c.nodeLimit);
    c.timeLimitSec = j.value("timeLimitSec", c.timeLimitSec);
    c.naPolicyStageCap = j.value("naPolicyStageCap", c.naPolicyStageCap);
    c.out = j.value("out", c.out);
    c.instancePath = j.value("instancePath", c.instancePath);
    c.recordTiming = j.value("recordTiming", c.recordTiming);
    return c;
}

std::string run_config_to_json_text(const RunConfig& c) {
    json j{{"T", c.T},
           {"J", c.J},
           {"rho", c.rho},
           {"rhoY", c.rhoY},
           {"seed", c.seed},
           {"muLow", c.muLow},
           {"muHigh", c.muHigh},
           {"dual", c.dual == DualKind::Stagewise ? "sw" : "na"},
           {"basisOption", c.basisOption},
           {"naVars", c.naVars == NaVarSet::XOnly       ? "x"
                      : c.naVars == NaVarSet::StateOnly ? "state"
                                                        : "all"},
           {"liftFromSw", c.liftFromSw},
           {"coeffBound", c.coeffBound},
           {"masterTolerance", c.masterTolerance},
           {"masterMaxIters", c.masterMaxIters},
           {"resumeTraining", c.resumeTraining},
           {"trainScenarios", c.trainScenarios},
           {"evalScenarios", c.evalScenarios},
           {"lambda", c.lambda},
           {"rawSamples", c.rawSamples},
           {"clusters", c.clusters},
           {"nodeLimit", c.nodeLimit},
           {"timeLimitSec", c.timeLimitSec},
           {"naPolicyStageCap", c.naPolicyStageCap},
           {"out", c.out},
           {"instancePath", c.instancePath},
           {"recordTiming", c.recordTiming}};
    return j.dump(2) + "\n";
}

std::vector<GapReport> cmd_report(const std::string& dir) {
    const std::string path = dir + "/results.csv";
    std::vector<GapReport> reports;
    if (!fs::exists(path)) return reports;
    std::istringstream in(read_text(path));
    std::string line;
    std::getline(in, line);  // header

    struct Entry {
        std::map<std::string, BoundEstimate> byMethod;
    };
    std::map<std::string, Entry> byInstance;
    std::vector<std::string> order;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() < 8) continue;
        BoundEstimate b;
        b.mean = std::stod(fields[3]);
        b.halfwidth = std::stod(fields[4]);
        b.n = std::stoi(fields[5]);
        b.level = std::stod(fields[6]);
        b.side = fields[2] == "lower" ? BoundSide::Lower : BoundSide::Upper;
        b.method = fields[1];
        if (!byInstance.count(fields[0])) order.push_back(fields[0]);
        byInstance[fields[0]].byMethod[fields[1]] = b;
    }
    for (const std::string& id : order) {
        const auto& methods = byInstance[id].byMethod;
        auto get = [&](const char* name) -> std::optional<BoundEstimate> {
            const auto it = methods.find(name);
            return it == methods.end() ? std::nullopt : std::optional(it->second);
        };
        reports.push_back(ordering_report(id, get("pi"), get("sw"), get("na"), get("condexp"),
                                          get("swpolicy"), get("napolicy")));
    }
    json out = json::array();
    for (const GapReport& r : reports) out.push_back(to_json(r));
    atomic_write_text(dir + "/gap_report.json", out.dump(2) + "\n");
    return reports;
}

}  // namespace lddr
