#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "lddr/io.hpp"
#include "lddr/runner.hpp"

using namespace lddr;

namespace {

void add_instance_options(CLI::App* app, RunConfig& config) {
    static std::string configSink;
    app->add_option("--config", configSink, "JSON config file (flags override)");
    app->add_option("--instance", config.instancePath, "instance JSON path");
    app->add_option("--out", config.out, "artifact directory");
    app->add_option("--eval-scen", config.evalScenarios, "evaluation sample size override");
    app->add_flag("--timing", config.recordTiming,
                  "record real wall times in CSV output (breaks byte reproducibility)");
    app->add_flag_callback("--serial", [&config] { config.mode = ExecMode::Serial; },
                           "disable OpenMP scenario parallelism");
}

std::string fmt_bound(const BoundEstimate& b) {
    return format_double(b.mean) + " +/- " + format_double(b.halfwidth) + " (n=" +
           std::to_string(b.n) + ", " + (b.side == BoundSide::Lower ? "lower" : "upper") + ")";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lagrangian dual decision rule bounds for multistage stochastic lot sizing"};
    app.require_subcommand(0, 1);

    RunConfig config;
    // Config file first, flags override.
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") {
            try {
                config = run_config_from_json_text(read_text(argv[i + 1]));
            } catch (const std::exception& e) {
                std::fprintf(stderr, "config error: %s\n", e.what());
                return 1;
            }
        }
    std::string configPath;
    std::string dualName = "sw", naVarsName = "x", policyName = "condexp";
    std::string method = "pi", suite = "all", reportDir = "out", topVerify;

    app.add_option("--verify", topVerify, "run a verification suite and exit");
    app.add_option("--config", configPath, "JSON config file (flags override)");

    CLI::App* gen = app.add_subcommand("gen", "generate a lot-sizing instance");
    gen->add_option("--T", config.T, "stages")->check(CLI::Range(2, 64));
    gen->add_option("--J", config.J, "products")->check(CLI::PositiveNumber);
    gen->add_option("--rho", config.rho, "AR coefficient");
    gen->add_option("--rhoY", config.rhoY, "mixing weight");
    gen->add_option("--seed", config.seed, "instance seed");
    add_instance_options(gen, config);

    CLI::App* trainCmd = app.add_subcommand("train", "train dual coefficients");
    trainCmd->add_option("--dual", dualName, "sw or na")
        ->check(CLI::IsMember({"sw", "na"}));
    trainCmd->add_option("--basis", config.basisOption, "basis option 1..4")
        ->check(CLI::Range(1, 4));
    trainCmd->add_option("--na-vars", naVarsName, "penalized variables")
        ->check(CLI::IsMember({"x", "state", "all"}));
    trainCmd->add_flag("--lift", config.liftFromSw, "lift the stagewise basis into the NA dual");
    trainCmd->add_option("--train-scen", config.trainScenarios, "training sample override");
    trainCmd->add_option("--tol", config.masterTolerance, "master stopping tolerance");
    trainCmd->add_option("--max-iters", config.masterMaxIters, "master iteration cap");
    trainCmd->add_option("--box", config.coeffBound, "coefficient box bound");
    add_instance_options(trainCmd, config);

    CLI::App* boundCmd = app.add_subcommand("bound", "estimate a lower bound");
    boundCmd->add_option("--method", method, "pi, sw or na")
        ->check(CLI::IsMember({"pi", "sw", "na"}));
    add_instance_options(boundCmd, config);

    CLI::App* simCmd = app.add_subcommand("simulate", "simulate a primal policy");
    simCmd->add_option("--policy", policyName, "condexp, sw or na")
        ->check(CLI::IsMember({"condexp", "sw", "na"}));
    simCmd->add_option("--lambda", config.lambda, "stagewise policy penalty weight");
    simCmd->add_option("--node-limit", config.nodeLimit, "embedded MIP node limit");
    simCmd->add_option("--time-limit", config.timeLimitSec, "embedded MIP time limit (s)");
    simCmd->add_option("--raw-samples", config.rawSamples, "two-stage conditional sample");
    simCmd->add_option("--clusters", config.clusters, "two-stage cluster count");
    add_instance_options(simCmd, config);

    CLI::App* verifyCmd = app.add_subcommand("verify", "run a verification suite");
    verifyCmd->add_option("--suite", suite, "oracle, dualcheck, gradient, condexp, process or all")
        ->check(CLI::IsMember({"oracle", "dualcheck", "gradient", "condexp", "process", "all"}));

    CLI::App* reportCmd = app.add_subcommand("report", "summarize gaps from a results directory");
    reportCmd->add_option("--dir", reportDir, "directory holding results.csv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!topVerify.empty()) return cmd_verify(topVerify) ? 0 : 2;

        if (gen->parsed()) {
            cmd_gen(config);
            std::printf("instance written to %s\n", config.instanceFile().c_str());
            return 0;
        }
        if (trainCmd->parsed()) {
            config.dual = dualName == "sw" ? DualKind::Stagewise : DualKind::Nonanticipative;
            config.naVars = naVarsName == "x"       ? NaVarSet::XOnly
                            : naVarsName == "state" ? NaVarSet::StateOnly
                                                    : NaVarSet::All;
            const TrainResult r = cmd_train(config);
            std::printf("%s dual trained: value=%s model=%s iterations=%d %s\n",
                        dualName.c_str(), format_double(r.value).c_str(),
                        format_double(r.modelValue).c_str(), r.iterations,
                        r.converged ? "converged" : "iteration-limited");
            return 0;
        }
        if (boundCmd->parsed()) {
            const BoundMethod m = method == "pi"   ? BoundMethod::Pi
                                  : method == "sw" ? BoundMethod::Sw
                                                   : BoundMethod::Na;
            const BoundEstimate b = cmd_bound(config, m);
            std::printf("%s lower bound: %s\n", method.c_str(), fmt_bound(b).c_str());
            return 0;
        }
        if (simCmd->parsed()) {
            const PolicyKind kind = policyName == "condexp" ? PolicyKind::CondExp
                                    : policyName == "sw"    ? PolicyKind::SwDriven
                                                            : PolicyKind::NaDriven;
            const BoundEstimate b = cmd_simulate(config, kind);
            std::printf("%s policy upper bound: %s\n", policyName.c_str(), fmt_bound(b).c_str());
            return 0;
        }
        if (verifyCmd->parsed()) return cmd_verify(suite) ? 0 : 2;
        if (reportCmd->parsed()) {
            const auto reports = cmd_report(reportDir);
            if (reports.empty()) {
                std::printf("no results found in %s\n", reportDir.c_str());
                return 0;
            }
            std::printf("%-24s %12s %12s %12s %12s %8s %s\n", "instance", "PI", "NA-LB",
                        "CondExp", "SW-UB", "closure", "flags");
            for (const GapReport& r : reports) {
                auto mean = [](const std::optional<BoundEstimate>& b) {
                    return b ? b->mean : 0.0;
                };
                std::string flags;
                for (const std::string& f : r.flags) flags += f + " ";
                std::printf("%-24s %12.1f %12.1f %12.1f %12.1f %7.1f%% %s\n", r.instance.c_str(),
                            mean(r.piLb), mean(r.naLb), mean(r.condExpUb), mean(r.swUb),
                            100.0 * r.gapClosureFraction, flags.c_str());
            }
            return 0;
        }
        std::printf("%s\n", app.help().c_str());
        return 0;
    } catch (const EnvironmentError& e) {
        std::fprintf(stderr, "environment error: %s\n", e.what());
        return 3;
    } catch (const SolverError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
