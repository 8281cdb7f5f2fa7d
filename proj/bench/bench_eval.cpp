// Compares serial and OpenMP scenario evaluation on one desk instance and
// checks that both produce identical numbers.

#include <chrono>
#include <cstdio>
#include <memory>

#include "lddr/dual_na.hpp"
#include "lddr/dual_sw.hpp"
#include "lddr/parallel.hpp"
#include "lddr/runner.hpp"

using namespace lddr;

namespace {

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <typename F>
double timed(F&& f) {
    const double t0 = now_seconds();
    f();
    return now_seconds() - t0;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig config;
    config.T = 3;
    config.J = 3;
    config.seed = 424242;
    const int nPaths = argc > 1 ? std::atoi(argv[1]) : 128;

    const MslotInstance inst = generate_instance(config);
    const auto paths = sample_paths(inst.process, nPaths, "bench");
    const CondMean cm = ar_cond_mean(inst.process);

    BasisSpec na;
    na.kind = DualKind::Nonanticipative;
    na.option = 3;
    auto layout = std::make_shared<DualLayout>(make_layout(na, inst.T, inst.J));
    DualCoefficients coeffs = zero_coefficients(layout);
    const StreamKey key(7, "bench-coeffs");
    for (int k = 0; k < layout->dim; ++k) coeffs.w[k] = 20.0 * (2.0 * key.uniform(k) - 1.0);

    std::printf("threads available: %d, paths: %d\n", hardware_threads(), nPaths);

    std::vector<Cut> serialCuts, parallelCuts;
    const double tSerial =
        timed([&] { serialCuts = na_cuts(coeffs, inst, paths, cm, {}, ExecMode::Serial); });
    const double tParallel =
        timed([&] { parallelCuts = na_cuts(coeffs, inst, paths, cm, {}, ExecMode::Parallel); });

    bool identical = serialCuts.size() == parallelCuts.size();
    for (size_t i = 0; identical && i < serialCuts.size(); ++i)
        identical = serialCuts[i].intercept == parallelCuts[i].intercept &&
                    serialCuts[i].gradient == parallelCuts[i].gradient;

    std::printf("na path evaluation: serial %.3fs, openmp %.3fs, speedup %.2fx, identical: %s\n",
                tSerial, tParallel, tSerial / tParallel, identical ? "yes" : "NO");

    BasisSpec sw;
    sw.kind = DualKind::Stagewise;
    sw.option = 1;
    auto swLayout = std::make_shared<DualLayout>(make_layout(sw, inst.T, inst.J));
    DualCoefficients swCoeffs = zero_coefficients(swLayout);
    for (int k = 0; k < swLayout->dim; ++k) swCoeffs.w[k] = 5.0 * (2.0 * key.uniform(1000 + k) - 1.0);

    std::vector<Cut> swSerial, swParallel;
    const double tSwSerial =
        timed([&] { swSerial = sw_cuts(swCoeffs, inst, paths, cm, {}, ExecMode::Serial); });
    const double tSwParallel =
        timed([&] { swParallel = sw_cuts(swCoeffs, inst, paths, cm, {}, ExecMode::Parallel); });

    bool swIdentical = swSerial.size() == swParallel.size();
    for (size_t i = 0; swIdentical && i < swSerial.size(); ++i)
        swIdentical = swSerial[i].intercept == swParallel[i].intercept &&
                      swSerial[i].gradient == swParallel[i].gradient;

    std::printf("sw stage evaluation: serial %.3fs, openmp %.3fs, speedup %.2fx, identical: %s\n",
                tSwSerial, tSwParallel, tSwSerial / tSwParallel, swIdentical ? "yes" : "NO");

    return identical && swIdentical ? 0 : 1;
}
