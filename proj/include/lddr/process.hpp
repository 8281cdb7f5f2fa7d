#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "lddr/common.hpp"
#include "lddr/rng.hpp"

namespace lddr {

// Autoregressive lognormal demand model. The latent factor follows
//   Y_{1j} = eps_{1j},  Y_{t+1,j} = rho*Y_{tj} + (1-rho)*eps_{t+1,j}
// with eps lognormal (mean 1, std epsStd), and demand mixes the factor with an
// independent lognormal disturbance:
//   D_{tj} = rhoY*Y_{tj}*mu_{tj} + (1-rhoY)*delta_{tj},
// where delta_{tj} has mean mu_{tj} and std deltaStdFactor*t*mu_{tj}.
struct ProcessParams {
    double rho = 0.6;
    double rhoY = 0.2;
    Matrix mu;  // T x J, all entries > 0
    double epsStd = 0.5;
    double deltaStdFactor = 0.2;
    int T = 0;
    int J = 0;
    uint64_t seed = 0;

    void validate() const;
};

struct ScenarioPath {
    Matrix demands;      // D_{tj}
    Matrix latentY;      // Y_{tj}
    Matrix latentDelta;  // delta_{tj}
    double prob = 1.0;
    int id = 0;
};

// Underlying normal parameters of a lognormal with given mean/std of the
// lognormal itself. std == 0 degenerates to a point mass.
struct LognormalParams {
    double normalMu = 0.0;
    double normalSigma = 0.0;

    double value(double z) const;  // exp(mu + sigma*z) for standard normal z
};

LognormalParams lognormal_from_mean_std(double mean, double std);

std::vector<ScenarioPath> sample_paths(const ProcessParams& params, int n,
                                       std::string_view streamTag);

// E[D_{t+h,j} | history up to t] = mu_{t+h,j} * (rhoY*rho^h*(Y_{tj}-1) + 1).
double conditional_mean_demand(const ProcessParams& params, const ScenarioPath& path, int t,
                               int h, int j);

// n continuations agreeing with `path` on stages 1..t.
std::vector<ScenarioPath> conditional_sample(const ProcessParams& params,
                                             const ScenarioPath& path, int t, int n,
                                             std::string_view streamTag);

// Finite-support stagewise process (scenario tree used by the verification
// oracle). Stage outcomes are independent across stages; stage 1 is expected
// to have a single outcome.
struct FiniteSupportProcess {
    struct Outcome {
        std::vector<double> demand;  // length J
        double prob = 1.0;
    };

    int T = 0;
    int J = 0;
    std::vector<std::vector<Outcome>> outcomes;  // [t-1] -> outcomes at stage t

    void validate() const;
    int leafCount() const;
    std::vector<ScenarioPath> enumerate_paths() const;
    double stage_mean(int t, int j) const;
};

// Conditional expectation of D_{t+h,j} given the history of `path` up to t.
// The AR model uses the closed form above; finite-support trees use exact
// stage means (stagewise independence).
using CondMean = std::function<double(const ScenarioPath&, int t, int h, int j)>;

CondMean ar_cond_mean(const ProcessParams& params);
CondMean tree_cond_mean(const FiniteSupportProcess& tree);

}  // namespace lddr
