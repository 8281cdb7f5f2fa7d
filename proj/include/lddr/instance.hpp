#pragma once

#include <span>
#include <string>
#include <vector>

#include "lddr/mip.hpp"
#include "lddr/process.hpp"

namespace lddr {

// Index map for one stage of the lot-sizing model. Per product: production x,
// inventory iPlus, backlog iMinus, binary setup y; one shared overtime var.
struct VariableLayout {
    int J = 0;

    int numVars() const { return 4 * J + 1; }
    int production(int j) const { return j - 1; }
    int inventory(int j) const { return J + j - 1; }
    int backlog(int j) const { return 2 * J + j - 1; }
    int setup(int j) const { return 3 * J + j - 1; }
    int overtime() const { return 4 * J; }
};

// Stage data of the abstract multistage model: objective c_t, state equations
// A_t x_t + B_t x_{t-1} = b_t, recourse rows, bounds and integrality.
struct StageBlock {
    int t = 0;
    int n = 0;
    std::vector<double> cost, lower, upper;
    std::vector<bool> integer;
    std::vector<std::vector<LinTerm>> stateA;  // per state row, stage-t vars
    std::vector<std::vector<LinTerm>> stateB;  // per state row, stage-(t-1) vars (empty at t=1)
    std::vector<double> stateRhs;
    std::vector<RowDef> recourse;

    int stateRows() const { return static_cast<int>(stateRhs.size()); }
};

struct MslotKnobs {
    double deltaIminus = 2.0;
    double tsRel = 0.25;
    double tbo = 2.0;
    double deltaY = 1.2;
    double util = 0.6;
    double deltaI = 10.0;
    double deltaO = 0.25;
    double holdingCost = 15.0;
    double overtimeCost = 100.0;
    double tbTime = 1.0;
    double lastBacklogCost = 150.0;
    double bigMFactor = 6.0;
    double capFactor = 0.9;
};

struct MslotInstance {
    int T = 0;
    int J = 0;
    ProcessParams process;
    MslotKnobs knobs;

    Matrix holdCost, backlogCost, setupCost;  // T x J
    std::vector<double> overtimeCost;         // per stage
    std::vector<double> setupTime, unitTime, bigM, meanDemand;  // per product
    std::vector<double> capacity, overtimeCap;                  // per stage
    Matrix invCap;        // T x J
    double backlogUpper = 0.0;
    std::string id;

    VariableLayout layout() const { return VariableLayout{J}; }
};

MslotInstance build_mslot(const ProcessParams& process, const MslotKnobs& knobs = {});

StageBlock stage_block(const MslotInstance& inst, int t, std::span<const double> demand);

// Deterministic equivalent over the prefix tree of the given sample. Paths
// sharing a demand history share variables up to the branching stage; path
// weights are normalized to sum to one.
struct ExtensiveForm {
    struct Node {
        int t = 0;
        int parent = -1;  // node index, -1 at t=1
        double prob = 0.0;
        int varOffset = 0;
        std::vector<int> paths;  // member path positions
    };

    MipModel model;
    std::vector<Node> nodes;
    std::vector<std::vector<int>> nodeOfPathStage;  // [path][t-1] -> node index
};

ExtensiveForm extensive_form(const MslotInstance& inst, const std::vector<ScenarioPath>& paths);

}  // namespace lddr
