#include "lddr/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace lddr {

namespace {

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (int r = 1; r <= m.rows(); ++r) {
        json row = json::array();
        for (int c = 1; c <= m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j) {
    const int rows = static_cast<int>(j.size());
    const int cols = rows > 0 ? static_cast<int>(j[0].size()) : 0;
    Matrix m(rows, cols);
    for (int r = 1; r <= rows; ++r)
        for (int c = 1; c <= cols; ++c) m(r, c) = j[r - 1][c - 1].get<double>();
    return m;
}

}  // namespace

void atomic_write_text(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw EnvironmentError("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw EnvironmentError("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw EnvironmentError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

uint64_t fnv1a(const std::string& text) { return hash_tag(text); }

std::string hash_hex(const std::string& text) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
    return buf;
}

json to_json(const ProcessParams& p) {
    return json{{"rho", p.rho},       {"rhoY", p.rhoY},
                {"mu", matrix_to_json(p.mu)}, {"epsStd", p.epsStd},
                {"deltaStdFactor", p.deltaStdFactor}, {"T", p.T},
                {"J", p.J},           {"seed", p.seed}};
}

ProcessParams process_from_json(const json& j) {
    ProcessParams p;
    p.rho = j.at("rho").get<double>();
    p.rhoY = j.at("rhoY").get<double>();
    p.mu = matrix_from_json(j.at("mu"));
    p.epsStd = j.at("epsStd").get<double>();
    p.deltaStdFactor = j.at("deltaStdFactor").get<double>();
    p.T = j.at("T").get<int>();
    p.J = j.at("J").get<int>();
    p.seed = j.at("seed").get<uint64_t>();
    return p;
}

json to_json(const MslotInstance& inst) {
    const MslotKnobs& k = inst.knobs;
    json knobs{{"deltaIminus", k.deltaIminus}, {"tsRel", k.tsRel},
               {"tbo", k.tbo},                 {"deltaY", k.deltaY},
               {"util", k.util},               {"deltaI", k.deltaI},
               {"deltaO", k.deltaO},           {"holdingCost", k.holdingCost},
               {"overtimeCost", k.overtimeCost}, {"tbTime", k.tbTime},
               {"lastBacklogCost", k.lastBacklogCost}, {"bigMFactor", k.bigMFactor},
               {"capFactor", k.capFactor}};
    return json{{"id", inst.id}, {"process", to_json(inst.process)}, {"knobs", knobs}};
}

MslotInstance instance_from_json(const json& j) {
    MslotKnobs k;
    const json& kj = j.at("knobs");
    k.deltaIminus = kj.at("deltaIminus").get<double>();
    k.tsRel = kj.at("tsRel").get<double>();
    k.tbo = kj.at("tbo").get<double>();
    k.deltaY = kj.at("deltaY").get<double>();
    k.util = kj.at("util").get<double>();
    k.deltaI = kj.at("deltaI").get<double>();
    k.deltaO = kj.at("deltaO").get<double>();
    k.holdingCost = kj.at("holdingCost").get<double>();
    k.overtimeCost = kj.at("overtimeCost").get<double>();
    k.tbTime = kj.at("tbTime").get<double>();
    k.lastBacklogCost = kj.at("lastBacklogCost").get<double>();
    k.bigMFactor = kj.at("bigMFactor").get<double>();
    k.capFactor = kj.at("capFactor").get<double>();
    MslotInstance inst = build_mslot(process_from_json(j.at("process")), k);
    inst.id = j.value("id", "");
    return inst;
}

json to_json(const BasisSpec& spec) {
    return json{{"kind", spec.kind == DualKind::Stagewise ? "sw" : "na"},
                {"option", spec.option},
                {"naVars", spec.naVars == NaVarSet::XOnly     ? "x"
                           : spec.naVars == NaVarSet::StateOnly ? "state"
                                                                : "all"},
                {"includeConstant", spec.includeConstant},
                {"keepStage1", spec.keepStage1},
                {"liftedFromSw", spec.liftedFromSw},
                {"liftOption", spec.liftOption},
                {"liftIncludeConstant", spec.liftIncludeConstant}};
}

BasisSpec basis_spec_from_json(const json& j) {
    BasisSpec spec;
    spec.kind = j.at("kind").get<std::string>() == "sw" ? DualKind::Stagewise
                                                        : DualKind::Nonanticipative;
    spec.option = j.at("option").get<int>();
    const std::string vars = j.at("naVars").get<std::string>();
    spec.naVars = vars == "x" ? NaVarSet::XOnly : vars == "state" ? NaVarSet::StateOnly
                                                                  : NaVarSet::All;
    spec.includeConstant = j.at("includeConstant").get<bool>();
    spec.keepStage1 = j.at("keepStage1").get<bool>();
    spec.liftedFromSw = j.at("liftedFromSw").get<bool>();
    spec.liftOption = j.at("liftOption").get<int>();
    spec.liftIncludeConstant = j.at("liftIncludeConstant").get<bool>();
    return spec;
}

json paths_to_json(const std::vector<ScenarioPath>& paths) {
    json arr = json::array();
    for (const ScenarioPath& p : paths)
        arr.push_back(json{{"id", p.id},
                           {"prob", p.prob},
                           {"demands", matrix_to_json(p.demands)},
                           {"latentY", matrix_to_json(p.latentY)},
                           {"latentDelta", matrix_to_json(p.latentDelta)}});
    return arr;
}

std::vector<ScenarioPath> paths_from_json(const json& j) {
    std::vector<ScenarioPath> out;
    for (const json& pj : j) {
        ScenarioPath p;
        p.id = pj.at("id").get<int>();
        p.prob = pj.at("prob").get<double>();
        p.demands = matrix_from_json(pj.at("demands"));
        p.latentY = matrix_from_json(pj.at("latentY"));
        p.latentDelta = matrix_from_json(pj.at("latentDelta"));
        out.push_back(std::move(p));
    }
    return out;
}

json coefficients_to_json(const DualCoefficients& coeffs, const std::string& instanceHash) {
    return json{{"spec", to_json(coeffs.layout->spec)},
                {"T", coeffs.layout->T},
                {"J", coeffs.layout->J},
                {"rows", coeffs.layout->rows.size()},
                {"weights", coeffs.w},
                {"instanceHash", instanceHash},
                {"basisCountReported", coeffs.layout->dim}};
}

DualCoefficients coefficients_from_json(const json& j, std::string* instanceHash) {
    const BasisSpec spec = basis_spec_from_json(j.at("spec"));
    const int T = j.at("T").get<int>();
    const int J = j.at("J").get<int>();
    auto layout = std::make_shared<DualLayout>(make_layout(spec, T, J));
    DualCoefficients coeffs;
    coeffs.w = j.at("weights").get<std::vector<double>>();
    if (static_cast<int>(coeffs.w.size()) != layout->dim)
        throw StructureError("coefficient file does not match its layout");
    coeffs.layout = std::move(layout);
    if (instanceHash) *instanceHash = j.value("instanceHash", "");
    return coeffs;
}

json master_state_to_json(const MasterState& st) {
    json cuts = json::array();
    for (const Cut& c : st.pool)
        cuts.push_back(json{{"scenario", c.scenario},
                            {"intercept", c.intercept},
                            {"gradient", c.gradient},
                            {"iterate", c.iterate}});
    return json{{"incumbent", st.incumbent},
                {"incumbentValue", st.incumbentValue},
                {"trustRadius", st.trustRadius},
                {"iteration", st.iteration},
                {"cuts", cuts},
                {"gapHistory", st.gapHistory}};
}

MasterState master_state_from_json(const json& j) {
    MasterState st;
    st.incumbent = j.at("incumbent").get<std::vector<double>>();
    st.incumbentValue = j.at("incumbentValue").get<double>();
    st.trustRadius = j.at("trustRadius").get<double>();
    st.iteration = j.at("iteration").get<int>();
    for (const json& cj : j.at("cuts")) {
        Cut c;
        c.scenario = cj.at("scenario").get<int>();
        c.intercept = cj.at("intercept").get<double>();
        c.gradient = cj.at("gradient").get<std::vector<double>>();
        c.iterate = cj.at("iterate").get<int>();
        st.pool.push_back(std::move(c));
    }
    st.gapHistory = j.at("gapHistory").get<std::vector<double>>();
    return st;
}

json to_json(const BoundEstimate& b) {
    return json{{"mean", b.mean},
                {"halfwidth", b.halfwidth},
                {"n", b.n},
                {"level", b.level},
                {"side", b.side == BoundSide::Lower ? "lower" : "upper"},
                {"method", b.method},
                {"degenerate", b.degenerate}};
}

BoundEstimate bound_from_json(const json& j) {
    BoundEstimate b;
    b.mean = j.at("mean").get<double>();
    b.halfwidth = j.at("halfwidth").get<double>();
    b.n = j.at("n").get<int>();
    b.level = j.at("level").get<double>();
    b.side = j.at("side").get<std::string>() == "lower" ? BoundSide::Lower : BoundSide::Upper;
    b.method = j.value("method", "");
    b.degenerate = j.value("degenerate", false);
    return b;
}

json to_json(const GapReport& r) {
    json j{{"instance", r.instance},
           {"relativeGapPct", r.relativeGapPct},
           {"gapClosureFraction", r.gapClosureFraction},
           {"degenerate", r.degenerate},
           {"flags", r.flags}};
    auto put = [&](const char* key, const std::optional<BoundEstimate>& b) {
        if (b) j[key] = to_json(*b);
    };
    put("piLb", r.piLb);
    put("swLb", r.swLb);
    put("naLb", r.naLb);
    put("condExpUb", r.condExpUb);
    put("swUb", r.swUb);
    put("naUb", r.naUb);
    return j;
}

std::string instance_hash(const MslotInstance& inst) { return hash_hex(to_json(inst).dump()); }

}  // namespace lddr
