#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "lddr/basis.hpp"
#include "lddr/instance.hpp"
#include "lddr/master.hpp"
#include "lddr/process.hpp"
#include "lddr/stats.hpp"

namespace lddr {

using json = nlohmann::json;

// Temp-file-plus-rename write; readers never observe partial artifacts.
void atomic_write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

std::string format_double(double v);  // shortest round-trip decimal
uint64_t fnv1a(const std::string& text);
std::string hash_hex(const std::string& text);

json to_json(const ProcessParams& p);
ProcessParams process_from_json(const json& j);

json to_json(const MslotInstance& inst);
MslotInstance instance_from_json(const json& j);

json to_json(const BasisSpec& spec);
BasisSpec basis_spec_from_json(const json& j);

json paths_to_json(const std::vector<ScenarioPath>& paths);
std::vector<ScenarioPath> paths_from_json(const json& j);

// Coefficient file carries the spec, dimensions, weights and the hash of the
// instance it was trained on.
json coefficients_to_json(const DualCoefficients& coeffs, const std::string& instanceHash);
DualCoefficients coefficients_from_json(const json& j, std::string* instanceHash = nullptr);

json master_state_to_json(const MasterState& st);
MasterState master_state_from_json(const json& j);

json to_json(const BoundEstimate& b);
BoundEstimate bound_from_json(const json& j);

json to_json(const GapReport& report);

std::string instance_hash(const MslotInstance& inst);

}  // namespace lddr
