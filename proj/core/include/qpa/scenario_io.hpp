#pragma once

#include <string>
#include <vector>

#include "qpa/model.hpp"

// Scenario (de)serialization.  The JSON schema (documented in the README):
// {
//   "name": "scenario1", "segments": 3,
//   "advertisers": [{"id":1,"label":"SunWing","bid":3.0,"value":3.0}, ...],
//   "relevance": {"organic":[...T...], "ads":[[...T...] per advertiser]},
//   "welfare_single": {"eta":2.0,"beta":0.8,"ctr_constant":1.0},
//   "welfare_multi":  {"eta":1.5,"beta":0.8,"ctr_constant":1.0},
//   "params": {"lambda_tilde":1.0,"xi":1.0,"k_baseline":3},
//   "rel_matrix": [[(n+1)x(n+1) symmetric in [0,1]]]
// }
// "value" defaults to the bid when omitted.

namespace qpa {

// Parses and validates; throws std::invalid_argument listing every violated
// constraint (field plus range), never just the first.
Scenario parse_scenario(const std::string& json_text);

// Canonical JSON; parse_scenario(emit_scenario(s)) reproduces s field-for-field
// (doubles round-trip bit-exactly).
std::string emit_scenario(const Scenario& sc);

Scenario load_scenario_file(const std::string& path);

// Bundled scenarios compiled into the library (also shipped as files under
// scenarios/).  load_scenario() resolves an existing file path first, then a
// bundled name; unknown inputs throw std::invalid_argument.
std::vector<std::string> bundled_scenario_names();
const std::string& bundled_scenario_text(const std::string& name);
Scenario load_scenario(const std::string& path_or_name);

// Weight trace for the replay provider: {"trials": [[[w0..wn] per segment]]}.
std::vector<std::vector<std::vector<double>>> load_weight_trace(const std::string& path);

}  // namespace qpa
