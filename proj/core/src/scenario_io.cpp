#include "qpa/scenario_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qpa {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Structural (shape/type) complaints are collected alongside the semantic
// ones from Scenario::validate so a bad file reports everything at once.
struct Collector {
    std::vector<std::string> errors;

    bool require(bool ok, const std::string& msg) {
        if (!ok) errors.push_back(msg);
        return ok;
    }
    void raise_if_any(const std::string& file_hint) const {
        if (errors.empty()) return;
        std::string msg = "scenario parse failed";
        if (!file_hint.empty()) msg += " (" + file_hint + ")";
        msg += " (" + std::to_string(errors.size()) + " problems):";
        for (const std::string& e : errors) msg += "\n  - " + e;
        throw std::invalid_argument(msg);
    }
};

double get_num(const json& j, const char* key, Collector& c, double fallback = 0.0) {
    if (!j.contains(key) || !j[key].is_number()) {
        c.require(false, std::string(key) + ": missing or not a number");
        return fallback;
    }
    return j[key].get<double>();
}

WelfareFunction parse_welfare(const json& j, const char* field, Collector& c) {
    WelfareFunction w;
    if (!c.require(j.contains(field) && j[field].is_object(),
                   std::string(field) + ": missing object"))
        return w;
    const json& o = j[field];
    w.eta = get_num(o, "eta", c, 1.0);
    w.beta = get_num(o, "beta", c, 0.5);
    w.ctr_constant = o.contains("ctr_constant") ? get_num(o, "ctr_constant", c, 1.0) : 1.0;
    return w;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("scenario parse failed: invalid JSON: ") + e.what());
    }

    Collector c;
    Scenario sc;
    if (c.require(j.contains("name") && j["name"].is_string(), "name: missing string"))
        sc.name = j["name"].get<std::string>();
    if (c.require(j.contains("segments") && j["segments"].is_number_integer(),
                  "segments: missing integer"))
        sc.segments = j["segments"].get<int>();

    if (c.require(j.contains("advertisers") && j["advertisers"].is_array() &&
                      !j["advertisers"].empty(),
                  "advertisers: missing non-empty array")) {
        int expect_id = 1;
        for (const json& a : j["advertisers"]) {
            Advertiser ad;
            if (!c.require(a.is_object(), "advertisers: entries must be objects")) continue;
            if (c.require(a.contains("id") && a["id"].is_number_integer(),
                          "advertisers: id missing"))
                ad.id = a["id"].get<int>();
            c.require(ad.id == expect_id,
                      "advertisers: ids must be 1..n in order (saw " +
                          std::to_string(ad.id) + ", expected " +
                          std::to_string(expect_id) + ")");
            if (a.contains("label") && a["label"].is_string())
                ad.label = a["label"].get<std::string>();
            else
                ad.label = "ad" + std::to_string(ad.id);
            ad.bid = get_num(a, "bid", c);
            ad.value = (a.contains("value")) ? get_num(a, "value", c) : ad.bid;
            sc.advertisers.push_back(ad);
            ++expect_id;
        }
    }
    const int n = sc.n_ads();

    if (c.require(j.contains("relevance") && j["relevance"].is_object(),
                  "relevance: missing object")) {
        const json& r = j["relevance"];
        auto row_of = [&](const json& arr, const std::string& what) {
            std::vector<double> row;
            if (!c.require(arr.is_array() && !arr.empty(),
                           what + ": must be a non-empty array"))
                return row;
            for (const json& v : arr) {
                if (!c.require(v.is_number(), what + ": entries must be numbers")) break;
                row.push_back(v.get<double>());
            }
            c.require(static_cast<int>(row.size()) == sc.segments,
                      what + ": length " + std::to_string(row.size()) +
                          " != segments " + std::to_string(sc.segments));
            return row;
        };
        if (c.require(r.contains("organic"), "relevance.organic: missing"))
            sc.relevance.rows.push_back(row_of(r["organic"], "relevance.organic"));
        if (c.require(r.contains("ads") && r["ads"].is_array(), "relevance.ads: missing array")) {
            c.require(static_cast<int>(r["ads"].size()) == n,
                      "relevance.ads: " + std::to_string(r["ads"].size()) +
                          " rows for " + std::to_string(n) + " advertisers");
            int i = 1;
            for (const json& arr : r["ads"])
                sc.relevance.rows.push_back(row_of(arr, "relevance.ads[" + std::to_string(i++) + "]"));
        }
    }

    sc.welfare_single = parse_welfare(j, "welfare_single", c);
    sc.welfare_multi = parse_welfare(j, "welfare_multi", c);

    if (c.require(j.contains("params") && j["params"].is_object(), "params: missing object")) {
        const json& p = j["params"];
        sc.params.lambda_tilde = get_num(p, "lambda_tilde", c, 1.0);
        sc.params.xi = get_num(p, "xi", c, 0.0);
        if (c.require(p.contains("k_baseline") && p["k_baseline"].is_number_integer(),
                      "params.k_baseline: missing integer"))
            sc.params.k_baseline = p["k_baseline"].get<int>();
    }

    if (c.require(j.contains("rel_matrix") && j["rel_matrix"].is_array(),
                  "rel_matrix: missing array")) {
        c.require(static_cast<int>(j["rel_matrix"].size()) == n + 1,
                  "rel_matrix: " + std::to_string(j["rel_matrix"].size()) +
                      " rows, expected " + std::to_string(n + 1));
        for (const json& arr : j["rel_matrix"]) {
            std::vector<double> row;
            if (c.require(arr.is_array() && static_cast<int>(arr.size()) == n + 1,
                          "rel_matrix: each row needs " + std::to_string(n + 1) + " entries"))
                for (const json& v : arr) row.push_back(v.is_number() ? v.get<double>() : -1.0);
            sc.rel_matrix.push_back(std::move(row));
        }
    }

    // Merge semantic violations into the same exception.
    if (c.errors.empty()) {
        try {
            sc.validate();
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(std::string("scenario parse failed: ") + e.what());
        }
        return sc;
    }
    c.raise_if_any(sc.name);
    return sc;   // unreachable
}

std::string emit_scenario(const Scenario& sc) {
    json j;
    j["name"] = sc.name;
    j["segments"] = sc.segments;
    j["advertisers"] = json::array();
    for (const Advertiser& a : sc.advertisers)
        j["advertisers"].push_back(
            {{"id", a.id}, {"label", a.label}, {"bid", a.bid}, {"value", a.value}});
    j["relevance"]["organic"] = sc.relevance.rows.at(0);
    j["relevance"]["ads"] = json::array();
    for (size_t i = 1; i < sc.relevance.rows.size(); ++i)
        j["relevance"]["ads"].push_back(sc.relevance.rows[i]);
    j["welfare_single"] = {{"eta", sc.welfare_single.eta},
                           {"beta", sc.welfare_single.beta},
                           {"ctr_constant", sc.welfare_single.ctr_constant}};
    j["welfare_multi"] = {{"eta", sc.welfare_multi.eta},
                          {"beta", sc.welfare_multi.beta},
                          {"ctr_constant", sc.welfare_multi.ctr_constant}};
    j["params"] = {{"lambda_tilde", sc.params.lambda_tilde},
                   {"xi", sc.params.xi},
                   {"k_baseline", sc.params.k_baseline}};
    j["rel_matrix"] = sc.rel_matrix;
    return j.dump(2) + "\n";
}

Scenario load_scenario_file(const std::string& path) {
    try {
        return parse_scenario(read_file(path));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string(e.what()) + "\n  (file: " + path + ")");
    }
}

// Generated table; see bundled_scenarios.cpp.in.
const std::vector<std::pair<std::string, std::string>>& bundled_scenarios();

std::vector<std::string> bundled_scenario_names() {
    std::vector<std::string> names;
    for (const auto& [name, text] : bundled_scenarios()) names.push_back(name);
    return names;
}

const std::string& bundled_scenario_text(const std::string& name) {
    for (const auto& [n, text] : bundled_scenarios())
        if (n == name) return text;
    throw std::invalid_argument("unknown bundled scenario: " + name);
}

Scenario load_scenario(const std::string& path_or_name) {
    if (std::ifstream probe(path_or_name); probe.good())
        return load_scenario_file(path_or_name);
    for (const auto& [name, text] : bundled_scenarios())
        if (name == path_or_name) return parse_scenario(text);
    std::string known;
    for (const std::string& n : bundled_scenario_names())
        known += (known.empty() ? "" : ", ") + n;
    throw std::invalid_argument("scenario '" + path_or_name +
                                "' is neither a readable file nor a bundled name (" +
                                known + ")");
}

std::vector<std::vector<std::vector<double>>> load_weight_trace(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("weight trace: invalid JSON: " + std::string(e.what()));
    }
    if (!j.contains("trials") || !j["trials"].is_array() || j["trials"].empty())
        throw std::invalid_argument("weight trace: needs a non-empty \"trials\" array");
    std::vector<std::vector<std::vector<double>>> trace;
    for (const json& trial : j["trials"]) {
        std::vector<std::vector<double>> segs;
        if (!trial.is_array() || trial.empty())
            throw std::invalid_argument("weight trace: each trial must be a non-empty array of segments");
        for (const json& seg : trial) {
            if (!seg.is_array() || seg.empty())
                throw std::invalid_argument("weight trace: each segment must be a non-empty weight array");
            std::vector<double> w;
            for (const json& v : seg) {
                if (!v.is_number())
                    throw std::invalid_argument("weight trace: weights must be numbers");
                w.push_back(v.get<double>());
            }
            segs.push_back(std::move(w));
        }
        trace.push_back(std::move(segs));
    }
    return trace;
}

}  // namespace qpa
