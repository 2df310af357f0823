#include "qpa/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qpa {

namespace {

constexpr double kWeightFloor = 1e-12;

void append(std::vector<std::string>& out, const std::string& msg) {
    out.push_back(msg);
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

// ---- RelevanceTable -------------------------------------------------------

double RelevanceTable::weight(int id, int segment) const {
    if (id < 0 || id >= participants())
        throw std::invalid_argument("relevance: participant id " + std::to_string(id) + " out of range");
    if (segment < 0 || segment >= segments())
        throw std::invalid_argument("relevance: segment " + std::to_string(segment) + " out of range");
    return rows[static_cast<size_t>(id)][static_cast<size_t>(segment)];
}

std::vector<double> RelevanceTable::weights_at(int segment) const {
    std::vector<double> w(static_cast<size_t>(participants()));
    for (int id = 0; id < participants(); ++id) w[static_cast<size_t>(id)] = weight(id, segment);
    return w;
}

void RelevanceTable::collect_violations(std::vector<std::string>& out) const {
    if (rows.empty()) {
        append(out, "relevance: table is empty (needs organic row plus one row per advertiser)");
        return;
    }
    const size_t cols = rows.front().size();
    if (cols == 0) append(out, "relevance: zero segments (needs >= 1)");
    for (size_t id = 0; id < rows.size(); ++id) {
        if (rows[id].size() != cols) {
            append(out, "relevance: row " + std::to_string(id) + " has " + std::to_string(rows[id].size()) +
                            " segments, expected " + std::to_string(cols));
            continue;
        }
        for (size_t t = 0; t < rows[id].size(); ++t) {
            const double q = rows[id][t];
            if (!(q >= kWeightFloor) || q > 1.0)
                append(out, "relevance: q[" + std::to_string(id) + "][" + std::to_string(t) + "] = " + fmt(q) +
                                " outside [1e-12, 1]");
        }
    }
}

// ---- WelfareFunction ------------------------------------------------------

double WelfareFunction::operator()(double q) const {
    if (!(q > 0.0)) throw std::domain_error("welfare: q = " + fmt(q) + " outside (0, inf)");
    return eta * std::pow(q, beta);
}

double WelfareFunction::normalized(double q) const { return (*this)(q) / ctr_constant; }

void WelfareFunction::collect_violations(std::vector<std::string>& out, const std::string& field) const {
    if (!(eta > 0.0)) append(out, field + ".eta = " + fmt(eta) + " outside (0, inf)");
    if (!(beta > 0.0 && beta < 1.0)) append(out, field + ".beta = " + fmt(beta) + " outside (0, 1)");
    if (!(ctr_constant > 0.0)) append(out, field + ".ctr_constant = " + fmt(ctr_constant) + " outside (0, inf)");
}

// ---- AuctionParams --------------------------------------------------------

void AuctionParams::collect_violations(std::vector<std::string>& out) const {
    if (!(lambda_tilde > 0.0)) append(out, "params.lambda_tilde = " + fmt(lambda_tilde) + " outside (0, inf)");
    if (!(xi >= 0.0)) append(out, "params.xi = " + fmt(xi) + " outside [0, inf)");
    if (k_baseline < 1) append(out, "params.k_baseline = " + std::to_string(k_baseline) + " outside [1, inf)");
}

// ---- OutcomeDistribution --------------------------------------------------

void OutcomeDistribution::validate() const {
    if (p.empty()) throw std::domain_error("distribution: empty alphabet");
    double sum = 0.0;
    for (double v : p) {
        if (!(v >= 0.0)) throw std::domain_error("distribution: negative probability " + fmt(v));
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::domain_error("distribution: probabilities sum to " + fmt(sum) + ", expected 1 within 1e-12");
}

// ---- Scenario -------------------------------------------------------------

const Advertiser& Scenario::advertiser(int id) const {
    if (id < 1 || id > n_ads())
        throw std::invalid_argument("scenario: advertiser id " + std::to_string(id) + " out of range");
    return advertisers[static_cast<size_t>(id - 1)];
}

std::vector<double> Scenario::bids() const {
    std::vector<double> b;
    b.reserve(advertisers.size());
    for (const auto& a : advertisers) b.push_back(a.bid);
    return b;
}

std::vector<double> Scenario::values() const {
    std::vector<double> v;
    v.reserve(advertisers.size());
    for (const auto& a : advertisers) v.push_back(a.value);
    return v;
}

std::vector<int> Scenario::all_ad_ids() const {
    std::vector<int> ids(advertisers.size());
    std::iota(ids.begin(), ids.end(), 1);
    return ids;
}

void Scenario::validate() const {
    std::vector<std::string> v;
    if (advertisers.empty()) append(v, "advertisers: empty (needs >= 1)");
    for (size_t k = 0; k < advertisers.size(); ++k) {
        const auto& a = advertisers[k];
        if (a.id != static_cast<int>(k) + 1)
            append(v, "advertisers[" + std::to_string(k) + "].id = " + std::to_string(a.id) +
                          ", expected consecutive ids starting at 1");
        if (!(a.bid >= 0.0)) append(v, "advertisers[" + std::to_string(k) + "].bid = " + fmt(a.bid) + " outside [0, inf)");
        if (!(a.value > 0.0)) append(v, "advertisers[" + std::to_string(k) + "].value = " + fmt(a.value) + " outside (0, inf)");
    }

    relevance.collect_violations(v);
    if (relevance.participants() != n_ads() + 1)
        append(v, "relevance: " + std::to_string(relevance.participants()) + " rows, expected n+1 = " +
                      std::to_string(n_ads() + 1));
    if (segments < 1) append(v, "segments = " + std::to_string(segments) + " outside [1, inf)");
    if (relevance.participants() > 0 && relevance.segments() != segments)
        append(v, "relevance: table has " + std::to_string(relevance.segments()) + " segments, scenario declares " +
                      std::to_string(segments));

    welfare_single.collect_violations(v, "welfare_single");
    welfare_multi.collect_violations(v, "welfare_multi");
    params.collect_violations(v);

    const size_t m = static_cast<size_t>(n_ads()) + 1;
    if (rel_matrix.size() != m) {
        append(v, "rel_matrix: " + std::to_string(rel_matrix.size()) + " rows, expected n+1 = " + std::to_string(m));
    } else {
        for (size_t i = 0; i < m; ++i) {
            if (rel_matrix[i].size() != m) {
                append(v, "rel_matrix: row " + std::to_string(i) + " has " + std::to_string(rel_matrix[i].size()) +
                              " columns, expected " + std::to_string(m));
                continue;
            }
            for (size_t j = 0; j < m; ++j) {
                const double r = rel_matrix[i][j];
                if (!(r >= 0.0 && r <= 1.0))
                    append(v, "rel_matrix[" + std::to_string(i) + "][" + std::to_string(j) + "] = " + fmt(r) +
                                  " outside [0, 1]");
                else if (j < i && std::abs(r - rel_matrix[j][i]) > 1e-12)
                    append(v, "rel_matrix[" + std::to_string(i) + "][" + std::to_string(j) +
                                  "] != rel_matrix[" + std::to_string(j) + "][" + std::to_string(i) +
                                  "] (must be symmetric within 1e-12)");
            }
        }
    }

    if (!v.empty()) {
        std::string msg = "scenario validation failed (" + std::to_string(v.size()) + " violations):";
        for (const auto& s : v) msg += "\n  - " + s;
        throw std::invalid_argument(msg);
    }
}

// ---- free ops -------------------------------------------------------------

double kl_divergence(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("kl: size mismatch " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
    double sum = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0.0) continue;   // 0 ln 0 = 0
        if (!(y[i] > 0.0))
            throw std::domain_error("kl: support violation at index " + std::to_string(i) + " (x > 0, y = " + fmt(y[i]) + ")");
        sum += x[i] * std::log(x[i] / y[i]);
    }
    return sum;
}

std::vector<double> mix(std::span<const double> w, const std::vector<OutcomeDistribution>& components) {
    if (w.size() != components.size())
        throw std::invalid_argument("mix: " + std::to_string(w.size()) + " weights vs " +
                                    std::to_string(components.size()) + " components");
    if (components.empty()) throw std::invalid_argument("mix: no components");
    double sum = 0.0;
    for (double wi : w) {
        if (!(wi >= 0.0)) throw std::domain_error("mix: negative weight " + fmt(wi));
        sum += wi;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::domain_error("mix: weights sum to " + fmt(sum) + ", expected 1 within 1e-9");

    const size_t alphabet = components.front().p.size();
    std::vector<double> out(alphabet, 0.0);
    for (size_t i = 0; i < components.size(); ++i) {
        if (components[i].p.size() != alphabet)
            throw std::invalid_argument("mix: component " + std::to_string(i) + " alphabet size " +
                                        std::to_string(components[i].p.size()) + ", expected " + std::to_string(alphabet));
        for (size_t a = 0; a < alphabet; ++a) out[a] += w[i] * components[i].p[a];
    }
    return out;
}

}  // namespace qpa
