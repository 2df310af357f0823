#pragma once

#include <span>
#include <vector>

#include "qpa/model.hpp"
#include "qpa/random.hpp"

// Proportional ("segment") baseline mechanism: no reserve, no organic arm.
// Each ad in the pool is allocated with probability proportional to b_i q_i.
// Payments are the Myerson envelope for that allocation with zero reserve —
// the unique DSIC per-click payment normalized to zero utility at zero bid:
//     p~_i = b_i x_i(b) - integral_0^{b_i} x_i(z, b_-i) dz
//          = (R_i/q_i) ln((q_i b_i + R_i)/R_i) - b_i R_i / (q_i b_i + R_i),
// with R_i = sum_{j != i} b_j q_j (a monopolist, R_i = 0, pays nothing).

namespace qpa {

// Allocation over participant ids; entry 0 (organic) and non-pool ads are 0.
// Returns the zero vector when every pool bid is zero.
std::vector<double> seg_allocate(std::span<const double> bids,
                                 std::span<const double> weights,
                                 std::span<const int> pool);

// Closed-form envelope payment for pool member id (see above).
double seg_payment(int id, std::span<const double> bids,
                   std::span<const double> weights, std::span<const int> pool);

struct BaselineDraw {
    int id = 0;
    double per_click_payment = 0.0;
};

// Up to k sequential draws without replacement, each proportional to b_i q_i
// over the remaining pool, priced against that remaining pool.  Stops early
// when the pool runs out (so at most pool.size() draws are returned); throws
// std::invalid_argument for negative k.
std::vector<BaselineDraw> seg_multi_select(int k, std::span<const double> bids,
                                           std::span<const double> weights,
                                           std::span<const int> pool, Rng& rng);

}  // namespace qpa
