#pragma once

#include <vector>

#include "ttp/instance.hpp"
#include "ttp/prices.hpp"
#include "ttp/spacetime.hpp"

namespace ttp {

struct BestPath {
    std::vector<int> arcs;       // source -> sink
    double reduced_value = 0.0;  // phi_r(mu) >= 0
};

// Longest path in reduced utility (value minus priced occupation) by a single
// pass over the topologically ordered arcs. Ties prefer the predecessor arc
// whose tail is earlier in time, then the lower arc id; at the sink this
// favours the null path on exact ties.
BestPath best_path(const MovementGraph& graph, const PriceMatrix& mu);

struct RequestResult {
    int request = 0;
    double phi_r = 0.0;
    std::vector<int> best_path;
    SparseVector occupancy;  // d^p as counts over cells
};

struct OracleResult {
    double phi = 0.0;
    double capacity_term = 0.0;  // sum_{b,t} c_b mu_bt
    std::vector<RequestResult> per_request;
    // Sum over requests of chosen occupancy; the aggregate subgradient is
    // c_b - total_usage on every cell.
    SparseVector total_usage;

    // g_bt = c_b - sum_r d_bt, dense.
    std::vector<double> aggregate_subgradient(const Instance& instance) const;
    // |phi - sum phi_r - capacity term|, the decomposition residual.
    double decomposition_residual() const;
};

// Capacity per cell (c_b repeated over t).
std::vector<double> capacity_vector(const Instance& instance);
double capacity_dot(const Instance& instance, const PriceMatrix& mu);

SparseVector to_sparse(const PathOccupancy& occ);

// Evaluates the dual function. With `parallel` requests are split over
// hardware threads; results are identical to the sequential evaluation.
OracleResult evaluate_dual(const std::vector<MovementGraph>& graphs, const Instance& instance,
                           const PriceMatrix& mu, bool parallel = false);

}  // namespace ttp
