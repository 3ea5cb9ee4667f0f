#pragma once

// Reference implementations used only by the tests. They share no code with
// the library's solvers beyond the data types.

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "ttp/bundle.hpp"
#include "ttp/instance.hpp"
#include "ttp/master.hpp"
#include "ttp/oracle.hpp"
#include "ttp/prices.hpp"
#include "ttp/spacetime.hpp"

namespace ttp::testing {

// Two stations joined by `signalling` single-track blocks; requests go up.
Instance corridor(int signalling, int step_s, int horizon_s);

TrainRequest request_up(const Instance& inst, int id, int ideal_s, int half_s, int latest_s,
                        double peak);

// Seeded tiny instance: <= 6 blocks, <= 2 h, <= max_requests requests, and at
// most `combo_cap` path combinations. Tries successive sub-seeds until one fits.
Instance tiny_instance(std::uint64_t seed, int max_requests = 4, double combo_cap = 1e5);

// Desk-scale S1-shaped instance: 4 h horizon and 8 to 12 requests.
Instance desk_instance(std::uint64_t seed);

double path_combinations(const std::vector<MovementGraph>& graphs);

// Exhaustive longest path by recursive DFS. Ties (within `tie_tol`) are broken
// the way the oracle documents: walking back from the sink, at the first node
// where two optimal paths use different arcs, the arc whose tail is earlier
// in time wins, then the lower arc id.
struct ExhaustiveBest {
    std::vector<int> arcs;
    double value = 0.0;
    std::size_t paths = 0;
};
ExhaustiveBest exhaustive_best_path(const MovementGraph& graph, const PriceMatrix& mu,
                                    double tie_tol = 1e-9);

// Reduced value of a path computed densely: sum of arc values minus prices
// over its occupation multiset.
double reduced_value(const MovementGraph& graph, const std::vector<int>& path,
                     const PriceMatrix& mu);

// Random prices: half dense uniform, half sparse integer spikes.
PriceMatrix random_prices(int blocks, int intervals, std::mt19937_64& rng, double scale);

// Dense, from-scratch cut value at `at`: value_l + g_l . (at - mu_l).
double dense_plane(double value_l, const std::vector<double>& g_dense, const PriceMatrix& mu_l,
                   const PriceMatrix& at);

std::vector<double> densify(const SparseVector& v, std::size_t n, double shift = 0.0,
                            const std::vector<double>* capacity = nullptr);

// Master QP oracle: accelerated projected gradient on the cut-multiplier
// dual (product of simplices), run until the relative objective change is
// below `tol`. Returns the primal objective of the recovered point.
struct FistaResult {
    PriceMatrix y;
    double objective = 0.0;
    int iterations = 0;
};
FistaResult fista_master(const MasterProblem& problem, double tol = 1e-12,
                         int max_iterations = 2'000'000);

// Cuts from `iterates` oracle calls at random prices on a tiny instance,
// stored both as one aggregate bundle and as per-request bundles around a
// shared random center. Held by pointer because the masters point into it.
struct MasterCase {
    Instance instance;
    std::vector<MovementGraph> graphs;
    std::vector<double> capacity;
    std::vector<PriceMatrix> iterates;
    std::vector<OracleResult> results;
    BundleState aggregate;
    BundleState disaggregate;
    double u = 1.0;

    MasterProblem problem(Method m) const;
};
std::unique_ptr<MasterCase> master_case(std::uint64_t seed, int iterates);

// Cutting-plane models written out densely from the recorded oracle results.
double dense_aggregate_model(const MasterCase& mc, const PriceMatrix& mu);
double dense_disaggregate_model(const MasterCase& mc, const PriceMatrix& mu);

// Euclidean projection onto the unit simplex.
std::vector<double> project_simplex(std::vector<double> v);

}  // namespace ttp::testing
