#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ttp/bundle.hpp"
#include "ttp/instance.hpp"
#include "ttp/master.hpp"
#include "ttp/oracle.hpp"
#include "ttp/spacetime.hpp"

namespace ttp {

struct SolverConfig {
    Method method = Method::Disaggregate;
    double m_L = 0.1;
    double u0 = 1.0;
    double u_min = 1e-10;
    int k_max = 200;
    double mu0 = 0.0;  // initial price on every block-time
    double epsilon = 1e-13;
    double tol_qp = 1e-10;
    int bundle_cap = 50;
    double activity_tolerance = 1e-8;
    bool parallel_oracle = false;
    GraphOptions graph;
};

// Applies `key=value`; keys: m_L u0 u_min k_max mu0 epsilon tol_qp bundle_cap
// activity_tolerance parallel_oracle signal_waiting travel_penalty.
void set_param(SolverConfig& config, const std::string& key, const std::string& value);
void validate(const SolverConfig& config);

const char* to_string(Method m);
Method parse_method(const std::string& name);

enum class Termination { ToleranceReached, IterationLimit, MasterFailure };
const char* to_string(Termination t);

enum class IterationStep { Initial, Serious, Null };
const char* to_string(IterationStep s);

struct IterationRecord {
    int k = 0;
    double phi_center = 0.0;
    double candidate_phi = 0.0;
    double forecast = 0.0;
    double achieved = 0.0;
    double ratio = 0.0;
    IterationStep step = IterationStep::Initial;
    double u = 0.0;
    std::size_t bundle_size = 0;
    double model_value_at_y = 0.0;
    double kkt_residual = 0.0;
    int master_iterations = 0;
};

struct Timing {
    double graph_build_s = 0.0;
    double oracle_s = 0.0;
    double master_s = 0.0;
    double total_s = 0.0;
};

struct SolveReport {
    Method method = Method::Disaggregate;
    SolverConfig config;
    std::vector<IterationRecord> iterations;
    PriceMatrix final_mu;
    double final_phi = 0.0;
    double final_forecast = 0.0;
    // Per request, distinct best paths in first-seen order (null path included).
    std::vector<std::vector<std::vector<int>>> generated_paths;
    // Per request, the best path under final_mu.
    std::vector<std::vector<int>> final_paths;
    Termination termination = Termination::IterationLimit;
    std::string message;
    int master_solves = 0;
    int active_evictions = 0;
    // Largest |phi - sum phi_r - c.mu| / (1 + |phi|) over all oracle calls.
    double max_decomposition_residual = 0.0;
    Timing timing;

    // Evaluated dual values in order (phi(mu_0) first).
    std::vector<double> phi_trace() const;
};

SolveReport run(const Instance& instance, const SolverConfig& config);
SolveReport run(const Instance& instance, const std::vector<MovementGraph>& graphs,
                const SolverConfig& config);

// All source-to-sink paths of a graph in DFS order; throws InputError when
// more than `limit` exist.
std::vector<std::vector<int>> enumerate_paths(const MovementGraph& graph,
                                              std::size_t limit = 1'000'000);

struct PrimalSolution {
    double best_value = 0.0;
    std::vector<std::vector<int>> assignment;  // one path per request
};

// Exact optimum of the timetabling IP over all path combinations.
PrimalSolution brute_force_primal(const Instance& instance, const std::vector<MovementGraph>& graphs,
                                  double combination_cap = 1e7);

struct MethodSummary {
    int iterations_to_target = -1;  // first k within 0.1% of the best bound, -1 if never
    std::vector<std::size_t> paths_per_request;
    double mean_paths = 0.0;
};

struct ComparisonReport {
    SolveReport aggregate;
    SolveReport disaggregate;
    double best_bound = 0.0;
    double target_tolerance = 1e-3;
    MethodSummary aggregate_summary;
    MethodSummary disaggregate_summary;
    // disaggregate / aggregate iterations to target
    double iteration_ratio = 0.0;
};

// First index k of `trace` whose running minimum is within rel_tol of bound.
int iterations_to_within(const std::vector<double>& trace, double bound, double rel_tol);

ComparisonReport compare(const Instance& instance, const SolverConfig& base_config);

}  // namespace ttp
