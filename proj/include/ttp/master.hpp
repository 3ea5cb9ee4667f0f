#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ttp/bundle.hpp"
#include "ttp/prices.hpp"

namespace ttp {

// One plane of the master: v_group >= psi + g * (mu - center).
struct MasterCut {
    int group = 0;
    double psi = 0.0;
    const SparseVector* sparse = nullptr;
    bool capacity_term = false;
};

// Aggregate:    min v + (u/2)|mu - center|^2,                 one group.
// Disaggregate: min sum_r v_r + c*mu + (u/2)|mu - center|^2,  one group per request.
// Both subject to the cut constraints and mu >= 0.
struct MasterProblem {
    Method mode = Method::Aggregate;
    int groups = 1;
    std::vector<MasterCut> cuts;
    const PriceMatrix* center = nullptr;
    std::span<const double> capacity;
    double u = 1.0;
    double tol_qp = 1e-10;  // scaled by (1 + |model value at center|)
    int max_iterations = 2000;
    std::vector<double> warm_start;  // optional multipliers aligned with cuts

    // Collects the cuts of a bundle in owner-major order.
    static MasterProblem from_bundle(const BundleState& state, std::span<const double> capacity);
};

struct MasterSolution {
    PriceMatrix y;
    double model_value_at_y = 0.0;
    double model_value_at_center = 0.0;
    double objective = 0.0;  // model_value_at_y + (u/2)|y - center|^2
    std::vector<double> cut_multipliers;
    double kkt_residual = 0.0;
    int iterations = 0;

    double forecast() const { return model_value_at_center - model_value_at_y; }
};

// Solves the strictly convex master through its dual over the cut
// multipliers. If the iteration limit is reached or the dual stalls before the
// KKT residual drops below the scaled tolerance, the point is still returned
// when its residual is below 1e-3 of the forecasted descent; otherwise this
// throws MasterFailure.
MasterSolution solve_master(const MasterProblem& problem);

double model_value(const MasterProblem& problem, const PriceMatrix& mu);

// Multipliers split back per owner list, matching BundleState::owners.
std::vector<std::vector<double>> split_multipliers(const BundleState& state,
                                                   std::span<const double> flat);

// Minimises 0.5 x'Hx + f'x over a product of unit simplices (group[j] names the
// simplex of coordinate j) by a primal active-set method, starting from the
// feasible point x0. H must be symmetric positive semidefinite.
Eigen::VectorXd solve_simplex_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& f,
                                 std::span<const int> group, int groups, Eigen::VectorXd x0,
                                 int max_iterations = 0);

}  // namespace ttp
