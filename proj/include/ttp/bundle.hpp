#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ttp/prices.hpp"

namespace ttp {

enum class Method { Aggregate, Disaggregate };

// Supporting plane psi + g * (mu - center), with g = [c if capacity_term] + sparse.
// Aggregate cuts carry the capacity term (g = c - total usage); request cuts
// are g = -d^p.
struct Cut {
    int owner = -1;  // -1 aggregate, otherwise the request index
    SparseVector sparse;
    bool capacity_term = false;
    double psi = 0.0;
    int birth_iteration = 0;
    int last_fresh = 0;  // last iteration this plane was (re)generated
    bool active = true;
    double weight = 0.0;  // last master multiplier, reused as a warm start

    // g * x for a dense x.
    double dot(std::span<const double> x, double capacity_dot_x) const {
        return (capacity_term ? capacity_dot_x : 0.0) + sparse.dot(x);
    }
};

// psi = value_at_mu_l + g * (center - mu_l).
Cut make_cut(int owner, double value_at_mu_l, SparseVector sparse, bool capacity_term,
             const PriceMatrix& mu_l, const PriceMatrix& center, std::span<const double> capacity,
             int iteration = 0);

struct StepControl {
    double u = 1.0;
    double u_min = 1e-10;
    double m_L = 0.1;
};

enum class StepType { Serious, Null };

const char* to_string(StepType s);

// Serious iff achieved >= m_L * forecasted (the boundary counts as a pass).
// A forecasted descent below -tolerance signals a master-solver failure and
// throws MasterFailure.
StepType descent_test(double center_model_value, double candidate_true_value,
                      double candidate_model_value, double m_L, double tolerance = 1e-9);

// Curvature-matching interpolation u' = u * clamp(2 (1 - achieved/forecasted), 0.1, 10),
// never below u_min and never increased on serious steps. A null step never
// decreases u and raises it only when the new cut's linearization error at the
// center exceeds 10x the forecasted descent.
StepControl update_step_control(const StepControl& step, bool serious, double achieved,
                                double forecasted,
                                double linearization_error = std::numeric_limits<double>::infinity());

struct BundleState {
    Method method = Method::Aggregate;
    PriceMatrix center;
    double center_value = 0.0;
    std::vector<std::vector<Cut>> owners;  // one list (aggregate) or one per request
    StepControl step;
    int iteration = 0;
    std::size_t cap_per_owner = 50;
    double activity_tolerance = 1e-8;
    int active_evictions = 0;  // cap hit with every cut active

    BundleState() = default;
    BundleState(Method m, PriceMatrix center, int num_requests, std::size_t cap);

    std::size_t total_cuts() const;
    std::vector<std::size_t> sizes() const;
    int owner_slot(int owner) const { return owner < 0 ? 0 : owner; }
};

// Moves every cut's foot point to `new_center`; psi += g * (new_center - center).
void refoot_cuts(BundleState& state, const PriceMatrix& new_center,
                 std::span<const double> capacity);

// Serious step: keep cuts with multiplier above the activity tolerance plus
// the new cuts. Null step: keep everything plus the new cuts. `activity` is
// aligned with `state.owners`. A new cut identical to a stored one refreshes
// it instead of being appended. Per-owner overflow evicts the oldest inactive
// cut first, then the oldest cut.
void prune(BundleState& state, std::vector<Cut> new_cuts, bool serious,
           const std::vector<std::vector<double>>& activity);

}  // namespace ttp
