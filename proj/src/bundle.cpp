#include "ttp/bundle.hpp"

#include <algorithm>
#include <cmath>

#include "ttp/error.hpp"

namespace ttp {

namespace {

double dense_dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

std::vector<double> difference(const PriceMatrix& a, const PriceMatrix& b) {
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.values()[i] - b.values()[i];
    return d;
}

// b <- (w_a a + w_b b) / (w_a + w_b), equal weights when both are zero.
void fold_into(Cut& b, const Cut& a) {
    double wa = a.weight, wb = b.weight;
    if (!(wa + wb > 0.0)) wa = wb = 0.5;
    const double ta = wa / (wa + wb), tb = wb / (wa + wb);
    SparseVector merged;
    std::size_t i = 0, j = 0;
    while (i < a.sparse.nnz() || j < b.sparse.nnz()) {
        const bool take_a = j == b.sparse.nnz() ||
                            (i < a.sparse.nnz() && a.sparse.index[i] < b.sparse.index[j]);
        const bool take_b = i == a.sparse.nnz() ||
                            (j < b.sparse.nnz() && b.sparse.index[j] < a.sparse.index[i]);
        if (take_a) {
            merged.index.push_back(a.sparse.index[i]);
            merged.value.push_back(ta * a.sparse.value[i++]);
        } else if (take_b) {
            merged.index.push_back(b.sparse.index[j]);
            merged.value.push_back(tb * b.sparse.value[j++]);
        } else {
            merged.index.push_back(a.sparse.index[i]);
            merged.value.push_back(ta * a.sparse.value[i++] + tb * b.sparse.value[j++]);
        }
    }
    b.sparse = std::move(merged);
    b.psi = ta * a.psi + tb * b.psi;
    b.weight = wa + wb;
    b.birth_iteration = std::min(a.birth_iteration, b.birth_iteration);
    b.last_fresh = std::min(a.last_fresh, b.last_fresh);
    b.active = true;
}

}  // namespace

const char* to_string(StepType s) { return s == StepType::Serious ? "serious" : "null"; }

Cut make_cut(int owner, double value_at_mu_l, SparseVector sparse, bool capacity_term,
             const PriceMatrix& mu_l, const PriceMatrix& center, std::span<const double> capacity,
             int iteration) {
    if (!mu_l.same_shape(center) || capacity.size() != center.size())
        throw InputError("cut", "dimension mismatch between multipliers and capacity");
    Cut cut;
    cut.owner = owner;
    cut.capacity_term = capacity_term;
    cut.sparse = std::move(sparse);
    cut.birth_iteration = iteration;
    cut.last_fresh = iteration;
    if (mu_l == center) {
        cut.psi = value_at_mu_l;
        return cut;
    }
    const auto diff = difference(center, mu_l);
    const double cdot = capacity_term ? dense_dot(capacity, diff) : 0.0;
    cut.psi = value_at_mu_l + cut.dot(diff, cdot);
    return cut;
}

StepType descent_test(double center_model_value, double candidate_true_value,
                      double candidate_model_value, double m_L, double tolerance) {
    const double forecasted = center_model_value - candidate_model_value;
    if (forecasted < -tolerance)
        throw MasterFailure("negative forecasted descent", forecasted);
    const double achieved = center_model_value - candidate_true_value;
    return achieved >= m_L * forecasted ? StepType::Serious : StepType::Null;
}

StepControl update_step_control(const StepControl& step, bool serious, double achieved,
                                double forecasted, double linearization_error) {
    StepControl next = step;
    const double ratio = forecasted > 0.0 ? achieved / forecasted : 0.0;
    double u = step.u * std::clamp(2.0 * (1.0 - ratio), 0.1, 10.0);
    // Serious steps only ever relax the weight, null steps only tighten it.
    if (serious) u = std::min(u, step.u);
    else u = linearization_error > 10.0 * forecasted ? std::max(u, step.u) : step.u;
    next.u = std::max(step.u_min, u);
    return next;
}

BundleState::BundleState(Method m, PriceMatrix c, int num_requests, std::size_t cap)
    : method(m), center(std::move(c)), cap_per_owner(cap) {
    owners.resize(m == Method::Aggregate ? 1 : static_cast<std::size_t>(num_requests));
}

std::size_t BundleState::total_cuts() const {
    std::size_t n = 0;
    for (const auto& o : owners) n += o.size();
    return n;
}

std::vector<std::size_t> BundleState::sizes() const {
    std::vector<std::size_t> s;
    for (const auto& o : owners) s.push_back(o.size());
    return s;
}

void refoot_cuts(BundleState& state, const PriceMatrix& new_center,
                 std::span<const double> capacity) {
    if (new_center == state.center) return;
    const auto diff = difference(new_center, state.center);
    const double cdot = dense_dot(capacity, diff);
    for (auto& list : state.owners)
        for (Cut& cut : list) cut.psi += cut.dot(diff, cdot);
    state.center = new_center;
}

void prune(BundleState& state, std::vector<Cut> new_cuts, bool serious,
           const std::vector<std::vector<double>>& activity) {
    const int it = state.iteration;
    for (std::size_t o = 0; o < state.owners.size(); ++o) {
        auto& list = state.owners[o];
        for (std::size_t k = 0; k < list.size(); ++k) {
            const double lambda = o < activity.size() && k < activity[o].size() ? activity[o][k] : 0.0;
            list[k].active = lambda > state.activity_tolerance;
            list[k].weight = lambda;
        }
    }

    for (Cut& cut : new_cuts) {
        auto& list = state.owners[state.owner_slot(cut.owner)];
        auto dup = std::find_if(list.begin(), list.end(), [&](const Cut& c) {
            return c.capacity_term == cut.capacity_term && c.sparse == cut.sparse;
        });
        if (dup != list.end()) {
            dup->psi = std::max(dup->psi, cut.psi);
            dup->last_fresh = it;
            continue;
        }
        cut.last_fresh = it;
        cut.active = false;
        cut.weight = 0.0;
        list.push_back(std::move(cut));
    }

    for (auto& list : state.owners) {
        if (serious) {
            std::erase_if(list, [&](const Cut& c) { return !c.active && c.last_fresh != it; });
        }
        while (list.size() > state.cap_per_owner) {
            auto older = [](const Cut& a, const Cut& b) {
                return a.last_fresh != b.last_fresh ? a.last_fresh < b.last_fresh
                                                    : a.birth_iteration < b.birth_iteration;
            };
            auto victim = list.end();
            for (auto c = list.begin(); c != list.end(); ++c) {
                if (c->active || c->last_fresh == it) continue;
                if (victim == list.end() || older(*c, *victim)) victim = c;
            }
            if (victim == list.end()) {
                // Every stored cut is active: fold the two oldest into their
                // multiplier-weighted combination, which is still a minorant.
                ++state.active_evictions;
                auto first = list.end(), second = list.end();
                for (auto c = list.begin(); c != list.end(); ++c) {
                    if (c->last_fresh == it) continue;
                    if (first == list.end() || older(*c, *first)) {
                        second = first;
                        first = c;
                    } else if (second == list.end() || older(*c, *second)) {
                        second = c;
                    }
                }
                if (second == list.end()) break;  // only fresh cuts left
                fold_into(*second, *first);
                list.erase(first);
                continue;
            }
            list.erase(victim);
        }
    }
}

}  // namespace ttp
