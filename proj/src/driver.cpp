#include "ttp/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>

#include "ttp/error.hpp"

namespace ttp {

const char* to_string(Method m) { return m == Method::Aggregate ? "aggregate" : "disaggregate"; }

Method parse_method(const std::string& name) {
    if (name == "agg" || name == "aggregate") return Method::Aggregate;
    if (name == "disagg" || name == "disaggregate") return Method::Disaggregate;
    throw InputError("method", "unknown method '" + name + "' (expected agg or disagg)");
}

const char* to_string(Termination t) {
    switch (t) {
        case Termination::ToleranceReached: return "ToleranceReached";
        case Termination::IterationLimit: return "IterationLimit";
        case Termination::MasterFailure: return "MasterFailure";
    }
    return "?";
}

const char* to_string(IterationStep s) {
    switch (s) {
        case IterationStep::Initial: return "initial";
        case IterationStep::Serious: return "serious";
        case IterationStep::Null: return "null";
    }
    return "?";
}

namespace {

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw InputError("param/" + key, "expected a number, got '" + value + "'");
    }
}

int parse_int(const std::string& key, const std::string& value) {
    const double v = parse_double(key, value);
    if (std::floor(v) != v || std::abs(v) > 1e9)
        throw InputError("param/" + key, "expected an integer, got '" + value + "'");
    return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true" || value == "on") return true;
    if (value == "0" || value == "false" || value == "off") return false;
    throw InputError("param/" + key, "expected a boolean, got '" + value + "'");
}

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

void set_param(SolverConfig& c, const std::string& key, const std::string& value) {
    if (key == "m_L") c.m_L = parse_double(key, value);
    else if (key == "u0") c.u0 = parse_double(key, value);
    else if (key == "u_min") c.u_min = parse_double(key, value);
    else if (key == "k_max") c.k_max = parse_int(key, value);
    else if (key == "mu0") c.mu0 = parse_double(key, value);
    else if (key == "epsilon") c.epsilon = parse_double(key, value);
    else if (key == "tol_qp") c.tol_qp = parse_double(key, value);
    else if (key == "bundle_cap") c.bundle_cap = parse_int(key, value);
    else if (key == "activity_tolerance") c.activity_tolerance = parse_double(key, value);
    else if (key == "parallel_oracle") c.parallel_oracle = parse_bool(key, value);
    else if (key == "signal_waiting") c.graph.signal_waiting = parse_bool(key, value);
    else if (key == "travel_penalty") c.graph.travel_penalty_per_step = parse_double(key, value);
    else throw InputError("param/" + key, "unknown parameter");
}

void validate(const SolverConfig& c) {
    if (!(c.m_L > 0.0 && c.m_L < 1.0)) throw InputError("param/m_L", "must lie in (0, 1)");
    if (!(c.u_min > 0.0)) throw InputError("param/u_min", "must be positive");
    if (!(c.u0 >= c.u_min)) throw InputError("param/u0", "must be at least u_min");
    if (c.k_max < 0) throw InputError("param/k_max", "must be nonnegative");
    if (!(c.mu0 >= 0.0)) throw InputError("param/mu0", "must be nonnegative");
    if (!(c.epsilon >= 0.0)) throw InputError("param/epsilon", "must be nonnegative");
    if (!(c.tol_qp > 0.0)) throw InputError("param/tol_qp", "must be positive");
    if (c.bundle_cap < 1) throw InputError("param/bundle_cap", "must be at least 1");
    if (!(c.activity_tolerance >= 0.0))
        throw InputError("param/activity_tolerance", "must be nonnegative");
}

std::vector<double> SolveReport::phi_trace() const {
    std::vector<double> t;
    for (const auto& it : iterations) t.push_back(it.candidate_phi);
    return t;
}

namespace {

class PathLog {
public:
    explicit PathLog(std::size_t requests) : seen_(requests), ordered_(requests) {}
    void add(const OracleResult& res) {
        for (std::size_t r = 0; r < res.per_request.size(); ++r) {
            const auto& p = res.per_request[r].best_path;
            if (seen_[r].insert(p).second) ordered_[r].push_back(p);
        }
    }
    std::vector<std::vector<std::vector<int>>> take() { return std::move(ordered_); }

private:
    std::vector<std::set<std::vector<int>>> seen_;
    std::vector<std::vector<std::vector<int>>> ordered_;
};

std::vector<Cut> cuts_from(const OracleResult& res, Method method, const PriceMatrix& mu_l,
                           const PriceMatrix& center, std::span<const double> capacity,
                           int iteration) {
    std::vector<Cut> cuts;
    if (method == Method::Aggregate) {
        SparseVector g = res.total_usage;
        for (double& v : g.value) v = -v;
        cuts.push_back(make_cut(-1, res.phi, std::move(g), true, mu_l, center, capacity, iteration));
    } else {
        for (const auto& rr : res.per_request) {
            SparseVector g = rr.occupancy;
            for (double& v : g.value) v = -v;
            cuts.push_back(
                make_cut(rr.request, rr.phi_r, std::move(g), false, mu_l, center, capacity, iteration));
        }
    }
    return cuts;
}

}  // namespace

SolveReport run(const Instance& instance, const SolverConfig& config) {
    const auto t0 = Clock::now();
    auto graphs = build_all_graphs(instance, config.graph);
    const double build_s = seconds_since(t0);
    SolveReport rep = run(instance, graphs, config);
    rep.timing.graph_build_s = build_s;
    rep.timing.total_s += build_s;
    return rep;
}

SolveReport run(const Instance& instance, const std::vector<MovementGraph>& graphs,
                const SolverConfig& config) {
    validate(config);
    const auto t_start = Clock::now();
    SolveReport rep;
    rep.method = config.method;
    rep.config = config;

    const int B = instance.num_blocks();
    const int T = instance.grid.intervals();
    const std::vector<double> capacity = capacity_vector(instance);
    PathLog paths(graphs.size());

    auto oracle = [&](const PriceMatrix& mu) {
        const auto t = Clock::now();
        OracleResult res = evaluate_dual(graphs, instance, mu, config.parallel_oracle);
        rep.timing.oracle_s += seconds_since(t);
        rep.max_decomposition_residual = std::max(
            rep.max_decomposition_residual, res.decomposition_residual() / (1.0 + std::abs(res.phi)));
        paths.add(res);
        return res;
    };

    PriceMatrix mu0(B, T, config.mu0);
    BundleState state(config.method, mu0, instance.num_requests(),
                      static_cast<std::size_t>(config.bundle_cap));
    state.step.u = config.u0;
    state.step.u_min = config.u_min;
    state.step.m_L = config.m_L;
    state.activity_tolerance = config.activity_tolerance;

    OracleResult res = oracle(mu0);
    state.center_value = res.phi;
    prune(state, cuts_from(res, config.method, mu0, mu0, capacity, 0), false, {});

    double best_phi = res.phi;
    PriceMatrix best_mu = mu0;
    std::vector<std::vector<int>> best_paths;
    for (const auto& rr : res.per_request) best_paths.push_back(rr.best_path);

    IterationRecord init;
    init.k = 0;
    init.phi_center = res.phi;
    init.candidate_phi = res.phi;
    init.u = state.step.u;
    init.bundle_size = state.total_cuts();
    init.model_value_at_y = res.phi;
    rep.iterations.push_back(init);

    rep.termination = Termination::IterationLimit;
    std::vector<double> warm;
    for (int k = 1; k <= config.k_max; ++k) {
        state.iteration = k;
        MasterProblem problem = MasterProblem::from_bundle(state, capacity);
        problem.tol_qp = config.tol_qp;
        problem.warm_start = warm;
        MasterSolution sol;
        const auto tm = Clock::now();
        try {
            sol = solve_master(problem);
        } catch (const MasterFailure& e) {
            rep.master_solves += 1;
            rep.timing.master_s += seconds_since(tm);
            rep.termination = Termination::MasterFailure;
            rep.message = std::string(e.what()) + " (iteration " + std::to_string(k) +
                          ", residual " + std::to_string(e.residual()) + ", u " +
                          std::to_string(state.step.u) + ")";
            break;
        }
        rep.timing.master_s += seconds_since(tm);
        rep.master_solves += 1;

        const double phi_center = state.center_value;
        const double forecast = sol.forecast();
        rep.final_forecast = forecast;
        const double scale = 1.0 + std::abs(phi_center);
        if (forecast < -1e-9 * scale) {
            rep.termination = Termination::MasterFailure;
            rep.message = "negative forecasted descent " + std::to_string(forecast);
            break;
        }
        if (forecast <= config.epsilon * scale) {
            rep.termination = Termination::ToleranceReached;
            break;
        }

        res = oracle(sol.y);
        std::vector<Cut> fresh = cuts_from(res, config.method, sol.y, state.center, capacity, k);
        // How far below phi(center) the new planes sit at the center.
        double fresh_at_center = config.method == Method::Disaggregate ? capacity_dot(instance, state.center) : 0.0;
        for (const Cut& c : fresh) fresh_at_center += c.psi;
        const double lin_error = state.center_value - fresh_at_center;
        const double achieved = sol.model_value_at_center - res.phi;
        const StepType step = descent_test(sol.model_value_at_center, res.phi, sol.model_value_at_y,
                                           config.m_L, 1e-9 * scale);
        const bool serious = step == StepType::Serious;

        if (res.phi < best_phi) {
            best_phi = res.phi;
            best_mu = sol.y;
            best_paths.clear();
            for (const auto& rr : res.per_request) best_paths.push_back(rr.best_path);
        }

        const auto activity = split_multipliers(state, sol.cut_multipliers);
        prune(state, std::move(fresh), serious, activity);
        if (serious) {
            refoot_cuts(state, sol.y, capacity);
            state.center_value = res.phi;
        }
        state.step = update_step_control(state.step, serious, achieved, forecast, lin_error);
        warm.clear();
        for (const auto& list : state.owners)
            for (const Cut& cut : list) warm.push_back(cut.weight);

        IterationRecord rec;
        rec.k = k;
        rec.phi_center = state.center_value;
        rec.candidate_phi = res.phi;
        rec.forecast = forecast;
        rec.achieved = achieved;
        rec.ratio = achieved / forecast;
        rec.step = serious ? IterationStep::Serious : IterationStep::Null;
        rec.u = state.step.u;
        rec.bundle_size = state.total_cuts();
        rec.model_value_at_y = sol.model_value_at_y;
        rec.kkt_residual = sol.kkt_residual;
        rec.master_iterations = sol.iterations;
        rep.iterations.push_back(rec);
    }

    rep.final_phi = best_phi;
    rep.final_mu = std::move(best_mu);
    rep.final_paths = std::move(best_paths);
    rep.generated_paths = paths.take();
    rep.active_evictions = state.active_evictions;
    rep.timing.total_s = seconds_since(t_start);
    return rep;
}

std::vector<std::vector<int>> enumerate_paths(const MovementGraph& graph, std::size_t limit) {
    std::vector<std::vector<int>> out_arcs(graph.nodes.size());
    for (int k = 0; k < graph.num_arcs(); ++k) out_arcs[graph.arcs[k].from].push_back(k);

    std::vector<std::vector<int>> paths;
    std::vector<int> current;
    // Iterative DFS: stack of (node, next outgoing position).
    std::vector<std::pair<int, std::size_t>> stack{{graph.source(), 0}};
    while (!stack.empty()) {
        auto& [node, pos] = stack.back();
        if (node == graph.sink()) {
            paths.push_back(current);
            if (paths.size() > limit)
                throw InputError("graph", "more than " + std::to_string(limit) + " paths");
            stack.pop_back();
            if (!current.empty()) current.pop_back();
            continue;
        }
        if (pos == out_arcs[node].size()) {
            stack.pop_back();
            if (!current.empty()) current.pop_back();
            continue;
        }
        const int arc = out_arcs[node][pos++];
        current.push_back(arc);
        stack.emplace_back(graph.arcs[arc].to, 0);
    }
    return paths;
}

PrimalSolution brute_force_primal(const Instance& instance, const std::vector<MovementGraph>& graphs,
                                  double combination_cap) {
    const std::size_t R = graphs.size();
    struct Candidate {
        double value;
        std::vector<int> arcs;
        SparseVector occ;
    };
    std::vector<std::vector<Candidate>> cands(R);
    double combos = 1.0;
    for (std::size_t r = 0; r < R; ++r) {
        for (auto& p : enumerate_paths(graphs[r], static_cast<std::size_t>(combination_cap))) {
            Candidate c;
            c.value = path_utility(graphs[r], p);
            c.occ = to_sparse(path_occupancy(graphs[r], p));
            c.arcs = std::move(p);
            cands[r].push_back(std::move(c));
        }
        // Highest values first so the bound prunes early.
        std::stable_sort(cands[r].begin(), cands[r].end(),
                         [](const Candidate& a, const Candidate& b) { return a.value > b.value; });
        combos *= static_cast<double>(cands[r].size());
        if (combos > combination_cap)
            throw InputError("brute_force_primal", "path combinations exceed the cap");
    }

    std::vector<double> best_rest(R + 1, 0.0);
    for (std::size_t r = R; r-- > 0;)
        best_rest[r] = best_rest[r + 1] + std::max(0.0, cands[r].front().value);

    const std::vector<double> cap = capacity_vector(instance);
    std::vector<int> usage(cap.size(), 0);
    std::vector<std::size_t> choice(R, 0), best_choice(R, 0);
    double best = -std::numeric_limits<double>::infinity();

    auto fits = [&](const SparseVector& occ) {
        for (std::size_t k = 0; k < occ.nnz(); ++k)
            if (usage[occ.index[k]] + occ.value[k] > cap[occ.index[k]]) return false;
        return true;
    };
    auto apply = [&](const SparseVector& occ, int sign) {
        for (std::size_t k = 0; k < occ.nnz(); ++k)
            usage[occ.index[k]] += sign * static_cast<int>(occ.value[k]);
    };

    auto search = [&](auto&& self, std::size_t r, double value) -> void {
        if (r == R) {
            if (value > best) {
                best = value;
                best_choice = choice;
            }
            return;
        }
        if (value + best_rest[r] <= best) return;
        for (std::size_t i = 0; i < cands[r].size(); ++i) {
            const Candidate& c = cands[r][i];
            if (!fits(c.occ)) continue;
            apply(c.occ, +1);
            choice[r] = i;
            self(self, r + 1, value + c.value);
            apply(c.occ, -1);
        }
    };
    search(search, 0, 0.0);

    PrimalSolution sol;
    sol.best_value = best;
    for (std::size_t r = 0; r < R; ++r) sol.assignment.push_back(cands[r][best_choice[r]].arcs);
    return sol;
}

int iterations_to_within(const std::vector<double>& trace, double bound, double rel_tol) {
    double running = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < trace.size(); ++k) {
        running = std::min(running, trace[k]);
        if (running - bound <= rel_tol * std::abs(bound)) return static_cast<int>(k);
    }
    return -1;
}

namespace {

MethodSummary summarize(const SolveReport& rep, double bound, double rel_tol) {
    MethodSummary s;
    s.iterations_to_target = iterations_to_within(rep.phi_trace(), bound, rel_tol);
    for (const auto& p : rep.generated_paths) s.paths_per_request.push_back(p.size());
    if (!s.paths_per_request.empty())
        s.mean_paths = static_cast<double>(std::accumulate(s.paths_per_request.begin(),
                                                           s.paths_per_request.end(), std::size_t{0})) /
                       static_cast<double>(s.paths_per_request.size());
    return s;
}

}  // namespace

ComparisonReport compare(const Instance& instance, const SolverConfig& base_config) {
    const auto t0 = Clock::now();
    const auto graphs = build_all_graphs(instance, base_config.graph);
    const double build_s = seconds_since(t0);

    ComparisonReport cmp;
    SolverConfig cfg = base_config;
    cfg.method = Method::Aggregate;
    cmp.aggregate = run(instance, graphs, cfg);
    cfg.method = Method::Disaggregate;
    cmp.disaggregate = run(instance, graphs, cfg);
    cmp.aggregate.timing.graph_build_s = build_s;
    cmp.disaggregate.timing.graph_build_s = build_s;

    cmp.best_bound = std::min(cmp.aggregate.final_phi, cmp.disaggregate.final_phi);
    cmp.aggregate_summary = summarize(cmp.aggregate, cmp.best_bound, cmp.target_tolerance);
    cmp.disaggregate_summary = summarize(cmp.disaggregate, cmp.best_bound, cmp.target_tolerance);
    const int ka = cmp.aggregate_summary.iterations_to_target;
    const int kd = cmp.disaggregate_summary.iterations_to_target;
    cmp.iteration_ratio = ka > 0 && kd >= 0 ? static_cast<double>(kd) / ka : (kd == ka ? 1.0 : 0.0);
    return cmp;
}

}  // namespace ttp
