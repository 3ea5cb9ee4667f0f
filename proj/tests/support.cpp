#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace ttp::testing {

Instance corridor(int signalling, int step_s, int horizon_s) {
    Instance inst;
    inst.grid.step_s = step_s;
    inst.grid.horizon_s = horizon_s;
    inst.rules = Rules{60, 60, 30, 30};
    const int n = signalling + 2;
    for (int b = 0; b < n; ++b) {
        Block blk;
        blk.id = b;
        const bool station = b == 0 || b == n - 1;
        blk.kind = station ? BlockKind::Station : BlockKind::Signalling;
        blk.capacity = station ? 2 : 1;
        blk.nominal_traversal_s = station ? 60 : 120;
        inst.blocks.push_back(blk);
    }
    return inst;
}

TrainRequest request_up(const Instance& inst, int id, int ideal_s, int half_s, int latest_s,
                        double peak) {
    TrainRequest q;
    q.id = id;
    q.origin = 0;
    q.destination = inst.num_blocks() - 1;
    q.direction = Direction::Up;
    q.ideal_departure_s = ideal_s;
    q.departure_window_half_s = half_s;
    q.latest_arrival_s = latest_s;
    q.peak_value = peak;
    return q;
}

double path_combinations(const std::vector<MovementGraph>& graphs) {
    double combos = 1.0;
    for (const auto& g : graphs) {
        // Path counts by DP over the topological arc order.
        std::vector<double> count(g.nodes.size(), 0.0);
        count[g.source()] = 1.0;
        for (const auto& a : g.arcs) count[a.to] += count[a.from];
        combos *= count[g.sink()];
    }
    return combos;
}

Instance tiny_instance(std::uint64_t seed, int max_requests, double combo_cap) {
    std::mt19937_64 rng(seed);
    for (int attempt = 0;; ++attempt) {
        const int blocks = 3 + static_cast<int>(rng() % 4);  // 3..6
        const int stations = blocks >= 5 ? 2 + static_cast<int>(rng() % 2) : 2;
        const int requests = 2 + static_cast<int>(rng() % (max_requests - 1));
        Overrides ov{{"stations", stations},
                     {"blocks", blocks},
                     {"step_s", 60},
                     {"horizon_s", 5400 + 60 * static_cast<int>(rng() % 31)},
                     {"requests", requests},
                     {"passenger", static_cast<double>(rng() % 2)},
                     {"window_half_s", 240 + 60 * static_cast<int>(rng() % 3)},
                     {"arrival_slack_s", 300 + 60 * static_cast<int>(rng() % 4)},
                     {"min_dwell_s", 60},
                     {"headway_s", 120},
                     {"signal_time_min_s", 120},
                     {"signal_time_max_s", 240},
                     {"station_time_min_s", 60},
                     {"station_time_max_s", 120},
                     {"terminal_capacity", 1 + static_cast<double>(rng() % 2)},
                     {"station_capacity", 1}};
        Instance inst = generate_instance(Template::Custom, seed * 1000 + attempt, ov);
        // Squeeze departures together so the requests actually compete.
        const int base = inst.requests.front().ideal_departure_s;
        for (auto& q : inst.requests) {
            const int shift = static_cast<int>(rng() % 5) * 60;
            const int delta = std::min(base + shift, q.ideal_departure_s) - q.ideal_departure_s;
            q.ideal_departure_s += delta;
            q.latest_arrival_s += delta;
        }
        validate(inst);
        if (path_combinations(build_all_graphs(inst)) <= combo_cap) return inst;
    }
}

Instance desk_instance(std::uint64_t seed) {
    const int requests = 8 + static_cast<int>(seed % 5);
    Overrides ov{{"horizon_s", 4 * 3600}, {"requests", requests}, {"passenger", 2}};
    return generate_instance(Template::S1, seed, ov);
}

double reduced_value(const MovementGraph& graph, const std::vector<int>& path,
                     const PriceMatrix& mu) {
    // Same operation order as a forward pass so exact ties stay exact.
    double acc = 0.0;
    const auto prices = mu.values();
    for (int a : path) {
        double cost = graph.arcs[a].value;
        for (Cell c : graph.occupation(a)) cost -= prices[c];
        acc = acc + cost;
    }
    return acc;
}

namespace {

// True if `a` should be preferred over `b` when both are optimal.
bool tie_prefers(const MovementGraph& g, const std::vector<int>& a, const std::vector<int>& b) {
    std::size_t ia = a.size(), ib = b.size();
    while (ia > 0 && ib > 0 && a[ia - 1] == b[ib - 1]) {
        --ia;
        --ib;
    }
    if (ia == 0 || ib == 0) return false;  // identical
    const int x = a[ia - 1], y = b[ib - 1];
    const int tx = g.node_time(g.arcs[x].from), ty = g.node_time(g.arcs[y].from);
    return tx < ty || (tx == ty && x < y);
}

}  // namespace

ExhaustiveBest exhaustive_best_path(const MovementGraph& graph, const PriceMatrix& mu,
                                    double tie_tol) {
    std::vector<std::vector<int>> out(graph.nodes.size());
    for (int k = 0; k < graph.num_arcs(); ++k) out[graph.arcs[k].from].push_back(k);

    ExhaustiveBest best;
    best.value = -std::numeric_limits<double>::infinity();
    std::vector<int> path;
    std::function<void(int)> dfs = [&](int node) {
        if (node == graph.sink()) {
            ++best.paths;
            const double v = reduced_value(graph, path, mu);
            if (v > best.value + tie_tol ||
                (std::abs(v - best.value) <= tie_tol && tie_prefers(graph, path, best.arcs))) {
                best.value = std::max(v, best.value);
                best.arcs = path;
            }
            return;
        }
        for (int a : out[node]) {
            path.push_back(a);
            dfs(graph.arcs[a].to);
            path.pop_back();
        }
    };
    dfs(graph.source());
    best.value = reduced_value(graph, best.arcs, mu);
    return best;
}

PriceMatrix random_prices(int blocks, int intervals, std::mt19937_64& rng, double scale) {
    PriceMatrix mu(blocks, intervals);
    auto v = mu.values();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (rng() % 2 == 0) {
        for (double& x : v) x = unit(rng) < 0.5 ? 0.0 : scale * unit(rng);
    } else {
        // Eighths keep every sum exact, so ties really are ties.
        const std::size_t spikes = 1 + rng() % 20;
        for (std::size_t k = 0; k < spikes; ++k)
            v[rng() % v.size()] = static_cast<double>(rng() % static_cast<std::uint64_t>(8 * scale + 1)) / 8.0;
    }
    return mu;
}

double dense_plane(double value_l, const std::vector<double>& g, const PriceMatrix& mu_l,
                   const PriceMatrix& at) {
    double acc = value_l;
    for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * (at.values()[i] - mu_l.values()[i]);
    return acc;
}

std::vector<double> densify(const SparseVector& v, std::size_t n, double shift,
                            const std::vector<double>* capacity) {
    std::vector<double> d(n, shift);
    if (capacity)
        for (std::size_t i = 0; i < n; ++i) d[i] += (*capacity)[i];
    for (std::size_t k = 0; k < v.nnz(); ++k) d[v.index[k]] += v.value[k];
    return d;
}

std::vector<double> project_simplex(std::vector<double> v) {
    std::vector<double> s = v;
    std::sort(s.begin(), s.end(), std::greater<>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        cum += s[k];
        const double t = (cum - 1.0) / static_cast<double>(k + 1);
        if (k + 1 == s.size() || s[k + 1] <= t) {
            theta = t;
            break;
        }
    }
    for (double& x : v) x = std::max(0.0, x - theta);
    return v;
}

FistaResult fista_master(const MasterProblem& p, double tol, int max_iterations) {
    const std::size_t n = p.center->size();
    const int m = static_cast<int>(p.cuts.size());
    const auto mu = p.center->values();
    const bool dis = p.mode == Method::Disaggregate;
    std::vector<double> cap(p.capacity.begin(), p.capacity.end());

    std::vector<std::vector<double>> G(m);
    double frob = 0.0;
    for (int j = 0; j < m; ++j) {
        G[j] = densify(*p.cuts[j].sparse, n, 0.0, p.cuts[j].capacity_term ? &cap : nullptr);
        for (double x : G[j]) frob += x * x;
    }
    const double L = std::max(frob / p.u, 1e-12);

    auto recover = [&](const std::vector<double>& lam, std::vector<double>& y) {
        y.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double w = dis ? cap[i] : 0.0;
            for (int j = 0; j < m; ++j) w += lam[j] * G[j][i];
            y[i] = std::max(0.0, mu[i] - w / p.u);
        }
    };
    auto primal = [&](const std::vector<double>& y) {
        std::vector<double> best(p.groups, -std::numeric_limits<double>::infinity());
        for (int j = 0; j < m; ++j) {
            double v = p.cuts[j].psi;
            for (std::size_t i = 0; i < n; ++i) v += G[j][i] * (y[i] - mu[i]);
            best[p.cuts[j].group] = std::max(best[p.cuts[j].group], v);
        }
        double obj = std::accumulate(best.begin(), best.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (dis) obj += cap[i] * y[i];
            obj += 0.5 * p.u * (y[i] - mu[i]) * (y[i] - mu[i]);
        }
        return obj;
    };
    auto dual = [&](const std::vector<double>& lam, const std::vector<double>& y,
                    std::vector<double>* grad) {
        double val = 0.0;
        if (grad) grad->assign(m, 0.0);
        for (int j = 0; j < m; ++j) {
            double gj = p.cuts[j].psi;
            for (std::size_t i = 0; i < n; ++i) gj += G[j][i] * (y[i] - mu[i]);
            val += lam[j] * gj;
            if (grad) (*grad)[j] = gj;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (dis) val += cap[i] * y[i];
            val += 0.5 * p.u * (y[i] - mu[i]) * (y[i] - mu[i]);
        }
        return val;
    };
    auto project = [&](std::vector<double> lam) {
        for (int g = 0; g < p.groups; ++g) {
            std::vector<int> idx;
            std::vector<double> v;
            for (int j = 0; j < m; ++j)
                if (p.cuts[j].group == g) {
                    idx.push_back(j);
                    v.push_back(lam[j]);
                }
            v = project_simplex(v);
            for (std::size_t k = 0; k < idx.size(); ++k) lam[idx[k]] = v[k];
        }
        return lam;
    };

    std::vector<double> lam(m, 0.0);
    for (int g = 0; g < p.groups; ++g) {
        int cnt = 0;
        for (int j = 0; j < m; ++j) cnt += p.cuts[j].group == g;
        for (int j = 0; j < m; ++j)
            if (p.cuts[j].group == g) lam[j] = 1.0 / cnt;
    }
    std::vector<double> z = lam, y, grad;
    double t = 1.0;
    FistaResult res;
    for (int it = 0; it < max_iterations; ++it) {
        recover(z, y);
        dual(z, y, &grad);
        std::vector<double> next(m);
        for (int j = 0; j < m; ++j) next[j] = z[j] + grad[j] / L;
        next = project(next);
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        for (int j = 0; j < m; ++j) z[j] = next[j] + (t - 1.0) / tn * (next[j] - lam[j]);
        lam = next;
        t = tn;
        res.iterations = it + 1;
        if (it % 50 == 0) {
            std::vector<double> yl;
            recover(lam, yl);
            const double P = primal(yl), D = dual(lam, yl, nullptr);
            if (P - D <= tol * (1.0 + std::abs(P))) break;
        }
    }
    recover(lam, y);
    res.objective = primal(y);
    res.y = PriceMatrix(p.center->blocks(), p.center->intervals());
    std::copy(y.begin(), y.end(), res.y.values().begin());
    return res;
}

MasterProblem MasterCase::problem(Method m) const {
    MasterProblem p =
        MasterProblem::from_bundle(m == Method::Aggregate ? aggregate : disaggregate, capacity);
    p.u = u;
    p.tol_qp = 1e-12;
    return p;
}

std::unique_ptr<MasterCase> master_case(std::uint64_t seed, int iterates) {
    auto mc = std::make_unique<MasterCase>();
    std::mt19937_64 rng(seed);
    mc->instance = tiny_instance(seed, 4, 1e9);
    mc->graphs = build_all_graphs(mc->instance);
    mc->capacity = capacity_vector(mc->instance);
    const int B = mc->instance.num_blocks(), T = mc->instance.grid.intervals();
    const int R = mc->instance.num_requests();
    const double scales[] = {0.1, 1.0, 10.0};
    mc->u = scales[rng() % 3];

    PriceMatrix center = random_prices(B, T, rng, 20);
    mc->aggregate = BundleState(Method::Aggregate, center, R, 1000);
    mc->disaggregate = BundleState(Method::Disaggregate, center, R, 1000);
    for (int l = 0; l < iterates; ++l) {
        PriceMatrix at = l == 0 ? center : random_prices(B, T, rng, 20 + 10 * l);
        OracleResult res = evaluate_dual(mc->graphs, mc->instance, at);
        SparseVector neg = res.total_usage;
        for (double& v : neg.value) v = -v;
        prune(mc->aggregate, {make_cut(-1, res.phi, neg, true, at, center, mc->capacity, l)}, false,
              {});
        std::vector<Cut> per;
        for (int r = 0; r < R; ++r) {
            SparseVector d = res.per_request[r].occupancy;
            for (double& v : d.value) v = -v;
            per.push_back(make_cut(r, res.per_request[r].phi_r, d, false, at, center, mc->capacity, l));
        }
        prune(mc->disaggregate, std::move(per), false, {});
        mc->iterates.push_back(std::move(at));
        mc->results.push_back(std::move(res));
    }
    return mc;
}

double dense_aggregate_model(const MasterCase& mc, const PriceMatrix& mu) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < mc.results.size(); ++l) {
        const auto g = mc.results[l].aggregate_subgradient(mc.instance);
        best = std::max(best, dense_plane(mc.results[l].phi, g, mc.iterates[l], mu));
    }
    return best;
}

double dense_disaggregate_model(const MasterCase& mc, const PriceMatrix& mu) {
    double total = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) total += mc.capacity[i] * mu.values()[i];
    for (int r = 0; r < mc.instance.num_requests(); ++r) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t l = 0; l < mc.results.size(); ++l) {
            const auto& rr = mc.results[l].per_request[r];
            auto g = densify(rr.occupancy, mu.size());
            for (double& x : g) x = -x;
            best = std::max(best, dense_plane(rr.phi_r, g, mc.iterates[l], mu));
        }
        total += best;
    }
    return total;
}

}  // namespace ttp::testing
