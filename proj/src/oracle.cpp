#include "ttp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "ttp/error.hpp"

namespace ttp {

BestPath best_path(const MovementGraph& graph, const PriceMatrix& mu) {
    if (static_cast<int>(mu.intervals()) != graph.intervals)
        throw InputError("mu", "price matrix does not match the graph's time grid");
    if (!mu.nonnegative()) throw InputError("mu", "prices must be nonnegative");

    const auto n = graph.nodes.size();
    constexpr double kNone = -std::numeric_limits<double>::infinity();
    std::vector<double> label(n, kNone);
    std::vector<int> pred(n, -1);
    label[graph.source()] = 0.0;
    const auto prices = mu.values();

    for (int k = 0; k < graph.num_arcs(); ++k) {
        const MovementArc& a = graph.arcs[k];
        if (label[a.from] == kNone) continue;
        double cost = a.value;
        for (Cell c : graph.occupation(k)) cost -= prices[c];
        const double cand = label[a.from] + cost;
        const int best = pred[a.to];
        bool take = cand > label[a.to];
        if (!take && cand == label[a.to] && best >= 0) {
            const int ta = graph.node_time(a.from);
            const int tb = graph.node_time(graph.arcs[best].from);
            take = ta < tb || (ta == tb && k < best);
        }
        if (take) {
            label[a.to] = cand;
            pred[a.to] = k;
        }
    }

    BestPath out;
    out.reduced_value = label[graph.sink()];
    for (int node = graph.sink(); node != graph.source();) {
        const int a = pred[node];
        out.arcs.push_back(a);
        node = graph.arcs[a].from;
    }
    std::reverse(out.arcs.begin(), out.arcs.end());
    return out;
}

std::vector<double> capacity_vector(const Instance& instance) {
    const int T = instance.grid.intervals();
    std::vector<double> c(static_cast<std::size_t>(instance.num_blocks()) * T);
    for (int b = 0; b < instance.num_blocks(); ++b)
        std::fill_n(c.begin() + static_cast<std::ptrdiff_t>(b) * T, T,
                    static_cast<double>(instance.blocks[b].capacity));
    return c;
}

double capacity_dot(const Instance& instance, const PriceMatrix& mu) {
    const int T = instance.grid.intervals();
    double total = 0.0;
    for (int b = 0; b < instance.num_blocks(); ++b) {
        double row = 0.0;
        for (int t = 0; t < T; ++t) row += mu(b, t);
        total += instance.blocks[b].capacity * row;
    }
    return total;
}

SparseVector to_sparse(const PathOccupancy& occ) {
    SparseVector v;
    v.index.reserve(occ.size());
    v.value.reserve(occ.size());
    for (const auto& [cell, count] : occ) {
        v.index.push_back(cell);
        v.value.push_back(count);
    }
    return v;
}

namespace {

RequestResult solve_request(const MovementGraph& graph, const PriceMatrix& mu) {
    RequestResult rr;
    rr.request = graph.request;
    BestPath bp = best_path(graph, mu);
    rr.phi_r = bp.reduced_value;
    rr.occupancy = to_sparse(path_occupancy(graph, bp.arcs));
    rr.best_path = std::move(bp.arcs);
    return rr;
}

}  // namespace

OracleResult evaluate_dual(const std::vector<MovementGraph>& graphs, const Instance& instance,
                           const PriceMatrix& mu, bool parallel) {
    if (graphs.size() != instance.requests.size())
        throw InputError("graphs", "need exactly one graph per request");
    if (mu.blocks() != instance.num_blocks() || mu.intervals() != instance.grid.intervals())
        throw InputError("mu", "price matrix dimensions do not match the instance");

    OracleResult out;
    out.per_request.resize(graphs.size());
    const std::size_t workers =
        parallel ? std::max<std::size_t>(1, std::min<std::size_t>(
                                                std::thread::hardware_concurrency(), graphs.size()))
                 : 1;
    if (workers <= 1) {
        for (std::size_t r = 0; r < graphs.size(); ++r)
            out.per_request[r] = solve_request(graphs[r], mu);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t r = w; r < graphs.size(); r += workers)
                        out.per_request[r] = solve_request(graphs[r], mu);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    // Fixed summation order regardless of how the slots were filled.
    out.capacity_term = capacity_dot(instance, mu);
    double sum_r = 0.0;
    for (const auto& rr : out.per_request) sum_r += rr.phi_r;
    out.phi = sum_r + out.capacity_term;

    PathOccupancy total;
    for (const auto& rr : out.per_request)
        for (std::size_t k = 0; k < rr.occupancy.nnz(); ++k)
            total[rr.occupancy.index[k]] += static_cast<int>(rr.occupancy.value[k]);
    out.total_usage = to_sparse(total);
    return out;
}

std::vector<double> OracleResult::aggregate_subgradient(const Instance& instance) const {
    std::vector<double> g = capacity_vector(instance);
    for (std::size_t k = 0; k < total_usage.nnz(); ++k)
        g[total_usage.index[k]] -= total_usage.value[k];
    return g;
}

double OracleResult::decomposition_residual() const {
    double sum_r = 0.0;
    for (const auto& rr : per_request) sum_r += rr.phi_r;
    return std::abs(phi - sum_r - capacity_term);
}

}  // namespace ttp
