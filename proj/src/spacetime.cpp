#include "ttp/spacetime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ttp/error.hpp"

namespace ttp {

const char* to_string(ArcKind kind) {
    switch (kind) {
        case ArcKind::Traverse: return "traverse";
        case ArcKind::Dwell: return "dwell";
        case ArcKind::Source: return "source";
        case ArcKind::Sink: return "sink";
        case ArcKind::Null: return "null";
    }
    return "?";
}

const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::FF: return "FF";
        case Scenario::SF: return "SF";
        case Scenario::FS: return "FS";
        case Scenario::SS: return "SS";
        case Scenario::None: return "-";
    }
    return "?";
}

const char* to_string(NodeState s) { return s == NodeState::Stopped ? "S" : "F"; }

int MovementGraph::node_time(int node) const {
    if (node == source()) return -1;
    if (node == sink()) return intervals;
    return nodes[node].time;
}

namespace {

constexpr int kUnreachable = std::numeric_limits<int>::max() / 4;

struct Durations {
    int ff = 0, sf = 0, fs = 0, ss = 0;
};

// Target of an arc before node indices are assigned.
struct PendingTarget {
    int pos = -1;  // -1 means sink
    int time = 0;
    NodeState state = NodeState::FullSpeed;
};

class GraphBuilder {
public:
    GraphBuilder(const Instance& inst, const TrainRequest& req, const GraphOptions& opt)
        : inst_(inst), req_(req), opt_(opt), grid_(inst.grid) {
        route_ = route_blocks(inst, req);
        n_ = static_cast<int>(route_.size());
        T_ = grid_.intervals();
        dwell_ = grid_.steps_ceil(inst.rules.min_dwell_s);
        headway_ = grid_.steps_ceil(inst.rules.headway_s);
        last_ = std::min(req.latest_arrival_s / grid_.step_s, T_ - 1);

        station_.resize(n_);
        compulsory_.assign(n_, false);
        dur_.resize(n_);
        for (int p = 0; p < n_; ++p) {
            const Block& b = inst.blocks[route_[p]];
            station_[p] = b.kind == BlockKind::Station;
            const int a = inst.rules.accel_penalty_s;
            const int d = inst.rules.decel_penalty_s;
            dur_[p].ff = grid_.steps_ceil(b.nominal_traversal_s);
            dur_[p].sf = grid_.steps_ceil(b.nominal_traversal_s + a);
            dur_[p].fs = grid_.steps_ceil(b.nominal_traversal_s + d);
            dur_[p].ss = grid_.steps_ceil(b.nominal_traversal_s + a + d);
        }
        for (int stop : req.compulsory_stops) {
            auto it = std::find(route_.begin(), route_.end(), stop);
            if (it != route_.end()) compulsory_[it - route_.begin()] = true;
        }
        remaining_times();
    }

    MovementGraph build() {
        MovementGraph g;
        g.request = req_.id;
        g.intervals = T_;
        g.nodes.push_back(NodeId{-1, -1, NodeState::FullSpeed});

        const int horizon = std::max(0, last_ + 1);
        reach_f_.assign(static_cast<std::size_t>(n_) * horizon, -2);
        reach_s_.assign(static_cast<std::size_t>(n_) * horizon, -2);

        // Null arc first: source -> sink, no occupation.
        emit(g, 0, {-1, 0, NodeState::FullSpeed}, ArcKind::Null, Scenario::None, 0.0, {});
        g.null_arc = 0;

        const int step = grid_.step_s;
        const int half = req_.departure_window_half_s;
        const int first = std::max(0, ceil_div(req_.ideal_departure_s - half, step));
        const int lastdep = std::min(T_ - 1, floor_div(req_.ideal_departure_s + half, step));
        for (int t = first; t <= lastdep; ++t) {
            if (t + rem_s_[0] > last_) continue;
            mark(0, t, NodeState::Stopped);
            emit(g, 0, {0, t, NodeState::Stopped}, ArcKind::Source, Scenario::None,
                 path_value(req_, static_cast<double>(t) * step), {});
        }

        for (int t = 0; t <= last_; ++t) {
            for (int p = 0; p < n_; ++p) {
                if (reached(p, t, NodeState::FullSpeed)) expand_full(g, p, t);
                if (reached(p, t, NodeState::Stopped)) expand_stopped(g, p, t);
            }
        }
        const int sink = static_cast<int>(g.nodes.size());
        g.nodes.push_back(NodeId{-1, T_, NodeState::Stopped});

        for (std::size_t k = 0; k < g.arcs.size(); ++k) {
            const PendingTarget& tgt = targets_[k];
            g.arcs[k].to = tgt.pos < 0 ? sink : index_of(tgt.pos, tgt.time, tgt.state);
        }
        if (!g.has_real_path())
            g.warnings.push_back("request " + std::to_string(req_.id) +
                                 ": no feasible departure; only the null path exists");
        return g;
    }

private:
    static int ceil_div(int a, int b) { return a >= 0 ? (a + b - 1) / b : -((-a) / b); }
    static int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

    void remaining_times() {
        rem_f_.assign(n_, kUnreachable);
        rem_s_.assign(n_, kUnreachable);
        rem_s_[n_ - 1] = 0;
        rem_f_[n_ - 1] = dur_[n_ - 1].fs;
        for (int p = n_ - 2; p >= 0; --p) {
            const int next = p + 1;
            int best = kUnreachable;
            if (next == n_ - 1) {
                best = dur_[next].ss;
            } else {
                if (!compulsory_[next]) best = std::min(best, dur_[next].sf + rem_f_[next + 1]);
                if (station_[next]) best = std::min(best, dur_[next].ss + dwell_ + rem_s_[next]);
            }
            rem_s_[p] = best;
            if (p == 0) continue;
            best = kUnreachable;
            if (!compulsory_[p]) best = std::min(best, dur_[p].ff + rem_f_[p + 1]);
            if (station_[p]) best = std::min(best, dur_[p].fs + dwell_ + rem_s_[p]);
            rem_f_[p] = best;
        }
    }

    std::size_t slot(int p, int t) const {
        return static_cast<std::size_t>(p) * (last_ + 1) + t;
    }
    bool reached(int p, int t, NodeState s) const {
        const auto& v = s == NodeState::Stopped ? reach_s_ : reach_f_;
        return v[slot(p, t)] != -2;
    }
    void mark(int p, int t, NodeState s) {
        auto& v = s == NodeState::Stopped ? reach_s_ : reach_f_;
        if (v[slot(p, t)] == -2) v[slot(p, t)] = -1;
    }
    int index_of(int p, int t, NodeState s) const {
        const auto& v = s == NodeState::Stopped ? reach_s_ : reach_f_;
        return v[slot(p, t)];
    }
    int add_node(MovementGraph& g, int p, int t, NodeState s) {
        auto& v = s == NodeState::Stopped ? reach_s_ : reach_f_;
        const int idx = static_cast<int>(g.nodes.size());
        v[slot(p, t)] = idx;
        g.nodes.push_back(NodeId{route_[p], t, s});
        return idx;
    }

    struct Span {
        int pos, begin, end;
    };

    void emit(MovementGraph& g, int from, PendingTarget to, ArcKind kind, Scenario sc,
              double value, std::initializer_list<Span> occ) {
        MovementArc arc;
        arc.from = from;
        arc.kind = kind;
        arc.scenario = sc;
        arc.value = value;
        arc.occ_begin = static_cast<std::uint32_t>(g.occupation_pool.size());
        std::vector<Cell> cells;
        for (const Span& s : occ) {
            for (int t = s.begin; t < std::min(s.end, T_); ++t)
                cells.push_back(static_cast<Cell>(route_[s.pos] * T_ + t));
        }
        std::sort(cells.begin(), cells.end());
        g.occupation_pool.insert(g.occupation_pool.end(), cells.begin(), cells.end());
        arc.occ_end = static_cast<std::uint32_t>(g.occupation_pool.size());
        g.arcs.push_back(arc);
        targets_.push_back(to);
        if (to.pos >= 0) mark(to.pos, to.time, to.state);
    }

    double travel_penalty(int steps) const { return -opt_.travel_penalty_per_step * steps; }

    void expand_full(MovementGraph& g, int p, int t) {
        const int from = add_node(g, p, t, NodeState::FullSpeed);
        const Durations& d = dur_[p];
        const int h = headway_;
        if (p == n_ - 1) {
            const int arr = t + d.fs;
            if (arr <= last_)
                emit(g, from, {p, arr, NodeState::Stopped}, ArcKind::Traverse, Scenario::FS,
                     travel_penalty(d.fs), {{p, t, arr + h}});
            return;
        }
        if (!compulsory_[p]) {
            const int nt = t + d.ff;
            if (nt + rem_f_[p + 1] <= last_)
                emit(g, from, {p + 1, nt, NodeState::FullSpeed}, ArcKind::Traverse, Scenario::FF,
                     travel_penalty(d.ff), {{p, t, nt + h}});
        }
        if (station_[p]) {
            const int nt = t + d.fs + dwell_;
            if (nt + rem_s_[p] <= last_)
                emit(g, from, {p, nt, NodeState::Stopped}, ArcKind::Traverse, Scenario::FS,
                     travel_penalty(nt - t), {{p, t, nt}});
        } else if (opt_.signal_waiting) {
            if (t + 1 + rem_f_[p] <= last_)
                emit(g, from, {p, t + 1, NodeState::FullSpeed}, ArcKind::Dwell, Scenario::None,
                     travel_penalty(1), {{p, t, t + 1}});
        }
    }

    void expand_stopped(MovementGraph& g, int p, int t) {
        const int from = add_node(g, p, t, NodeState::Stopped);
        if (p == n_ - 1) {
            emit(g, from, {-1, 0, NodeState::Stopped}, ArcKind::Sink, Scenario::None, 0.0, {});
            return;
        }
        const int h = headway_;
        const int next = p + 1;
        const Durations& d = dur_[next];
        if (next == n_ - 1) {
            const int arr = t + d.ss;
            if (arr <= last_)
                emit(g, from, {next, arr, NodeState::Stopped}, ArcKind::Traverse, Scenario::SS,
                     travel_penalty(d.ss), {{p, t, t + h}, {next, t, arr + h}});
        } else {
            if (!compulsory_[next]) {
                const int nt = t + d.sf;
                if (nt + rem_f_[next + 1] <= last_)
                    emit(g, from, {next + 1, nt, NodeState::FullSpeed}, ArcKind::Traverse,
                         Scenario::SF, travel_penalty(d.sf), {{p, t, t + h}, {next, t, nt + h}});
            }
            if (station_[next]) {
                const int nt = t + d.ss + dwell_;
                if (nt + rem_s_[next] <= last_)
                    emit(g, from, {next, nt, NodeState::Stopped}, ArcKind::Traverse,
                         Scenario::SS, travel_penalty(nt - t), {{p, t, t + h}, {next, t, nt}});
            }
        }
        // Extra standing time at intermediate stations; departures from the
        // origin are fixed by the source arc.
        if (p > 0 && t + 1 + rem_s_[p] <= last_)
            emit(g, from, {p, t + 1, NodeState::Stopped}, ArcKind::Dwell, Scenario::None,
                 travel_penalty(1), {{p, t, t + 1}});
    }

    const Instance& inst_;
    const TrainRequest& req_;
    GraphOptions opt_;
    TimeGrid grid_;
    std::vector<int> route_;
    int n_ = 0, T_ = 0, dwell_ = 0, headway_ = 0, last_ = 0;
    std::vector<bool> station_, compulsory_;
    std::vector<Durations> dur_;
    std::vector<int> rem_f_, rem_s_;
    std::vector<int> reach_f_, reach_s_;
    std::vector<PendingTarget> targets_;
};

}  // namespace

MovementGraph build_graph(const Instance& instance, const TrainRequest& request,
                          const GraphOptions& options) {
    return GraphBuilder(instance, request, options).build();
}

std::vector<MovementGraph> build_all_graphs(const Instance& instance,
                                            const GraphOptions& options) {
    std::vector<MovementGraph> graphs;
    graphs.reserve(instance.requests.size());
    for (const auto& req : instance.requests) graphs.push_back(build_graph(instance, req, options));
    return graphs;
}

bool is_topologically_ordered(const MovementGraph& graph) {
    int prev_from = 0;
    for (const MovementArc& a : graph.arcs) {
        if (a.from >= a.to) return false;
        if (a.from < prev_from) return false;
        prev_from = a.from;
        if (a.kind == ArcKind::Traverse || a.kind == ArcKind::Dwell) {
            if (graph.node_time(a.to) <= graph.node_time(a.from)) return false;
        }
    }
    return true;
}

namespace {

void check_walk(const MovementGraph& graph, std::span<const int> path) {
    if (path.empty()) throw InputError("path", "empty arc list");
    int at = graph.source();
    for (std::size_t i = 0; i < path.size(); ++i) {
        const int a = path[i];
        if (a < 0 || a >= graph.num_arcs())
            throw InputError("path/" + std::to_string(i), "arc id out of range");
        if (graph.arcs[a].from != at)
            throw InputError("path/" + std::to_string(i), "arc does not continue the walk");
        at = graph.arcs[a].to;
    }
    if (at != graph.sink()) throw InputError("path", "walk does not end at the sink");
}

}  // namespace

PathOccupancy path_occupancy(const MovementGraph& graph, std::span<const int> path) {
    check_walk(graph, path);
    PathOccupancy occ;
    for (int a : path)
        for (Cell c : graph.occupation(a)) ++occ[c];
    return occ;
}

double path_utility(const MovementGraph& graph, std::span<const int> path) {
    double v = 0.0;
    for (int a : path) v += graph.arcs[a].value;
    return v;
}

std::optional<int> path_departure_s(const MovementGraph& graph, std::span<const int> path,
                                    const TimeGrid& grid) {
    if (path.empty() || graph.arcs[path.front()].kind != ArcKind::Source) return std::nullopt;
    return graph.nodes[graph.arcs[path.front()].to].time * grid.step_s;
}

std::optional<int> path_arrival_step(const MovementGraph& graph, std::span<const int> path) {
    if (path.empty() || graph.arcs[path.back()].kind != ArcKind::Sink) return std::nullopt;
    return graph.nodes[graph.arcs[path.back()].from].time;
}

std::string graph_to_csv(const MovementGraph& graph) {
    std::ostringstream out;
    out << "from_block,from_t,from_state,to_block,to_t,to_state,kind,n_occ\n";
    for (int k = 0; k < graph.num_arcs(); ++k) {
        const MovementArc& a = graph.arcs[k];
        const NodeId& f = graph.nodes[a.from];
        const NodeId& t = graph.nodes[a.to];
        out << f.block << ',' << graph.node_time(a.from) << ',' << to_string(f.state) << ','
            << t.block << ',' << graph.node_time(a.to) << ',' << to_string(t.state) << ','
            << to_string(a.kind);
        if (a.scenario != Scenario::None) out << ':' << to_string(a.scenario);
        out << ',' << (a.occ_end - a.occ_begin) << '\n';
    }
    return out.str();
}

}  // namespace ttp
