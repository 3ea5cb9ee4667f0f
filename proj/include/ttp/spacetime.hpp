#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ttp/instance.hpp"
#include "ttp/prices.hpp"

namespace ttp {

enum class NodeState { FullSpeed, Stopped };

// Source and sink are virtual nodes with block == -1 and time -1 / T.
struct NodeId {
    int block = -1;
    int time = 0;
    NodeState state = NodeState::FullSpeed;

    friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

enum class ArcKind { Traverse, Dwell, Source, Sink, Null };
enum class Scenario { FF, SF, FS, SS, None };

const char* to_string(ArcKind kind);
const char* to_string(Scenario scenario);
const char* to_string(NodeState state);

struct MovementArc {
    int from = 0;  // node index
    int to = 0;
    ArcKind kind = ArcKind::Null;
    Scenario scenario = Scenario::None;
    double value = 0.0;            // utility contribution (departure value on Source arcs)
    std::uint32_t occ_begin = 0;   // slice into MovementGraph::occupation_pool
    std::uint32_t occ_end = 0;
};

struct GraphOptions {
    // Allow holding at signalling blocks (modelled as one-step FullSpeed waits).
    bool signal_waiting = false;
    // Utility charged per step of travel or dwell time.
    double travel_penalty_per_step = 0.0;
};

// Time-expanded movement DAG of one request. Node 0 is the source and the
// last node is the sink; nodes are ordered by time and arcs by their tail
// node, which makes the stored arc order topological.
class MovementGraph {
public:
    int request = 0;
    int intervals = 0;  // T
    std::vector<NodeId> nodes;
    std::vector<MovementArc> arcs;
    std::vector<Cell> occupation_pool;
    int null_arc = -1;
    std::vector<std::string> warnings;

    int source() const { return 0; }
    int sink() const { return static_cast<int>(nodes.size()) - 1; }
    int num_arcs() const { return static_cast<int>(arcs.size()); }

    std::span<const Cell> occupation(int arc) const {
        const auto& a = arcs[arc];
        return {occupation_pool.data() + a.occ_begin, a.occ_end - a.occ_begin};
    }
    // -1 for the source, T for the sink.
    int node_time(int node) const;

    bool has_real_path() const { return arcs.size() > 1; }
};

MovementGraph build_graph(const Instance& instance, const TrainRequest& request,
                          const GraphOptions& options = {});
std::vector<MovementGraph> build_all_graphs(const Instance& instance,
                                            const GraphOptions& options = {});

// True iff every arc's tail precedes its head in node order and arcs are
// sorted by tail node.
bool is_topologically_ordered(const MovementGraph& graph);

// Block-time usage counts of a path (sorted by cell).
using PathOccupancy = std::map<Cell, int>;

// Throws InputError if `path` is not a connected source-to-sink walk.
PathOccupancy path_occupancy(const MovementGraph& graph, std::span<const int> path);

// Sum of arc values along a path.
double path_utility(const MovementGraph& graph, std::span<const int> path);

// Departure instant (seconds) of a non-null path, nullopt for the null path.
std::optional<int> path_departure_s(const MovementGraph& graph, std::span<const int> path,
                                    const TimeGrid& grid);
// Arrival step at the destination, nullopt for the null path.
std::optional<int> path_arrival_step(const MovementGraph& graph, std::span<const int> path);

// Debug dump: from_block,from_t,from_state,to_block,to_t,to_state,kind,n_occ
std::string graph_to_csv(const MovementGraph& graph);

}  // namespace ttp
