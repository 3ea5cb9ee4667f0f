#include <doctest.h>

#include <algorithm>
#include <set>

#include "support.hpp"
#include "ttp/driver.hpp"
#include "ttp/error.hpp"
#include "ttp/spacetime.hpp"

using namespace ttp;

namespace {

// Station, signalling, station; 60 s steps, 60 s dwell and headway, 30 s
// penalties. Durations in steps: signalling SF 3, last station FS 2.
Instance one_block_line() {
    Instance inst = testing::corridor(1, 60, 3600);
    inst.requests.push_back(testing::request_up(inst, 0, 600, 120, 1800, 500));
    return inst;
}

Instance three_station_line() {
    Instance inst;
    inst.grid = {60, 3 * 3600};
    inst.rules = Rules{120, 60, 60, 60};
    const BlockKind kinds[] = {BlockKind::Station, BlockKind::Signalling, BlockKind::Station,
                               BlockKind::Signalling, BlockKind::Station};
    for (int b = 0; b < 5; ++b)
        inst.blocks.push_back({b, kinds[b], kinds[b] == BlockKind::Station ? 2 : 1,
                               kinds[b] == BlockKind::Station ? 60 : 180});
    inst.requests.push_back(testing::request_up(inst, 0, 1200, 600, 4800, 500));
    return inst;
}

}  // namespace

TEST_CASE("hand-built corridor graph") {
    const Instance inst = one_block_line();
    const MovementGraph g = build_graph(inst, inst.requests[0]);
    // Departures at steps 8..12, one route each: source, SF over the
    // signalling block, FS into the destination, sink.
    CHECK(g.num_arcs() == 1 + 5 * 4);
    CHECK(g.nodes.size() == 2 + 5 * 3);
    CHECK(g.arcs[g.null_arc].kind == ArcKind::Null);
    CHECK(g.arcs[g.null_arc].to == g.sink());
    CHECK(g.occupation(g.null_arc).empty());
    CHECK(is_topologically_ordered(g));

    const auto paths = enumerate_paths(g);
    REQUIRE(paths.size() == 6);
    for (const auto& p : paths) {
        if (p.size() == 1) continue;
        REQUIRE(p.size() == 4);
        const int dep = *path_departure_s(g, p, inst.grid) / 60;
        CHECK(g.arcs[p[1]].scenario == Scenario::SF);
        CHECK(g.arcs[p[2]].scenario == Scenario::FS);
        CHECK(*path_arrival_step(g, p) == dep + 5);
        CHECK(path_utility(g, p) == doctest::Approx(500.0 * (1.0 - std::abs(dep - 10) / 2.0)));

        // Origin at dep, signalling block dep..dep+3 (three steps plus one of
        // headway), destination dep+3..dep+5 plus headway.
        PathOccupancy expect;
        expect[static_cast<Cell>(0 * 60 + dep)] = 1;
        for (int t = dep; t <= dep + 3; ++t) expect[static_cast<Cell>(1 * 60 + t)] = 1;
        for (int t = dep + 3; t <= dep + 5; ++t) expect[static_cast<Cell>(2 * 60 + t)] = 1;
        CHECK(path_occupancy(g, p) == expect);
    }
}

TEST_CASE("scenario durations follow the penalty model") {
    Instance inst = testing::corridor(1, 30, 3600);
    inst.blocks[1].nominal_traversal_s = 100;  // FF 4 steps, SF ceil(130/30) = 5
    inst.requests.push_back(testing::request_up(inst, 0, 600, 30, 3000, 500));
    const MovementGraph g = build_graph(inst, inst.requests[0]);
    for (const auto& a : g.arcs) {
        if (a.scenario != Scenario::SF) continue;
        CHECK(g.node_time(a.to) - g.node_time(a.from) == 5);
    }
}

TEST_CASE("paths respect their window and latest arrival") {
    const Instance inst = three_station_line();
    const TrainRequest& q = inst.requests[0];
    const MovementGraph g = build_graph(inst, q);
    CHECK(is_topologically_ordered(g));
    const auto paths = enumerate_paths(g);
    CHECK(paths.size() > 10);
    for (const auto& p : paths) {
        if (p.size() == 1) continue;
        const int dep = *path_departure_s(g, p, inst.grid);
        CHECK(std::abs(dep - q.ideal_departure_s) <= q.departure_window_half_s);
        CHECK(*path_arrival_step(g, p) <= q.latest_arrival_s / 60);
    }
}

TEST_CASE("intermediate stops honour the minimum dwell") {
    const Instance inst = three_station_line();
    const MovementGraph g = build_graph(inst, inst.requests[0]);
    for (const auto& a : g.arcs) {
        if (a.kind != ArcKind::Traverse || g.nodes[a.to].state != NodeState::Stopped) continue;
        if (g.nodes[a.to].block != 2) continue;
        // Traversal of the station block (SS 4 steps or FS 3) plus two steps of dwell.
        const int dt = g.node_time(a.to) - g.node_time(a.from);
        CHECK(dt == (a.scenario == Scenario::SS ? 3 + 2 : 2 + 2));
    }
}

TEST_CASE("compulsory stops force a standing node") {
    Instance inst = three_station_line();
    auto passes_stopped = [](const MovementGraph& g, const std::vector<int>& p) {
        for (int a : p)
            if (g.nodes[g.arcs[a].to].block == 2 && g.nodes[g.arcs[a].to].state == NodeState::Stopped)
                return true;
        return false;
    };
    {
        const MovementGraph g = build_graph(inst, inst.requests[0]);
        int through = 0;
        for (const auto& p : enumerate_paths(g)) through += p.size() > 1 && !passes_stopped(g, p);
        CHECK(through > 0);
    }
    inst.requests[0].compulsory_stops = {2};
    const MovementGraph g = build_graph(inst, inst.requests[0]);
    for (const auto& p : enumerate_paths(g))
        if (p.size() > 1) CHECK(passes_stopped(g, p));
}

TEST_CASE("signal waiting adds paths") {
    const Instance inst = three_station_line();
    const auto plain = enumerate_paths(build_graph(inst, inst.requests[0])).size();
    GraphOptions opt;
    opt.signal_waiting = true;
    const MovementGraph g = build_graph(inst, inst.requests[0], opt);
    CHECK(is_topologically_ordered(g));
    CHECK(enumerate_paths(g).size() > plain);
}

TEST_CASE("down trains run in reverse block order") {
    Instance inst = testing::corridor(2, 60, 3600);
    TrainRequest q = testing::request_up(inst, 0, 600, 120, 2400, 500);
    std::swap(q.origin, q.destination);
    q.direction = Direction::Down;
    inst.requests.push_back(q);
    const MovementGraph g = build_graph(inst, inst.requests[0]);
    for (const auto& p : enumerate_paths(g)) {
        int last_block = 4;
        for (int a : p) {
            const int b = g.nodes[g.arcs[a].to].block;
            if (b < 0) continue;
            CHECK(b <= last_block);
            last_block = b;
        }
    }
}

TEST_CASE("unreachable request keeps only the null path") {
    Instance inst = testing::corridor(1, 60, 3600);
    inst.requests.push_back(testing::request_up(inst, 0, 600, 120, 660, 500));
    const MovementGraph g = build_graph(inst, inst.requests[0]);
    CHECK_FALSE(g.has_real_path());
    CHECK(g.num_arcs() == 1);
    CHECK(g.warnings.size() == 1);
}

TEST_CASE("walk validation") {
    const Instance inst = one_block_line();
    const MovementGraph g = build_graph(inst, inst.requests[0]);
    CHECK_THROWS_AS(path_occupancy(g, std::vector<int>{}), InputError);
    CHECK_THROWS_AS(path_occupancy(g, std::vector<int>{1}), InputError);
    CHECK_THROWS_AS(path_occupancy(g, std::vector<int>{999}), InputError);
    CHECK(path_occupancy(g, std::vector<int>{g.null_arc}).empty());
}

TEST_CASE("graph csv has a row per arc") {
    const Instance inst = one_block_line();
    const MovementGraph g = build_graph(inst, inst.requests[0]);
    const std::string csv = graph_to_csv(g);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == g.num_arcs() + 1);
}
