#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace ttp {

enum class BlockKind { Station, Signalling };
enum class Direction { Up, Down };

struct Block {
    int id = 0;
    BlockKind kind = BlockKind::Signalling;
    int capacity = 1;
    int nominal_traversal_s = 0;  // full-speed (FF) traversal time
};

struct TimeGrid {
    int step_s = 30;
    int horizon_s = 24 * 3600;

    int intervals() const { return horizon_s / step_s; }
    // Seconds rounded up to whole steps.
    int steps_ceil(int seconds) const { return (seconds + step_s - 1) / step_s; }
};

struct Rules {
    int min_dwell_s = 120;
    int headway_s = 180;
    int accel_penalty_s = 60;
    int decel_penalty_s = 60;
};

struct TrainRequest {
    int id = 0;
    int origin = 0;
    int destination = 0;
    Direction direction = Direction::Up;  // derived from origin/destination order
    int ideal_departure_s = 0;
    int departure_window_half_s = 1800;
    int latest_arrival_s = 0;
    double peak_value = 0.0;
    std::vector<int> compulsory_stops;
};

struct Instance {
    TimeGrid grid;
    std::vector<Block> blocks;
    Rules rules;
    std::vector<TrainRequest> requests;

    int num_blocks() const { return static_cast<int>(blocks.size()); }
    int num_requests() const { return static_cast<int>(requests.size()); }
    int num_stations() const;
    // Size of the multiplier space B x T.
    std::int64_t num_cells() const {
        return static_cast<std::int64_t>(blocks.size()) * grid.intervals();
    }
};

// Throws InputError (with a path to the offending field) on any violation.
void validate(const Instance& instance);

Instance load_instance(std::istream& in);
Instance load_instance_string(const std::string& text);
Instance load_instance_file(const std::string& path);

// Canonical form: sorted keys, two-space indent, trailing newline. Loading and
// saving a canonical file reproduces it byte for byte.
std::string save_instance(const Instance& instance);
void save_instance_file(const Instance& instance, const std::string& path);

enum class Template { S1, S2, S3, S4, Custom };

Template parse_template(const std::string& name);
std::string template_name(Template t);

// Line dimensions (stations, blocks) of the built-in templates.
struct LineShape {
    int stations = 0;
    int blocks = 0;
};
LineShape template_shape(Template t);

// Recognised override keys (all numeric):
//   stations, blocks            line shape (required for Custom)
//   step_s, horizon_s           time grid
//   requests, passenger         request counts (default 32 / 6)
//   freight_value, passenger_value
//   window_half_s, arrival_slack_s
//   min_dwell_s, headway_s, accel_penalty_s, decel_penalty_s
//   signal_time_min_s, signal_time_max_s, station_time_min_s, station_time_max_s
//   terminal_capacity, station_capacity
using Overrides = std::map<std::string, double>;

Instance generate_instance(Template t, std::uint64_t seed, const Overrides& overrides = {});

// Triangular valuation: peak at the ideal departure, zero at the window edges.
// Precondition: |actual - ideal| <= window half-width.
double path_value(const TrainRequest& request, double actual_departure_s);

// Ordered block ids from origin to destination (inclusive) in travel order.
std::vector<int> route_blocks(const Instance& instance, const TrainRequest& request);

// Sum of nominal FF traversal times over the route, origin excluded.
int route_ff_seconds(const Instance& instance, const TrainRequest& request);

}  // namespace ttp
