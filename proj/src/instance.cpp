#include "ttp/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ttp/error.hpp"

namespace ttp {

using nlohmann::json;

int Instance::num_stations() const {
    return static_cast<int>(std::count_if(blocks.begin(), blocks.end(), [](const Block& b) {
        return b.kind == BlockKind::Station;
    }));
}

namespace {

std::string at(const std::string& base, const std::string& key) { return base + "/" + key; }
std::string at(const std::string& base, std::size_t index) {
    return base + "/" + std::to_string(index);
}

void reject_unknown_keys(const json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* a) { return key == a; });
        if (!known) throw InputError(at(where, key), "unknown key");
    }
}

const json& require(const json& obj, const std::string& where, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw InputError(at(where, key), "missing field");
    return *it;
}

const json& require_object(const json& obj, const std::string& where, const char* key) {
    const json& v = require(obj, where, key);
    if (!v.is_object()) throw InputError(at(where, key), "expected an object");
    return v;
}

const json& require_array(const json& obj, const std::string& where, const char* key) {
    const json& v = require(obj, where, key);
    if (!v.is_array()) throw InputError(at(where, key), "expected an array");
    return v;
}

int as_int(const json& v, const std::string& where) {
    if (v.is_number_integer()) {
        const auto x = v.get<std::int64_t>();
        if (x < INT32_MIN || x > INT32_MAX) throw InputError(where, "integer out of range");
        return static_cast<int>(x);
    }
    if (v.is_number_float()) {
        const double x = v.get<double>();
        if (std::floor(x) == x && std::abs(x) < 2e9) return static_cast<int>(x);
    }
    throw InputError(where, "expected an integer");
}

int require_int(const json& obj, const std::string& where, const char* key) {
    return as_int(require(obj, where, key), at(where, key));
}

double require_number(const json& obj, const std::string& where, const char* key) {
    const json& v = require(obj, where, key);
    if (!v.is_number()) throw InputError(at(where, key), "expected a number");
    return v.get<double>();
}

BlockKind parse_kind(const json& v, const std::string& where) {
    if (!v.is_string()) throw InputError(where, "expected \"station\" or \"signalling\"");
    const auto s = v.get<std::string>();
    if (s == "station") return BlockKind::Station;
    if (s == "signalling") return BlockKind::Signalling;
    throw InputError(where, "unknown block kind '" + s + "'");
}

}  // namespace

void validate(const Instance& inst) {
    if (inst.grid.step_s <= 0) throw InputError("/grid/step_s", "must be positive");
    if (inst.grid.horizon_s <= 0) throw InputError("/grid/horizon_s", "must be positive");
    if (inst.grid.horizon_s % inst.grid.step_s != 0)
        throw InputError("/grid/horizon_s", "must be an integer multiple of step_s");

    const auto& r = inst.rules;
    if (r.min_dwell_s < 0) throw InputError("/rules/min_dwell_s", "must be nonnegative");
    if (r.headway_s < 0) throw InputError("/rules/headway_s", "must be nonnegative");
    if (r.accel_penalty_s < 0) throw InputError("/rules/accel_penalty_s", "must be nonnegative");
    if (r.decel_penalty_s < 0) throw InputError("/rules/decel_penalty_s", "must be nonnegative");

    if (inst.blocks.size() < 2) throw InputError("/blocks", "need at least two blocks");
    for (std::size_t i = 0; i < inst.blocks.size(); ++i) {
        const Block& b = inst.blocks[i];
        const std::string where = at("/blocks", i);
        if (b.id != static_cast<int>(i))
            throw InputError(at(where, "id"), "block ids must be 0..B-1 in line order");
        if (b.kind == BlockKind::Signalling && b.capacity != 1)
            throw InputError(at(where, "capacity"), "signalling blocks have capacity 1");
        if (b.capacity < 1) throw InputError(at(where, "capacity"), "must be at least 1");
        if (b.nominal_traversal_s <= 0)
            throw InputError(at(where, "nominal_traversal_s"), "must be positive");
    }
    if (inst.blocks.front().kind != BlockKind::Station)
        throw InputError("/blocks/0/kind", "the line must start with a station");
    if (inst.blocks.back().kind != BlockKind::Station)
        throw InputError(at("/blocks", inst.blocks.size() - 1) + "/kind",
                         "the line must end with a station");

    const int nb = inst.num_blocks();
    auto is_station = [&](int id) {
        return id >= 0 && id < nb && inst.blocks[id].kind == BlockKind::Station;
    };
    for (std::size_t i = 0; i < inst.requests.size(); ++i) {
        const TrainRequest& q = inst.requests[i];
        const std::string where = at("/requests", i);
        if (q.id != static_cast<int>(i))
            throw InputError(at(where, "id"), "request ids must be 0..R-1 in order");
        if (q.origin < 0 || q.origin >= nb)
            throw InputError(at(where, "origin"), "unknown block reference");
        if (q.destination < 0 || q.destination >= nb)
            throw InputError(at(where, "destination"), "unknown block reference");
        if (!is_station(q.origin)) throw InputError(at(where, "origin"), "must be a station");
        if (!is_station(q.destination))
            throw InputError(at(where, "destination"), "must be a station");
        if (q.origin == q.destination)
            throw InputError(at(where, "destination"), "must differ from origin");
        if (q.latest_arrival_s <= q.ideal_departure_s)
            throw InputError(at(where, "latest_arrival_s"), "must be after the ideal departure");
        if (q.departure_window_half_s <= 0)
            throw InputError(at(where, "window_half_s"), "must be positive");
        if (!(q.peak_value > 0.0)) throw InputError(at(where, "peak_value"), "must be positive");
        const int lo = std::min(q.origin, q.destination);
        const int hi = std::max(q.origin, q.destination);
        for (std::size_t s = 0; s < q.compulsory_stops.size(); ++s) {
            const int stop = q.compulsory_stops[s];
            const std::string sw = at(at(where, "stops"), s);
            if (stop < 0 || stop >= nb) throw InputError(sw, "unknown block reference");
            if (!is_station(stop)) throw InputError(sw, "must be a station");
            if (stop <= lo || stop >= hi)
                throw InputError(sw, "must lie strictly between origin and destination");
        }
    }
}

Instance load_instance_string(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError("", std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw InputError("", "top level must be an object");
    reject_unknown_keys(doc, "", {"grid", "blocks", "rules", "requests"});

    Instance inst;
    const json& grid = require_object(doc, "", "grid");
    reject_unknown_keys(grid, "/grid", {"step_s", "horizon_s"});
    inst.grid.step_s = require_int(grid, "/grid", "step_s");
    inst.grid.horizon_s = require_int(grid, "/grid", "horizon_s");

    const json& rules = require_object(doc, "", "rules");
    reject_unknown_keys(rules, "/rules",
                        {"min_dwell_s", "headway_s", "accel_penalty_s", "decel_penalty_s"});
    inst.rules.min_dwell_s = require_int(rules, "/rules", "min_dwell_s");
    inst.rules.headway_s = require_int(rules, "/rules", "headway_s");
    inst.rules.accel_penalty_s = require_int(rules, "/rules", "accel_penalty_s");
    inst.rules.decel_penalty_s = require_int(rules, "/rules", "decel_penalty_s");

    const json& blocks = require_array(doc, "", "blocks");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const std::string where = at("/blocks", i);
        const json& b = blocks[i];
        if (!b.is_object()) throw InputError(where, "expected an object");
        reject_unknown_keys(b, where, {"id", "kind", "capacity", "nominal_traversal_s"});
        Block block;
        block.id = require_int(b, where, "id");
        block.kind = parse_kind(require(b, where, "kind"), at(where, "kind"));
        block.capacity = require_int(b, where, "capacity");
        block.nominal_traversal_s = require_int(b, where, "nominal_traversal_s");
        inst.blocks.push_back(block);
    }

    const json& requests = require_array(doc, "", "requests");
    for (std::size_t i = 0; i < requests.size(); ++i) {
        const std::string where = at("/requests", i);
        const json& q = requests[i];
        if (!q.is_object()) throw InputError(where, "expected an object");
        reject_unknown_keys(q, where,
                            {"id", "origin", "destination", "ideal_departure_s", "window_half_s",
                             "latest_arrival_s", "peak_value", "stops"});
        TrainRequest req;
        req.id = require_int(q, where, "id");
        req.origin = require_int(q, where, "origin");
        req.destination = require_int(q, where, "destination");
        req.direction = req.origin < req.destination ? Direction::Up : Direction::Down;
        req.ideal_departure_s = require_int(q, where, "ideal_departure_s");
        req.departure_window_half_s = require_int(q, where, "window_half_s");
        req.latest_arrival_s = require_int(q, where, "latest_arrival_s");
        req.peak_value = require_number(q, where, "peak_value");
        const json& stops = require_array(q, where, "stops");
        for (std::size_t s = 0; s < stops.size(); ++s)
            req.compulsory_stops.push_back(as_int(stops[s], at(at(where, "stops"), s)));
        inst.requests.push_back(std::move(req));
    }

    validate(inst);
    return inst;
}

Instance load_instance(std::istream& in) {
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_instance_string(buf.str());
}

Instance load_instance_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open instance file '" + path + "'");
    return load_instance(in);
}

std::string save_instance(const Instance& inst) {
    json doc;
    doc["grid"] = {{"step_s", inst.grid.step_s}, {"horizon_s", inst.grid.horizon_s}};
    doc["rules"] = {{"min_dwell_s", inst.rules.min_dwell_s},
                    {"headway_s", inst.rules.headway_s},
                    {"accel_penalty_s", inst.rules.accel_penalty_s},
                    {"decel_penalty_s", inst.rules.decel_penalty_s}};
    json blocks = json::array();
    for (const Block& b : inst.blocks) {
        blocks.push_back({{"id", b.id},
                          {"kind", b.kind == BlockKind::Station ? "station" : "signalling"},
                          {"capacity", b.capacity},
                          {"nominal_traversal_s", b.nominal_traversal_s}});
    }
    doc["blocks"] = std::move(blocks);
    json requests = json::array();
    for (const TrainRequest& q : inst.requests) {
        requests.push_back({{"id", q.id},
                            {"origin", q.origin},
                            {"destination", q.destination},
                            {"ideal_departure_s", q.ideal_departure_s},
                            {"window_half_s", q.departure_window_half_s},
                            {"latest_arrival_s", q.latest_arrival_s},
                            {"peak_value", q.peak_value},
                            {"stops", q.compulsory_stops}});
    }
    doc["requests"] = std::move(requests);
    return doc.dump(2) + "\n";
}

void save_instance_file(const Instance& inst, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << save_instance(inst);
    if (!out) throw IoError("write failed for '" + path + "'");
}

Template parse_template(const std::string& name) {
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (lower == "s1") return Template::S1;
    if (lower == "s2") return Template::S2;
    if (lower == "s3") return Template::S3;
    if (lower == "s4") return Template::S4;
    if (lower == "custom") return Template::Custom;
    throw InputError("template", "unknown template '" + name + "'");
}

std::string template_name(Template t) {
    switch (t) {
        case Template::S1: return "s1";
        case Template::S2: return "s2";
        case Template::S3: return "s3";
        case Template::S4: return "s4";
        case Template::Custom: return "custom";
    }
    return "custom";
}

LineShape template_shape(Template t) {
    switch (t) {
        case Template::S1: return {5, 14};
        case Template::S2: return {7, 23};
        case Template::S3: return {14, 51};
        case Template::S4: return {19, 70};
        case Template::Custom: return {0, 0};
    }
    return {0, 0};
}

double path_value(const TrainRequest& request, double actual_departure_s) {
    const double offset = std::abs(actual_departure_s - request.ideal_departure_s);
    const double half = request.departure_window_half_s;
    if (offset > half) return 0.0;
    return request.peak_value * (1.0 - offset / half);
}

std::vector<int> route_blocks(const Instance& instance, const TrainRequest& request) {
    (void)instance;
    std::vector<int> route;
    const int step = request.origin < request.destination ? 1 : -1;
    for (int b = request.origin;; b += step) {
        route.push_back(b);
        if (b == request.destination) break;
    }
    return route;
}

int route_ff_seconds(const Instance& instance, const TrainRequest& request) {
    const auto route = route_blocks(instance, request);
    int total = 0;
    for (std::size_t i = 1; i < route.size(); ++i)
        total += instance.blocks[route[i]].nominal_traversal_s;
    return total;
}

namespace {

// Portable draws; std:: distributions are implementation-defined.
class SeededDraws {
public:
    explicit SeededDraws(std::uint64_t seed) : engine_(seed) {}

    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (hi <= lo) return lo;
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(engine_() % span);
    }

private:
    std::mt19937_64 engine_;
};

double get_or(const Overrides& o, const char* key, double fallback) {
    auto it = o.find(key);
    return it == o.end() ? fallback : it->second;
}

int get_int(const Overrides& o, const char* key, int fallback, int lo, int hi) {
    const double v = get_or(o, key, fallback);
    if (std::floor(v) != v || v < lo || v > hi)
        throw InputError(std::string("overrides/") + key,
                         "must be an integer in [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "]");
    return static_cast<int>(v);
}

const std::set<std::string>& known_override_keys() {
    static const std::set<std::string> keys = {
        "stations",          "blocks",           "step_s",          "horizon_s",
        "requests",          "passenger",        "freight_value",   "passenger_value",
        "window_half_s",     "arrival_slack_s",  "min_dwell_s",     "headway_s",
        "accel_penalty_s",   "decel_penalty_s",  "signal_time_min_s", "signal_time_max_s",
        "station_time_min_s", "station_time_max_s", "terminal_capacity", "station_capacity"};
    return keys;
}

// Station positions along the line: termini at both ends, interior stations
// spread so the signalling blocks between consecutive stations differ by at
// most one.
std::vector<BlockKind> line_layout(int stations, int blocks) {
    std::vector<BlockKind> kinds(blocks, BlockKind::Signalling);
    const int gaps = stations - 1;
    const int signalling = blocks - stations;
    int pos = 0;
    kinds[0] = BlockKind::Station;
    for (int g = 0; g < gaps; ++g) {
        const int in_gap = signalling / gaps + (g >= gaps - signalling % gaps ? 1 : 0);
        pos += in_gap + 1;
        kinds[pos] = BlockKind::Station;
    }
    return kinds;
}

}  // namespace

Instance generate_instance(Template t, std::uint64_t seed, const Overrides& overrides) {
    for (const auto& [key, value] : overrides) {
        if (!known_override_keys().count(key))
            throw InputError("overrides/" + key, "unknown override");
    }
    LineShape shape = template_shape(t);
    if (t == Template::Custom) {
        if (!overrides.count("stations") || !overrides.count("blocks"))
            throw InputError("overrides", "custom template needs 'stations' and 'blocks'");
    } else if (overrides.count("stations") || overrides.count("blocks")) {
        throw InputError("overrides", "line shape is fixed for template " + template_name(t));
    }
    shape.stations = get_int(overrides, "stations", shape.stations, 2, 1000);
    shape.blocks = get_int(overrides, "blocks", shape.blocks, shape.stations, 10000);
    if (shape.blocks > shape.stations && shape.stations < 2)
        throw InputError("overrides/stations", "need at least two stations");

    Instance inst;
    inst.grid.step_s = get_int(overrides, "step_s", 30, 1, 3600);
    inst.grid.horizon_s = get_int(overrides, "horizon_s", 24 * 3600, inst.grid.step_s, 7 * 86400);
    if (inst.grid.horizon_s % inst.grid.step_s != 0)
        throw InputError("overrides/horizon_s", "must be a multiple of step_s");
    const int step = inst.grid.step_s;

    inst.rules.min_dwell_s = get_int(overrides, "min_dwell_s", 120, 0, 86400);
    inst.rules.headway_s = get_int(overrides, "headway_s", 180, 0, 86400);
    inst.rules.accel_penalty_s = get_int(overrides, "accel_penalty_s", 60, 0, 86400);
    inst.rules.decel_penalty_s = get_int(overrides, "decel_penalty_s", 60, 0, 86400);

    const int sig_min = get_int(overrides, "signal_time_min_s", 150, 1, 86400);
    const int sig_max = get_int(overrides, "signal_time_max_s", 330, sig_min, 86400);
    const int st_min = get_int(overrides, "station_time_min_s", 60, 1, 86400);
    const int st_max = get_int(overrides, "station_time_max_s", 120, st_min, 86400);
    const int term_cap = get_int(overrides, "terminal_capacity", 4, 1, 100);
    const int st_cap = get_int(overrides, "station_capacity", 2, 1, 100);

    const int n_requests = get_int(overrides, "requests", 32, 0, 100000);
    const int n_passenger = get_int(overrides, "passenger", std::min(6, n_requests), 0, n_requests);
    const double freight_value = get_or(overrides, "freight_value", 500.0);
    const double passenger_value = get_or(overrides, "passenger_value", 1000.0);
    if (!(freight_value > 0)) throw InputError("overrides/freight_value", "must be positive");
    if (!(passenger_value > 0)) throw InputError("overrides/passenger_value", "must be positive");
    const int window_half = get_int(overrides, "window_half_s", 1800, step, 86400);

    SeededDraws draws(seed);
    // Multiples of the step so rounding never changes the drawn times.
    auto draw_time = [&](int lo, int hi) {
        const int lo_steps = std::max(1, (lo + step - 1) / step);
        const int hi_steps = std::max(lo_steps, hi / step);
        return static_cast<int>(draws.uniform_int(lo_steps, hi_steps)) * step;
    };

    const auto kinds = line_layout(shape.stations, shape.blocks);
    for (int b = 0; b < shape.blocks; ++b) {
        Block block;
        block.id = b;
        block.kind = kinds[b];
        const bool terminal = b == 0 || b == shape.blocks - 1;
        if (block.kind == BlockKind::Station) {
            block.capacity = terminal ? term_cap : st_cap;
            block.nominal_traversal_s = draw_time(st_min, st_max);
        } else {
            block.capacity = 1;
            block.nominal_traversal_s = draw_time(sig_min, sig_max);
        }
        inst.blocks.push_back(block);
    }

    TrainRequest up_probe;
    up_probe.origin = 0;
    up_probe.destination = shape.blocks - 1;
    TrainRequest down_probe;
    down_probe.origin = shape.blocks - 1;
    down_probe.destination = 0;
    const int ff_up = route_ff_seconds(inst, up_probe);
    const int ff_down = route_ff_seconds(inst, down_probe);
    const bool fixed_slack = overrides.count("arrival_slack_s") > 0;
    const int slack_override = get_int(overrides, "arrival_slack_s", 0, 0, 7 * 86400);
    auto arrival_slack = [&](int route_ff) {
        return fixed_slack ? slack_override : route_ff + window_half;
    };
    const int worst = std::max(ff_up + arrival_slack(ff_up), ff_down + arrival_slack(ff_down));
    const int latest_ideal = inst.grid.horizon_s - step - worst;
    if (latest_ideal < 0)
        throw InputError("overrides/horizon_s", "horizon too short for the route and window");

    std::vector<int> departures(n_requests);
    for (int& d : departures) d = draw_time(0, latest_ideal);
    std::sort(departures.begin(), departures.end());

    std::vector<int> passenger_flags(n_requests, 0);
    std::fill(passenger_flags.begin(), passenger_flags.begin() + n_passenger, 1);
    for (int i = n_requests - 1; i > 0; --i)
        std::swap(passenger_flags[i], passenger_flags[draws.uniform_int(0, i)]);

    for (int r = 0; r < n_requests; ++r) {
        TrainRequest q;
        q.id = r;
        const bool up = draws.uniform_int(0, 1) == 0;
        q.origin = up ? 0 : shape.blocks - 1;
        q.destination = up ? shape.blocks - 1 : 0;
        q.direction = up ? Direction::Up : Direction::Down;
        q.ideal_departure_s = departures[r];
        q.departure_window_half_s = window_half;
        const int route_ff = up ? ff_up : ff_down;
        q.latest_arrival_s = q.ideal_departure_s + route_ff + arrival_slack(route_ff);
        q.peak_value = passenger_flags[r] ? passenger_value : freight_value;
        inst.requests.push_back(q);
    }
    validate(inst);
    return inst;
}

}  // namespace ttp
