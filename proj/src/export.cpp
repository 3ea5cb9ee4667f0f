#include "ttp/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "ttp/report.hpp"

namespace ttp {

std::vector<BlockVisit> path_schedule(const Instance& instance, const MovementGraph& graph,
                                      std::span<const int> path) {
    std::vector<BlockVisit> visits;
    if (path.empty() || graph.arcs[path.front()].kind != ArcKind::Source) return visits;
    const TrainRequest& req = instance.requests[graph.request];
    const std::vector<int> route = route_blocks(instance, req);
    const int step = instance.grid.step_s;

    auto enter = [&](int block, int t) {
        if (!visits.empty() && visits.back().block == block) return;
        if (!visits.empty()) visits.back().exit_s = t * step;
        visits.push_back(BlockVisit{block, t * step, t * step, false});
    };
    auto next_block = [&](int block) {
        auto it = std::find(route.begin(), route.end(), block);
        return it + 1 < route.end() ? *(it + 1) : block;
    };

    for (int a : path) {
        const MovementArc& arc = graph.arcs[a];
        if (arc.kind == ArcKind::Null) break;
        const NodeId& head = graph.nodes[arc.to];
        if (arc.kind == ArcKind::Source) {
            enter(head.block, head.time);
            visits.back().stopped = true;
            continue;
        }
        const NodeId& tail = graph.nodes[arc.from];
        if (arc.kind == ArcKind::Sink) {
            visits.back().exit_s = tail.time * step;
            break;
        }
        if (tail.state == NodeState::FullSpeed) {
            enter(tail.block, tail.time);
        } else if (arc.kind == ArcKind::Traverse) {
            enter(next_block(tail.block), tail.time);
        }
        if (head.state == NodeState::Stopped && head.block == visits.back().block)
            visits.back().stopped = true;
    }
    return visits;
}

std::string prices_csv(const PriceMatrix& mu) {
    std::ostringstream out;
    out << "block,t,mu\n";
    const auto v = mu.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] == 0.0) continue;
        const Cell c = static_cast<Cell>(i);
        out << mu.block_of(c) << ',' << mu.time_of(c) << ',' << format_double(v[i]) << '\n';
    }
    return out.str();
}

std::string timetable_csv(const Instance& instance, const std::vector<MovementGraph>& graphs,
                          const std::vector<std::vector<int>>& paths) {
    std::ostringstream out;
    out << "request,seq,block,entry_s,exit_s,stopped\n";
    for (std::size_t r = 0; r < paths.size(); ++r) {
        const auto visits = path_schedule(instance, graphs[r], paths[r]);
        for (std::size_t k = 0; k < visits.size(); ++k) {
            const BlockVisit& v = visits[k];
            out << r << ',' << k << ',' << v.block << ',' << v.entry_s << ',' << v.exit_s << ','
                << (v.stopped ? 1 : 0) << '\n';
        }
    }
    return out.str();
}

std::string violations_csv(const Instance& instance, const std::vector<MovementGraph>& graphs,
                           const std::vector<std::vector<int>>& paths) {
    std::map<Cell, int> usage;
    for (std::size_t r = 0; r < paths.size(); ++r)
        for (const auto& [cell, n] : path_occupancy(graphs[r], paths[r])) usage[cell] += n;
    const int T = instance.grid.intervals();
    std::ostringstream out;
    out << "block,t,usage,capacity\n";
    for (const auto& [cell, n] : usage) {
        const int b = static_cast<int>(cell) / T;
        const int cap = instance.blocks[b].capacity;
        if (n > cap) out << b << ',' << static_cast<int>(cell) % T << ',' << n << ',' << cap << '\n';
    }
    return out.str();
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

constexpr double kWidth = 960.0;
constexpr double kHeight = 480.0;
constexpr double kMargin = 50.0;

std::string svg_open(double w, double h) {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" "
           "width=\"" + fmt(w) + "\" height=\"" + fmt(h) + "\" viewBox=\"0 0 " + fmt(w) + " " +
           fmt(h) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string axes(double w, double h, const std::string& xlabel, const std::string& ylabel) {
    std::string s;
    s += "<line x1=\"" + fmt(kMargin) + "\" y1=\"" + fmt(h - kMargin) + "\" x2=\"" +
         fmt(w - kMargin) + "\" y2=\"" + fmt(h - kMargin) + "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + fmt(kMargin) + "\" y1=\"" + fmt(kMargin) + "\" x2=\"" + fmt(kMargin) +
         "\" y2=\"" + fmt(h - kMargin) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fmt(w / 2) + "\" y=\"" + fmt(h - 12) +
         "\" font-size=\"12\" text-anchor=\"middle\">" + xlabel + "</text>\n";
    s += "<text x=\"14\" y=\"" + fmt(h / 2) + "\" font-size=\"12\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 14 " + fmt(h / 2) + ")\">" + ylabel + "</text>\n";
    return s;
}

const char* palette(std::size_t i) {
    static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
    return colours[i % 8];
}

}  // namespace

std::string timedist_svg(const Instance& instance, const std::vector<MovementGraph>& graphs,
                         const std::vector<std::vector<int>>& paths) {
    const double horizon = instance.grid.horizon_s;
    const double B = std::max(1, instance.num_blocks());
    const double pw = kWidth - 2 * kMargin, ph = kHeight - 2 * kMargin;
    auto X = [&](double t) { return kMargin + pw * t / horizon; };
    auto Y = [&](double pos) { return kHeight - kMargin - ph * pos / B; };

    std::string s = svg_open(kWidth, kHeight);
    s += axes(kWidth, kHeight, "time (s)", "block");
    for (int b = 0; b <= instance.num_blocks(); ++b) {
        s += "<line x1=\"" + fmt(X(0)) + "\" y1=\"" + fmt(Y(b)) + "\" x2=\"" + fmt(X(horizon)) +
             "\" y2=\"" + fmt(Y(b)) + "\" stroke=\"#eeeeee\"/>\n";
    }
    for (std::size_t r = 0; r < paths.size(); ++r) {
        const auto visits = path_schedule(instance, graphs[r], paths[r]);
        if (visits.empty()) continue;
        const bool up = instance.requests[r].direction == Direction::Up;
        std::string pts;
        for (const BlockVisit& v : visits) {
            const double lo = up ? v.block : v.block + 1;
            const double hi = up ? v.block + 1 : v.block;
            pts += fmt(X(v.entry_s)) + "," + fmt(Y(lo)) + " " + fmt(X(v.exit_s)) + "," +
                   fmt(Y(hi)) + " ";
        }
        pts.pop_back();
        s += "<polyline fill=\"none\" stroke=\"" + std::string(palette(r)) +
             "\" stroke-width=\"1.5\" points=\"" + pts + "\"><title>request " +
             std::to_string(r) + "</title></polyline>\n";
    }
    s += "</svg>\n";
    return s;
}

std::string price_heatmap_svg(const PriceMatrix& mu) {
    const int B = std::max(1, mu.blocks());
    const int T = std::max(1, mu.intervals());
    const double pw = kWidth - 2 * kMargin, ph = kHeight - 2 * kMargin;
    const double cw = pw / T, ch = ph / B;
    double top = 0.0;
    for (double v : mu.values()) top = std::max(top, v);

    std::string s = svg_open(kWidth, kHeight);
    s += axes(kWidth, kHeight, "time step", "block");
    for (int b = 0; b < mu.blocks(); ++b) {
        for (int t = 0; t < mu.intervals(); ++t) {
            const double v = mu(b, t);
            if (v == 0.0) continue;
            const int shade = static_cast<int>(std::lround(255.0 * (1.0 - v / top)));
            char colour[16];
            std::snprintf(colour, sizeof colour, "#ff%02x%02x", shade, shade);
            s += "<rect x=\"" + fmt(kMargin + t * cw) + "\" y=\"" +
                 fmt(kHeight - kMargin - (b + 1) * ch) + "\" width=\"" + fmt(cw) +
                 "\" height=\"" + fmt(ch) + "\" fill=\"" + colour + "\"/>\n";
        }
    }
    s += "</svg>\n";
    return s;
}

std::string convergence_svg(const std::vector<Series>& series) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::size_t n = 1;
    for (const Series& sr : series) {
        n = std::max(n, sr.values.size());
        for (double v : sr.values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!(hi > lo)) {
        lo = std::isfinite(lo) ? lo - 1.0 : 0.0;
        hi = lo + 2.0;
    }
    const double pw = kWidth - 2 * kMargin, ph = kHeight - 2 * kMargin;
    auto X = [&](double k) { return kMargin + pw * k / std::max<double>(1, n - 1); };
    auto Y = [&](double v) { return kHeight - kMargin - ph * (v - lo) / (hi - lo); };

    std::string s = svg_open(kWidth, kHeight);
    s += axes(kWidth, kHeight, "iteration", "dual value");
    for (std::size_t i = 0; i < series.size(); ++i) {
        const Series& sr = series[i];
        if (sr.values.empty()) continue;
        std::string pts;
        for (std::size_t k = 0; k < sr.values.size(); ++k)
            pts += fmt(X(static_cast<double>(k))) + "," + fmt(Y(sr.values[k])) + " ";
        pts.pop_back();
        s += "<polyline fill=\"none\" stroke=\"" + std::string(palette(i)) +
             "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        s += "<text x=\"" + fmt(kWidth - kMargin - 120) + "\" y=\"" + fmt(kMargin + 16.0 * i) +
             "\" font-size=\"12\" fill=\"" + palette(i) + "\">" + sr.name + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

}  // namespace ttp
