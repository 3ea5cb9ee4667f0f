#pragma once

#include <string>
#include <vector>

#include "ttp/instance.hpp"
#include "ttp/prices.hpp"
#include "ttp/spacetime.hpp"

namespace ttp {

// One block visit of a scheduled train.
struct BlockVisit {
    int block = 0;
    int entry_s = 0;
    int exit_s = 0;
    bool stopped = false;
};

// Block visits in travel order; empty for the null path.
std::vector<BlockVisit> path_schedule(const Instance& instance, const MovementGraph& graph,
                                      std::span<const int> path);

// block,t,mu over nonzero prices.
std::string prices_csv(const PriceMatrix& mu);

// request,seq,block,entry_s,exit_s,stopped for every scheduled request.
std::string timetable_csv(const Instance& instance, const std::vector<MovementGraph>& graphs,
                          const std::vector<std::vector<int>>& paths);

// block,t,usage,capacity for cells the chosen paths over-use.
std::string violations_csv(const Instance& instance, const std::vector<MovementGraph>& graphs,
                           const std::vector<std::vector<int>>& paths);

// Time on the horizontal axis, block position on the vertical one.
std::string timedist_svg(const Instance& instance, const std::vector<MovementGraph>& graphs,
                         const std::vector<std::vector<int>>& paths);

std::string price_heatmap_svg(const PriceMatrix& mu);

// Dual value traces, one polyline per series.
struct Series {
    std::string name;
    std::vector<double> values;
};
std::string convergence_svg(const std::vector<Series>& series);

}  // namespace ttp
