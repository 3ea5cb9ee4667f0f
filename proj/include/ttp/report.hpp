#pragma once

#include <string>

#include <json.hpp>

#include "ttp/driver.hpp"
#include "ttp/instance.hpp"

namespace ttp {

using Json = nlohmann::ordered_json;

Json config_to_json(const SolverConfig& config);
SolverConfig config_from_json(const Json& j);

// Timing is left out unless asked for so that reports of repeated runs are
// byte-identical.
Json report_to_json(const SolveReport& report, const Instance& instance, bool with_timing = false);

// A report read back from disk together with the instance it embeds.
struct StoredReport {
    Instance instance;
    SolveReport report;
};
StoredReport report_from_json(const Json& j);

Json comparison_to_json(const ComparisonReport& cmp, const Instance& instance,
                        bool with_timing = false);

// k,phi,forecast,achieved,step,u,bundle_size
std::string trace_csv(const SolveReport& report);

// k plus one phi_center column per report; shorter traces leave blanks.
std::string convergence_csv(const std::vector<const SolveReport*>& reports);

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace ttp
