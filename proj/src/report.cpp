#include "ttp/report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "ttp/error.hpp"

namespace ttp {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Json config_to_json(const SolverConfig& c) {
    Json j;
    j["method"] = to_string(c.method);
    j["m_L"] = c.m_L;
    j["u0"] = c.u0;
    j["u_min"] = c.u_min;
    j["k_max"] = c.k_max;
    j["mu0"] = c.mu0;
    j["epsilon"] = c.epsilon;
    j["tol_qp"] = c.tol_qp;
    j["bundle_cap"] = c.bundle_cap;
    j["activity_tolerance"] = c.activity_tolerance;
    j["parallel_oracle"] = c.parallel_oracle;
    j["signal_waiting"] = c.graph.signal_waiting;
    j["travel_penalty"] = c.graph.travel_penalty_per_step;
    return j;
}

SolverConfig config_from_json(const Json& j) {
    SolverConfig c;
    try {
        c.method = parse_method(j.at("method").get<std::string>());
        c.m_L = j.at("m_L").get<double>();
        c.u0 = j.at("u0").get<double>();
        c.u_min = j.at("u_min").get<double>();
        c.k_max = j.at("k_max").get<int>();
        c.mu0 = j.at("mu0").get<double>();
        c.epsilon = j.at("epsilon").get<double>();
        c.tol_qp = j.at("tol_qp").get<double>();
        c.bundle_cap = j.at("bundle_cap").get<int>();
        c.activity_tolerance = j.at("activity_tolerance").get<double>();
        c.parallel_oracle = j.at("parallel_oracle").get<bool>();
        c.graph.signal_waiting = j.at("signal_waiting").get<bool>();
        c.graph.travel_penalty_per_step = j.at("travel_penalty").get<double>();
    } catch (const Json::exception& e) {
        throw InputError("/config", e.what());
    }
    return c;
}

namespace {

IterationStep parse_step(const std::string& s) {
    if (s == "initial") return IterationStep::Initial;
    if (s == "serious") return IterationStep::Serious;
    if (s == "null") return IterationStep::Null;
    throw InputError("/iterations", "unknown step '" + s + "'");
}

Termination parse_termination(const std::string& s) {
    if (s == "ToleranceReached") return Termination::ToleranceReached;
    if (s == "IterationLimit") return Termination::IterationLimit;
    if (s == "MasterFailure") return Termination::MasterFailure;
    throw InputError("/termination", "unknown termination '" + s + "'");
}

Json prices_to_json(const PriceMatrix& mu) {
    Json nz = Json::array();
    const auto v = mu.values();
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] != 0.0) nz.push_back(Json::array({i, v[i]}));
    Json j;
    j["blocks"] = mu.blocks();
    j["intervals"] = mu.intervals();
    j["nonzeros"] = std::move(nz);
    return j;
}

PriceMatrix prices_from_json(const Json& j) {
    PriceMatrix mu(j.at("blocks").get<int>(), j.at("intervals").get<int>());
    for (const auto& e : j.at("nonzeros")) {
        const auto cell = e.at(0).get<std::size_t>();
        if (cell >= mu.size()) throw InputError("/final_mu", "cell index out of range");
        mu[static_cast<Cell>(cell)] = e.at(1).get<double>();
    }
    return mu;
}

}  // namespace

Json report_to_json(const SolveReport& r, const Instance& instance, bool with_timing) {
    Json j;
    j["kind"] = "solve";
    j["method"] = to_string(r.method);
    j["config"] = config_to_json(r.config);
    j["termination"] = to_string(r.termination);
    j["message"] = r.message;
    j["final_phi"] = r.final_phi;
    j["final_forecast"] = r.final_forecast;
    j["master_solves"] = r.master_solves;
    j["active_evictions"] = r.active_evictions;
    j["max_decomposition_residual"] = r.max_decomposition_residual;

    Json its = Json::array();
    for (const auto& it : r.iterations) {
        Json e;
        e["k"] = it.k;
        e["phi_center"] = it.phi_center;
        e["candidate_phi"] = it.candidate_phi;
        e["forecast"] = it.forecast;
        e["achieved"] = it.achieved;
        e["ratio"] = it.ratio;
        e["step"] = to_string(it.step);
        e["u"] = it.u;
        e["bundle_size"] = it.bundle_size;
        e["model_value_at_y"] = it.model_value_at_y;
        e["kkt_residual"] = it.kkt_residual;
        e["master_iterations"] = it.master_iterations;
        its.push_back(std::move(e));
    }
    j["iterations"] = std::move(its);
    j["final_mu"] = prices_to_json(r.final_mu);
    j["final_paths"] = r.final_paths;
    Json counts = Json::array();
    for (const auto& p : r.generated_paths) counts.push_back(p.size());
    j["generated_path_counts"] = std::move(counts);
    j["generated_paths"] = r.generated_paths;
    if (with_timing) {
        j["timing"] = {{"graph_build_s", r.timing.graph_build_s},
                       {"oracle_s", r.timing.oracle_s},
                       {"master_s", r.timing.master_s},
                       {"total_s", r.timing.total_s}};
    }
    j["instance"] = Json::parse(save_instance(instance));
    return j;
}

StoredReport report_from_json(const Json& j) {
    StoredReport out;
    if (!j.is_object() || j.value("kind", "") != "solve")
        throw InputError("/kind", "not a solve report");
    try {
        out.instance = load_instance_string(j.at("instance").dump());
        SolveReport& r = out.report;
        r.config = config_from_json(j.at("config"));
        r.method = parse_method(j.at("method").get<std::string>());
        r.termination = parse_termination(j.at("termination").get<std::string>());
        r.message = j.at("message").get<std::string>();
        r.final_phi = j.at("final_phi").get<double>();
        r.final_forecast = j.at("final_forecast").get<double>();
        r.master_solves = j.at("master_solves").get<int>();
        r.active_evictions = j.at("active_evictions").get<int>();
        r.max_decomposition_residual = j.at("max_decomposition_residual").get<double>();
        for (const auto& e : j.at("iterations")) {
            IterationRecord it;
            it.k = e.at("k").get<int>();
            it.phi_center = e.at("phi_center").get<double>();
            it.candidate_phi = e.at("candidate_phi").get<double>();
            it.forecast = e.at("forecast").get<double>();
            it.achieved = e.at("achieved").get<double>();
            it.ratio = e.at("ratio").get<double>();
            it.step = parse_step(e.at("step").get<std::string>());
            it.u = e.at("u").get<double>();
            it.bundle_size = e.at("bundle_size").get<std::size_t>();
            it.model_value_at_y = e.at("model_value_at_y").get<double>();
            it.kkt_residual = e.at("kkt_residual").get<double>();
            it.master_iterations = e.at("master_iterations").get<int>();
            r.iterations.push_back(it);
        }
        r.final_mu = prices_from_json(j.at("final_mu"));
        r.final_paths = j.at("final_paths").get<std::vector<std::vector<int>>>();
        r.generated_paths = j.at("generated_paths").get<std::vector<std::vector<std::vector<int>>>>();
    } catch (const Json::exception& e) {
        throw InputError("/report", e.what());
    }
    const Instance& inst = out.instance;
    if (out.report.final_mu.blocks() != inst.num_blocks() ||
        out.report.final_mu.intervals() != inst.grid.intervals())
        throw InputError("/final_mu", "shape does not match the embedded instance");
    if (static_cast<int>(out.report.final_paths.size()) != inst.num_requests())
        throw InputError("/final_paths", "one path per request expected");
    return out;
}

namespace {

Json summary_to_json(const MethodSummary& s) {
    Json j;
    j["iterations_to_target"] = s.iterations_to_target;
    j["mean_paths"] = s.mean_paths;
    j["paths_per_request"] = s.paths_per_request;
    return j;
}

}  // namespace

Json comparison_to_json(const ComparisonReport& cmp, const Instance& instance, bool with_timing) {
    Json j;
    j["kind"] = "comparison";
    j["best_bound"] = cmp.best_bound;
    j["target_tolerance"] = cmp.target_tolerance;
    j["iteration_ratio"] = cmp.iteration_ratio;
    j["summary"] = {{"aggregate", summary_to_json(cmp.aggregate_summary)},
                    {"disaggregate", summary_to_json(cmp.disaggregate_summary)}};
    j["reports"] = {{"aggregate", report_to_json(cmp.aggregate, instance, with_timing)},
                    {"disaggregate", report_to_json(cmp.disaggregate, instance, with_timing)}};
    return j;
}

std::string trace_csv(const SolveReport& r) {
    std::ostringstream out;
    out << "k,phi,forecast,achieved,step,u,bundle_size\n";
    for (const auto& it : r.iterations) {
        out << it.k << ',' << format_double(it.candidate_phi) << ',' << format_double(it.forecast)
            << ',' << format_double(it.achieved) << ',' << to_string(it.step) << ','
            << format_double(it.u) << ',' << it.bundle_size << '\n';
    }
    return out.str();
}

std::string convergence_csv(const std::vector<const SolveReport*>& reports) {
    std::ostringstream out;
    out << 'k';
    std::size_t rows = 0;
    for (const SolveReport* r : reports) {
        out << ",phi_" << to_string(r->method);
        rows = std::max(rows, r->iterations.size());
    }
    out << '\n';
    for (std::size_t k = 0; k < rows; ++k) {
        out << k;
        for (const SolveReport* r : reports) {
            out << ',';
            if (k < r->iterations.size()) out << format_double(r->iterations[k].phi_center);
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace ttp
