#include "ttp/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ttp/driver.hpp"
#include "ttp/error.hpp"
#include "ttp/export.hpp"
#include "ttp/instance.hpp"
#include "ttp/report.hpp"

namespace ttp {

namespace {

namespace fs = std::filesystem;

const char* kParamHelp =
    "Solver parameters (--param key=value):\n"
    "  m_L=0.1        descent test fraction\n"
    "  u0=1           initial proximal weight\n"
    "  u_min=1e-10    proximal weight floor\n"
    "  k_max=200      iteration limit\n"
    "  mu0=0          initial price on every block-time\n"
    "  epsilon=1e-13  stopping tolerance on the forecasted descent\n"
    "  tol_qp=1e-10  bundle_cap=50  activity_tolerance=1e-8\n"
    "  parallel_oracle=false  signal_waiting=false  travel_penalty=0\n";

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("write to " + path.string() + " failed");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir);
}

std::pair<std::string, std::string> split_kv(const std::string& kv, const char* flag) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
        throw CLI::ValidationError(flag, "expected key=value, got '" + kv + "'");
    return {kv.substr(0, eq), kv.substr(eq + 1)};
}

SolverConfig make_config(const std::vector<std::string>& params) {
    SolverConfig config;
    for (const auto& kv : params) {
        auto [k, v] = split_kv(kv, "--param");
        set_param(config, k, v);
    }
    validate(config);
    return config;
}

Json parse_json_file(const std::string& path) {
    const std::string text = read_file(path);
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw InputError(path, e.what());
    }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void export_solution(const StoredReport& stored, const fs::path& dir, const std::string& suffix,
                     bool svg) {
    const Instance& inst = stored.instance;
    const SolveReport& rep = stored.report;
    const auto graphs = build_all_graphs(inst, rep.config.graph);
    write_file(dir / ("prices" + suffix + ".csv"), prices_csv(rep.final_mu));
    write_file(dir / ("timetable" + suffix + ".csv"), timetable_csv(inst, graphs, rep.final_paths));
    write_file(dir / ("violations" + suffix + ".csv"),
               violations_csv(inst, graphs, rep.final_paths));
    if (svg) {
        write_file(dir / ("timedist" + suffix + ".svg"), timedist_svg(inst, graphs, rep.final_paths));
        write_file(dir / ("price_heatmap" + suffix + ".svg"), price_heatmap_svg(rep.final_mu));
    }
}

void export_convergence(const std::vector<const SolveReport*>& reports, const fs::path& dir,
                        bool svg) {
    write_file(dir / "convergence.csv", convergence_csv(reports));
    if (svg) {
        std::vector<Series> series;
        for (const SolveReport* r : reports) {
            Series s{to_string(r->method), {}};
            for (const auto& it : r->iterations) s.values.push_back(it.phi_center);
            series.push_back(std::move(s));
        }
        write_file(dir / "convergence.svg", convergence_svg(series));
    }
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Lagrangian dual bounds for train timetabling by proximal bundle methods"};
    app.require_subcommand(1);
    app.footer(kParamHelp);

    std::string tmpl, gen_out;
    std::uint64_t seed = 0;
    std::vector<std::string> overrides;
    auto* gen = app.add_subcommand("generate", "write a seeded instance from a line template");
    gen->add_option("--template", tmpl, "s1|s2|s3|s4|custom")->required();
    gen->add_option("--seed", seed, "random seed")->required();
    gen->add_option("--set", overrides, "generator override key=value (repeatable)");
    gen->add_option("--out", gen_out, "instance JSON path (stdout if omitted)");

    std::string instance_path, method = "disagg", out_dir;
    std::vector<std::string> params;
    bool timing = false;
    auto* solve = app.add_subcommand("solve", "run one bundle method");
    solve->add_option("--instance", instance_path, "instance JSON")->required();
    solve->add_option("--method", method, "agg|disagg")->default_val("disagg");
    solve->add_option("--param", params, "solver parameter key=value (repeatable)");
    solve->add_option("--out", out_dir, "output directory (report on stdout if omitted)");
    solve->add_flag("--timing", timing, "include wall-clock timings in the report");
    solve->footer(kParamHelp);

    auto* cmp = app.add_subcommand("compare", "run both methods with identical parameters");
    cmp->add_option("--instance", instance_path, "instance JSON")->required();
    cmp->add_option("--param", params, "solver parameter key=value (repeatable)");
    cmp->add_option("--out", out_dir, "output directory")->required();
    cmp->add_flag("--timing", timing, "include wall-clock timings in the report");
    cmp->footer(kParamHelp);

    std::string report_path;
    bool svg = false;
    auto* exp = app.add_subcommand("export", "write prices, timetable and plots from a report");
    exp->add_option("--report", report_path, "solve or comparison report JSON")->required();
    exp->add_option("--out", out_dir, "output directory")->required();
    exp->add_flag("--svg", svg, "also write SVG plots");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*gen) {
            Overrides ov;
            for (const auto& kv : overrides) {
                auto [k, v] = split_kv(kv, "--set");
                try {
                    ov[k] = std::stod(v);
                } catch (const std::exception&) {
                    throw InputError("set/" + k, "expected a number, got '" + v + "'");
                }
            }
            const Instance inst = generate_instance(parse_template(tmpl), seed, ov);
            const std::string text = save_instance(inst);
            if (gen_out.empty()) out << text;
            else write_file(gen_out, text);
            return 0;
        }
        if (*solve) {
            SolverConfig config = make_config(params);
            config.method = parse_method(method);
            const Instance inst = load_instance_file(instance_path);
            const SolveReport rep = run(inst, config);
            const std::string text = dump(report_to_json(rep, inst, timing));
            if (out_dir.empty()) {
                out << text;
            } else {
                ensure_dir(out_dir);
                write_file(fs::path(out_dir) / "report.json", text);
                write_file(fs::path(out_dir) / "trace.csv", trace_csv(rep));
            }
            if (rep.termination == Termination::MasterFailure) {
                err << "solver failure: " << rep.message << "\n";
                return 3;
            }
            return 0;
        }
        if (*cmp) {
            const SolverConfig config = make_config(params);
            const Instance inst = load_instance_file(instance_path);
            const ComparisonReport c = compare(inst, config);
            ensure_dir(out_dir);
            const fs::path dir(out_dir);
            write_file(dir / "comparison.json", dump(comparison_to_json(c, inst, timing)));
            write_file(dir / "trace_aggregate.csv", trace_csv(c.aggregate));
            write_file(dir / "trace_disaggregate.csv", trace_csv(c.disaggregate));
            write_file(dir / "convergence.csv", convergence_csv({&c.aggregate, &c.disaggregate}));
            if (c.aggregate.termination == Termination::MasterFailure ||
                c.disaggregate.termination == Termination::MasterFailure) {
                err << "solver failure: " << c.aggregate.message << c.disaggregate.message << "\n";
                return 3;
            }
            return 0;
        }
        if (*exp) {
            const Json j = parse_json_file(report_path);
            ensure_dir(out_dir);
            const fs::path dir(out_dir);
            if (j.is_object() && j.value("kind", "") == "comparison") {
                const StoredReport a = report_from_json(j.at("reports").at("aggregate"));
                const StoredReport d = report_from_json(j.at("reports").at("disaggregate"));
                export_solution(a, dir, "_aggregate", svg);
                export_solution(d, dir, "_disaggregate", svg);
                export_convergence({&a.report, &d.report}, dir, svg);
            } else {
                const StoredReport s = report_from_json(j);
                export_solution(s, dir, "", svg);
                export_convergence({&s.report}, dir, svg);
            }
            return 0;
        }
    } catch (const CLI::Error& e) {
        err << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const InputError& e) {
        err << "input error: " << e.what() << "\n";
        return 2;
    } catch (const MasterFailure& e) {
        err << "solver failure: " << e.what() << " (residual " << e.residual() << ")\n";
        return 3;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const Json::exception& e) {
        err << "input error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace ttp
