#include "safesim/jitter.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace safesim {

namespace {

using nlohmann::json;

std::vector<TraceRecord> filter_kind(std::vector<TraceRecord> trace, const std::string& kind) {
    if (kind.empty() || kind == "all") return trace;
    FrameKind want = FrameKind::Unknown;
    if (kind == "command") want = FrameKind::Command;
    else if (kind == "status") want = FrameKind::Status;
    std::erase_if(trace, [&](const TraceRecord& r) { return r.frame_kind != want; });
    return trace;
}

void print_compare(const JitterReport& a, const JitterReport& b, std::ostream& out) {
    const auto factor = [](double base, double other) -> std::string {
        if (other == 0.0) return base == 0.0 ? "--" : "inf";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.1fx", base / other);
        return buf;
    };
    const auto row = [&](const char* name, double va, double vb, const std::string& f) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%-28s %12.2f %12.2f %10s", name, va, vb, f.c_str());
        out << buf << '\n';
    };
    char head[128];
    std::snprintf(head, sizeof(head), "%-28s %12s %12s %10s", "Metric", "A", "B", "Factor");
    out << head << '\n';
    row("Nominal cycle (us)", a.nominal_cycle_us, b.nominal_cycle_us, "--");
    row("Jitter SD sigma (us)", a.sigma_us, b.sigma_us, factor(a.sigma_us, b.sigma_us));
    row("p99 |jitter| (us)", a.p99_abs_us, b.p99_abs_us, factor(a.p99_abs_us, b.p99_abs_us));
    row("p99.9 |jitter| (us)", a.p999_abs_us, b.p999_abs_us, factor(a.p999_abs_us, b.p999_abs_us));
    row("Max |jitter| (us)", a.max_abs_us, b.max_abs_us, factor(a.max_abs_us, b.max_abs_us));
    row("|jitter|>50us (%)", a.excursion_fraction * 100.0, b.excursion_fraction * 100.0, "--");
    row("Missed cycles (>2ms)", static_cast<double>(a.missed_cycles),
        static_cast<double>(b.missed_cycles), "--");
}

} // namespace

std::string report_to_json(const JitterReport& r) {
    json doc{{"nominal_cycle_us", r.nominal_cycle_us},
             {"sigma_us", r.sigma_us},
             {"p99_abs_us", r.p99_abs_us},
             {"p999_abs_us", r.p999_abs_us},
             {"max_abs_us", r.max_abs_us},
             {"excursion_fraction", r.excursion_fraction},
             {"excursion_count", r.excursion_count},
             {"missed_cycles", r.missed_cycles},
             {"within_pm10us_fraction", r.within_band_fraction},
             {"cycles_analyzed", r.cycles_analyzed}};
    return doc.dump(2);
}

int analyze_cli(const std::vector<std::string>& args) {
    CLI::App app{"control-cycle jitter analyzer"};
    app.require_subcommand(1);

    // analyze
    auto* analyze_cmd = app.add_subcommand("analyze", "compute the jitter report for one trace");
    std::string trace_path, out_path, ccdf_path, per_second_path, kind;
    analyze_cmd->add_option("--trace", trace_path, "trace CSV")->required();
    analyze_cmd->add_option("--out", out_path, "report JSON output")->required();
    analyze_cmd->add_option("--ccdf", ccdf_path, "optional CCDF CSV output");
    analyze_cmd->add_option("--per-second", per_second_path, "optional per-second excursion CSV");
    analyze_cmd->add_option("--kind", kind, "restrict to one frame kind (command|status|all)");

    // compare
    auto* compare_cmd = app.add_subcommand("compare", "side-by-side report for two traces");
    std::string a_path, b_path;
    compare_cmd->add_option("--a", a_path, "baseline trace CSV")->required();
    compare_cmd->add_option("--b", b_path, "comparison trace CSV")->required();

    // generate
    auto* generate_cmd = app.add_subcommand("generate", "emit a synthetic trace");
    GeneratorConfig gen;
    std::string gen_out;
    std::string profile;
    generate_cmd->add_option("--out", gen_out, "trace CSV output")->required();
    generate_cmd->add_option("--cycles", gen.n_cycles, "number of control cycles")->required();
    generate_cmd->add_option("--profile", profile, "isolated | contended");
    generate_cmd->add_option("--sigma-us", gen.sigma_us, "Gaussian phase noise");
    generate_cmd->add_option("--p-tail", gen.p_tail, "tail excursion probability");
    generate_cmd->add_option("--seed", gen.seed, "generator seed");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (analyze_cmd->parsed()) {
            const auto trace = filter_kind(read_trace_csv(trace_path), kind);
            const JitterReport report = analyze(trace);
            std::ofstream out(out_path);
            if (!out) throw std::ios_base::failure("cannot write " + out_path);
            out << report_to_json(report) << '\n';

            if (!ccdf_path.empty()) {
                std::ofstream c(ccdf_path);
                if (!c) throw std::ios_base::failure("cannot write " + ccdf_path);
                c << "threshold_us,fraction\n";
                for (const auto& point : ccdf(trace)) {
                    c << point.threshold_us << ',' << point.fraction << '\n';
                }
            }
            if (!per_second_path.empty()) {
                std::ofstream p(per_second_path);
                if (!p) throw std::ios_base::failure("cannot write " + per_second_path);
                p << "second,count\n";
                for (const auto& bucket : excursions_per_second(trace)) {
                    p << bucket.second << ',' << bucket.count << '\n';
                }
            }
        } else if (compare_cmd->parsed()) {
            const JitterReport a = analyze(read_trace_csv(a_path));
            const JitterReport b = analyze(read_trace_csv(b_path));
            print_compare(a, b, std::cout);
        } else if (generate_cmd->parsed()) {
            if (profile == "isolated") {
                gen.sigma_us = 2.0;
                gen.p_tail = 0.0;
            } else if (profile == "contended") {
                gen.sigma_us = 10.0;
                gen.p_tail = 0.02;
            } else if (!profile.empty()) {
                std::cerr << "unknown profile: " << profile << '\n';
                return 2;
            }
            write_trace_csv(gen_out, generate_trace(gen));
        }
    } catch (const TraceError& e) {
        std::cerr << "malformed trace: " << e.what() << '\n';
        return 2;
    } catch (const InvalidConfig& e) {
        std::cerr << "invalid config: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace safesim
