// echoprop — empirical property testing for driven state-space systems.
//
// Subcommands:
//   analyze       run the property testers and the implication-diagram check
//   curve         emit divergence / pullback-diameter curves as CSV
//   diagram       print the encoded implication diagram
//   list-systems  print the system catalog
//
// Exit codes: 0 success, 2 internal invariant violation, 64 usage error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "echoprop/diagram.hpp"
#include "echoprop/flows.hpp"
#include "echoprop/json_io.hpp"
#include "echoprop/report.hpp"
#include "echoprop/rng.hpp"
#include "echoprop/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 2;
constexpr int kExitUsage = 64;

struct CommonOptions {
    std::string system = "affine(0.5,1)";
    std::string process = "iid";
    std::string input_file;
    std::uint64_t seed = 0;
};

echoprop::SystemSpec resolve_system(const CommonOptions& opt) {
    return echoprop::load_system(opt.system);
}

echoprop::InputProcess resolve_process(const CommonOptions& opt, const echoprop::SystemSpec& sys) {
    if (!opt.input_file.empty()) {
        return echoprop::window_process(echoprop::read_window_file(opt.input_file), opt.seed);
    }
    return echoprop::parse_process(opt.process, sys, opt.seed);
}

void apply_config_flags(CLI::App* cmd, echoprop::TestConfig& cfg) {
    cmd->add_option("--n-max", cfg.n_max, "divergence horizon (default 200)");
    cmd->add_option("--tail-window", cfg.tail_window, "limsup tail width (default 20)");
    cmd->add_option("--tol", cfg.tol, "convergence tolerance (default 1e-6)");
    cmd->add_option("--samples", cfg.state_samples, "state samples per pool (default 64)");
    cmd->add_option("--input-samples", cfg.input_samples, "sampled input windows (default 32)");
    cmd->add_option("--burn-in", cfg.burn_in, "reachable-set burn-in length (default 128)");
    cmd->add_option("--past-horizon", cfg.past_horizon, "window depth for pullbacks (default 256)");
    cmd->add_option("--workers", cfg.workers, "worker threads (default 1)");
}

int run_analyze(const CommonOptions& opt, echoprop::TestConfig cfg, const std::string& props_csv,
                const std::string& out_path) {
    cfg.seed = opt.seed;
    const auto sys = resolve_system(opt);
    const auto proc = resolve_process(opt, sys);
    const auto props = props_csv.empty() ? echoprop::default_properties()
                                         : echoprop::parse_properties(props_csv);
    const auto report = echoprop::run_analysis(sys, proc, cfg, props);

    std::cout << "system " << sys.id << ", process " << proc.id << ", seed " << opt.seed << "\n";
    for (const auto& v : report.verdicts) {
        std::cout << "  " << echoprop::to_string(v.property) << ": "
                  << echoprop::to_string(v.level) << "\n";
    }
    std::cout << "  diagram: " << report.check.violations.size() << " violation(s), "
              << report.check.witnessed.size() << " non-implication(s) witnessed\n";
    if (!out_path.empty()) {
        echoprop::emit_report(report, out_path);
        std::cout << "  report written to " << out_path << "\n";
    }
    return kExitOk;
}

int run_curve(const CommonOptions& opt, echoprop::TestConfig cfg, const std::string& kind,
              const std::string& direction, const std::string& out_path) {
    cfg.seed = opt.seed;
    cfg.validate();
    const auto sys = resolve_system(opt);
    const auto proc = resolve_process(opt, sys);
    const std::uint64_t wseed = echoprop::mix64(cfg.seed, echoprop::stream::window, 0);
    const auto w = echoprop::generate_window(echoprop::with_seed(proc, wseed), cfg.window_past(),
                                             cfg.n_max);

    std::ostringstream csv;
    csv << "n,value\n";
    if (kind == "divergence") {
        const auto x = sys.sample_state(cfg.seed, 0);
        const auto y = sys.sample_state(cfg.seed, 1);
        const auto dir = direction == "pullback" ? echoprop::FlowDirection::Pullback
                                                 : echoprop::FlowDirection::Forward;
        auto curve = echoprop::divergence_curve(sys, x, y, w, cfg.n_max, dir);
        curve.meta.window_seed = wseed;
        for (std::size_t n = 0; n < curve.d.size(); ++n) {
            csv << n << "," << curve.d[n] << "\n";
        }
    } else if (kind == "diameter") {
        std::vector<echoprop::StatePoint> pool;
        for (int i = 0; i < cfg.state_samples; ++i) {
            pool.push_back(sys.sample_state(cfg.seed, static_cast<std::uint64_t>(i)));
        }
        pool.insert(pool.end(), sys.hard_states.begin(), sys.hard_states.end());
        for (int n = 0; n <= cfg.n_max; ++n) {
            csv << n << ","
                << echoprop::pullback_image_diameter(sys, w, n, pool,
                                                     echoprop::DiameterPolicy{512, 4096, cfg.seed})
                << "\n";
        }
    } else {
        throw echoprop::ConfigError("unknown curve kind '" + kind + "'");
    }

    if (out_path.empty() || out_path == "-") {
        std::cout << csv.str();
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw echoprop::ConfigError("cannot write " + out_path);
        out << csv.str();
    }
    return kExitOk;
}

int run_diagram(bool as_json) {
    const auto& d = echoprop::standard_diagram();
    if (as_json) {
        std::cout << echoprop::diagram_to_json(d).dump(2) << "\n";
        return kExitOk;
    }
    auto node_str = [](const echoprop::DiagramNode& n) {
        return echoprop::to_string(n.property) + " @ " + echoprop::to_string(n.level);
    };
    for (const auto& e : d.edges) {
        std::string lhs;
        for (std::size_t i = 0; i < e.from.size(); ++i) {
            if (i) lhs += " AND ";
            lhs += node_str(e.from[i]);
        }
        std::cout << "[" << echoprop::to_string(e.condition) << "] " << lhs << "  =>  "
                  << node_str(e.to) << "\n    " << e.provenance << "\n";
    }
    for (const auto& ni : d.non_implications) {
        std::cout << "[non-implication] " << node_str(ni.from) << "  =/=>  " << node_str(ni.to)
                  << "  (witness: " << ni.witness_system << ")\n    " << ni.provenance << "\n";
    }
    return kExitOk;
}

int run_list_systems() {
    for (const auto& [name, description] : echoprop::catalog_entries()) {
        std::cout << name << "\n    " << description << "\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"empirical memory-property testing for driven state-space systems"};
    app.set_version_flag("--version", echoprop::kToolVersion);
    app.require_subcommand(1);

    CommonOptions opt;
    echoprop::TestConfig cfg;
    std::string props_csv;
    std::string out_path;
    std::string curve_kind = "divergence";
    std::string curve_direction = "forward";
    bool diagram_json = false;

    auto* analyze = app.add_subcommand("analyze", "run property testers and the diagram check");
    analyze->add_option("--system", opt.system, "catalog name or config file path");
    analyze->add_option("--process", opt.process, "input process spec");
    analyze->add_option("--input-file", opt.input_file, "window literal file (explicit process)");
    analyze->add_option("--props", props_csv, "comma-separated property list");
    analyze->add_option("--seed", opt.seed, "master seed")->required();
    analyze->add_option("--out", out_path, "report output path (JSON)");
    apply_config_flags(analyze, cfg);

    auto* curve = app.add_subcommand("curve", "emit divergence or diameter curves as CSV");
    curve->add_option("--system", opt.system, "catalog name or config file path");
    curve->add_option("--process", opt.process, "input process spec");
    curve->add_option("--input-file", opt.input_file, "window literal file (explicit process)");
    curve->add_option("--kind", curve_kind, "divergence|diameter");
    curve->add_option("--direction", curve_direction, "forward|pullback (divergence only)");
    curve->add_option("--seed", opt.seed, "master seed");
    curve->add_option("--out", out_path, "CSV output path ('-' for stdout)");
    apply_config_flags(curve, cfg);

    auto* diagram = app.add_subcommand("diagram", "print the encoded implication diagram");
    diagram->add_flag("--json", diagram_json, "emit JSON instead of text");

    app.add_subcommand("list-systems", "print the system catalog");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            // --help / --version
            return app.exit(e);
        }
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (app.got_subcommand("analyze")) {
            return run_analyze(opt, cfg, props_csv, out_path);
        }
        if (app.got_subcommand("curve")) {
            return run_curve(opt, cfg, curve_kind, curve_direction, out_path);
        }
        if (app.got_subcommand("diagram")) {
            return run_diagram(diagram_json);
        }
        return run_list_systems();
    } catch (const echoprop::InternalError& e) {
        std::cerr << "internal invariant violation: " << e.what() << "\n";
        return kExitInternal;
    } catch (const echoprop::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const echoprop::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
}
