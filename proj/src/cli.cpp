#include "evolve/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "evolve/devices.hpp"
#include "evolve/evolution.hpp"
#include "evolve/exp2.hpp"
#include "evolve/live.hpp"
#include "evolve/log.hpp"
#include "evolve/paperlog.hpp"
#include "evolve/scenario.hpp"
#include "evolve/statechart.hpp"

namespace evolve::cli {

namespace {

constexpr int kOk = 0;
constexpr int kDomainFailure = 1;
constexpr int kUsageError = 2;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text << std::flush;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

bool is_endpoint(const std::string& device) {
    return device.find(':') != std::string::npos;
}

evolution::EvolutionPair builtin_pair(const std::string& kind) {
    if (kind == "lightbulb")
        return {devices::light_bulb_original(), devices::light_bulb_evolved()};
    if (kind == "robot")
        return {devices::cleaning_robot_original(),
                devices::cleaning_robot_evolved()};
    throw devices::UnknownDeviceKind(kind);
}

devices::SimulatedDevice builtin_device(const std::string& kind) {
    if (kind == "lightbulb") return devices::light_bulb_device();
    if (kind == "robot") return devices::cleaning_robot_device();
    throw devices::UnknownDeviceKind(kind);
}

// Models come from --original/--evolved when given (both or neither), and
// default to the builtin pair for the device kind.
evolution::EvolutionPair resolve_pair(const std::string& original,
                                      const std::string& evolved,
                                      const std::string& device) {
    if (original.empty() != evolved.empty())
        throw CLI::ValidationError(
            "--original and --evolved must be given together");
    if (original.empty()) {
        if (is_endpoint(device))
            throw CLI::ValidationError(
                "an external device endpoint needs explicit --original/--evolved "
                "models");
        return builtin_pair(device);
    }
    return {statechart::parse_machine(slurp(original)),
            statechart::parse_machine(slurp(evolved))};
}

int cmd_validate(const std::string& original, const std::string& evolved) {
    std::optional<evolution::EvolutionPair> pair;
    try {
        pair.emplace(evolution::EvolutionPair{
            statechart::parse_machine(slurp(original)),
            statechart::parse_machine(slurp(evolved))});
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    }

    evolution::ConditionReport report = evolution::check_conditions(*pair);
    std::string body = "{\"conditions\":" + evolution::report_to_json(report);
    if (!report.ok()) {
        std::cout << body << "}\n";
        return kDomainFailure;
    }
    body += ",\"diff\":" + evolution::diff_to_json(evolution::diff(*pair));
    try {
        evolution::gate_for_runtime(*pair);
    } catch (const evolution::GateError& e) {
        body += ",\"gate_error\":" + nlohmann::json(e.what()).dump();
        std::cout << body << "}\n";
        return kDomainFailure;
    }
    std::cout << body << "}\n";
    return kOk;
}

int cmd_scenario(const std::string& original, const std::string& evolved,
                 const std::string& device, const std::string& script_path,
                 const std::string& log_style, const std::string& trace_path) {
    if (is_endpoint(device)) {
        std::cerr << "error: the scenario harness runs on a virtual clock and "
                     "cannot drive an external device endpoint\n";
        return kUsageError;
    }
    std::optional<evolution::EvolutionPair> pair;
    scenario::ScenarioScript script;
    try {
        pair.emplace(resolve_pair(original, evolved, device));
        script = scenario::parse_script(slurp(script_path));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    }

    try {
        evolution::ValidatedPair vp = evolution::gate_for_runtime(*pair);
        mapek::HandlerRegistry handlers =
            devices::builtin_handlers_for(vp.diff().new_states);
        scenario::ScenarioResult result = scenario::run_scenario(
            vp, builtin_device(device), script, std::move(handlers));
        std::string text = log_style == "paper"
                               ? paperlog::render(result.records)
                               : result.trace_text;
        write_output(trace_path, text);
        log::info("scenario finished: o=" + result.final_o +
                  " n=" + result.final_n + " steps=" +
                  std::to_string(result.records.size()));
        return kOk;
    } catch (const devices::UnknownDeviceKind& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDomainFailure;
    }
}

int cmd_run(const std::string& original, const std::string& evolved,
            const live::LiveConfig& cfg) {
    std::optional<evolution::EvolutionPair> pair;
    try {
        pair.emplace(resolve_pair(original, evolved, cfg.device));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    }

    try {
        evolution::ValidatedPair vp = evolution::gate_for_runtime(*pair);
        mapek::HandlerRegistry handlers =
            devices::builtin_handlers_for(vp.diff().new_states);
        return live::run_live(vp, std::move(handlers), cfg);
    } catch (const devices::UnknownDeviceKind& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDomainFailure;
    }
}

int cmd_exp2(const ctmc::Exp2Config& cfg, const std::string& out_path) {
    ctmc::Exp2Table table;
    try {
        table = ctmc::run_exp2(cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    }
    write_output(out_path, ctmc::to_csv(table));

    // Data goes to stdout when no --out is given, so the verdict summary
    // moves to stderr in that case.
    std::ostream& summary = out_path.empty() ? std::cerr : std::cout;
    ctmc::Exp2Verdicts v = ctmc::check_exp2(table);
    summary << "MONOTONE " << (v.reach_monotone_in_T ? "OK" : "FAIL") << "\n"
            << "DOMINANCE " << (v.speed_dominance ? "OK" : "FAIL") << "\n"
            << "LOSS_ORDERING " << (v.loss_ordering_at_100 ? "OK" : "FAIL")
            << "\n"
            << "AGREEMENT " << (v.agreement ? "OK" : "FAIL") << "\n";
    for (const std::string& f : v.failures) summary << "  " << f << "\n";
    summary << "max_norm_error " << table.max_norm_error << "\n" << std::flush;

    bool all_ok = v.reach_monotone_in_T && v.speed_dominance &&
                  v.loss_ordering_at_100 && v.agreement;
    return all_ok ? kOk : kDomainFailure;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"evolve: an event converter for evolving embedded systems"};
    app.require_subcommand(1);

    // validate
    auto* validate = app.add_subcommand(
        "validate", "Check the evolution conditions on a machine pair");
    std::string v_original, v_evolved;
    validate->add_option("--original", v_original, "original machine JSON")
        ->required();
    validate->add_option("--evolved", v_evolved, "evolved machine JSON")
        ->required();

    // scenario
    auto* scen = app.add_subcommand(
        "scenario", "Run a scripted scenario on the virtual clock");
    std::string s_original, s_evolved, s_device = "lightbulb";
    std::string s_script, s_style = "tabular", s_trace;
    scen->add_option("--original", s_original, "original machine JSON");
    scen->add_option("--evolved", s_evolved, "evolved machine JSON");
    scen->add_option("--device", s_device,
                     "builtin device kind (lightbulb|robot)");
    scen->add_option("--script", s_script, "scenario script file")->required();
    scen->add_option("--log-style", s_style, "trace style (tabular|paper)")
        ->check(CLI::IsMember({"tabular", "paper"}));
    scen->add_option("--trace", s_trace, "trace output path (default stdout)");

    // run
    auto* run = app.add_subcommand(
        "run", "Serve the converter on TCP sockets under the wall clock");
    std::string r_original, r_evolved;
    live::LiveConfig r_cfg;
    std::string r_listen = "127.0.0.1:0", r_control = "127.0.0.1:0";
    run->add_option("--original", r_original, "original machine JSON");
    run->add_option("--evolved", r_evolved, "evolved machine JSON");
    run->add_option("--device", r_cfg.device,
                    "builtin device kind or external host:port peer");
    run->add_option("--listen", r_listen, "controller event endpoint");
    run->add_option("--control", r_control, "command endpoint");
    run->add_option("--trace", r_cfg.trace_path,
                    "trace output path (default stdout)");

    // exp2
    auto* exp2 = app.add_subcommand(
        "exp2", "Sweep the CTMC models and check the figure-shape properties");
    ctmc::Exp2Config e_cfg;
    std::string e_out, e_rate;
    bool conv_given = false, runs_given = false;
    exp2->add_option("--conv", e_cfg.conv_means,
                     "converter mean conversion times in seconds")
        ->each([&](const std::string&) { conv_given = true; });
    exp2->add_option("--t-max", e_cfg.t_max, "largest horizon T");
    exp2->add_option("--step", e_cfg.t_step, "grid step");
    exp2->add_option("--runs", e_cfg.runs, "simulation runs per cell (0 = none)")
        ->each([&](const std::string&) { runs_given = true; });
    exp2->add_option("--seed", e_cfg.seed, "simulation seed");
    exp2->add_option("--emb-lost-rate", e_rate,
                     "embedded lost-event rate (rational, e.g. 1/1)");
    exp2->add_option("--out", e_out, "CSV output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageError;
    }

    if (validate->parsed()) return cmd_validate(v_original, v_evolved);
    if (scen->parsed())
        return cmd_scenario(s_original, s_evolved, s_device, s_script, s_style,
                            s_trace);
    if (run->parsed()) {
        try {
            r_cfg.listen = live::parse_endpoint(r_listen);
            r_cfg.control = live::parse_endpoint(r_control);
        } catch (const std::invalid_argument& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kUsageError;
        }
        return cmd_run(r_original, r_evolved, r_cfg);
    }
    if (exp2->parsed()) {
        if (conv_given) e_cfg.include_baseline = false;
        if (e_cfg.t_max <= 0 && !runs_given) e_cfg.runs = 0;
        if (!e_rate.empty()) {
            try {
                e_cfg.emb_lost_rate = ctmc::Rational::parse(e_rate);
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kUsageError;
            }
        }
        try {
            return cmd_exp2(e_cfg, e_out);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kDomainFailure;
        }
    }
    return kUsageError;  // unreachable: require_subcommand(1)
}

}  // namespace evolve::cli
