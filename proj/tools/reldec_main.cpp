/*
 * reldec — run object/subject scenarios, frequency and conditional-state
 * verifications, and coherence-witness searches; emit deterministic
 * machine-readable reports.
 *
 * Exit codes: 0 all checks pass, 1 usage or spec error, 2 a verification
 * or assertion failed.
 */
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "reldec/reldec.hpp"

namespace {

using reldec::io::json;

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_failed = 2;

struct CommonOptions {
    std::int64_t shots = 100000;
    std::uint64_t seed = 1;
    double z_crit = 3.0;
    int threads = 1;
    std::string out;
    std::string format = "json";
};

void add_output_flags(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--out", opt.out, "Write the report to this path (default: stdout)");
    cmd->add_option("--format", opt.format, "Report format")
        ->check(CLI::IsMember({"json", "csv-summary"}));
    cmd->add_option("--threads", opt.threads, "Worker cap; results are thread-count independent")
        ->check(CLI::PositiveNumber);
}

void add_sampling_flags(CLI::App* cmd, CommonOptions& opt, bool* seed_given = nullptr,
                        bool* shots_given = nullptr) {
    auto* shots = cmd->add_option("--shots", opt.shots, "Ensemble size N")->check(CLI::PositiveNumber);
    auto* seed = cmd->add_option("--seed", opt.seed, "Root seed; all randomness flows from it");
    cmd->add_option("--zcrit", opt.z_crit, "Statistical acceptance threshold in standard errors")
        ->check(CLI::PositiveNumber);
    if (shots_given)
        shots->each([shots_given](const std::string&) { *shots_given = true; });
    if (seed_given)
        seed->each([seed_given](const std::string&) { *seed_given = true; });
}

void write_report(const CommonOptions& opt, const json& body, const std::string& csv) {
    const std::string text = opt.format == "json" ? body.dump(2) + "\n" : csv;
    if (opt.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(opt.out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file '" + opt.out + "'");
    f << text;
}

json load_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot read spec file '" + path + "'");
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("spec file '" + path + "': " + e.what());
    }
}

json load_scenario_source(const std::string& name, const std::string& spec_path) {
    if (!spec_path.empty()) return load_json_file(spec_path);
    const auto& builtins = reldec::builtin_scenarios();
    if (const auto it = builtins.find(name); it != builtins.end()) return json::parse(it->second);
    if (const char* dir = std::getenv("RELDEC_SCENARIO_DIR")) {
        const std::string path = std::string(dir) + "/" + name + ".json";
        if (std::ifstream probe(path); probe.good()) return load_json_file(path);
    }
    std::string known;
    for (const auto& [n, _] : builtins) known += (known.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown scenario '" + name + "' (built-ins: " + known +
                                "; set RELDEC_SCENARIO_DIR for user scenarios)");
}

int run_scenario_cmd(const std::string& name, const std::string& spec_path,
                     const CommonOptions& opt, bool shots_given, bool seed_given) {
    const reldec::ScenarioSpec spec = reldec::io::parse_scenario(load_scenario_source(name, spec_path));
    reldec::RunOptions run;
    if (shots_given) run.shots = opt.shots;
    if (seed_given) run.seed = opt.seed;
    run.z_crit = opt.z_crit;
    run.threads = opt.threads;
    const reldec::ScenarioReport report = reldec::run_scenario(spec, run);
    write_report(opt, reldec::io::to_json(report), reldec::io::to_csv(report));
    return report.pass ? exit_ok : exit_failed;
}

int run_verify_theorem_cmd(const std::string& spec_path, const CommonOptions& opt) {
    const reldec::io::ProblemSpec spec = reldec::io::parse_problem(load_json_file(spec_path));
    if (!spec.observable)
        throw std::invalid_argument("spec field 'problem.observable': missing");
    const std::vector<std::string> keep =
        spec.keep.value_or(spec.layout.complement({spec.beable.subsystem()}));
    int dim = 1;
    for (const int f : spec.layout.factors_of(keep)) dim *= spec.layout.dim(f);
    const reldec::Observable c = reldec::resolve_observable(*spec.observable, dim);
    const reldec::TheoremReport report = reldec::verify_conditional_state_theorem(
        spec.state, spec.beable, c, keep, opt.shots, opt.seed, opt.z_crit, opt.threads);
    write_report(opt, reldec::io::envelope("verify-theorem", reldec::io::to_json(report)),
                 reldec::io::to_csv(report));
    return report.pass ? exit_ok : exit_failed;
}

int run_frequencies_cmd(const std::string& spec_path, const CommonOptions& opt) {
    const reldec::io::ProblemSpec spec = reldec::io::parse_problem(load_json_file(spec_path));
    const reldec::Ensemble ensemble =
        reldec::build_ensemble(spec.state, spec.beable, opt.shots, opt.seed, opt.threads);
    const reldec::ConvergenceReport report = reldec::frequency_report(ensemble, opt.z_crit);
    write_report(opt, reldec::io::envelope("frequencies", reldec::io::to_json(report)),
                 reldec::io::to_csv(report));
    return report.pass ? exit_ok : exit_failed;
}

int run_witness_cmd(const std::string& spec_path, const CommonOptions& opt, int restarts, int steps,
                    bool certify, int resolution) {
    const reldec::io::ProblemSpec spec = reldec::io::parse_problem(load_json_file(spec_path));
    reldec::WitnessResult result = reldec::optimize_witness(spec.state, spec.beable, restarts, steps,
                                                            opt.seed, spec.p1_subsystem);
    if (certify)
        result.certificate =
            reldec::grid_certificate(spec.state, spec.beable, resolution, spec.p1_subsystem);
    write_report(opt, reldec::io::envelope("witness", reldec::io::to_json(result)),
                 reldec::io::to_csv(result));
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"relative-decoherence scenario simulator and verification suite"};
    app.require_subcommand(1);

    CommonOptions scenario_opt, theorem_opt, freq_opt, witness_opt;
    std::string scenario_name, scenario_spec, theorem_spec, freq_spec, witness_spec;
    bool shots_given = false, seed_given = false;
    bool certify = false;
    int restarts = 16, steps = 300, resolution = 64;

    auto* scenario = app.add_subcommand("scenario", "Run a built-in or user scenario spec");
    auto* name_opt = scenario->add_option("--name", scenario_name, "Built-in scenario name");
    auto* spec_opt = scenario->add_option("--spec", scenario_spec, "Path to a scenario JSON spec");
    name_opt->excludes(spec_opt);
    add_sampling_flags(scenario, scenario_opt, &seed_given, &shots_given);
    add_output_flags(scenario, scenario_opt);

    auto* verify = app.add_subcommand("verify-theorem",
                                      "Compare subensemble averages against conditional states");
    verify->add_option("--spec", theorem_spec, "Path to a problem JSON spec")->required();
    add_sampling_flags(verify, theorem_opt);
    add_output_flags(verify, theorem_opt);

    auto* freq = app.add_subcommand("frequencies", "Sample an ensemble and report value frequencies");
    freq->add_option("--spec", freq_spec, "Path to a problem JSON spec")->required();
    add_sampling_flags(freq, freq_opt);
    add_output_flags(freq, freq_opt);

    auto* witness = app.add_subcommand("witness", "Search for a coherence-witness projector pair");
    witness->add_option("--spec", witness_spec, "Path to a problem JSON spec")->required();
    witness->add_option("--seed", witness_opt.seed, "Root seed for the restart streams");
    witness->add_option("--restarts", restarts, "Hill-climb restarts")->check(CLI::PositiveNumber);
    witness->add_option("--steps", steps, "Ascent steps per restart")->check(CLI::PositiveNumber);
    witness->add_flag("--certify", certify, "Also evaluate the deterministic grid certificate");
    witness->add_option("--resolution", resolution, "Grid resolution for --certify")
        ->check(CLI::PositiveNumber);
    add_output_flags(witness, witness_opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (scenario->parsed()) {
            if (scenario_name.empty() && scenario_spec.empty())
                throw std::invalid_argument("scenario: pass --name or --spec");
            return run_scenario_cmd(scenario_name, scenario_spec, scenario_opt, shots_given,
                                    seed_given);
        }
        if (verify->parsed()) return run_verify_theorem_cmd(theorem_spec, theorem_opt);
        if (freq->parsed()) return run_frequencies_cmd(freq_spec, freq_opt);
        if (witness->parsed())
            return run_witness_cmd(witness_spec, witness_opt, restarts, steps, certify, resolution);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}
