// Command line front end: axioma <command> --config <file> --out <dir>.

#include <CLI11.hpp>
#include <iostream>

#include "axioma/cli/pipeline.hpp"

using namespace axioma;

namespace {

struct Command {
    const char* name;
    const char* help;
};

const Command commands[] = {
    {"analyze", "run the stages listed in the config"},
    {"energy", "basic sets, Smale graph, filtration and energy function"},
    {"escape", "order function, weight and escape-function decay"},
    {"resonances", "resonances of the conjugated generator"},
    {"complex", "resonances plus the spectral complex at 0"},
    {"morse", "Morse complex of a gradient field"},
    {"verify", "every stage with all checks gating"},
};

int run(const std::string& command, const std::string& config_path, const std::string& out_dir) {
    RunConfig config;
    try {
        config = load_config(config_path);
    } catch (const Error& e) {
        std::cerr << "axioma: " << e.what() << "\n";
        return int(e.code());
    }
    PipelineOptions opt;
    if (!out_dir.empty()) opt.output_dir = out_dir;
    if (command == "energy") config.stages = {"lyapunov"};
    else if (command == "escape") config.stages = {"escape"};
    else if (command == "resonances") {
        config.stages = {"spectral"};
        opt.with_complex = false;
    } else if (command == "complex") config.stages = {"spectral"};
    else if (command == "morse") config.stages = {"morse"};
    else if (command == "verify") opt.strict = true;

    PipelineOutcome res = run_pipeline(config, opt);
    for (const auto& r : res.state.results) {
        int failed = 0;
        for (const auto& c : r.checks) failed += !c.passed;
        std::cout << r.name << ": " << r.status;
        if (!r.reason.empty()) std::cout << " (" << r.reason << ")";
        std::cout << ", " << r.checks.size() - failed << "/" << r.checks.size() << " checks passed\n";
    }
    if (res.exit_code != 0) std::cerr << "axioma: " << res.failed_stage << ": " << res.message << "\n";
    return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Axiom A flows on tori: basic sets, energy functions, escape functions, resonances and complexes"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    std::string chosen;
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("--config", config_path, "run configuration (TOML subset)")->required();
        sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
        sub->callback([&chosen, name = c.name] { chosen = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : int(ExitCode::config_error);
    }
    return run(chosen, config_path, out_dir);
}
