// Command-line front end: run, constants, verify.

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "plate/error.hpp"
#include "plate/io.hpp"
#include "plate/verify.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& out_dir, bool force) {
    const plate::RunConfig config = plate::load_config(config_path);
    std::filesystem::path dir = out_dir;
    if (dir.empty()) dir = std::filesystem::path("runs") / std::filesystem::path(config_path).stem();
    const auto outcome = plate::run_to_directory(config, dir, force);
    const auto& s = outcome.result.final_state;
    std::printf("%s after %d steps: gamma %.10g, volume %.10g, J %.10g\n", plate::to_string(outcome.result.termination),
                s.step, s.tone.gamma, s.volume, s.J);
    std::printf("dichotomy %s, %s, run directory %s\n", plate::to_string(outcome.result.diagnostics.dichotomy),
                outcome.result.diagnostics.connected ? "connected" : "disconnected", dir.string().c_str());
    return outcome.exit_code;
}

int cmd_verify(const std::string& name) {
    bool ok = true;
    for (const auto& r : plate::run_verify(name)) {
        std::printf("%s  %s%s%s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.empty() ? "" : ": ",
                    r.detail.c_str());
        ok = ok && r.passed;
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Clamped-plate fundamental tone under volume penalties"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    bool force = false;
    auto* run = app.add_subcommand("run", "optimise a domain from a config file");
    run->add_option("--config", config_path, "config file (key = value lines)")->required();
    run->add_option("--out", out_dir, "run directory (default runs/<config name>)");
    run->add_flag("--force", force, "replace an existing run directory");

    int dim = 2;
    double omega0 = 0.0, eps = 0.0, dn = 0.5;
    auto* constants = app.add_subcommand("constants", "print the theory constants as JSON");
    constants->add_option("--dim", dim, "space dimension")->required();
    constants->add_option("--omega0", omega0, "target volume")->required();
    constants->add_option("--eps", eps, "penalty parameter")->required();
    constants->add_option("--dn", dn, "d_n in (0, 1)");

    std::string case_name;
    auto* verify = app.add_subcommand("verify", "run a built-in property suite");
    verify->add_option("--case", case_name, "suite name")
        ->required()
        ->check(CLI::IsMember(plate::verify_cases()));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config_path, out_dir, force);
        if (*constants) {
            std::cout << plate::emit_constants(dim, omega0, eps, dn).dump(2) << '\n';
            return 0;
        }
        if (*verify) return cmd_verify(case_name);
    } catch (const plate::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
