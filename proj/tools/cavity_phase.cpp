// cavity-phase: batch front-end for the cavity library.
//   cavity-phase run <config> [--workers N] [--out DIR]
//   cavity-phase validate <config>
// Exit codes: 0 ok, 2 validation error, 3 compute error.
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "cavity/config.hpp"
#include "cavity/errors.hpp"
#include "cavity/jobs.hpp"
#include "cavity/kernels.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Ground states, spectra and phase diagrams of atoms in a single-mode cavity"};
    app.require_subcommand(1);

    std::string run_cfg, out_dir;
    int workers = 0;
    auto* run = app.add_subcommand("run", "run a job configuration");
    run->add_option("config", run_cfg, "configuration file")->required();
    run->add_option("--workers", workers, "worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
    run->add_option("--out", out_dir, "output directory (overrides output.dir)");

    std::string val_cfg;
    auto* validate = app.add_subcommand("validate", "check a configuration without running it");
    validate->add_option("config", val_cfg, "configuration file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*validate) {
            auto cfg = cavity::load_config(val_cfg);
            cavity::validate_config(cfg);
            std::cout << "ok: " << cavity::to_string(cfg.kind) << "\n";
            return 0;
        }
        if (workers > 0) cavity::set_worker_count(workers);
        auto cfg = cavity::load_config(run_cfg);
        auto m = cavity::run_job(cfg, out_dir.empty() ? std::nullopt : std::optional<std::string>(out_dir));
        for (const auto& f : m.files) {
            char hex[17];
            std::snprintf(hex, sizeof hex, "%016llx", (unsigned long long)f.hash);
            std::cout << m.directory << "/" << f.file << "  " << hex << "\n";
        }
        return 0;
    } catch (const cavity::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "compute error: " << e.what() << "\n";
        return 3;
    }
}
