#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "bbm/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Branching Brownian motion simulator and verification harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int workers = 0;
    long long cap = 0;

    for (bbm::Mode mode :
         {bbm::Mode::simulate, bbm::Mode::verify_specfun,
          bbm::Mode::verify_many_to_one, bbm::Mode::martingales,
          bbm::Mode::expansion_thm1, bbm::Mode::expansion_thm2,
          bbm::Mode::moment_growth}) {
        auto* sub = app.add_subcommand(bbm::mode_name(mode));
        sub->add_option("--config", config_path, "experiment config (JSON)")
            ->required();
        sub->add_option("--out", out_dir, "output directory override");
        sub->add_option("--workers", workers, "worker count override");
        sub->add_option("--cap", cap, "population cap override");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        bbm::ExperimentConfig cfg = bbm::ExperimentConfig::load(config_path);
        cfg.mode = bbm::parse_mode(app.get_subcommands().front()->get_name());
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (workers > 0) cfg.workers = workers;
        if (cap > 0) cfg.cap = std::size_t(cap);

        const bbm::RunManifest manifest = bbm::run(cfg);
        std::printf("mode=%s wall_time=%.2fs exit=%d manifest=%s\n",
                    bbm::mode_name(cfg.mode).c_str(), manifest.wall_time_s,
                    manifest.exit_code,
                    (cfg.out_dir / "manifest.json").string().c_str());
        return manifest.exit_code;
    } catch (const bbm::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return bbm::EXIT_CONFIG_ERROR;
    } catch (const bbm::PopulationCapExceeded& e) {
        std::fprintf(stderr, "error: %s (cap %zu)\n", e.what(), e.cap());
        return bbm::EXIT_RESOURCE_CAP;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return bbm::EXIT_CONFIG_ERROR;
    }
}
