#include "commands.hpp"
#include "config.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>

int main(int argc, char** argv)
{
    CLI::App app{"Semi-classical Green functions: rays, flow-outs, arrivals, fields and validation"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int workers = -1;
    scg::cli::ValidateOptions validate;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
        sub->add_option("-o,--out", out_dir, "output directory (overrides output.dir)");
        sub->add_option("-w,--workers", workers, "worker threads (overrides workers and SCG_WORKERS)")
            ->check(CLI::NonNegativeNumber);
    };
    add_common(app.add_subcommand("rays", "integrate the rays leaving the level set"));
    add_common(app.add_subcommand("flowout", "sample the flow-out manifold and check it"));
    add_common(app.add_subcommand("arrivals", "critical points of the wave phase over the configured points"));
    add_common(app.add_subcommand("field", "assemble boundary, transient and wave parts on the grid"));
    CLI::App* val = app.add_subcommand("validate", "acceptance table and the transient-shrink experiment");
    add_common(val);
    val->add_option("--experiment", validate.experiments, "acceptance, transient-shrink")->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    const CLI::App* chosen = app.get_subcommands().front();

    try {
        scg::cli::ConfigFile file = scg::cli::ConfigFile::load(config_path);
        scg::cli::RunConfig cfg = scg::cli::read_run_config(file);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (workers >= 0) cfg.workers = workers;
        return scg::cli::execute(cfg, scg::cli::parse_subcommand(chosen->get_name()), validate);
    } catch (const scg::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const scg::NumericError& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 3;
    } catch (const scg::HypothesisError& e) {
        std::fprintf(stderr, "hypothesis failure: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
