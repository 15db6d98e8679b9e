#include "colab/commands.hpp"
#include "colab/errors.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"Adaptive cluster collaborativeness for LLM ensembles: SD-based "
                 "cluster construction, CC-driven layer masking, and a "
                 "multiple-choice evaluation harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::string mode_override;
    std::string output_dir_override;
    int parallelism_override = 0;
    app.add_option("-c,--config", config_path, "Run configuration file (JSON)")
        ->required();
    app.add_option("--mode", mode_override, "Override io.mode: live, record or replay");
    app.add_option("--output-dir", output_dir_override, "Override io.output_dir");
    app.add_option("--parallelism", parallelism_override, "Override limits.parallelism");

    auto* profile = app.add_subcommand("profile", "Measure self-diversity for every model");

    std::string question_id;
    auto* run = app.add_subcommand("run", "Run the layered collaboration over the dataset");
    run->add_option("--question", question_id, "Run a single question by id");

    bool enforce_pass = false;
    auto* eval = app.add_subcommand("eval", "Score traces and write the metric report");
    eval->add_flag("--enforce-pass", enforce_pass,
                   "Exit nonzero when a discipline misses the pass threshold");

    std::string report_file;
    auto* report = app.add_subcommand("report", "Print a previously written report");
    report->add_option("--report-file", report_file, "Report JSON (default: <output>/report.json)");

    auto* record =
        app.add_subcommand("record-fixtures", "Profile and run in record mode, saving fixtures");

    CLI11_PARSE(app, argc, argv);

    try {
        colab::commands::CommandContext ctx;
        ctx.cfg = colab::config::load_config(config_path);
        if (!mode_override.empty()) {
            ctx.cfg.io.mode = colab::config::mode_from_string(mode_override);
            colab::config::validate(ctx.cfg);
        }
        if (!output_dir_override.empty()) ctx.cfg.io.output_dir = output_dir_override;
        if (parallelism_override > 0) ctx.cfg.limits.parallelism = parallelism_override;

        if (profile->parsed()) return colab::commands::cmd_profile(ctx);
        if (run->parsed()) return colab::commands::cmd_run(ctx, question_id);
        if (eval->parsed()) return colab::commands::cmd_eval(ctx, enforce_pass);
        if (report->parsed()) return colab::commands::cmd_report(ctx, report_file);
        if (record->parsed()) return colab::commands::cmd_record_fixtures(ctx);
    } catch (const colab::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
