#pragma once

#include "colab/backend.hpp"
#include "colab/config.hpp"

#include <iosfwd>
#include <memory>
#include <string>

namespace colab::commands {

/// Backend wiring for one run: live mode talks HTTP, replay serves the frozen
/// store, record serves store hits and forwards misses to the live side while
/// appending them.
struct BackendBundle {
    std::shared_ptr<ReplayStore> store; // null in live mode
    std::shared_ptr<GenerationBackend> backend;

    /// Persists the store (record mode); no-op otherwise.
    void flush(const std::string& path) const;
};

/// `live_override` substitutes the HTTP client in live/record modes; tests
/// and the fixture generator plug deterministic backends in here.
BackendBundle make_backend(const config::RunConfig& cfg,
                           std::shared_ptr<GenerationBackend> live_override = nullptr);

struct CommandContext {
    config::RunConfig cfg;
    std::shared_ptr<GenerationBackend> live_override;
    std::ostream* out = nullptr; // defaults to std::cout
};

/// Profiles every configured model, writes <output>/profiles/<id>.json and
/// prints the ranked SD table. Models that fail are reported without
/// aborting the rest; returns nonzero if any failed.
int cmd_profile(const CommandContext& ctx);

/// Runs the layered collaboration over the dataset (or one question when
/// `question_id` is non-empty), writing <output>/traces/<id>.json. Existing
/// trace files are skipped, which makes dataset runs resumable.
int cmd_run(const CommandContext& ctx, const std::string& question_id = {});

/// Scores the traces against the dataset and writes report.json/report.txt.
/// With enforce_pass, returns nonzero when any discipline misses the
/// threshold.
int cmd_eval(const CommandContext& ctx, bool enforce_pass = false);

/// Renders a previously written report as the fixed-width table.
int cmd_report(const CommandContext& ctx, const std::string& report_path = {});

/// Record mode end to end: profiles and runs against the live backend while
/// appending every fresh completion to the fixture store.
int cmd_record_fixtures(const CommandContext& ctx);

} // namespace colab::commands
