#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace colab {

enum class BackendKind { OpenAiCompatible, LocalRuntime, Replay };

struct SamplingParams {
    double temperature = 0.7;
    double top_p = 1.0;
    int max_tokens = 1024;
    std::optional<std::int64_t> seed;
};

struct RetryPolicy {
    int max_attempts = 3;
    // Sleep before retry k (1-based) is backoff_ms[min(k-1, size-1)].
    std::vector<int> backoff_ms = {250, 1000, 4000};
};

/// Identity, wiring and decoding parameters of one model in the run.
struct ModelSpec {
    std::string model_id;
    BackendKind kind = BackendKind::Replay;
    std::string endpoint;      // base URL for remote kinds
    std::string model_name;    // provider-side name; defaults to model_id
    SamplingParams sampling;
    int timeout_ms = 120000;
    RetryPolicy retry;
    std::string fixture_path;  // replay kind: overrides the run-level store

    /// Environment variable consulted for the bearer token:
    /// COLAB_API_KEY_<ID> with the id uppercased and non-alphanumerics
    /// mapped to '_'.
    std::string api_key_env_var() const;
};

struct TokenCounts {
    std::int64_t prompt = 0;
    std::int64_t completion = 0;
};

/// One raw completion. `text` is the completion exactly as returned.
struct ModelOutput {
    std::string model_id;
    std::string text;
    double latency_ms = 0.0;
    std::optional<TokenCounts> token_counts;
    int attempt = 1;
};

/// Uniform generation interface. Implementations must be safe to call from
/// multiple threads at once.
///
/// `ordinal` distinguishes repeated samples of the same prompt: self-diversity
/// profiling issues k requests with ordinals 0..k-1 and replay fixtures key on
/// (model, prompt hash, ordinal) so each sample replays its own recorded text.
/// Single-shot callers leave it at 0.
class GenerationBackend {
public:
    virtual ~GenerationBackend() = default;
    virtual ModelOutput generate(const ModelSpec& spec, const std::string& prompt,
                                 int ordinal = 0) = 0;
};

/// JSON Lines fixture store: one record per line with
/// {model_id, prompt_hash, ordinal, prompt, text, meta}. Records are sorted
/// by (model_id, prompt_hash, ordinal) on write-out so files diff stably.
class ReplayStore {
public:
    struct Key {
        std::string model_id;
        std::string prompt_hash;
        int ordinal = 0;
        auto operator<=>(const Key&) const = default;
        std::string describe() const;
    };

    ReplayStore() = default;

    static ReplayStore load(const std::string& path);

    /// Number of records.
    std::size_t size() const;

    std::optional<std::string> lookup(const Key& key) const;

    /// Adds a record. Identical re-adds are no-ops; a different text under an
    /// existing key is a conflict and raises StorageError.
    void record(const Key& key, const std::string& prompt, const std::string& text);

    /// Writes all records to `path`, sorted by key.
    void save(const std::string& path) const;

    static Key make_key(const ModelSpec& spec, const std::string& prompt, int ordinal);

private:
    struct Entry {
        std::string prompt;
        std::string text;
    };
    mutable std::mutex mutex_;
    std::map<Key, Entry> entries_;
};

/// Deterministic fixture-backed backend. Misses raise FixtureMissingError
/// naming the key.
class ReplayBackend : public GenerationBackend {
public:
    explicit ReplayBackend(std::shared_ptr<ReplayStore> store) : store_(std::move(store)) {}
    ModelOutput generate(const ModelSpec& spec, const std::string& prompt,
                         int ordinal = 0) override;

private:
    std::shared_ptr<ReplayStore> store_;
};

/// OpenAI-compatible chat-completions client. Local runtimes are addressed
/// through the same protocol. Retries transport errors and 5xx responses per
/// the spec's retry policy; 4xx responses are configuration errors and are
/// not retried.
class HttpBackend : public GenerationBackend {
public:
    ModelOutput generate(const ModelSpec& spec, const std::string& prompt,
                         int ordinal = 0) override;
};

/// Record mode: serves hits from the store and forwards misses to the live
/// backend, appending each fresh completion to the store. This makes fixture
/// recording resumable.
class RecordingBackend : public GenerationBackend {
public:
    RecordingBackend(std::shared_ptr<ReplayStore> store,
                     std::shared_ptr<GenerationBackend> live)
        : store_(std::move(store)), live_(std::move(live)) {}

    ModelOutput generate(const ModelSpec& spec, const std::string& prompt,
                         int ordinal = 0) override;

private:
    std::shared_ptr<ReplayStore> store_;
    std::shared_ptr<GenerationBackend> live_;
};

} // namespace colab
