#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "colab/backend.hpp"

#include "colab/digest.hpp"
#include "colab/errors.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

using nlohmann::json;

namespace colab {

std::string ModelSpec::api_key_env_var() const {
    std::string var = "COLAB_API_KEY_";
    for (char c : model_id) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            var.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        else
            var.push_back('_');
    }
    return var;
}

std::string ReplayStore::Key::describe() const {
    return model_id + "/" + prompt_hash + "#" + std::to_string(ordinal);
}

ReplayStore::Key ReplayStore::make_key(const ModelSpec& spec, const std::string& prompt,
                                       int ordinal) {
    return Key{spec.model_id, sha256_hex(prompt), ordinal};
}

ReplayStore ReplayStore::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StorageError("replay store: cannot open " + path);
    ReplayStore store;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError("replay store: bad JSON at " + path + ":" +
                                 std::to_string(lineno) + ": " + e.what(),
                             path, lineno);
        }
        if (!rec.contains("model_id") || !rec.contains("prompt_hash") || !rec.contains("text"))
            throw ParseError("replay store: missing field at " + path + ":" +
                                 std::to_string(lineno),
                             path, lineno);
        Key key{rec["model_id"].get<std::string>(), rec["prompt_hash"].get<std::string>(),
                rec.value("ordinal", 0)};
        store.entries_[key] = Entry{rec.value("prompt", std::string{}),
                                    rec["text"].get<std::string>()};
    }
    return store;
}

std::size_t ReplayStore::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
}

std::optional<std::string> ReplayStore::lookup(const Key& key) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second.text;
}

void ReplayStore::record(const Key& key, const std::string& prompt, const std::string& text) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(key);
    if (it != entries_.end()) {
        if (it->second.text != text)
            throw StorageError("replay store: conflicting record for key " + key.describe());
        return;
    }
    entries_[key] = Entry{prompt, text};
}

void ReplayStore::save(const std::string& path) const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw StorageError("replay store: cannot write " + path);
    // std::map iterates in key order, which is the documented sort order.
    for (const auto& [key, entry] : entries_) {
        json rec{{"model_id", key.model_id},
                 {"prompt_hash", key.prompt_hash},
                 {"ordinal", key.ordinal},
                 {"prompt", entry.prompt},
                 {"text", entry.text},
                 {"meta", json::object()}};
        out << rec.dump() << '\n';
    }
    if (!out) throw StorageError("replay store: write failed for " + path);
}

ModelOutput ReplayBackend::generate(const ModelSpec& spec, const std::string& prompt,
                                    int ordinal) {
    auto key = ReplayStore::make_key(spec, prompt, ordinal);
    auto text = store_->lookup(key);
    if (!text)
        throw FixtureMissingError("replay miss for key " + key.describe(), key.describe());
    ModelOutput out;
    out.model_id = spec.model_id;
    out.text = *text;
    out.latency_ms = 0.0;
    out.attempt = 1;
    return out;
}

ModelOutput RecordingBackend::generate(const ModelSpec& spec, const std::string& prompt,
                                       int ordinal) {
    auto key = ReplayStore::make_key(spec, prompt, ordinal);
    if (auto text = store_->lookup(key)) {
        ModelOutput out;
        out.model_id = spec.model_id;
        out.text = *text;
        out.attempt = 1;
        return out;
    }
    ModelOutput out = live_->generate(spec, prompt, ordinal);
    store_->record(key, prompt, out.text);
    return out;
}

namespace {

struct ParsedUrl {
    std::string host_port; // scheme://host[:port] for httplib::Client
    std::string base_path; // leading path, no trailing slash
};

ParsedUrl parse_endpoint(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("endpoint URL missing scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    ParsedUrl parsed;
    if (path_start == std::string::npos) {
        parsed.host_port = url;
    } else {
        parsed.host_port = url.substr(0, path_start);
        parsed.base_path = url.substr(path_start);
        while (!parsed.base_path.empty() && parsed.base_path.back() == '/')
            parsed.base_path.pop_back();
    }
    return parsed;
}

} // namespace

ModelOutput HttpBackend::generate(const ModelSpec& spec, const std::string& prompt,
                                  int ordinal) {
    ParsedUrl url = parse_endpoint(spec.endpoint);

    httplib::Headers headers;
    const char* key = std::getenv(spec.api_key_env_var().c_str());
    if (key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    } else if (spec.kind == BackendKind::OpenAiCompatible) {
        // Local runtimes run without credentials; remote endpoints must not.
        throw ConfigError("missing API key: set environment variable " +
                          spec.api_key_env_var() + " for model " + spec.model_id);
    }

    json body{{"model", spec.model_name.empty() ? spec.model_id : spec.model_name},
              {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
              {"temperature", spec.sampling.temperature},
              {"top_p", spec.sampling.top_p},
              {"max_tokens", spec.sampling.max_tokens}};
    if (spec.sampling.seed) {
        // Offset by the sample ordinal so repeated draws differ but the run
        // stays reproducible.
        body["seed"] = *spec.sampling.seed + ordinal;
    }
    const std::string payload = body.dump();

    const int attempts = std::max(1, spec.retry.max_attempts);
    std::string last_error;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        if (attempt > 1) {
            const auto& schedule = spec.retry.backoff_ms;
            int sleep_ms = schedule.empty()
                               ? 0
                               : schedule[std::min<std::size_t>(attempt - 2, schedule.size() - 1)];
            if (sleep_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(sleep_ms));
        }

        httplib::Client client(url.host_port);
        client.set_connection_timeout(0, spec.timeout_ms * 1000LL);
        client.set_read_timeout(spec.timeout_ms / 1000, (spec.timeout_ms % 1000) * 1000);
        client.set_write_timeout(spec.timeout_ms / 1000, (spec.timeout_ms % 1000) * 1000);

        auto start = std::chrono::steady_clock::now();
        auto res = client.Post(url.base_path + "/chat/completions", headers, payload,
                               "application/json");
        auto elapsed = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();

        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 400 && res->status < 500) {
            throw ConfigError("model " + spec.model_id + ": HTTP " +
                              std::to_string(res->status) + " from " + spec.endpoint + ": " +
                              res->body);
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }

        json reply;
        try {
            reply = json::parse(res->body);
        } catch (const json::exception& e) {
            last_error = std::string("malformed response JSON: ") + e.what();
            continue;
        }
        if (!reply.contains("choices") || reply["choices"].empty() ||
            !reply["choices"][0].contains("message")) {
            last_error = "response missing choices[0].message";
            continue;
        }

        ModelOutput out;
        out.model_id = spec.model_id;
        out.text = reply["choices"][0]["message"].value("content", std::string{});
        out.latency_ms = elapsed;
        out.attempt = attempt;
        if (reply.contains("usage")) {
            TokenCounts tc;
            tc.prompt = reply["usage"].value("prompt_tokens", std::int64_t{0});
            tc.completion = reply["usage"].value("completion_tokens", std::int64_t{0});
            out.token_counts = tc;
        }
        return out;
    }
    throw BackendError("model " + spec.model_id + ": generation failed after " +
                           std::to_string(attempts) + " attempts (" + last_error + ")",
                       /*retryable=*/false);
}

} // namespace colab
