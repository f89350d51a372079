#include "casekit/backend.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "casekit/rng.hpp"

namespace casekit {

using nlohmann::json;

std::string_view backend_kind_name(BackendKind k) {
    switch (k) {
        case BackendKind::Http: return "http";
        case BackendKind::Oracle: return "oracle";
        case BackendKind::UniformRandom: return "uniform_random";
        case BackendKind::AlwaysNotFound: return "always_notfound";
        case BackendKind::Fixed: return "fixed";
    }
    return "oracle";
}

BackendKind backend_kind_from_name(std::string_view name) {
    if (name == "http") return BackendKind::Http;
    if (name == "oracle") return BackendKind::Oracle;
    if (name == "uniform_random") return BackendKind::UniformRandom;
    if (name == "always_notfound") return BackendKind::AlwaysNotFound;
    if (name == "fixed") return BackendKind::Fixed;
    throw Error("unknown backend kind: " + std::string(name));
}

void BackendConfig::validate() const {
    if (kind == BackendKind::Http && endpoint.empty()) {
        throw Error("http backend requires an endpoint");
    }
}

namespace {

// Split "http://host:port/prefix" into client base and path prefix.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    auto scheme = endpoint.find("://");
    std::size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
    auto slash = endpoint.find('/', host_start);
    if (slash == std::string::npos) return {endpoint, ""};
    return {endpoint.substr(0, slash), endpoint.substr(slash)};
}

Completion http_complete(const PromptInstance& instance, const BackendConfig& config) {
    auto [base, prefix] = split_endpoint(config.endpoint);
    httplib::Client client(base);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(config.timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(config.timeout));

    httplib::Headers headers;
    if (const char* key = std::getenv(config.api_key_env.c_str()); key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    json body;
    body["model"] = config.model_name;
    body["messages"] = json::array({{{"role", "user"}, {"content", instance.instruction_text}}});
    body["temperature"] = config.temperature;
    const std::string payload = body.dump();

    std::string attempt_log;
    auto backoff = config.retry_backoff;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        auto started = std::chrono::steady_clock::now();
        auto res = client.Post(prefix + "/chat/completions", headers, payload, "application/json");
        auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - started);
        if (!res) {
            attempt_log += "attempt " + std::to_string(attempt) + ": transport error; ";
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            attempt_log +=
                "attempt " + std::to_string(attempt) + ": HTTP " + std::to_string(res->status) + "; ";
            continue;
        }
        if (res->status != 200) {
            throw TransportError("chat completion failed with HTTP " +
                                 std::to_string(res->status) + ": " + res->body);
        }
        auto j = json::parse(res->body);
        Completion c;
        c.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        c.latency = elapsed;
        c.backend_kind = "http";
        return c;
    }
    throw TransportError("chat completion exhausted retries: " + attempt_log);
}

}  // namespace

Completion complete(const PromptInstance& instance, const BackendConfig& config,
                    std::uint64_t item_seed) {
    config.validate();
    if (instance.instruction_text.empty()) throw Error("complete: empty prompt");

    Completion c;
    c.backend_kind = backend_kind_name(config.kind);
    switch (config.kind) {
        case BackendKind::Http:
            return http_complete(instance, config);
        case BackendKind::Oracle:
            if (instance.expected_output.empty()) {
                throw Error("oracle backend: instance " + instance.input_case +
                            " carries no expected output");
            }
            c.text = instance.expected_output;
            return c;
        case BackendKind::UniformRandom: {
            SplitMix64 rng(item_seed);
            if (instance.task == Task::Ljp) {
                static constexpr Verdict options[] = {Verdict::DefendantWin, Verdict::PlaintiffWin,
                                                      Verdict::Settlement, Verdict::CaseDismissal};
                c.text = verdict_label(options[rng.below(4)]);
            } else {
                if (instance.choices.empty()) throw Error("uniform_random: no choices");
                const Choice& pick = instance.choices[rng.below(instance.choices.size())];
                const std::string& rendered = pick.rendered;
                // Answer with the chosen case's title line.
                static constexpr std::string_view kLabel = "Case Title: ";
                auto end = rendered.find('\n');
                std::string title = rendered.substr(0, end == std::string::npos ? rendered.size()
                                                                                : end);
                if (title.starts_with(kLabel)) title.erase(0, kLabel.size());
                c.text = title + ".";
            }
            return c;
        }
        case BackendKind::AlwaysNotFound:
            c.text = std::string(kNotFoundResponse);
            return c;
        case BackendKind::Fixed:
            c.text = config.fixed_text;
            return c;
    }
    throw Error("complete: unreachable backend kind");
}

std::vector<Completion> complete_batch(const std::vector<PromptInstance>& instances,
                                       const BackendConfig& config, int parallelism) {
    if (parallelism < 1) throw Error("complete_batch: parallelism must be >= 1");
    std::vector<Completion> results(instances.size());

    auto run_item = [&](std::size_t i) {
        try {
            results[i] = complete(instances[i], config, derive_seed(config.seed, i));
        } catch (const std::exception& e) {
            results[i].backend_kind = backend_kind_name(config.kind);
            results[i].error = e.what();
        }
    };

    if (parallelism == 1 || instances.size() <= 1) {
        for (std::size_t i = 0; i < instances.size(); ++i) run_item(i);
        return results;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const int worker_count = std::min<int>(parallelism, static_cast<int>(instances.size()));
    for (int w = 0; w < worker_count; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < instances.size(); i = next.fetch_add(1)) {
                run_item(i);
            }
        });
    }
    for (auto& t : workers) t.join();
    return results;
}

}  // namespace casekit
