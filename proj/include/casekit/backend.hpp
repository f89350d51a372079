#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "casekit/builder.hpp"

namespace casekit {

class TransportError : public Error {
  public:
    using Error::Error;
};

enum class BackendKind { Http, Oracle, UniformRandom, AlwaysNotFound, Fixed };

std::string_view backend_kind_name(BackendKind k);
BackendKind backend_kind_from_name(std::string_view name);

struct BackendConfig {
    BackendKind kind = BackendKind::Oracle;
    std::string endpoint;    // http only, e.g. http://host:port/v1
    std::string model_name;  // http only
    std::string api_key_env = "CASEKIT_API_KEY";
    std::chrono::milliseconds timeout{30000};
    int max_retries = 3;
    std::chrono::milliseconds retry_backoff{250};
    double temperature = 0.0;
    std::uint64_t seed = 0;  // mocks
    std::string fixed_text;  // fixed kind

    void validate() const;
};

inline constexpr std::string_view kNotFoundResponse = "NO SUCH CASE EXISTS";

struct Completion {
    std::string text;
    std::chrono::milliseconds latency{0};
    std::string backend_kind;
    std::optional<std::string> error;  // set when this item failed

    bool ok() const { return !error.has_value(); }
};

// One completion; mock kinds are pure functions of (instance, item_seed).
Completion complete(const PromptInstance& instance, const BackendConfig& config,
                    std::uint64_t item_seed);

// Order-preserving batch; per-item seeds derive from (config.seed, index) so
// parallelism never changes mock outputs. Item failures are recorded
// in-place, never aborting the batch.
std::vector<Completion> complete_batch(const std::vector<PromptInstance>& instances,
                                       const BackendConfig& config, int parallelism = 1);

}  // namespace casekit
