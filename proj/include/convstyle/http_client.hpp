#pragma once

#include "convstyle/json_io.hpp"

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <mutex>
#include <string>

namespace convstyle {

/// Caps the number of simultaneous holders. Records the peak so tests can assert the bound.
class ConcurrencyLimiter {
public:
    explicit ConcurrencyLimiter(std::size_t bound) : bound_(bound == 0 ? 1 : bound) {}

    class Slot {
    public:
        explicit Slot(ConcurrencyLimiter& owner) : owner_(&owner) { owner_->acquire(); }
        Slot(const Slot&) = delete;
        Slot& operator=(const Slot&) = delete;
        ~Slot() { owner_->release(); }

    private:
        ConcurrencyLimiter* owner_;
    };

    [[nodiscard]] std::size_t bound() const noexcept { return bound_; }
    [[nodiscard]] std::size_t peak() const;

private:
    void acquire();
    void release();

    std::size_t bound_;
    std::size_t in_flight_ = 0;
    std::size_t peak_ = 0;
    mutable std::mutex mu_;
    std::condition_variable cv_;
};

struct HttpOptions {
    /// "http://host:port" optionally followed by a path prefix.
    std::string endpoint;
    std::string auth_header_name = "Authorization";
    /// Sent only when non-empty.
    std::string auth_header_value;
    std::chrono::milliseconds timeout{30000};
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{200};
    std::size_t parallelism = 4;
};

/// POSTs JSON and parses a JSON reply. Connection errors and 429/5xx responses are retried with
/// exponential backoff; other statuses fail immediately. Throws EndpointFailure or Error(Timeout).
class JsonHttpClient {
public:
    explicit JsonHttpClient(HttpOptions options);

    Json post(const std::string& path, const Json& body) const;

    [[nodiscard]] const HttpOptions& options() const noexcept { return options_; }
    [[nodiscard]] const ConcurrencyLimiter& limiter() const noexcept { return limiter_; }

private:
    HttpOptions options_;
    std::string scheme_host_port_;
    std::string path_prefix_;
    mutable ConcurrencyLimiter limiter_;
};

}  // namespace convstyle
