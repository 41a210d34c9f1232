#include "convstyle/http_client.hpp"

#include "convstyle/error.hpp"

#include <httplib.h>

#include <thread>

namespace convstyle {

void ConcurrencyLimiter::acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < bound_; });
    ++in_flight_;
    peak_ = std::max(peak_, in_flight_);
}

void ConcurrencyLimiter::release() {
    {
        std::lock_guard lock(mu_);
        --in_flight_;
    }
    cv_.notify_one();
}

std::size_t ConcurrencyLimiter::peak() const {
    std::lock_guard lock(mu_);
    return peak_;
}

JsonHttpClient::JsonHttpClient(HttpOptions options)
    : options_(std::move(options)), limiter_(options_.parallelism) {
    const auto& ep = options_.endpoint;
    const auto scheme_end = ep.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorKind::InvalidConfig, "endpoint must start with http://: " + ep);
    }
    const auto path_start = ep.find('/', scheme_end + 3);
    scheme_host_port_ = ep.substr(0, path_start);
    if (path_start != std::string::npos) {
        path_prefix_ = ep.substr(path_start);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }
}

Json JsonHttpClient::post(const std::string& path, const Json& body) const {
    ConcurrencyLimiter::Slot slot(limiter_);

    httplib::Client client(scheme_host_port_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    if (!options_.auth_header_value.empty()) {
        headers.emplace(options_.auth_header_name, options_.auth_header_value);
    }
    const auto payload = body.dump();
    const auto full_path = path_prefix_ + path;

    auto backoff = options_.initial_backoff;
    int last_status = 0;
    std::string last_detail;
    bool timed_out = false;
    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        auto res = client.Post(full_path, headers, payload, "application/json");
        if (!res) {
            timed_out = res.error() == httplib::Error::Read || res.error() == httplib::Error::Write ||
                        res.error() == httplib::Error::ConnectionTimeout;
            last_status = 0;
            last_detail = httplib::to_string(res.error());
            continue;
        }
        timed_out = false;
        if (res->status >= 200 && res->status < 300) {
            try {
                return Json::parse(res->body);
            } catch (const Json::exception& e) {
                throw EndpointFailure(res->status, std::string("invalid JSON reply: ") + e.what());
            }
        }
        last_status = res->status;
        last_detail = res->body.substr(0, 200);
        const bool transient = res->status == 429 || res->status >= 500;
        if (!transient) break;
    }
    if (timed_out) throw Error(ErrorKind::Timeout, scheme_host_port_ + full_path + ": " + last_detail);
    throw EndpointFailure(last_status, scheme_host_port_ + full_path + ": " + last_detail);
}

}  // namespace convstyle
