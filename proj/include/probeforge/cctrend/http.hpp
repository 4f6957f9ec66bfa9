#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace probeforge::cctrend {

struct HttpRequest {
    std::string path;
    std::vector<std::pair<std::string, std::string>> query;

    /// path?k=v&... with percent-encoded values; used for logs and cache keys.
    std::string target() const;
};

struct HttpResponse {
    int status = 0;
    std::string body;
    std::map<std::string, std::string> headers;  ///< lower-cased names

    std::optional<std::string> header(const std::string& name) const;
};

/// One GET against a fixed host. Connection failures raise ErrorCode::Transport.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse get(const HttpRequest& request) = 0;
};

/// cpp-httplib backed transport for http:// and https:// base URLs.
class HttplibTransport final : public HttpTransport {
public:
    explicit HttplibTransport(std::string base_url, std::chrono::seconds timeout = std::chrono::seconds(60));
    HttpResponse get(const HttpRequest& request) override;

private:
    std::string base_url_;
    std::chrono::seconds timeout_;
};

struct RetryPolicy {
    int max_attempts = 5;
    double base_delay_s = 1.0;
    double max_delay_s = 60.0;
    double jitter = 0.25;  ///< delay is scaled by 1 + U[-jitter, jitter]
    std::uint64_t seed = 0;
};

struct PolitenessPolicy {
    std::size_t max_in_flight = 1;
    double min_interval_s = 1.0;  ///< floor between request starts
};

/// Seconds from a Retry-After header (delta-seconds form only).
std::optional<double> parse_retry_after(const std::string& value);

bool is_retryable_status(int status) noexcept;

struct FetchResult {
    HttpResponse response;
    int attempts = 0;
};

/// Wraps a transport with bounded concurrency, a start-to-start delay
/// floor and retries with exponential backoff. Retry-After is honoured on
/// 429/503. Exhausted retries raise ErrorCode::Transport.
class PoliteClient {
public:
    using Sleeper = std::function<void(double seconds)>;

    PoliteClient(HttpTransport& transport, RetryPolicy retry, PolitenessPolicy politeness, Sleeper sleeper = {});

    FetchResult fetch(const HttpRequest& request);

    std::size_t requests() const noexcept { return requests_.load(); }
    std::size_t retries() const noexcept { return retries_.load(); }

private:
    void acquire();
    void release();
    double backoff(int attempt, const HttpResponse* response);

    HttpTransport& transport_;
    RetryPolicy retry_;
    PolitenessPolicy politeness_;
    Sleeper sleeper_;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::size_t in_flight_ = 0;
    std::optional<std::chrono::steady_clock::time_point> last_start_;
    std::mt19937_64 rng_;
    std::atomic<std::size_t> requests_{0};
    std::atomic<std::size_t> retries_{0};
};

} // namespace probeforge::cctrend
