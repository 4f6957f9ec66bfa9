#include "probeforge/cctrend/http.hpp"

#include "probeforge/core/error.hpp"
#include "probeforge/core/logging.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <thread>

#include <httplib.h>

namespace probeforge::cctrend {

std::string HttpRequest::target() const {
    std::string out = path;
    char sep = '?';
    for (const auto& [k, v] : query) {
        out += sep;
        out += k + "=" + httplib::detail::encode_query_param(v);
        sep = '&';
    }
    return out;
}

std::optional<std::string> HttpResponse::header(const std::string& name) const {
    std::string key = name;
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
    const auto it = headers.find(key);
    if (it == headers.end()) {
        return std::nullopt;
    }
    return it->second;
}

HttplibTransport::HttplibTransport(std::string base_url, std::chrono::seconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
    while (!base_url_.empty() && base_url_.back() == '/') {
        base_url_.pop_back();
    }
}

HttpResponse HttplibTransport::get(const HttpRequest& request) {
    httplib::Client client(base_url_);
    if (!client.is_valid()) {
        fail(ErrorCode::Transport, "unsupported index host '" + base_url_ + "'");
    }
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_follow_location(true);
    auto result = client.Get(request.target());
    if (!result) {
        fail(ErrorCode::Transport, "GET " + base_url_ + request.target() + ": " + httplib::to_string(result.error()));
    }
    HttpResponse out;
    out.status = result->status;
    out.body = result->body;
    for (const auto& [k, v] : result->headers) {
        std::string key = k;
        std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
        out.headers[key] = v;
    }
    return out;
}

std::optional<double> parse_retry_after(const std::string& value) {
    if (value.empty() || !std::all_of(value.begin(), value.end(), [](unsigned char c) { return std::isdigit(c); })) {
        return std::nullopt;
    }
    return std::stod(value);
}

bool is_retryable_status(int status) noexcept {
    return status == 429 || status == 500 || status == 502 || status == 503 || status == 504;
}

PoliteClient::PoliteClient(HttpTransport& transport, RetryPolicy retry, PolitenessPolicy politeness,
                           Sleeper sleeper)
    : transport_(transport), retry_(retry), politeness_(politeness), sleeper_(std::move(sleeper)), rng_(retry.seed) {
    if (retry_.max_attempts < 1) {
        fail(ErrorCode::Parameter, "max_attempts must be >= 1");
    }
    if (politeness_.max_in_flight == 0) {
        fail(ErrorCode::Parameter, "max_in_flight must be >= 1");
    }
    if (!sleeper_) {
        sleeper_ = [](double s) { std::this_thread::sleep_for(std::chrono::duration<double>(s)); };
    }
}

void PoliteClient::acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return in_flight_ < politeness_.max_in_flight; });
    ++in_flight_;
    if (last_start_ && politeness_.min_interval_s > 0.0) {
        const auto due = *last_start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                            std::chrono::duration<double>(politeness_.min_interval_s));
        const auto now = std::chrono::steady_clock::now();
        if (due > now) {
            // Reserve the slot before sleeping so concurrent callers queue behind it.
            last_start_ = due;
            lock.unlock();
            sleeper_(std::chrono::duration<double>(due - now).count());
            return;
        }
    }
    last_start_ = std::chrono::steady_clock::now();
}

void PoliteClient::release() {
    {
        std::lock_guard lock(mutex_);
        --in_flight_;
    }
    cv_.notify_one();
}

double PoliteClient::backoff(int attempt, const HttpResponse* response) {
    if (response != nullptr && (response->status == 429 || response->status == 503)) {
        if (auto header = response->header("retry-after")) {
            if (auto seconds = parse_retry_after(*header)) {
                return std::min(*seconds, retry_.max_delay_s);
            }
        }
    }
    double delay = std::min(retry_.max_delay_s, retry_.base_delay_s * std::pow(2.0, attempt - 1));
    std::lock_guard lock(mutex_);
    std::uniform_real_distribution<double> u(-retry_.jitter, retry_.jitter);
    return std::max(0.0, delay * (1.0 + u(rng_)));
}

FetchResult PoliteClient::fetch(const HttpRequest& request) {
    FetchResult out;
    std::string last_problem;
    for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
        out.attempts = attempt;
        std::optional<HttpResponse> response;
        acquire();
        ++requests_;
        try {
            response = transport_.get(request);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Transport) {
                release();
                throw;
            }
            last_problem = e.what();
        }
        release();
        if (response && !is_retryable_status(response->status)) {
            out.response = std::move(*response);
            return out;
        }
        if (response) {
            last_problem = "HTTP " + std::to_string(response->status);
        }
        if (attempt == retry_.max_attempts) {
            break;
        }
        const double delay = backoff(attempt, response ? &*response : nullptr);
        ++retries_;
        log::warn("retrying request", {{"target", request.target()},
                                       {"attempt", attempt},
                                       {"problem", last_problem},
                                       {"delay_s", delay}});
        sleeper_(delay);
    }
    fail(ErrorCode::Transport, request.target() + " failed after " + std::to_string(out.attempts) +
                                   " attempts: " + last_problem);
}

} // namespace probeforge::cctrend
