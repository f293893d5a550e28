#include <chrono>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "summaug/summarize.hpp"
#include "summaug/util.hpp"

namespace summaug {

namespace {

using nlohmann::json;

struct Endpoint {
  std::string base;  // scheme://host:port
  std::string path;
};

Endpoint parse_endpoint(const std::string& url) {
  const size_t scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw std::invalid_argument("endpoint must be a http URL: " + url);
  }
  const size_t slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

double effective_timeout_s(const SummarizerConfig& config) {
  if (const char* env = std::getenv("SUMMAUG_REMOTE_TIMEOUT_S")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v > 0.0)) {
      throw std::runtime_error(
          std::string("invalid SUMMAUG_REMOTE_TIMEOUT_S: ") + env);
    }
    return v;
  }
  return config.timeout_s;
}

bool retriable_status(int status) { return status >= 500 && status < 600; }

}  // namespace

std::string remote_summarize(const SummarizerConfig& config,
                             const std::string& text) {
  validate(config);
  if (config.kind != SummarizerKind::remote) {
    throw std::invalid_argument("remote_summarize requires kind=remote");
  }
  const Endpoint endpoint = parse_endpoint(config.endpoint);
  const double timeout_s = effective_timeout_s(config);

  json request;
  request["text"] = text;
  request["max_tokens"] = config.budget_tokens;
  const std::string body = request.dump();

  const int max_attempts = 3;  // initial try plus two retries
  std::string last_failure;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    if (attempt > 1) {
      const auto delay = std::chrono::milliseconds(
          static_cast<long>(config.retry_initial_delay_ms) << (attempt - 2));
      std::this_thread::sleep_for(delay);
    }
    httplib::Client client(endpoint.base);
    client.set_connection_timeout(std::chrono::duration<double>(timeout_s));
    client.set_read_timeout(std::chrono::duration<double>(timeout_s));
    client.set_write_timeout(std::chrono::duration<double>(timeout_s));

    httplib::Result res = client.Post(endpoint.path, body, "application/json");
    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (retriable_status(res->status)) {
      last_failure = "status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw std::runtime_error("remote summarizer returned status " +
                               std::to_string(res->status));
    }
    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.is_object() ||
        !reply.contains("summary") || !reply["summary"].is_string()) {
      throw std::runtime_error(
          "remote summarizer protocol error: response is not an object with "
          "a string \"summary\" field");
    }
    std::string summary = reply["summary"].get<std::string>();
    if (trim_view(summary).empty()) {
      throw std::runtime_error("remote summarizer returned an empty summary");
    }
    return summary;
  }
  throw std::runtime_error("remote summarizer failed after " +
                           std::to_string(max_attempts) + " attempts (" +
                           last_failure + ")");
}

}  // namespace summaug
