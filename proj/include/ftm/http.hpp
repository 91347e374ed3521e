#pragma once

// Minimal blocking HTTP client used by the SPARQL pager and the remote embedding provider.

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace ftm {

struct HttpResponse {
  int status = 0;  // 0: no response (connection refused, timeout, ...)
  std::string body;
  std::string error;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // path plus query, "/" when absent
};

/// Splits an absolute http(s) URL. Throws Error(Config) for anything else.
SplitUrl split_url(const std::string& url);

std::string percent_encode(std::string_view text);

HttpResponse http_get(const std::string& url, const HttpHeaders& headers, std::chrono::milliseconds timeout);
HttpResponse http_post(const std::string& url, const std::string& body, const std::string& content_type,
                       const HttpHeaders& headers, std::chrono::milliseconds timeout);

/// 5xx, 429 and transport failures are worth retrying; other statuses are final.
inline bool is_retryable_status(int status) { return status == 0 || status == 429 || status >= 500; }

}  // namespace ftm
