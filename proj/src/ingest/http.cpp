#include "ftm/http.hpp"

#include <httplib.h>

#include "ftm/error.hpp"

namespace ftm {

SplitUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCategory::Config, "not an absolute URL: " + url);
  std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw Error(ErrorCategory::Config, "unsupported URL scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string percent_encode(std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(text.size() * 3);
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

namespace {

httplib::Client make_client(const std::string& origin, std::chrono::milliseconds timeout) {
  httplib::Client client(origin);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  client.set_follow_location(true);
  return client;
}

httplib::Headers to_headers(const HttpHeaders& headers) {
  httplib::Headers out;
  for (const auto& [k, v] : headers) out.emplace(k, v);
  return out;
}

HttpResponse convert(const httplib::Result& result) {
  HttpResponse out;
  if (!result) {
    out.error = httplib::to_string(result.error());
    return out;
  }
  out.status = result->status;
  out.body = result->body;
  return out;
}

}  // namespace

HttpResponse http_get(const std::string& url, const HttpHeaders& headers, std::chrono::milliseconds timeout) {
  SplitUrl parts = split_url(url);
  auto client = make_client(parts.origin, timeout);
  return convert(client.Get(parts.path, to_headers(headers)));
}

HttpResponse http_post(const std::string& url, const std::string& body, const std::string& content_type,
                       const HttpHeaders& headers, std::chrono::milliseconds timeout) {
  SplitUrl parts = split_url(url);
  auto client = make_client(parts.origin, timeout);
  return convert(client.Post(parts.path, to_headers(headers), body, content_type));
}

}  // namespace ftm
