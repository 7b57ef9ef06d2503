#include <httplib.h>

#include "gevk/fetch.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace gevk {

using nlohmann::json;

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string target;  // path?query
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw FetchError(FetchErrc::http_error, "not an absolute URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class RequestThrottle {
 public:
  explicit RequestThrottle(double per_second)
      : interval_(per_second > 0 ? std::chrono::duration<double>(1.0 / per_second)
                                 : std::chrono::duration<double>(0)) {}

  void wait() {
    const auto now = std::chrono::steady_clock::now();
    if (last_ && now - *last_ < interval_) {
      std::this_thread::sleep_for(interval_ - (now - *last_));
    }
    last_ = std::chrono::steady_clock::now();
  }

 private:
  std::chrono::duration<double> interval_;
  std::optional<std::chrono::steady_clock::time_point> last_;
};

std::string extension_for(const std::string& content_type) {
  if (content_type.find("png") != std::string::npos) return ".png";
  if (content_type.find("jpeg") != std::string::npos || content_type.find("jpg") != std::string::npos) return ".jpg";
  if (content_type.find("webp") != std::string::npos) return ".webp";
  return ".bin";
}

std::string text_or_empty(const json& j, const char* key) {
  return j.contains(key) && j[key].is_string() ? j[key].get<std::string>() : std::string{};
}

class Session {
 public:
  Session(const FetchOptions& options, FetchResult& result)
      : options_(options), result_(result), throttle_(options.max_requests_per_second) {}

  httplib::Result get(const std::string& url, const httplib::Headers& headers) {
    const auto parts = split_url(url);
    httplib::Client client(parts.origin);
    client.set_follow_location(true);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    throttle_.wait();
    ++result_.requests;
    return client.Get(parts.target, headers);
  }

 private:
  const FetchOptions& options_;
  FetchResult& result_;
  RequestThrottle throttle_;
};

}  // namespace

std::optional<std::string> resolve_api_key(const std::optional<std::string>& explicit_key) {
  if (explicit_key && !explicit_key->empty()) return explicit_key;
  if (const char* env = std::getenv(kUnsplashKeyVariable); env != nullptr && *env != '\0') {
    return std::string(env);
  }
  return std::nullopt;
}

FetchResult fetch_images(const std::string& query, std::size_t count, const std::string& api_key,
                         const FetchOptions& options) {
  FetchResult result;
  if (count == 0) return result;
  if (api_key.empty()) {
    throw FetchError(FetchErrc::missing_key, std::string("missing key: set ") + kUnsplashKeyVariable);
  }

  Session session(options, result);
  const httplib::Headers auth{{"Authorization", "Client-ID " + api_key}, {"Accept-Version", "v1"}};
  const std::size_t per_page = std::clamp<std::size_t>(std::min(options.per_page, count), 1, 30);

  std::vector<json> photos;
  for (std::size_t page = 1; photos.size() < count; ++page) {
    const auto url = options.api_base + "/search/photos?query=" + httplib::detail::encode_query_param(query) +
                     "&page=" + std::to_string(page) + "&per_page=" + std::to_string(per_page);
    auto res = session.get(url, auth);
    std::string failure;
    FetchErrc code = FetchErrc::http_error;
    if (!res) {
      failure = "search request failed: " + httplib::to_string(res.error());
    } else if (res->status == 429 || (res->status == 403 && res->body.find("Rate Limit") != std::string::npos)) {
      code = FetchErrc::quota_exceeded;
      failure = "quota exceeded (HTTP " + std::to_string(res->status) + ")";
    } else if (res->status != 200) {
      failure = "search returned HTTP " + std::to_string(res->status);
    }
    if (failure.empty()) {
      try {
        const auto body = json::parse(res->body);
        const auto& items = body.at("results");
        for (const auto& item : items) {
          if (photos.size() < count) photos.push_back(item);
        }
        if (items.size() < per_page) break;
        continue;
      } catch (const json::exception& e) {
        failure = std::string("malformed search response: ") + e.what();
      }
    }
    if (photos.empty()) throw FetchError(code, failure);
    result.diagnostics.push_back("page " + std::to_string(page) + ": " + failure);
    break;
  }

  if (!options.download_dir.empty()) std::filesystem::create_directories(options.download_dir);

  for (const auto& photo : photos) {
    ImageRecord record;
    try {
      const auto photo_id = photo.at("id").get<std::string>();
      record.id = "unsplash-" + photo_id;
      record.source_uri = photo.at("urls").at("regular").get<std::string>();
    } catch (const json::exception& e) {
      result.diagnostics.push_back(std::string("skipping item without id/url: ") + e.what());
      continue;
    }
    record.metadata["provider"] = "unsplash";
    record.metadata["license"] = "Unsplash License";
    record.metadata["query"] = query;
    if (auto d = text_or_empty(photo, "description"); !d.empty()) record.metadata["description"] = d;
    if (auto d = text_or_empty(photo, "alt_description"); !d.empty()) record.metadata["alt_description"] = d;
    if (photo.contains("user") && photo["user"].is_object()) {
      if (auto name = text_or_empty(photo["user"], "name"); !name.empty()) record.metadata["author"] = name;
    }
    if (photo.contains("links") && photo["links"].is_object()) {
      if (auto page = text_or_empty(photo["links"], "html"); !page.empty()) record.metadata["page_url"] = page;
    }

    if (!options.download_dir.empty()) {
      auto res = session.get(record.source_uri, {});
      if (!res || res->status != 200) {
        result.diagnostics.push_back(record.id + ": download failed (" +
                                     (res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error())) +
                                     ")");
        continue;
      }
      const auto path = options.download_dir / (record.id + extension_for(res->get_header_value("Content-Type")));
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      out.write(res->body.data(), static_cast<std::streamsize>(res->body.size()));
      if (!out) {
        result.diagnostics.push_back(record.id + ": cannot write " + path.string());
        continue;
      }
      record.metadata["local_path"] = path.string();
      // Unsplash asks clients to report downloads; failure here does not drop the image.
      if (photo.contains("links") && photo["links"].contains("download_location")) {
        auto ping = session.get(photo["links"]["download_location"].get<std::string>(), auth);
        if (!ping || ping->status != 200) result.diagnostics.push_back(record.id + ": download report not acknowledged");
      }
    }
    result.records.push_back(std::move(record));
  }
  return result;
}

}  // namespace gevk
