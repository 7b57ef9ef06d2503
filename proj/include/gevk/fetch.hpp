#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gevk/manifest.hpp"

namespace gevk {

inline constexpr const char* kUnsplashKeyVariable = "UNSPLASH_ACCESS_KEY";

enum class FetchErrc { missing_key, http_error, quota_exceeded };

class FetchError : public std::runtime_error {
 public:
  FetchError(FetchErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  FetchErrc code() const { return code_; }

 private:
  FetchErrc code_;
};

struct FetchOptions {
  std::string api_base = "https://api.unsplash.com";
  /// Images are saved here; empty means record metadata only.
  std::filesystem::path download_dir;
  /// Ceiling on outgoing requests, search and downloads combined.
  double max_requests_per_second = 2.0;
  std::size_t per_page = 30;
  std::chrono::seconds timeout{30};
};

struct FetchResult {
  std::vector<ImageRecord> records;
  /// One line per item that could not be fetched or saved.
  std::vector<std::string> diagnostics;
  std::size_t requests = 0;
};

/// Explicit key if non-empty, else the UNSPLASH_ACCESS_KEY environment variable.
std::optional<std::string> resolve_api_key(const std::optional<std::string>& explicit_key);

/// Searches the Unsplash photo API for `query` and returns up to `count` records.
/// A failed search page is fatal only if nothing was collected yet; failed
/// downloads drop the item and add a diagnostic.
FetchResult fetch_images(const std::string& query, std::size_t count, const std::string& api_key,
                         const FetchOptions& options = {});

}  // namespace gevk
