#pragma once

// Run configuration (key = value text file) and the content-addressed result
// cache used by the command-line tool.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace carpet {

/// Recognized keys, one per line, '#' starts a comment:
///   N, m_max, n_max, k_max, cg_tolerance, direct_limit, tol_multiplier,
///   slack, out_dir, cache (true/false), cache_dir, formats (comma list)
struct RunConfig {
  int N = 2;
  int m_max = 4;
  int n_max = 2;
  int k_max = 3;
  double cg_tolerance = 1e-12;
  std::size_t direct_limit = 2'000'000;
  double tol_multiplier = 1.0;
  double slack = 0.05;
  std::string out_dir = ".";
  bool cache = true;
  std::string cache_dir;  ///< empty: $CARPET_CACHE_DIR, else .carpet-cache
  std::vector<std::string> formats{"json"};

  /// Throws std::invalid_argument when an invariant fails.
  void validate() const;
  std::string to_text() const;
  static RunConfig from_text(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);

  bool operator==(const RunConfig&) const = default;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& data);

std::filesystem::path default_cache_dir();

class ResultCache {
 public:
  explicit ResultCache(std::filesystem::path dir, bool enabled = true);

  /// The stored value for `key`, or nullopt on a miss or a corrupt entry.
  std::optional<nlohmann::json> load(const std::string& key) const;
  /// Atomic write: temp file in the cache directory, then rename.
  void store(const std::string& key, const nlohmann::json& value) const;
  std::filesystem::path path_for(const std::string& key) const;
  bool enabled() const { return enabled_; }

 private:
  std::filesystem::path dir_;
  bool enabled_;
};

}  // namespace carpet
