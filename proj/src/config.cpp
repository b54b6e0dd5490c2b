#include "carpet/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "carpet/common.hpp"

namespace carpet {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream is(value);
  T out{};
  is >> out;
  if (is.fail() || !is.eof()) throw std::invalid_argument("config: bad value for " + key + ": '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw std::invalid_argument("config: bad boolean for " + key + ": '" + value + "'");
}

}  // namespace

void RunConfig::validate() const {
  if (N < 2) throw std::invalid_argument("config: N must be >= 2");
  if (m_max < 1 || n_max < 0 || k_max < 0) throw std::invalid_argument("config: level caps must be positive");
  if (!(cg_tolerance > 0.0 && cg_tolerance < 1.0)) throw std::invalid_argument("config: cg_tolerance must be in (0, 1)");
  if (!(slack >= 0.0 && slack < 1.0)) throw std::invalid_argument("config: slack must be in [0, 1)");
  if (!(tol_multiplier > 0.0)) throw std::invalid_argument("config: tol_multiplier must be positive");
  if (direct_limit == 0) throw std::invalid_argument("config: direct_limit must be positive");
  for (const auto& f : formats)
    if (f != "json" && f != "csv" && f != "svg") throw std::invalid_argument("config: unknown format " + f);
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  os << "N = " << N << '\n'
     << "m_max = " << m_max << '\n'
     << "n_max = " << n_max << '\n'
     << "k_max = " << k_max << '\n'
     << "cg_tolerance = " << fmt17(cg_tolerance) << '\n'
     << "direct_limit = " << direct_limit << '\n'
     << "tol_multiplier = " << fmt17(tol_multiplier) << '\n'
     << "slack = " << fmt17(slack) << '\n'
     << "out_dir = " << out_dir << '\n'
     << "cache = " << (cache ? "true" : "false") << '\n'
     << "cache_dir = " << cache_dir << '\n'
     << "formats = ";
  for (std::size_t i = 0; i < formats.size(); ++i) os << (i ? "," : "") << formats[i];
  os << '\n';
  return os.str();
}

RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig c;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key == "N") c.N = parse_number<int>(key, value);
    else if (key == "m_max") c.m_max = parse_number<int>(key, value);
    else if (key == "n_max") c.n_max = parse_number<int>(key, value);
    else if (key == "k_max") c.k_max = parse_number<int>(key, value);
    else if (key == "cg_tolerance") c.cg_tolerance = parse_number<double>(key, value);
    else if (key == "direct_limit") c.direct_limit = parse_number<std::size_t>(key, value);
    else if (key == "tol_multiplier") c.tol_multiplier = parse_number<double>(key, value);
    else if (key == "slack") c.slack = parse_number<double>(key, value);
    else if (key == "out_dir") c.out_dir = value;
    else if (key == "cache") c.cache = parse_bool(key, value);
    else if (key == "cache_dir") c.cache_dir = value;
    else if (key == "formats") {
      c.formats.clear();
      std::istringstream fs(value);
      std::string f;
      while (std::getline(fs, f, ','))
        if (!trim(f).empty()) c.formats.push_back(trim(f));
    } else
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::filesystem::path default_cache_dir() {
  if (const char* env = std::getenv("CARPET_CACHE_DIR"); env && *env) return env;
  return ".carpet-cache";
}

ResultCache::ResultCache(std::filesystem::path dir, bool enabled) : dir_(std::move(dir)), enabled_(enabled) {}

std::filesystem::path ResultCache::path_for(const std::string& key) const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(key)));
  return dir_ / (std::string(buf) + ".json");
}

std::optional<nlohmann::json> ResultCache::load(const std::string& key) const {
  if (!enabled_) return std::nullopt;
  std::ifstream in(path_for(key));
  if (!in) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.at("key").get<std::string>() != key) return std::nullopt;
    return std::optional<nlohmann::json>(std::in_place, j.at("value"));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void ResultCache::store(const std::string& key, const nlohmann::json& value) const {
  if (!enabled_) return;
  std::filesystem::create_directories(dir_);
  const auto target = path_for(key);
  auto tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write cache file " + tmp.string());
    out << nlohmann::json{{"key", key}, {"value", value}}.dump();
    if (!out) throw std::runtime_error("cannot write cache file " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace carpet
