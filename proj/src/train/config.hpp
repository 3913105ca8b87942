#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ewclab {

// Flat dotted-key configuration. Keys and defaults form the documented
// schema; unknown keys are rejected so typos cannot silently no-op. Files are
// plain text "key = value" lines with '#' comments; overrides are "key=value"
// strings applied after the file.
class Config {
  public:
    static Config defaults();
    static Config from_file(const std::string& path);

    void set(const std::string& key, const std::string& value);
    void apply_override(const std::string& assignment);  // "key=value"

    const std::string& get(const std::string& key) const;
    long long get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    uint64_t get_seed(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<double> get_grid(const std::string& key) const;  // comma-separated

    // Canonical "key = value" listing (sorted), echoed into run manifests.
    std::string render() const;

    static const std::map<std::string, std::string>& schema();

  private:
    std::map<std::string, std::string> kv_;
};

} // namespace ewclab
