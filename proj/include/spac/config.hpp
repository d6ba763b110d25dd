#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace spac {

// Minimal flat TOML subset: comments, [section] headers, and
// key = string | integer | float | bool | array-of-numbers lines.
// Keys are exposed flattened as "section.key".
class ConfigFile {
  public:
    using Value = std::variant<std::string, long, double, bool, std::vector<double>>;

    static ConfigFile parse(const std::string& text);
    static ConfigFile parse_file(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    long get_int(const std::string& key, long fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_array(const std::string& key) const;  // empty if absent
    std::vector<int> get_int_array(const std::string& key) const;

    const std::map<std::string, Value>& values() const { return values_; }

  private:
    std::map<std::string, Value> values_;
};

}  // namespace spac
