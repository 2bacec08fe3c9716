#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cppe {

/// Flat INI-style configuration:
///
///   # comment
///   [section]
///   key = value        ; lists are comma separated
///
/// Every entry remembers its source line so errors can point at it.
class Config {
public:
    struct Entry {
        std::string value;
        int line = 0;  ///< 0 for values set programmatically
    };
    using Schema = std::map<std::string, std::set<std::string>>;

    static Config parse(std::istream& in);
    static Config parse_file(const std::string& path);

    /// "section.key=value"; replaces any value from the file.
    void set_override(const std::string& assignment);
    void set(const std::string& section, const std::string& key, const std::string& value);

    /// Throws ParseError naming the first section or key absent from the schema.
    void check_known(const Schema& schema) const;

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    long long get_int(const std::string& section, const std::string& key, long long fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                    const std::vector<double>& fallback) const;

    /// Sorted {section: {key: value}} snapshot.
    nlohmann::ordered_json to_json() const;

private:
    const Entry* find(const std::string& section, const std::string& key) const;
    std::map<std::string, std::map<std::string, Entry>> sections_;
};

}  // namespace cppe
