#include "cppe/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include "cppe/error.hpp"

namespace cppe {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& s) {
    const auto pos = s.find_first_of("#;");
    return pos == std::string::npos ? s : s.substr(0, pos);
}

bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    }
    return true;
}

double to_double(const std::string& text, const std::string& where, int line) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
        throw ParseError(where + ": expected a number, got '" + t + "'", line);
    }
    return v;
}

}  // namespace

Config Config::parse(std::istream& in) {
    Config cfg;
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string text = trim(strip_comment(raw));
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']') throw ParseError("unterminated section header", line);
            section = trim(text.substr(1, text.size() - 2));
            if (!valid_name(section)) throw ParseError("invalid section name '" + section + "'", line);
            cfg.sections_[section];
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ParseError("expected 'key = value'", line);
        if (section.empty()) throw ParseError("key outside of any section", line);
        const std::string key = trim(text.substr(0, eq));
        if (!valid_name(key)) throw ParseError("invalid key '" + key + "'", line);
        auto& entries = cfg.sections_[section];
        if (entries.count(key)) throw ParseError("duplicate key '" + section + "." + key + "'", line);
        entries[key] = {trim(text.substr(eq + 1)), line};
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file '" + path + "'", 0);
    try {
        return parse(in);
    } catch (const ParseError& e) {
        throw e.with_prefix(path + ": ");
    }
}

void Config::set_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
        throw ParseError("override must look like section.key=value: '" + assignment + "'", 0);
    }
    const std::string section = trim(assignment.substr(0, dot));
    const std::string key = trim(assignment.substr(dot + 1, eq - dot - 1));
    if (!valid_name(section) || !valid_name(key)) {
        throw ParseError("invalid override name in '" + assignment + "'", 0);
    }
    set(section, key, trim(assignment.substr(eq + 1)));
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
    sections_[section][key] = {value, 0};
}

void Config::check_known(const Schema& schema) const {
    for (const auto& [section, entries] : sections_) {
        const auto it = schema.find(section);
        if (it == schema.end()) {
            const int line = entries.empty() ? 0 : entries.begin()->second.line;
            throw ParseError("unknown section [" + section + "]", line);
        }
        for (const auto& [key, entry] : entries) {
            if (!it->second.count(key)) {
                throw ParseError("unknown key '" + section + "." + key + "'", entry.line);
            }
        }
    }
}

const Config::Entry* Config::find(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

bool Config::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    const auto* e = find(section, key);
    return e ? e->value : fallback;
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) const {
    const auto* e = find(section, key);
    return e ? to_double(e->value, section + "." + key, e->line) : fallback;
}

long long Config::get_int(const std::string& section, const std::string& key, long long fallback) const {
    const auto* e = find(section, key);
    if (!e) return fallback;
    const std::string t = trim(e->value);
    long long v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
        throw ParseError(section + "." + key + ": expected an integer, got '" + t + "'", e->line);
    }
    return v;
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    const auto* e = find(section, key);
    if (!e) return fallback;
    const std::string t = trim(e->value);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ParseError(section + "." + key + ": expected true or false, got '" + t + "'", e->line);
}

std::vector<double> Config::get_doubles(const std::string& section, const std::string& key,
                                        const std::vector<double>& fallback) const {
    const auto* e = find(section, key);
    if (!e) return fallback;
    std::vector<double> out;
    std::size_t start = 0;
    const std::string& v = e->value;
    if (trim(v).empty()) return out;
    while (true) {
        const auto comma = v.find(',', start);
        out.push_back(to_double(v.substr(start, comma - start), section + "." + key, e->line));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

nlohmann::ordered_json Config::to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [section, entries] : sections_) {
        auto& s = j[section];
        s = nlohmann::ordered_json::object();
        for (const auto& [key, entry] : entries) s[key] = entry.value;
    }
    return j;
}

}  // namespace cppe
