#include "spac/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace spac {

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
    throw std::runtime_error("config line " + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// strip a trailing comment that is not inside a basic string
std::string strip_comment(const std::string& s) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
        if (s[i] == '#' && !in_str) return s.substr(0, i);
    }
    return s;
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.')
            return false;
    return true;
}

std::string parse_basic_string(const std::string& v, int line) {
    if (v.size() < 2 || v.back() != '"') fail(line, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        if (v[i] == '\\') {
            if (i + 2 >= v.size()) fail(line, "bad escape");
            ++i;
            switch (v[i]) {
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                default: fail(line, "unsupported escape");
            }
        } else if (v[i] == '"') {
            fail(line, "unexpected quote inside string");
        } else {
            out += v[i];
        }
    }
    return out;
}

double parse_number(const std::string& tok, int line) {
    try {
        std::size_t used = 0;
        const double d = std::stod(tok, &used);
        if (used != tok.size()) fail(line, "bad number: " + tok);
        return d;
    } catch (const std::invalid_argument&) {
        fail(line, "bad number: " + tok);
    } catch (const std::out_of_range&) {
        fail(line, "number out of range: " + tok);
    }
}

bool looks_integer(const std::string& tok) {
    std::size_t i = (tok[0] == '+' || tok[0] == '-') ? 1 : 0;
    if (i >= tok.size()) return false;
    for (; i < tok.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(tok[i]))) return false;
    return true;
}

ConfigFile::Value parse_value(const std::string& v, int line) {
    if (v.empty()) fail(line, "missing value");
    if (v.front() == '"') return parse_basic_string(v, line);
    if (v == "true") return true;
    if (v == "false") return false;
    if (v.front() == '[') {
        if (v.back() != ']') fail(line, "unterminated array");
        std::vector<double> arr;
        std::string body = v.substr(1, v.size() - 2);
        std::stringstream ss(body);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = trim(tok);
            if (tok.empty()) fail(line, "empty array element");
            arr.push_back(parse_number(tok, line));
        }
        return arr;
    }
    if (looks_integer(v)) return static_cast<long>(std::stol(v));
    return parse_number(v, line);
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
    ConfigFile cfg;
    std::stringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(line_no, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!valid_key(section)) fail(line_no, "bad section name");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (!valid_key(key)) fail(line_no, "bad key: '" + key + "'");
        const std::string full = section.empty() ? key : section + "." + key;
        if (cfg.values_.count(full)) fail(line_no, "duplicate key: " + full);
        cfg.values_[full] = parse_value(trim(line.substr(eq + 1)), line_no);
    }
    return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

namespace {

[[noreturn]] void type_error(const std::string& key, const char* want) {
    throw std::runtime_error("config key '" + key + "' is not " + want);
}

}  // namespace

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
    type_error(key, "a string");
}

long ConfigFile::get_int(const std::string& key, long fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (const auto* i = std::get_if<long>(&it->second)) return *i;
    type_error(key, "an integer");
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (const auto* d = std::get_if<double>(&it->second)) return *d;
    if (const auto* i = std::get_if<long>(&it->second)) return static_cast<double>(*i);
    type_error(key, "a number");
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (const auto* b = std::get_if<bool>(&it->second)) return *b;
    type_error(key, "a boolean");
}

std::vector<double> ConfigFile::get_array(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return {};
    if (const auto* a = std::get_if<std::vector<double>>(&it->second)) return *a;
    type_error(key, "an array");
}

std::vector<int> ConfigFile::get_int_array(const std::string& key) const {
    std::vector<int> out;
    for (double v : get_array(key)) {
        if (v != std::floor(v)) type_error(key, "an integer array");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

}  // namespace spac
