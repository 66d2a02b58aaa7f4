#include "pcp/config.hpp"

#include <fstream>

namespace pcp {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

long long Config::get_int(const std::string& key, long long def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    try {
        return std::stoll(it->second);
    } catch (const std::exception&) {
        throw std::runtime_error("config key '" + key + "' is not an integer: " + it->second);
    }
}

double Config::get_double(const std::string& key, double def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        throw std::runtime_error("config key '" + key + "' is not a number: " + it->second);
    }
}

bool Config::parse_line(const std::string& line) {
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') return false;
    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
        throw std::runtime_error("malformed config line (expected key = value): " + line);
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw std::runtime_error("empty config key in line: " + line);
    set(key, value);
    return true;
}

void Config::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::string line;
    while (std::getline(in, line)) parse_line(line);
}

} // namespace pcp
