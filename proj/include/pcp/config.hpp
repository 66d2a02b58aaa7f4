#ifndef PCP_CONFIG_HPP
#define PCP_CONFIG_HPP

#include <map>
#include <stdexcept>
#include <string>

namespace pcp {

// Flat "key = value" configuration. Precedence is handled by the caller:
// later set() calls overwrite earlier ones, so load the config file first
// and apply command-line overrides afterwards.
class Config {
public:
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& def) const {
        auto it = values_.find(key);
        return it == values_.end() ? def : it->second;
    }

    long long get_int(const std::string& key, long long def) const;
    double get_double(const std::string& key, double def) const;

    // parses one "key = value" line; returns false for blank/comment lines
    bool parse_line(const std::string& line);
    void load_file(const std::string& path);

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

} // namespace pcp

#endif
