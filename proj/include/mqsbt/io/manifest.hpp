#pragma once

#include <map>
#include <string>
#include <vector>

namespace mqsbt::io {

// Ordered key-value store written as "key = value" lines.
class Manifest {
public:
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set(const std::string& key, long value);
    void set(const std::string& key, int value) { set(key, static_cast<long>(value)); }
    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    double get_double(const std::string& key) const;
    long get_long(const std::string& key) const;
    // Drops every key starting with prefix.
    void erase_prefix(const std::string& prefix);

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    void save(const std::string& path) const;
    static Manifest load(const std::string& path);

private:
    std::vector<std::pair<std::string, std::string>> entries_;
    std::map<std::string, std::size_t> index_;
};

// %.17g
std::string format_double(double v);

}  // namespace mqsbt::io
