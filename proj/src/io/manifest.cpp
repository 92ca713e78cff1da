#include "mqsbt/io/manifest.hpp"

#include "mqsbt/errors.hpp"

#include <cstdio>
#include <fstream>

namespace mqsbt::io {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void Manifest::set(const std::string& key, const std::string& value) {
    const auto it = index_.find(key);
    if (it != index_.end()) {
        entries_[it->second].second = value;
        return;
    }
    index_[key] = entries_.size();
    entries_.emplace_back(key, value);
}

void Manifest::set(const std::string& key, double value) { set(key, format_double(value)); }
void Manifest::set(const std::string& key, long value) { set(key, std::to_string(value)); }

bool Manifest::has(const std::string& key) const { return index_.count(key) > 0; }

const std::string& Manifest::get(const std::string& key) const {
    const auto it = index_.find(key);
    if (it == index_.end()) throw ValidationError("manifest has no key '" + key + "'");
    return entries_[it->second].second;
}

double Manifest::get_double(const std::string& key) const {
    const std::string& v = get(key);
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used == v.size()) return d;
    } catch (const std::exception&) {
    }
    throw ValidationError("manifest key '" + key + "' is not a number: " + v);
}

long Manifest::get_long(const std::string& key) const {
    const std::string& v = get(key);
    try {
        std::size_t used = 0;
        const long n = std::stol(v, &used);
        if (used == v.size()) return n;
    } catch (const std::exception&) {
    }
    throw ValidationError("manifest key '" + key + "' is not an integer: " + v);
}

void Manifest::erase_prefix(const std::string& prefix) {
    std::vector<std::pair<std::string, std::string>> kept;
    for (auto& e : entries_)
        if (e.first.compare(0, prefix.size(), prefix) != 0) kept.push_back(std::move(e));
    entries_ = std::move(kept);
    index_.clear();
    for (std::size_t i = 0; i < entries_.size(); ++i) index_[entries_[i].first] = i;
}

void Manifest::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    for (const auto& [k, v] : entries_) out << k << " = " << v << "\n";
    if (!out) throw ValidationError("write failed for '" + path + "'");
}

Manifest Manifest::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    Manifest m;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        // keys may contain " = " (identity checks), values never do
        const auto eq = line.rfind(" = ");
        if (eq == std::string::npos)
            throw ValidationError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        m.set(line.substr(0, eq), line.substr(eq + 3));
    }
    return m;
}

}  // namespace mqsbt::io
