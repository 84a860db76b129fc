#pragma once

#include "phtrack/types.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace phtrack {

/// Shortest round-trip decimal form of a double.
std::string format_number(double v);

/// Flat `key = value` document with a `#` comment header.
class Report {
public:
    void comment(std::string line);
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, const char* value);
    void set(const std::string& key, double value);
    void set(const std::string& key, long long value);
    void set(const std::string& key, int value) { set(key, static_cast<long long>(value)); }
    void set(const std::string& key, Index value) { set(key, static_cast<long long>(value)); }
    void set(const std::string& key, bool value);
    void set(const std::string& key, const Vector& value);

    const std::string* find(const std::string& key) const;
    void write(std::ostream& os) const;
    std::string str() const;

private:
    std::vector<std::string> comments_;
    std::vector<std::pair<std::string, std::string>> entries_;
};

void write_csv_row(std::ostream& os, const std::vector<double>& row);

}  // namespace phtrack
