#include "phtrack/report.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

namespace phtrack {

std::string format_number(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void Report::comment(std::string line) { comments_.push_back(std::move(line)); }

void Report::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

void Report::set(const std::string& key, const char* value) { set(key, std::string(value)); }

void Report::set(const std::string& key, double value) { set(key, format_number(value)); }

void Report::set(const std::string& key, long long value) { set(key, std::to_string(value)); }

void Report::set(const std::string& key, bool value) {
    set(key, std::string(value ? "true" : "false"));
}

void Report::set(const std::string& key, const Vector& value) {
    std::string s;
    for (Index i = 0; i < value.size(); ++i) {
        s += (i ? "," : "") + format_number(value(i));
    }
    set(key, s);
}

const std::string* Report::find(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) {
            return &v;
        }
    }
    return nullptr;
}

void Report::write(std::ostream& os) const {
    for (const auto& c : comments_) {
        os << "# " << c << '\n';
    }
    for (const auto& [k, v] : entries_) {
        os << k << " = " << v << '\n';
    }
}

std::string Report::str() const {
    std::ostringstream os;
    write(os);
    return os.str();
}

void write_csv_row(std::ostream& os, const std::vector<double>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) {
            os << ',';
        }
        os << format_number(row[i]);
    }
    os << '\n';
}

}  // namespace phtrack
