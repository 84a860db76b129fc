#include "phtrack/ph_core.hpp"

#include <charconv>

namespace phtrack {

std::string format_vector(const Vector& v) {
    std::string out = "[";
    char buf[64];
    for (Index i = 0; i < v.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        const auto res = std::to_chars(buf, buf + sizeof(buf), v(i));
        out.append(buf, res.ptr);
    }
    out += "]";
    return out;
}

}  // namespace phtrack
