#include "phtrack/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

#include <fstream>
#include <set>
#include <sstream>

namespace phtrack {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& raw) {
    const std::string s = trim(raw);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ConfigError("not a number: '" + raw + "'");
    }
    if (used != s.size()) {
        throw ConfigError("not a number: '" + raw + "'");
    }
    return v;
}

class Reader {
public:
    explicit Reader(pt::ptree tree) : tree_(std::move(tree)) {
        static const std::set<std::string> sections = {"plant",       "design", "reference",
                                                       "disturbance", "sim",    "domain"};
        for (const auto& [name, child] : tree_) {
            if (!sections.count(name)) {
                throw ConfigError("unknown section [" + name + "]");
            }
            for (const auto& kv : child) {
                keys_.insert(name + "." + kv.first);
            }
        }
    }

    std::optional<std::string> text(const std::string& key) {
        auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
        if (!v) {
            return std::nullopt;
        }
        used_.insert(key);
        return *v;
    }
    void number(const std::string& key, double& out) {
        if (auto v = text(key)) {
            out = parse_double(*v);
        }
    }
    void vector(const std::string& key, Vector& out, Index expected) {
        if (auto v = text(key)) {
            Vector parsed = parse_vector(*v);
            if (expected >= 0 && parsed.size() != expected) {
                throw ConfigError(key + ": expected " + std::to_string(expected) + " entries");
            }
            out = parsed;
        }
    }
    void finish() const {
        for (const auto& k : keys_) {
            if (!used_.count(k)) {
                throw ConfigError("unknown key '" + k + "'");
            }
        }
    }

private:
    pt::ptree tree_;
    std::set<std::string> keys_;
    std::set<std::string> used_;
};

}  // namespace

Matrix parse_matrix(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::stringstream rs(text);
    std::string row;
    while (std::getline(rs, row, ';')) {
        std::vector<double> values;
        std::stringstream cs(row);
        std::string cell;
        while (std::getline(cs, cell, ',')) {
            values.push_back(parse_double(cell));
        }
        if (values.empty()) {
            throw ConfigError("empty matrix row in '" + text + "'");
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) {
        throw ConfigError("empty matrix '" + text + "'");
    }
    Matrix M(static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size()) {
            throw ConfigError("ragged matrix '" + text + "'");
        }
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            M(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
        }
    }
    return M;
}

Vector parse_vector(const std::string& text) {
    const Matrix M = parse_matrix(text);
    if (M.rows() != 1 && M.cols() != 1) {
        throw ConfigError("expected a vector, got a matrix: '" + text + "'");
    }
    return M.reshaped();
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 computation failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

ScenarioConfig parse_config(const std::string& text, const std::string& origin) {
    pt::ptree tree;
    try {
        std::istringstream is(text);
        pt::ini_parser::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    Reader r(std::move(tree));
    ScenarioConfig c;
    c.origin = origin;
    c.hash = sha256_hex(text);
    if (auto m = r.text("plant.model")) {
        c.model = trim(*m);
    }
    if (c.model == "ball_on_wheel") {
        auto& b = c.ball;
        r.number("plant.I_w", b.I_w);
        r.number("plant.m_b", b.m_b);
        r.number("plant.r_b", b.r_b);
        r.number("plant.g_r", b.g_r);
        r.number("plant.r_w", b.r_w);
        r.number("design.a1", b.a1);
        r.number("design.a2", b.a2);
        r.number("design.a3", b.a3);
        r.number("design.k1", b.k1);
        r.number("design.k2", b.k2);
        r.number("design.K_z", b.K_z);
        r.vector("design.Gamma11", b.Gamma11, 2);
        r.vector("design.Gamma12", b.Gamma12, 2);
        r.number("design.Gamma33", b.Gamma33);
        r.vector("design.Gamma21", b.Gamma21, 2);
        r.vector("design.Gamma22", b.Gamma22, 2);
        if (r.text("design.lambda1")) {
            double l1 = 0.0;
            r.number("design.lambda1", l1);
            b.lambda1_override = l1;
        }
        if (auto s = r.text("design.lambda1_scale")) {
            b.lambda1_override = b.lambda1() * parse_double(*s);
        }
        r.number("reference.amplitude", b.amplitude);
        r.number("reference.omega", b.omega);
        r.number("reference.b0", b.b0);
        r.number("reference.b1", b.b1);
        r.number("disturbance.d", b.d);
        r.number("disturbance.onset", b.onset);
    } else if (c.model == "fully_actuated_2dof") {
        auto& f = c.fully_actuated;
        r.vector("plant.inertia", f.inertia_diag, 2);
        if (auto k = r.text("design.controller")) {
            f.controller = parse_controller_kind(trim(*k));
        }
        if (auto p = r.text("design.potential")) {
            f.potential = trim(*p);
        }
        for (auto [key, target] : {std::pair{"design.Kq", &f.Kq}, {"design.Kc", &f.Kc},
                                   {"design.Kz", &f.Kz}, {"design.Gamma11", &f.Gamma11},
                                   {"design.Gamma12", &f.Gamma12}, {"design.Gamma21", &f.Gamma21},
                                   {"design.Gamma22", &f.Gamma22}, {"design.Gamma33", &f.Gamma33},
                                   {"design.s11", &f.s11}, {"design.s12", &f.s12},
                                   {"design.sigma", &f.sigma}, {"design.Re_q", &f.re_q},
                                   {"design.Re_p", &f.re_p}, {"design.Rd", &f.rd},
                                   {"design.W1", &f.w1}, {"design.W2", &f.w2},
                                   {"design.W3", &f.w3}, {"reference.amplitude", &f.amplitude},
                                   {"reference.omega", &f.omega}, {"disturbance.d", &f.d}}) {
            r.vector(key, *target, 2);
        }
        r.number("disturbance.onset", f.onset);
    } else {
        throw ConfigError("unknown plant model '" + c.model + "'");
    }
    r.number("sim.dt", c.build.dt);
    if (r.text("sim.horizon")) {
        double h = 0.0;
        r.number("sim.horizon", h);
        c.build.horizon = h;
    }
    if (auto s = r.text("sim.seed")) {
        c.build.seed = static_cast<std::uint64_t>(parse_double(*s));
    }
    if (auto s = r.text("sim.certify_samples")) {
        c.certify_samples = static_cast<Index>(parse_double(*s));
    }
    r.number("sim.perturbation", c.perturbation);
    if (r.text("sim.x0_offset")) {
        Vector v;
        r.vector("sim.x0_offset", v, -1);
        c.build.x0_offset = v;
    }
    auto lo = r.text("domain.lower");
    auto hi = r.text("domain.upper");
    if (lo.has_value() != hi.has_value()) {
        throw ConfigError("[domain] needs both lower and upper");
    }
    if (lo) {
        Box box{parse_vector(*lo), parse_vector(*hi)};
        try {
            box.validate();
        } catch (const Error& e) {
            throw ConfigError(std::string("[domain]: ") + e.what());
        }
        c.build.domain = box;
    }
    if (!(c.build.dt > 0)) {
        throw ConfigError("sim.dt must be positive");
    }
    if (c.build.horizon && *c.build.horizon < 0) {
        throw ConfigError("sim.horizon must be non-negative");
    }
    r.finish();
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

Scenario build_scenario(const ScenarioConfig& config, bool enforce_gates) {
    BuildOptions options = config.build;
    options.enforce_gates = enforce_gates;
    if (config.model == "ball_on_wheel") {
        return build_ball_on_wheel(config.ball, options);
    }
    if (config.model == "fully_actuated_2dof") {
        return build_fully_actuated_2dof(config.fully_actuated, options);
    }
    throw ConfigError("unknown plant model '" + config.model + "'");
}

}  // namespace phtrack
