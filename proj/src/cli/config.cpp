#include "prekopa/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace prekopa {

std::string mode_name(RunMode m) {
    switch (m) {
        case RunMode::verify: return "verify";
        case RunMode::certify_i: return "certify_i";
        case RunMode::certify_ii: return "certify_ii";
        case RunMode::beta_limit: return "beta_limit";
        case RunMode::ibp_check: return "ibp_check";
    }
    return "?";
}

FieldOracle RunConfig::make_field_oracle() const {
    return make_oracle(oracle_name, n, oracle_params);
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<double> parse_numbers(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw std::invalid_argument("config: empty number in '" + key + "'");
        std::size_t pos = 0;
        double d;
        try {
            d = std::stod(item, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("config: bad number '" + item + "' for '" + key + "'");
        }
        if (pos != item.size())
            throw std::invalid_argument("config: bad number '" + item + "' for '" + key + "'");
        out.push_back(d);
    }
    if (out.empty()) throw std::invalid_argument("config: no value for '" + key + "'");
    return out;
}

double parse_scalar(const std::string& key, const std::string& v) {
    auto nums = parse_numbers(key, v);
    if (nums.size() != 1)
        throw std::invalid_argument("config: '" + key + "' must be a single number");
    return nums[0];
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected 'key = value', got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw std::invalid_argument("config: malformed line '" + line + "'");
        if (kv.count(key)) throw std::invalid_argument("config: duplicate key '" + key + "'");
        kv[key] = val;
    }

    auto take = [&](const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) return std::string();
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    auto require = [&](const std::string& key) {
        std::string v = take(key);
        if (v.empty()) throw std::invalid_argument("config: missing required key '" + key + "'");
        return v;
    };

    RunConfig cfg;
    {
        std::string m = require("mode");
        if (m == "verify")
            cfg.mode = RunMode::verify;
        else if (m == "certify_i")
            cfg.mode = RunMode::certify_i;
        else if (m == "certify_ii")
            cfg.mode = RunMode::certify_ii;
        else if (m == "beta_limit")
            cfg.mode = RunMode::beta_limit;
        else if (m == "ibp_check")
            cfg.mode = RunMode::ibp_check;
        else
            throw std::invalid_argument("config: unknown mode '" + m + "'");
    }

    {
        std::string kind = require("domain.kind");
        if (kind == "interval") {
            double a = parse_scalar("domain.a", require("domain.a"));
            double b = parse_scalar("domain.b", require("domain.b"));
            if (!(a < b)) throw std::invalid_argument("config: interval requires a < b");
            cfg.domain = Interval{a, b};
            cfg.n = 1;
        } else if (kind == "disk") {
            auto center = parse_numbers("domain.center", require("domain.center"));
            if (center.size() != 2)
                throw std::invalid_argument("config: domain.center needs two components");
            double r = parse_scalar("domain.radius", require("domain.radius"));
            if (!(r > 0.0)) throw std::invalid_argument("config: disk requires radius > 0");
            cfg.domain = Disk{{center[0], center[1]}, r};
            cfg.n = 2;
        } else {
            throw std::invalid_argument("config: unknown domain.kind '" + kind + "'");
        }
    }

    cfg.oracle_name = require("oracle.name");
    for (auto it = kv.begin(); it != kv.end();) {
        if (it->first.rfind("oracle.", 0) == 0) {
            cfg.oracle_params[it->first.substr(7)] = parse_numbers(it->first, it->second);
            it = kv.erase(it);
        } else {
            ++it;
        }
    }

    const bool wants_beta_list =
        cfg.mode == RunMode::certify_i || cfg.mode == RunMode::certify_ii ||
        cfg.mode == RunMode::beta_limit;
    if (wants_beta_list)
        cfg.beta_values = parse_numbers("beta_values", require("beta_values"));
    else
        cfg.beta = parse_scalar("beta", require("beta"));

    cfg.t_values = parse_numbers("t_values", require("t_values"));

    {
        auto res = parse_numbers("resolution", require("resolution"));
        if (cfg.n == 1 && res.size() == 1) {
            cfg.resolution = {static_cast<int>(res[0]), 0};
        } else if (cfg.n == 2 && res.size() == 2) {
            cfg.resolution = {static_cast<int>(res[0]), static_cast<int>(res[1])};
        } else {
            throw std::invalid_argument(
                "config: resolution needs 1 entry for interval, 2 for disk");
        }
        if (cfg.resolution.m_r < 4 || (cfg.n == 2 && cfg.resolution.m_theta < 4))
            throw std::invalid_argument("config: resolution must be >= 4");
    }

    if (std::string v = take("h_t"); !v.empty()) {
        cfg.h_t = parse_scalar("h_t", v);
        if (!(cfg.h_t > 0.0)) throw std::invalid_argument("config: h_t must be positive");
    }
    if (std::string v = take("tol.identity_rel"); !v.empty())
        cfg.tol.identity_rel = parse_scalar("tol.identity_rel", v);
    if (std::string v = take("tol.solver_residual"); !v.empty())
        cfg.tol.solver_residual = parse_scalar("tol.solver_residual", v);
    if (std::string v = take("tol.sign_slack"); !v.empty())
        cfg.tol.sign_slack = parse_scalar("tol.sign_slack", v);
    if (std::string v = take("tol.ibp_rel"); !v.empty())
        cfg.tol.ibp_rel = parse_scalar("tol.ibp_rel", v);
    if (std::string v = take("tol.limit_abs"); !v.empty())
        cfg.tol.limit_abs = parse_scalar("tol.limit_abs", v);
    if (std::string v = take("out"); !v.empty()) cfg.out_dir = v;

    if (!kv.empty())
        throw std::invalid_argument("config: unknown key '" + kv.begin()->first + "'");

    // Mode hypotheses, named per the theorem they come from.
    FieldOracle oracle = cfg.make_field_oracle();  // also validates oracle params
    const double n = cfg.n;
    auto check_beta_identity = [&](double b) {
        if (std::abs(b - n) <= 1e-12 * std::max(1.0, std::abs(b)))
            throw std::invalid_argument("config: the identity requires beta != n");
        if (std::abs(b) <= 1e-12)
            throw std::invalid_argument("config: the identity requires beta != 0");
    };
    switch (cfg.mode) {
        case RunMode::verify:
        case RunMode::ibp_check:
            check_beta_identity(cfg.beta);
            break;
        case RunMode::certify_i:
            if (oracle.convexity != Convexity::convex)
                throw std::invalid_argument("config: Theorem 2(i) requires a convex oracle");
            for (double b : cfg.beta_values)
                if (!(b > n))
                    throw std::invalid_argument("config: Theorem 2(i) requires beta > n");
            break;
        case RunMode::certify_ii:
            if (oracle.convexity != Convexity::concave)
                throw std::invalid_argument("config: Theorem 2(ii) requires a concave oracle");
            for (double b : cfg.beta_values)
                if (!(b > 0.0))
                    throw std::invalid_argument("config: Theorem 2(ii) requires beta > 0");
            break;
        case RunMode::beta_limit:
            for (std::size_t k = 0; k + 1 < cfg.beta_values.size(); ++k)
                if (!(cfg.beta_values[k] < cfg.beta_values[k + 1]))
                    throw std::invalid_argument("config: beta_values must be increasing");
            for (double b : cfg.beta_values)
                if (!(b > n))
                    throw std::invalid_argument("config: the limit sweep requires beta > n");
            break;
    }

    // t stencil must stay inside the oracle's validity region.
    if (cfg.mode != RunMode::beta_limit) {
        Vec2 probe = cfg.n == 1 ? Vec2{0.5 * (std::get<Interval>(cfg.domain).a +
                                              std::get<Interval>(cfg.domain).b),
                                       0.0}
                                : std::get<Disk>(cfg.domain).center;
        for (double t : cfg.t_values) {
            double h = cfg.h_t > 0.0 ? cfg.h_t : 1e-3 * (1.0 + std::abs(t));
            if (!oracle.box.contains(t - 2 * h, probe, cfg.n) ||
                !oracle.box.contains(t + 2 * h, probe, cfg.n))
                throw std::invalid_argument(
                    "config: t_values +- 2 h_t leave the oracle validity box");
        }
    }
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace prekopa
