#include "qobs/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "json.hpp"
#include "qobs/observer_synthesis.hpp"

namespace qobs {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

class FieldReader {
public:
    explicit FieldReader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const std::string& field, const std::string& what) const {
        throw ConfigError(fmt::format("{}: field '{}': {}", source_, field, what));
    }

    void reject_unknown(const json& obj, const std::string& prefix, const std::set<std::string>& known) const {
        for (const auto& [key, value] : obj.items()) {
            if (!known.contains(key)) {
                fail(prefix + key, "unknown field");
            }
        }
    }

    int integer(const json& obj, const std::string& prefix, const std::string& key) const {
        if (!obj.contains(key)) {
            fail(prefix + key, "missing");
        }
        const json& v = obj.at(key);
        if (!v.is_number_integer()) {
            fail(prefix + key, fmt::format("expected an integer, got {}", v.dump()));
        }
        return v.get<int>();
    }

    std::optional<double> number(const json& obj, const std::string& prefix, const std::string& key) const {
        if (!obj.contains(key)) {
            return std::nullopt;
        }
        const json& v = obj.at(key);
        if (!v.is_number()) {
            fail(prefix + key, fmt::format("expected a number, got {}", v.dump()));
        }
        return v.get<double>();
    }

    // Row-major flat list; cols == 0 means "infer from the length".
    std::optional<Matrix> matrix(const json& obj, const std::string& prefix, const std::string& key, int rows,
                                 int cols) const {
        if (!obj.contains(key)) {
            return std::nullopt;
        }
        const std::string field = prefix + key;
        const json& v = obj.at(key);
        if (!v.is_array()) {
            fail(field, "expected a row-major list of numbers");
        }
        const auto len = static_cast<int>(v.size());
        if (cols == 0) {
            if (rows <= 0 || len == 0 || len % rows != 0) {
                fail(field, fmt::format("{} numbers do not form {} rows", len, rows));
            }
            cols = len / rows;
        }
        if (len != rows * cols) {
            fail(field, fmt::format("expected {}x{} = {} numbers, got {}", rows, cols, rows * cols, len));
        }
        Matrix m(rows, cols);
        for (int i = 0; i < len; ++i) {
            if (!v[i].is_number()) {
                fail(field, fmt::format("entry {} is not a number: {}", i, v[i].dump()));
            }
            m(i / cols, i % cols) = v[i].get<double>();
        }
        return m;
    }

private:
    std::string source_;
};

std::pair<std::size_t, std::size_t> line_and_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

ordered_json flat(const Matrix& m) {
    ordered_json out = ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out.push_back(m(i, j));
        }
    }
    return out;
}

bool same(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

bool same(const std::optional<Matrix>& a, const std::optional<Matrix>& b) {
    return a.has_value() == b.has_value() && (!a || same(*a, *b));
}

}  // namespace

bool operator==(const PlantConfig& a, const PlantConfig& b) {
    return a.format_version == b.format_version && a.n_p == b.n_p && a.m == b.m && same(a.r_p, b.r_p) &&
           same(a.c_p, b.c_p) && same(a.c_p2_tilde, b.c_p2_tilde) && a.tol == b.tol &&
           a.observer.omega == b.observer.omega && same(a.observer.r_o, b.observer.r_o) &&
           same(a.observer.c_o, b.observer.c_o) && same(a.observer.beta, b.observer.beta) &&
           a.observer.zero_coupling == b.observer.zero_coupling && a.simulation.t_end == b.simulation.t_end &&
           a.simulation.dt == b.simulation.dt;
}

PlantConfig parse_config(const std::string& text, const std::string& source) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_and_column(text, e.byte);
        throw ConfigError(fmt::format("{}:{}:{}: malformed config: {}", source, line, col, e.what()));
    }
    const FieldReader rd(source);
    if (!root.is_object()) {
        throw ConfigError(fmt::format("{}: config must be a JSON object", source));
    }
    rd.reject_unknown(root, "",
                      {"format_version", "n_p", "m", "r_p", "c_p", "c_p2_tilde", "tol", "observer", "simulation"});

    PlantConfig cfg;
    cfg.format_version = rd.integer(root, "", "format_version");
    if (cfg.format_version != kConfigFormatVersion) {
        rd.fail("format_version", fmt::format("unsupported version {}, expected {}", cfg.format_version,
                                              kConfigFormatVersion));
    }
    cfg.n_p = rd.integer(root, "", "n_p");
    if (cfg.n_p < 2 || cfg.n_p % 2 != 0) {
        rd.fail("n_p", fmt::format("must be a positive even number, got {}", cfg.n_p));
    }
    cfg.m = rd.integer(root, "", "m");
    if (cfg.m < 1) {
        rd.fail("m", fmt::format("must be at least 1, got {}", cfg.m));
    }
    auto r_p = rd.matrix(root, "", "r_p", cfg.n_p, cfg.n_p);
    if (!r_p) {
        rd.fail("r_p", "missing");
    }
    cfg.r_p = *r_p;
    if (max_abs(cfg.r_p - cfg.r_p.transpose()) > kSymmetryTol) {
        rd.fail("r_p", "Hamiltonian matrix is not symmetric");
    }
    cfg.c_p = rd.matrix(root, "", "c_p", cfg.m, cfg.n_p);
    cfg.c_p2_tilde = rd.matrix(root, "", "c_p2_tilde", cfg.m, 0);
    if (cfg.c_p.has_value() == cfg.c_p2_tilde.has_value()) {
        rd.fail("c_p", "give exactly one of 'c_p' and 'c_p2_tilde'");
    }
    cfg.tol = rd.number(root, "", "tol");
    if (cfg.tol && !(*cfg.tol > 0.0)) {
        rd.fail("tol", "must be positive");
    }

    if (root.contains("observer")) {
        const json& obs = root.at("observer");
        if (!obs.is_object()) {
            rd.fail("observer", "expected an object");
        }
        rd.reject_unknown(obs, "observer.", {"omega", "r_o", "c_o", "beta", "zero_coupling"});
        const int n_o = observer_order(cfg.m);
        cfg.observer.omega = rd.number(obs, "observer.", "omega");
        if (cfg.observer.omega && !(*cfg.observer.omega > 0.0)) {
            rd.fail("observer.omega", "must be positive");
        }
        cfg.observer.r_o = rd.matrix(obs, "observer.", "r_o", n_o, n_o);
        cfg.observer.c_o = rd.matrix(obs, "observer.", "c_o", cfg.m, n_o);
        cfg.observer.beta = rd.matrix(obs, "observer.", "beta", n_o, cfg.m);
        if (obs.contains("zero_coupling")) {
            if (!obs.at("zero_coupling").is_boolean()) {
                rd.fail("observer.zero_coupling", "expected true or false");
            }
            cfg.observer.zero_coupling = obs.at("zero_coupling").get<bool>();
        }
    }

    if (root.contains("simulation")) {
        const json& sim = root.at("simulation");
        if (!sim.is_object()) {
            rd.fail("simulation", "expected an object");
        }
        rd.reject_unknown(sim, "simulation.", {"t_end", "dt"});
        cfg.simulation.t_end = rd.number(sim, "simulation.", "t_end");
        cfg.simulation.dt = rd.number(sim, "simulation.", "dt");
    }
    return cfg;
}

PlantConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("{}: cannot open config file", path.string()));
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

std::string serialize_config(const PlantConfig& config) {
    ordered_json out;
    out["format_version"] = config.format_version;
    out["n_p"] = config.n_p;
    out["m"] = config.m;
    out["r_p"] = flat(config.r_p);
    if (config.c_p) {
        out["c_p"] = flat(*config.c_p);
    }
    if (config.c_p2_tilde) {
        out["c_p2_tilde"] = flat(*config.c_p2_tilde);
    }
    if (config.tol) {
        out["tol"] = *config.tol;
    }
    const auto& obs = config.observer;
    if (obs.omega || obs.r_o || obs.c_o || obs.beta || obs.zero_coupling) {
        ordered_json o = ordered_json::object();
        if (obs.omega) o["omega"] = *obs.omega;
        if (obs.r_o) o["r_o"] = flat(*obs.r_o);
        if (obs.c_o) o["c_o"] = flat(*obs.c_o);
        if (obs.beta) o["beta"] = flat(*obs.beta);
        if (obs.zero_coupling) o["zero_coupling"] = true;
        out["observer"] = o;
    }
    if (config.simulation.t_end || config.simulation.dt) {
        ordered_json s = ordered_json::object();
        if (config.simulation.t_end) s["t_end"] = *config.simulation.t_end;
        if (config.simulation.dt) s["dt"] = *config.simulation.dt;
        out["simulation"] = s;
    }
    return out.dump(2) + "\n";
}

}  // namespace qobs
