#pragma once

/*
 * Command-layer plumbing: JSON run configuration, orchestration of the solvers
 * and serialization of reports and rasters.  Kept out of billiard.hpp so the
 * core headers never depend on the JSON library.
 *
 * Every floating value leaves here round-trip safe: JSON uses the shortest
 * representation that re-parses to the same double, CSV prints %.17g.
 */

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "billiard.hpp"

namespace billiard::cli {

using ojson = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct SolverOptions {
    SeriesConfig series;
    double oracle_basis_factor = 10.0;
};

struct OutputOptions {
    std::string format = "json";  // json | csv | csv+pgm
    std::string path;
    std::size_t grid_nx = 256;
    std::size_t grid_ny = 256;
};

struct StripRange {
    bool present = false;
    double omega_min = 0.0, omega_max = 0.0;
    std::size_t n_omega = 0;
    double u1_inv_min = 0.0, u1_inv_max = 0.0;
    std::size_t n_u1 = 0;
};

struct RunConfig {
    RectangleBilliard billiard;
    std::string impurity_kind;  // "point" or "rect"
    PointScatterer point;       // meaningful when kind == "point"
    RectImpurity rect;          // meaningful when kind == "rect"
    SolverOptions solver;
    std::optional<EnergyWindow> window;
    std::optional<double> classify_omega;
    StripRange strip;
    double compare_bound = 0.1;
    OutputOptions output;
    int threads = 1;  // worker threads, set from the command line

    [[nodiscard]] bool is_point() const { return impurity_kind == "point"; }
};

namespace detail {

[[nodiscard]] inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[noreturn]] inline void fail(const std::string& key, const std::string& why) {
    throw ConfigError(key + ": " + why);
}

[[nodiscard]] inline const nlohmann::json* find(const nlohmann::json& obj,
                                                const std::string& key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

inline void require_object(const nlohmann::json& v, const std::string& key) {
    if (!v.is_object())
        fail(key, "must be a JSON object");
}

inline void check_keys(const nlohmann::json& obj, const std::string& section,
                       std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known)
            fail(section.empty() ? it.key() : section + "." + it.key(), "unknown key");
    }
}

[[nodiscard]] inline double get_num(const nlohmann::json& obj, const char* key,
                                    const std::string& section) {
    const nlohmann::json* v = find(obj, key);
    if (!v || !v->is_number())
        fail(section + "." + key, "missing or not a number");
    return v->get<double>();
}

[[nodiscard]] inline double get_num_or(const nlohmann::json& obj, const char* key,
                                       const std::string& section, double fallback) {
    const nlohmann::json* v = find(obj, key);
    if (!v)
        return fallback;
    if (!v->is_number())
        fail(section + "." + key, "must be a number");
    return v->get<double>();
}

[[nodiscard]] inline std::size_t get_size(const nlohmann::json& obj, const char* key,
                                          const std::string& section) {
    const nlohmann::json* v = find(obj, key);
    if (!v || !v->is_number_integer() || v->get<long long>() <= 0)
        fail(section + "." + key, "missing or not a positive integer");
    return v->get<std::size_t>();
}

[[nodiscard]] inline std::size_t get_size_or(const nlohmann::json& obj, const char* key,
                                             const std::string& section,
                                             std::size_t fallback) {
    if (!find(obj, key))
        return fallback;
    return get_size(obj, key, section);
}

[[nodiscard]] inline bool get_bool_or(const nlohmann::json& obj, const char* key,
                                      const std::string& section, bool fallback) {
    const nlohmann::json* v = find(obj, key);
    if (!v)
        return fallback;
    if (!v->is_boolean())
        fail(section + "." + key, "must be a boolean");
    return v->get<bool>();
}

[[nodiscard]] inline std::string get_str(const nlohmann::json& obj, const char* key,
                                         const std::string& section) {
    const nlohmann::json* v = find(obj, key);
    if (!v || !v->is_string())
        fail(section + "." + key, "missing or not a string");
    return v->get<std::string>();
}

}  // namespace detail

[[nodiscard]] inline RunConfig parse_config(const nlohmann::json& doc) {
    using namespace detail;
    if (!doc.is_object())
        throw ConfigError("config: root must be a JSON object");
    check_keys(doc, "", {"schema", "billiard", "impurity", "solver", "window", "classify",
                         "strip", "compare", "output"});
    if (const nlohmann::json* s = find(doc, "schema")) {
        if (!s->is_number_integer() || s->get<long long>() != 1)
            fail("schema", "unsupported version (expected 1)");
    }

    RunConfig rc;

    const nlohmann::json* bil = find(doc, "billiard");
    if (!bil)
        throw ConfigError("billiard: missing section");
    require_object(*bil, "billiard");
    check_keys(*bil, "billiard", {"lx", "ly", "mass"});
    rc.billiard.lx = get_num(*bil, "lx", "billiard");
    rc.billiard.ly = get_num(*bil, "ly", "billiard");
    rc.billiard.mass = get_num(*bil, "mass", "billiard");
    rc.billiard.validate();

    const nlohmann::json* imp = find(doc, "impurity");
    if (!imp)
        throw ConfigError("impurity: missing section");
    require_object(*imp, "impurity");
    rc.impurity_kind = get_str(*imp, "kind", "impurity");
    if (rc.impurity_kind == "point") {
        check_keys(*imp, "impurity", {"kind", "x", "y", "lambda", "theta", "vbar"});
        rc.point.position = {get_num(*imp, "x", "impurity"), get_num(*imp, "y", "impurity")};
        rc.point.lambda = get_num_or(*imp, "lambda", "impurity", 1.0);
        const nlohmann::json* th = find(*imp, "theta");
        const nlohmann::json* vb = find(*imp, "vbar");
        if ((th != nullptr) == (vb != nullptr))
            throw ConfigError("impurity: exactly one of theta or vbar is required");
        if (th)
            rc.point.theta = get_num(*imp, "theta", "impurity");
        else
            rc.point.vbar = get_num(*imp, "vbar", "impurity");
        rc.point.validate(rc.billiard);
    } else if (rc.impurity_kind == "rect") {
        check_keys(*imp, "impurity", {"kind", "x", "y", "dlx", "dly", "u1"});
        rc.rect.center = {get_num(*imp, "x", "impurity"), get_num(*imp, "y", "impurity")};
        rc.rect.dlx = get_num(*imp, "dlx", "impurity");
        rc.rect.dly = get_num(*imp, "dly", "impurity");
        rc.rect.u1 = get_num(*imp, "u1", "impurity");
        rc.rect.validate(rc.billiard);
    } else {
        fail("impurity.kind", "must be \"point\" or \"rect\"");
    }

    if (const nlohmann::json* sv = find(doc, "solver")) {
        require_object(*sv, "solver");
        check_keys(*sv, "solver", {"n_max", "tol", "tail_correction", "oracle_basis_factor"});
        rc.solver.series.n_max = get_size_or(*sv, "n_max", "solver", rc.solver.series.n_max);
        rc.solver.series.tol = get_num_or(*sv, "tol", "solver", rc.solver.series.tol);
        rc.solver.series.tail_correction =
            get_bool_or(*sv, "tail_correction", "solver", rc.solver.series.tail_correction);
        rc.solver.series.validate();
        rc.solver.oracle_basis_factor =
            get_num_or(*sv, "oracle_basis_factor", "solver", rc.solver.oracle_basis_factor);
        if (!(rc.solver.oracle_basis_factor >= 1.0)
            || !std::isfinite(rc.solver.oracle_basis_factor))
            fail("solver.oracle_basis_factor", "must be >= 1");
    }

    if (const nlohmann::json* w = find(doc, "window")) {
        require_object(*w, "window");
        check_keys(*w, "window", {"e_min", "e_max"});
        EnergyWindow win;
        win.e_min = get_num(*w, "e_min", "window");
        win.e_max = get_num(*w, "e_max", "window");
        win.validate();
        rc.window = win;
    }

    if (const nlohmann::json* c = find(doc, "classify")) {
        require_object(*c, "classify");
        check_keys(*c, "classify", {"omega"});
        rc.classify_omega = get_num(*c, "omega", "classify");
    }

    if (const nlohmann::json* st = find(doc, "strip")) {
        require_object(*st, "strip");
        check_keys(*st, "strip",
                   {"omega_min", "omega_max", "n_omega", "u1_inv_min", "u1_inv_max", "n_u1"});
        rc.strip.omega_min = get_num(*st, "omega_min", "strip");
        rc.strip.omega_max = get_num(*st, "omega_max", "strip");
        rc.strip.n_omega = get_size(*st, "n_omega", "strip");
        rc.strip.u1_inv_min = get_num(*st, "u1_inv_min", "strip");
        rc.strip.u1_inv_max = get_num(*st, "u1_inv_max", "strip");
        rc.strip.n_u1 = get_size(*st, "n_u1", "strip");
        rc.strip.present = true;
    }

    if (const nlohmann::json* cp = find(doc, "compare")) {
        require_object(*cp, "compare");
        check_keys(*cp, "compare", {"bound"});
        rc.compare_bound = get_num_or(*cp, "bound", "compare", rc.compare_bound);
        if (!(rc.compare_bound > 0.0) || !std::isfinite(rc.compare_bound))
            fail("compare.bound", "must be positive and finite");
    }

    if (const nlohmann::json* out = find(doc, "output")) {
        require_object(*out, "output");
        check_keys(*out, "output", {"format", "path", "grid_nx", "grid_ny"});
        if (find(*out, "format"))
            rc.output.format = get_str(*out, "format", "output");
        if (rc.output.format != "json" && rc.output.format != "csv"
            && rc.output.format != "csv+pgm")
            fail("output.format", "must be one of \"json\", \"csv\", \"csv+pgm\"");
        if (find(*out, "path"))
            rc.output.path = get_str(*out, "path", "output");
        rc.output.grid_nx = get_size_or(*out, "grid_nx", "output", rc.output.grid_nx);
        rc.output.grid_ny = get_size_or(*out, "grid_ny", "output", rc.output.grid_ny);
    }
    return rc;
}

[[nodiscard]] inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config: cannot open '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return parse_config(doc);
}

namespace detail {

[[nodiscard]] inline const EnergyWindow& need_window(const RunConfig& rc, const char* cmd) {
    if (!rc.window)
        throw ConfigError(std::string("window: required for ") + cmd);
    return *rc.window;
}

[[nodiscard]] inline SpectrumResult solve_lines(const RunConfig& rc, const char* cmd) {
    const EnergyWindow w = need_window(rc, cmd);
    if (rc.is_point())
        return solve_point_spectrum(rc.billiard, rc.point, w, rc.solver.series);
    return truncated_secular_solve(rc.billiard, rc.rect, w, rc.solver.series);
}

[[nodiscard]] inline ojson mode_json(Mode m) { return ojson{{"m", m.m}, {"n", m.n}}; }

[[nodiscard]] inline ojson top_coefficients(const std::vector<Mode>& modes,
                                            const std::vector<double>& coeff,
                                            std::size_t keep) {
    std::vector<std::size_t> order(coeff.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return coeff[a] * coeff[a] > coeff[b] * coeff[b];
    });
    ojson arr = ojson::array();
    for (std::size_t k = 0; k < std::min(keep, order.size()); ++k) {
        ojson e = mode_json(modes[order[k]]);
        e["value"] = coeff[order[k]];
        arr.push_back(std::move(e));
    }
    return arr;
}

[[nodiscard]] inline ojson top_overlaps(const OracleResult& res, std::size_t state,
                                        std::size_t keep) {
    const auto weights = mode_overlaps(res, state);
    ojson arr = ojson::array();
    for (std::size_t k = 0; k < std::min(keep, weights.size()); ++k) {
        ojson e = mode_json(weights[k].first);
        e["weight"] = weights[k].second;
        arr.push_back(std::move(e));
    }
    return arr;
}

[[nodiscard]] inline OracleConfig oracle_options(const RunConfig& rc, bool vectors) {
    OracleConfig oc;
    oc.basis_factor = rc.solver.oracle_basis_factor;
    oc.want_vectors = vectors;
    oc.threads = rc.threads;
    return oc;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("output.path: cannot write '" + path + "'");
    out << text;
}

// Amplitude or density grid as CSV: one metadata header line, then ny rows of
// nx values, row j holding the cells at the j-th y coordinate.
[[nodiscard]] inline std::string raster_csv(const Raster& r, const std::vector<double>& values) {
    std::string text = "nx=" + std::to_string(r.nx) + ",ny=" + std::to_string(r.ny)
                       + ",lx=" + fmt17(r.lx) + ",ly=" + fmt17(r.ly)
                       + ",convention=cell-center\n";
    for (std::size_t j = 0; j < r.ny; ++j) {
        for (std::size_t i = 0; i < r.nx; ++i) {
            if (i)
                text += ',';
            text += fmt17(values[j * r.nx + i]);
        }
        text += '\n';
    }
    return text;
}

// 8-bit PGM of the density, min-max normalized, top row = largest y.
[[nodiscard]] inline std::string density_pgm(const Raster& r) {
    double lo = r.density[0], hi = r.density[0];
    for (const double v : r.density) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    std::string text = "P2\n" + std::to_string(r.nx) + " " + std::to_string(r.ny) + "\n255\n";
    for (std::size_t j = r.ny; j-- > 0;) {
        for (std::size_t i = 0; i < r.nx; ++i) {
            if (i)
                text += ' ';
            const double t = (r.density[j * r.nx + i] - lo) / span;
            text += std::to_string(static_cast<int>(std::lround(255.0 * t)));
        }
        text += '\n';
    }
    return text;
}

[[nodiscard]] inline std::string stem_of(const std::string& path) {
    std::filesystem::path p(path);
    p.replace_extension();
    return p.string();
}

}  // namespace detail

[[nodiscard]] inline ojson cmd_spectrum(const RunConfig& rc) {
    const EnergyWindow w = detail::need_window(rc, "spectrum");
    SpectrumResult r = detail::solve_lines(rc, "spectrum");
    std::stable_sort(r.lines.begin(), r.lines.end(),
                     [](const SpectralLine& a, const SpectralLine& b) { return a.omega < b.omega; });

    ojson rep;
    rep["schema"] = 1;
    rep["command"] = "spectrum";
    rep["impurity"] = rc.impurity_kind;
    rep["window"] = ojson{{"e_min", w.e_min}, {"e_max", w.e_max}};
    rep["validity_limit"] = r.validity_limit;
    rep["expansion_mode_count"] = r.expansion_modes.size();
    ojson persistent = ojson::array();
    for (const Mode m : r.persistent_modes)
        persistent.push_back(detail::mode_json(m));
    rep["persistent_modes"] = std::move(persistent);
    ojson unresolved = ojson::array();
    for (const DegenerateCluster& c : r.unresolved)
        unresolved.push_back(ojson{{"e_min", c.e_lo}, {"e_max", c.e_hi},
                                   {"multiplicity", c.multiplicity}});
    rep["unresolved"] = std::move(unresolved);
    ojson lines = ojson::array();
    for (const SpectralLine& line : r.lines) {
        ojson e;
        e["omega"] = line.omega;
        e["bracket"] = ojson{{"lo", line.bracket_lo}, {"hi", line.bracket_hi}};
        e["residual"] = line.residual;
        e["coefficients"] = detail::top_coefficients(r.expansion_modes, line.coefficients, 5);
        lines.push_back(std::move(e));
    }
    rep["lines"] = std::move(lines);
    return rep;
}

namespace detail {

[[nodiscard]] inline ojson classify_entry(const RunConfig& rc, double omega) {
    ojson e;
    e["omega"] = omega;
    ClassificationReport rep;
    if (rc.is_point()) {
        const double vbar = rc.point.vbar
                                ? *rc.point.vbar
                                : theta_to_vbar(rc.billiard, rc.point.position, *rc.point.theta,
                                                rc.point.lambda, rc.solver.series);
        rep = point_metric(vbar, omega, rc.billiard.mass, rc.point.lambda);
    } else {
        rep = finite_metric(rc.rect.u1, rc.billiard.mass, rc.rect.area(), omega);
        e["pointlike_valid"] = rep.pointlike_valid;
    }
    e["metric"] = rep.metric;
    e["threshold"] = rep.threshold;
    e["label"] = to_string(rep.label);
    return e;
}

}  // namespace detail

[[nodiscard]] inline ojson cmd_classify(const RunConfig& rc) {
    ojson rep;
    rep["schema"] = 1;
    rep["command"] = "classify";
    rep["impurity"] = rc.impurity_kind;
    rep["width_delta"] = width_delta(rc.billiard.mass);
    ojson entries = ojson::array();
    if (rc.classify_omega) {
        entries.push_back(detail::classify_entry(rc, *rc.classify_omega));
    } else {
        if (!rc.window)
            throw ConfigError("classify.omega: required when no window is given");
        const SpectrumResult r = detail::solve_lines(rc, "classify");
        for (const SpectralLine& line : r.lines)
            entries.push_back(detail::classify_entry(rc, line.omega));
    }
    rep["entries"] = std::move(entries);
    return rep;
}

[[nodiscard]] inline ojson cmd_oracle(const RunConfig& rc) {
    if (rc.is_point())
        throw ConfigError("impurity.kind: oracle requires rect");
    const OracleResult res =
        oracle_spectrum(rc.billiard, rc.rect, detail::oracle_options(rc, true));

    std::vector<std::size_t> picks;
    if (rc.window) {
        for (std::size_t k = 0; k < res.eigenvalues.size(); ++k)
            if (res.eigenvalues[k] >= rc.window->e_min && res.eigenvalues[k] <= rc.window->e_max)
                picks.push_back(k);
    } else {
        for (std::size_t k = 0; k < std::min<std::size_t>(20, res.eigenvalues.size()); ++k)
            picks.push_back(k);
    }

    ojson rep;
    rep["schema"] = 1;
    rep["command"] = "oracle";
    rep["basis_size"] = res.basis.size();
    rep["cutoff_energy"] = cutoff_energy(rc.billiard, rc.rect);
    rep["eigenvalue_count"] = res.eigenvalues.size();
    ojson states = ojson::array();
    for (const std::size_t k : picks) {
        ojson e;
        e["index"] = k;
        e["omega"] = res.eigenvalues[k];
        e["overlaps"] = detail::top_overlaps(res, k, 5);
        states.push_back(std::move(e));
    }
    rep["states"] = std::move(states);
    return rep;
}

// Solves (or diagonalizes) and rasterizes the state picked by index among the
// states inside the window, writing the amplitude CSV at output.path, the
// density CSV next to it and, for csv+pgm, a normalized density PGM.
[[nodiscard]] inline ojson cmd_wavefunction(const RunConfig& rc, std::size_t state) {
    (void)detail::need_window(rc, "wavefunction");
    if (rc.output.path.empty())
        throw ConfigError("output.path: required for wavefunction");

    Raster raster;
    double omega = 0.0;
    if (rc.is_point()) {
        const SpectrumResult r = detail::solve_lines(rc, "wavefunction");
        if (state >= r.lines.size())
            throw ConfigError("state: selector out of range (" + std::to_string(r.lines.size())
                              + " solved lines in the window)");
        omega = r.lines[state].omega;
        raster = wavefunction_grid(rc.billiard, r.expansion_modes, r.lines[state].coefficients,
                                   rc.output.grid_nx, rc.output.grid_ny, rc.threads);
    } else {
        const OracleResult res =
            oracle_spectrum(rc.billiard, rc.rect, detail::oracle_options(rc, true));
        std::vector<std::size_t> picks;
        for (std::size_t k = 0; k < res.eigenvalues.size(); ++k)
            if (res.eigenvalues[k] >= rc.window->e_min && res.eigenvalues[k] <= rc.window->e_max)
                picks.push_back(k);
        if (state >= picks.size())
            throw ConfigError("state: selector out of range (" + std::to_string(picks.size())
                              + " states in the window)");
        const std::size_t k = picks[state];
        omega = res.eigenvalues[k];
        const std::size_t n = res.basis.size();
        const std::vector<double> coeff(res.vectors.begin() + static_cast<std::ptrdiff_t>(k * n),
                                        res.vectors.begin()
                                            + static_cast<std::ptrdiff_t>((k + 1) * n));
        raster = wavefunction_grid(rc.billiard, res.basis, coeff, rc.output.grid_nx,
                                   rc.output.grid_ny, rc.threads);
    }

    const std::string stem = detail::stem_of(rc.output.path);
    const std::string density_path = stem + "_density.csv";
    detail::write_text(rc.output.path, detail::raster_csv(raster, raster.amplitude));
    detail::write_text(density_path, detail::raster_csv(raster, raster.density));

    ojson files;
    files["amplitude"] = rc.output.path;
    files["density"] = density_path;
    if (rc.output.format == "csv+pgm") {
        const std::string pgm_path = stem + ".pgm";
        detail::write_text(pgm_path, detail::density_pgm(raster));
        files["pgm"] = pgm_path;
    }

    ojson rep;
    rep["schema"] = 1;
    rep["command"] = "wavefunction";
    rep["state"] = state;
    rep["omega"] = omega;
    rep["grid"] = ojson{{"nx", raster.nx}, {"ny", raster.ny}};
    rep["files"] = std::move(files);
    return rep;
}

// Classification grid CSV plus the strip center curve as a second file.
[[nodiscard]] inline ojson cmd_strip_map(const RunConfig& rc) {
    if (rc.is_point())
        throw ConfigError("impurity.kind: strip-map requires rect");
    if (!rc.strip.present)
        throw ConfigError("strip: missing section");
    if (rc.output.path.empty())
        throw ConfigError("output.path: required for strip-map");

    const StripMap map =
        strip_map(rc.billiard.mass, rc.rect.area(), rc.strip.omega_min, rc.strip.omega_max,
                  rc.strip.n_omega, rc.strip.u1_inv_min, rc.strip.u1_inv_max, rc.strip.n_u1);

    std::string grid = "omega,u1_inv,metric,label\n";
    for (std::size_t i = 0; i < map.omegas.size(); ++i)
        for (std::size_t j = 0; j < map.u1_inverses.size(); ++j) {
            grid += detail::fmt17(map.omegas[i]) + "," + detail::fmt17(map.u1_inverses[j]) + ","
                    + detail::fmt17(map.metrics[i * map.u1_inverses.size() + j]) + ","
                    + to_string(map.labels[i * map.u1_inverses.size() + j]) + "\n";
        }
    detail::write_text(rc.output.path, grid);

    const std::string center_path = detail::stem_of(rc.output.path) + "_center.csv";
    std::string center = "omega,center_u1_inv\n";
    for (std::size_t i = 0; i < map.omegas.size(); ++i)
        center += detail::fmt17(map.omegas[i]) + "," + detail::fmt17(map.center_u1_inverse[i])
                  + "\n";
    detail::write_text(center_path, center);

    ojson rep;
    rep["schema"] = 1;
    rep["command"] = "strip-map";
    rep["n_omega"] = map.omegas.size();
    rep["n_u1"] = map.u1_inverses.size();
    rep["half_width_u"] = map.half_width_u;
    rep["half_width_u1_inverse"] = map.half_width_u1_inverse;
    rep["files"] = ojson{{"grid", rc.output.path}, {"center", center_path}};
    return rep;
}

struct CompareOutcome {
    ojson report;
    bool bound_violated = false;
};

// Truncated-model roots against the nearest directly diagonalized level.
[[nodiscard]] inline CompareOutcome cmd_compare(const RunConfig& rc) {
    if (rc.is_point())
        throw ConfigError("impurity.kind: compare requires rect");
    const EnergyWindow w = detail::need_window(rc, "compare");

    CompareOutcome out;
    ojson& rep = out.report;
    rep["schema"] = 1;
    rep["command"] = "compare";
    rep["window"] = ojson{{"e_min", w.e_min}, {"e_max", w.e_max}};
    rep["bound"] = rc.compare_bound;

    if (rc.rect.u1 == 0.0) {
        rep["note"] = "decoupled impurity: both models reduce to the unperturbed billiard";
        rep["rows"] = ojson::array();
        rep["violations"] = 0;
        return out;
    }

    const SpectrumResult trunc =
        truncated_secular_solve(rc.billiard, rc.rect, w, rc.solver.series);
    const OracleResult res =
        oracle_spectrum(rc.billiard, rc.rect, detail::oracle_options(rc, true));

    ojson rows = ojson::array();
    std::size_t violations = 0;
    for (const SpectralLine& line : trunc.lines) {
        const auto it =
            std::lower_bound(res.eigenvalues.begin(), res.eigenvalues.end(), line.omega);
        std::size_t k = static_cast<std::size_t>(it - res.eigenvalues.begin());
        if (k == res.eigenvalues.size()
            || (k > 0 && line.omega - res.eigenvalues[k - 1] < res.eigenvalues[k] - line.omega))
            --k;
        const double diff = std::abs(line.omega - res.eigenvalues[k]);
        if (diff > rc.compare_bound)
            ++violations;
        ojson row;
        row["model_omega"] = line.omega;
        row["oracle_omega"] = res.eigenvalues[k];
        row["difference"] = diff;
        row["within_validity"] = line.omega <= trunc.validity_limit;
        row["overlaps"] = detail::top_overlaps(res, k, 3);
        rows.push_back(std::move(row));
    }
    rep["rows"] = std::move(rows);
    rep["violations"] = violations;
    out.bound_violated = violations > 0;
    return out;
}

}  // namespace billiard::cli
