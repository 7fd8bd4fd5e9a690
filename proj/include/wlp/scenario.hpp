#pragma once

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "wlp/csv.hpp"
#include "wlp/dirac.hpp"
#include "wlp/eisenstein.hpp"
#include "wlp/immersion.hpp"
#include "wlp/moebius.hpp"
#include "wlp/spectral.hpp"
#include "wlp/wave.hpp"

namespace wlp {

/// Every violation found while validating a scenario document.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(std::vector<std::string> problems)
        : std::invalid_argument(join(problems)), problems_(std::move(problems)) {}
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& p) {
        std::string s = "invalid scenario:";
        for (const auto& e : p) s += "\n  - " + e;
        return s;
    }
    std::vector<std::string> problems_;
};

enum class Command { Immerse, Curvature, Spectrum, EisensteinScan, ScatteringScan, Wave, Reduce };

inline const char* to_string(Command c) {
    switch (c) {
        case Command::Immerse: return "immerse";
        case Command::Curvature: return "curvature";
        case Command::Spectrum: return "spectrum";
        case Command::EisensteinScan: return "eisenstein-scan";
        case Command::ScatteringScan: return "scattering-scan";
        case Command::Wave: return "wave";
        case Command::Reduce: return "reduce";
    }
    return "?";
}

struct GridConfig {
    double x0 = 0.0, y0 = 0.0;
    std::size_t n = 64;
    double h = 1.0 / 63.0;
    Grid grid() const { return Grid(x0, y0, n, n, h); }
};

struct SurfaceConfig {
    GridConfig grid;
    SpinorFamily family = SpinorFamily::ConstU_Exponential;
    FamilyParams params;
    PathSpec path;
    double closedness_tolerance = 1e-6;
    double conformality_tolerance = 2e-2;
    std::string obj_output, csv_output;
};

struct SpectrumConfig {
    double a = 4.0, h = 0.02;
    int count = 10;
    double tolerance = 1e-8;
    std::string output;
};

struct EisensteinScanConfig {
    cplx s{2.0, 0.0};
    enum class Method { Fourier, Lattice, Both } method = Method::Fourier;
    std::vector<std::pair<double, double>> points;
    bool reduce = true;
    bool tail_correction = true;
    int n_lat = 100, n_four = 64;
    double agreement_tolerance = 1e-6;
    std::string output;
};

struct ScatteringScanConfig {
    double sigma = 0.5;
    double t_start = 0.5, t_stop = 10.0, t_step = 0.5;
    double unitarity_tolerance = 1e-8;
    std::string output;
};

struct ProfileConfig {
    double tau0 = 0.4, tau1 = 1.2;
    Direction direction = Direction::Outgoing;
    double amplitude = 1.0;
    CuspProfile profile() const { return {tau0, tau1, direction, amplitude}; }
};

struct WaveConfig {
    double a = 8.0, h = 0.02;
    ProfileConfig profile;
    std::optional<ProfileConfig> partner;  // defaults to the same bump travelling the other way
    double T = 0.3;
    int samples = 10;
    double cfl_fraction = 0.5;
    Region region;
    double energy_tolerance = 1e-6;
    std::string output;
};

struct ReduceConfig {
    double x = 0.0, y = 1.0;
    std::string output;
};

struct ScenarioConfig {
    Command command = Command::Reduce;
    std::uint64_t seed = 1;
    std::variant<SurfaceConfig, SpectrumConfig, EisensteinScanConfig, ScatteringScanConfig, WaveConfig,
                 ReduceConfig>
        parameters;
};

namespace detail {

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

using json = nlohmann::json;

/// Reads fields out of a JSON object while recording every problem found.
class Reader {
public:
    Reader(const json& obj, std::string path, std::vector<std::string>& errors, std::vector<std::string> allowed)
        : obj_(obj), path_(std::move(path)), errors_(errors), allowed_(std::move(allowed)) {
        if (!obj_.is_object()) {
            fail(path_.empty() ? "document" : path_, "must be a JSON object");
            return;
        }
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (std::find(allowed_.begin(), allowed_.end(), it.key()) != allowed_.end()) continue;
            std::string msg = "unknown key";
            if (const auto s = suggest(it.key())) msg += "; did you mean \"" + *s + "\"?";
            fail(field(it.key()), msg);
        }
    }

    bool ok() const { return obj_.is_object(); }
    bool has(const std::string& key) const { return ok() && obj_.contains(key); }
    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    const json* get(const std::string& key) const { return has(key) ? &obj_.at(key) : nullptr; }
    void fail(const std::string& where, const std::string& what) { errors_.push_back(where + ": " + what); }

    double number(const std::string& key, double def, double lo, double hi, bool lo_open = false) {
        const json* v = get(key);
        if (!v) return def;
        if (!v->is_number()) {
            fail(field(key), "expected a number");
            return def;
        }
        const double x = v->get<double>();
        if (!std::isfinite(x) || (lo_open ? !(x > lo) : !(x >= lo)) || !(x <= hi)) {
            std::ostringstream os;
            os << "value " << format_number(x) << " out of range " << (lo_open ? "(" : "[") << format_number(lo)
               << ", " << format_number(hi) << "]";
            fail(field(key), os.str());
            return def;
        }
        return x;
    }

    long long integer(const std::string& key, long long def, long long lo, long long hi) {
        const json* v = get(key);
        if (!v) return def;
        if (!v->is_number_integer()) {
            fail(field(key), "expected an integer");
            return def;
        }
        const long long x = v->get<long long>();
        if (x < lo || x > hi) {
            fail(field(key), "value " + std::to_string(x) + " out of range [" + std::to_string(lo) + ", " +
                                 std::to_string(hi) + "]");
            return def;
        }
        return x;
    }

    bool boolean(const std::string& key, bool def) {
        const json* v = get(key);
        if (!v) return def;
        if (!v->is_boolean()) {
            fail(field(key), "expected true or false");
            return def;
        }
        return v->get<bool>();
    }

    std::string string(const std::string& key, const std::string& def) {
        const json* v = get(key);
        if (!v) return def;
        if (!v->is_string()) {
            fail(field(key), "expected a string");
            return def;
        }
        return v->get<std::string>();
    }

    template <class E>
    E choice(const std::string& key, E def, const std::vector<std::pair<std::string, E>>& options) {
        const json* v = get(key);
        if (!v) return def;
        if (v->is_string())
            for (const auto& [name, e] : options)
                if (v->get<std::string>() == name) return e;
        std::string msg = "expected one of";
        for (const auto& o : options) msg += " \"" + o.first + "\"";
        fail(field(key), msg);
        return def;
    }

    /// A complex number given as a number or as [re, im].
    cplx complex(const std::string& key, cplx def) {
        const json* v = get(key);
        if (!v) return def;
        if (v->is_number()) return {v->get<double>(), 0.0};
        if (v->is_array() && v->size() == 2 && (*v)[0].is_number() && (*v)[1].is_number())
            return {(*v)[0].get<double>(), (*v)[1].get<double>()};
        fail(field(key), "expected a number or a [re, im] pair");
        return def;
    }

    void require(const std::string& key) {
        if (ok() && !has(key)) fail(field(key), "missing required key");
    }

private:
    std::optional<std::string> suggest(const std::string& key) const {
        std::optional<std::string> best;
        std::size_t best_d = std::max<std::size_t>(3, key.size() / 3) + 1;
        for (const auto& a : allowed_) {
            const std::size_t d = edit_distance(key, a);
            if (d < best_d) best_d = d, best = a;
        }
        return best;
    }

    const json& obj_;
    std::string path_;
    std::vector<std::string>& errors_;
    std::vector<std::string> allowed_;
};

inline const json& child(const Reader& r, const std::string& key) {
    static const json empty = json::object();
    const json* v = r.get(key);
    return v ? *v : empty;
}

inline GridConfig read_grid(Reader& parent, std::vector<std::string>& errors) {
    GridConfig g;
    Reader r(child(parent, "grid"), parent.field("grid"), errors, {"x0", "y0", "n", "h", "length"});
    g.x0 = r.number("x0", 0.0, -1e6, 1e6);
    g.y0 = r.number("y0", 0.0, -1e6, 1e6);
    g.n = static_cast<std::size_t>(r.integer("n", 64, 3, 1024));
    if (r.has("h") && r.has("length")) r.fail(r.field("h"), "give either h or length, not both");
    if (r.has("length"))
        g.h = r.number("length", 1.0, 0.0, 1e6, true) / static_cast<double>(g.n - 1);
    else
        g.h = r.number("h", 1.0 / static_cast<double>(g.n - 1), 0.0, 1e6, true);
    return g;
}

inline ProfileConfig read_profile(const json& obj, const std::string& path, std::vector<std::string>& errors) {
    ProfileConfig p;
    Reader r(obj, path, errors, {"tau0", "tau1", "direction", "amplitude"});
    p.tau0 = r.number("tau0", p.tau0, 0.0, 3.0);
    p.tau1 = r.number("tau1", p.tau1, 0.0, 3.0);
    if (r.has("tau0") || r.has("tau1"))
        if (!(p.tau1 > p.tau0)) r.fail(r.field("tau1"), "must exceed tau0");
    p.direction = r.choice<Direction>("direction", p.direction,
                                      {{"outgoing", Direction::Outgoing}, {"incoming", Direction::Incoming}});
    p.amplitude = r.number("amplitude", 1.0, -1e6, 1e6);
    return p;
}

inline std::string read_output(Reader& r, const std::string& key) {
    std::string s = r.string(key, "");
    if (r.has(key) && s.empty()) r.fail(r.field(key), "must not be empty");
    return s;
}

}  // namespace detail

/// Validates a scenario document. Problems are collected across the whole
/// document and reported together.
inline ScenarioConfig parse_config(const std::string& text) {
    using detail::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("syntax: ") + e.what()});
    }
    std::vector<std::string> errors;
    ScenarioConfig cfg;
    detail::Reader top(doc, "", errors, {"command", "seed", "parameters"});
    if (!top.ok()) throw ConfigError(errors);
    top.require("command");
    cfg.command = top.choice<Command>("command", Command::Reduce,
                                      {{"immerse", Command::Immerse},
                                       {"curvature", Command::Curvature},
                                       {"spectrum", Command::Spectrum},
                                       {"eisenstein-scan", Command::EisensteinScan},
                                       {"scattering-scan", Command::ScatteringScan},
                                       {"wave", Command::Wave},
                                       {"reduce", Command::Reduce}});
    cfg.seed = static_cast<std::uint64_t>(top.integer("seed", 1, 0, 1LL << 62));
    const json& params = detail::child(top, "parameters");

    switch (cfg.command) {
        case Command::Immerse:
        case Command::Curvature: {
            SurfaceConfig c;
            detail::Reader r(params, "parameters", errors,
                             {"grid", "family", "potential", "lambda", "amplitude", "coefficients", "path",
                              "basepoint", "quadrature", "closedness_tolerance", "conformality_tolerance",
                              "obj_output", "csv_output"});
            c.grid = detail::read_grid(r, errors);
            c.family = r.choice<SpinorFamily>("family", c.family,
                                              {{"ConstU_Exponential", SpinorFamily::ConstU_Exponential},
                                               {"ZeroU_Holo", SpinorFamily::ZeroU_Holo},
                                               {"ZeroU_Antiholo", SpinorFamily::ZeroU_Antiholo}});
            c.params.u0 = r.number("potential", 1.0, -1e3, 1e3);
            if (c.family == SpinorFamily::ConstU_Exponential && c.params.u0 == 0.0)
                r.fail(r.field("potential"), "must be nonzero for ConstU_Exponential");
            c.params.lambda = r.complex("lambda", 1.0);
            if (c.params.lambda == cplx(0.0)) r.fail(r.field("lambda"), "must be nonzero");
            c.params.amplitude = r.complex("amplitude", 1.0);
            if (const auto* co = r.get("coefficients")) {
                c.params.coeffs.clear();
                if (!co->is_array() || co->empty()) r.fail(r.field("coefficients"), "expected a non-empty array");
                else
                    for (std::size_t k = 0; k < co->size(); ++k) {
                        const auto& e = (*co)[k];
                        if (e.is_number())
                            c.params.coeffs.emplace_back(e.get<double>(), 0.0);
                        else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
                            c.params.coeffs.emplace_back(e[0].get<double>(), e[1].get<double>());
                        else
                            r.fail(r.field("coefficients") + "[" + std::to_string(k) + "]",
                                   "expected a number or a [re, im] pair");
                    }
            }
            c.path.style = r.choice<PathStyle>("path", PathStyle::XThenY,
                                               {{"XThenY", PathStyle::XThenY}, {"YThenX", PathStyle::YThenX}});
            c.path.quadrature = r.choice<Quadrature>(
                "quadrature", Quadrature::Lagrange8,
                {{"lagrange8", Quadrature::Lagrange8}, {"trapezoid", Quadrature::Trapezoid}});
            if (const auto* bp = r.get("basepoint")) {
                if (bp->is_array() && bp->size() == 2 && (*bp)[0].is_number_unsigned() &&
                    (*bp)[1].is_number_unsigned()) {
                    c.path.i0 = (*bp)[0].get<std::size_t>();
                    c.path.j0 = (*bp)[1].get<std::size_t>();
                    if (c.path.i0 >= c.grid.n || c.path.j0 >= c.grid.n)
                        r.fail(r.field("basepoint"), "node lies outside the grid");
                } else {
                    r.fail(r.field("basepoint"), "expected [i, j] with nonnegative integers");
                }
            }
            c.closedness_tolerance = r.number("closedness_tolerance", c.closedness_tolerance, 0.0, 1e6, true);
            c.conformality_tolerance = r.number("conformality_tolerance", c.conformality_tolerance, 0.0, 1e6, true);
            c.obj_output = detail::read_output(r, "obj_output");
            c.csv_output = detail::read_output(r, "csv_output");
            if (cfg.command == Command::Curvature && r.has("obj_output"))
                r.fail(r.field("obj_output"), "only the immerse command writes OBJ files");
            cfg.parameters = c;
            break;
        }
        case Command::Spectrum: {
            SpectrumConfig c;
            detail::Reader r(params, "parameters", errors, {"a", "h", "count", "tolerance", "output"});
            c.a = r.number("a", c.a, 1.0, 20.0, true);
            c.h = r.number("h", c.h, 0.0, 0.1, true);
            c.count = static_cast<int>(r.integer("count", c.count, 1, 32));
            c.tolerance = r.number("tolerance", c.tolerance, 0.0, 1.0, true);
            c.output = detail::read_output(r, "output");
            cfg.parameters = c;
            break;
        }
        case Command::EisensteinScan: {
            EisensteinScanConfig c;
            detail::Reader r(params, "parameters", errors,
                             {"s", "method", "points", "reduce", "tail_correction", "n_lat", "n_four",
                              "agreement_tolerance", "output"});
            r.require("points");
            c.s = r.complex("s", c.s);
            using M = EisensteinScanConfig::Method;
            c.method = r.choice<M>("method", M::Fourier, {{"fourier", M::Fourier}, {"lattice", M::Lattice}, {"both", M::Both}});
            if (c.method != M::Fourier && !(c.s.real() > 1.0))
                r.fail(r.field("s"), "the lattice method needs Re s > 1");
            if (const auto* pts = r.get("points")) {
                if (!pts->is_array() || pts->empty() || pts->size() > 10000)
                    r.fail(r.field("points"), "expected between 1 and 10000 [x, y] pairs");
                else
                    for (std::size_t k = 0; k < pts->size(); ++k) {
                        const auto& e = (*pts)[k];
                        if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number() &&
                            e[1].get<double>() > 0.0)
                            c.points.emplace_back(e[0].get<double>(), e[1].get<double>());
                        else
                            r.fail(r.field("points") + "[" + std::to_string(k) + "]", "expected [x, y] with y > 0");
                    }
            }
            c.reduce = r.boolean("reduce", true);
            c.tail_correction = r.boolean("tail_correction", true);
            c.n_lat = static_cast<int>(r.integer("n_lat", c.n_lat, 1, 200));
            c.n_four = static_cast<int>(r.integer("n_four", c.n_four, 1, 64));
            c.agreement_tolerance = r.number("agreement_tolerance", c.agreement_tolerance, 0.0, 1e6, true);
            c.output = detail::read_output(r, "output");
            cfg.parameters = c;
            break;
        }
        case Command::ScatteringScan: {
            ScatteringScanConfig c;
            detail::Reader r(params, "parameters", errors,
                             {"sigma", "t_start", "t_stop", "t_step", "unitarity_tolerance", "output"});
            c.sigma = r.number("sigma", c.sigma, 0.5, 10.0);
            c.t_start = r.number("t_start", c.t_start, -50.0, 50.0);
            c.t_stop = r.number("t_stop", c.t_stop, -50.0, 50.0);
            c.t_step = r.number("t_step", c.t_step, 0.0, 100.0, true);
            if (c.t_stop < c.t_start) r.fail(r.field("t_stop"), "must not be below t_start");
            else if ((c.t_stop - c.t_start) / c.t_step > 1e5) r.fail(r.field("t_step"), "scan exceeds 1e5 rows");
            c.unitarity_tolerance = r.number("unitarity_tolerance", c.unitarity_tolerance, 0.0, 1.0, true);
            c.output = detail::read_output(r, "output");
            cfg.parameters = c;
            break;
        }
        case Command::Wave: {
            WaveConfig c;
            detail::Reader r(params, "parameters", errors,
                             {"a", "h", "profile", "partner", "T", "samples", "cfl_fraction", "region",
                              "energy_tolerance", "output"});
            c.a = r.number("a", c.a, 1.0, 20.0, true);
            c.h = r.number("h", c.h, 0.0, 0.1, true);
            c.profile = detail::read_profile(detail::child(r, "profile"), r.field("profile"), errors);
            if (r.has("partner")) c.partner = detail::read_profile(*r.get("partner"), r.field("partner"), errors);
            c.T = r.number("T", c.T, -100.0, 100.0);
            c.samples = static_cast<int>(r.integer("samples", c.samples, 1, 10000));
            c.cfl_fraction = r.number("cfl_fraction", c.cfl_fraction, 0.0, 1.0, true);
            {
                detail::Reader g(detail::child(r, "region"), r.field("region"), errors,
                                 {"x_min", "x_max", "y_min", "y_max"});
                c.region.x_min = g.number("x_min", -0.5, -0.5, 0.5);
                c.region.x_max = g.number("x_max", 0.5, -0.5, 0.5);
                c.region.y_min = g.number("y_min", 0.0, 0.0, 20.0);
                c.region.y_max = g.number("y_max", 2.0, 0.0, 20.0);
            }
            c.energy_tolerance = r.number("energy_tolerance", c.energy_tolerance, 0.0, 1.0, true);
            c.output = detail::read_output(r, "output");
            cfg.parameters = c;
            break;
        }
        case Command::Reduce: {
            ReduceConfig c;
            detail::Reader r(params, "parameters", errors, {"z", "output"});
            r.require("z");
            const cplx z = r.complex("z", cplx(0.0, 1.0));
            if (!(z.imag() > 0.0)) r.fail(r.field("z"), "needs Im z > 0");
            c.x = z.real();
            c.y = z.imag();
            c.output = detail::read_output(r, "output");
            cfg.parameters = c;
            break;
        }
    }
    if (!errors.empty()) throw ConfigError(errors);
    return cfg;
}

struct RunOptions {
    std::filesystem::path out_dir = ".";
    bool verbose = false;
};

struct RunReport {
    int exit_code = 0;
    std::vector<std::pair<std::string, std::string>> summary;
    std::vector<std::string> violations;
    std::vector<std::filesystem::path> outputs;
    double seconds = 0.0;

    void add(const std::string& key, double v) { summary.emplace_back(key, format_number(v)); }
    void add(const std::string& key, const std::string& v) { summary.emplace_back(key, v); }
    void check(bool ok, const std::string& what) {
        if (!ok) {
            violations.push_back(what);
            exit_code = 2;
        }
    }
    void print(std::ostream& os) const {
        std::size_t w = 0;
        for (const auto& kv : summary) w = std::max(w, kv.first.size());
        for (const auto& kv : summary) os << "  " << std::left << std::setw(static_cast<int>(w)) << kv.first << "  " << kv.second << '\n';
        for (const auto& v : violations) os << "  CONTRACT VIOLATION: " << v << '\n';
        os << "  elapsed " << std::fixed << std::setprecision(3) << seconds << " s\n";
        os.unsetf(std::ios::floatfield);
    }
};

/// Parses "x+yi", "x-yi", "yi" or "x".
inline cplx parse_complex(const std::string& text) {
    std::string s;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
    if (s.empty()) throw std::invalid_argument("parse_complex: empty input");
    auto to_d = [&](const std::string& t) {
        if (t.empty() || t == "+") return 1.0;
        if (t == "-") return -1.0;
        std::size_t used = 0;
        const double v = std::stod(t, &used);
        if (used != t.size()) throw std::invalid_argument("parse_complex: cannot read '" + text + "'");
        return v;
    };
    try {
        if (s.back() != 'i' && s.back() != 'j') return {to_d(s), 0.0};
        s.pop_back();
        // Split at the last sign that is not part of an exponent.
        std::size_t cut = std::string::npos;
        for (std::size_t k = s.size(); k-- > 1;)
            if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
                cut = k;
                break;
            }
        if (cut == std::string::npos) return {0.0, to_d(s)};
        return {to_d(s.substr(0, cut)), to_d(s.substr(cut))};
    } catch (const std::logic_error&) {
        throw std::invalid_argument("parse_complex: cannot read '" + text + "'");
    }
}

namespace detail {

inline std::filesystem::path output_path(const RunOptions& opt, const std::string& name) {
    const std::filesystem::path p(name);
    return p.is_absolute() ? p : opt.out_dir / p;
}

inline void run_surface(const ScenarioConfig& cfg, const SurfaceConfig& c, const RunOptions& opt, RunReport& rep) {
    const Grid g = c.grid.grid();
    const ExactSolution ex = exact_spinors(c.family, c.params, g);
    const DiracResidual dr = dirac_residual(ex.spinors, ex.potential);
    SurfaceSample s = build_surface(ex.spinors, ex.potential, c.path);
    const FundamentalForms ff = fd_fundamental_forms(s);
    const CurvatureComparison cmp = compare_curvatures(s, ff);
    double maxK = 0.0, maxH1 = 0.0, maxH = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!s.curvature_valid[k]) continue;
        maxK = std::max(maxK, std::abs(s.K[k]));
        maxH = std::max(maxH, std::abs(s.H[k]));
        maxH1 = std::max(maxH1, std::abs(s.H[k] - 1.0));
    }
    const double conf = conformality_residual(s);
    rep.add("grid nodes", static_cast<double>(g.size()));
    rep.add("dirac residual", dr.max());
    rep.add("closedness residual", s.closedness);
    rep.add("imaginary defect", s.imag_defect);
    rep.add("conformality residual", conf);
    rep.add("max |K|", maxK);
    rep.add("max |H|", maxH);
    rep.add("max |H - 1|", maxH1);
    rep.add("max |K - K_fd|", cmp.max_K_error);
    rep.add("max |H - H_fd|", cmp.max_H_error);
    const double scale = std::max(1.0, std::max(ex.spinors.psi.max_abs(), ex.spinors.phi.max_abs()));
    rep.check(s.closedness <= c.closedness_tolerance * scale * scale, "closedness residual above tolerance");
    rep.check(conf <= c.conformality_tolerance, "conformality residual above tolerance");
    if (cfg.command == Command::Immerse && !c.obj_output.empty()) {
        const auto obj = output_path(opt, c.obj_output);
        const auto csv = c.csv_output.empty() ? std::filesystem::path() : output_path(opt, c.csv_output);
        export_obj(s, obj.string(), csv.string());
        rep.outputs.push_back(obj);
        if (!csv.empty()) rep.outputs.push_back(csv);
    } else if (!c.csv_output.empty()) {
        const auto csv = output_path(opt, c.csv_output);
        std::ofstream f = open_output(csv.string());
        CsvWriter w(f);
        w.header({"i", "j", "x", "y", "K", "H"});
        for (std::size_t j = 0; j < g.ny(); ++j)
            for (std::size_t i = 0; i < g.nx(); ++i) {
                const std::size_t k = g.index(i, j);
                if (!s.curvature_valid[k]) continue;
                w.cell(i).cell(j).cell(g.x(i)).cell(g.y(j)).cell(s.K[k]).cell(s.H[k]);
                w.end_row();
            }
        rep.outputs.push_back(csv);
    }
}

inline void run_spectrum(const ScenarioConfig& cfg, const SpectrumConfig& c, const RunOptions& opt, RunReport& rep) {
    FundamentalDomainSpec spec;
    spec.a = c.a;
    const SpectralOperator op = assemble(spec, c.h);
    EigenOptions eo;
    eo.tol = c.tolerance;
    eo.seed = cfg.seed;
    SpectralResult r = lowest_eigenpairs(op, c.count, eo);
    classify(r);
    rep.add("mesh nodes", static_cast<double>(op.size()));
    rep.add("symmetry defect", op.symmetry_defect());
    rep.add("lambda_0", r.eigenvalues.front());
    rep.add("max residual", *std::max_element(r.residuals.begin(), r.residuals.end()));
    if (!c.output.empty()) {
        const auto path = output_path(opt, c.output);
        std::ofstream f = open_output(path.string());
        CsvWriter w(f);
        w.header({"index", "lambda", "classification", "residual"});
        for (std::size_t k = 0; k < r.eigenvalues.size(); ++k) {
            w.cell(k).cell(r.eigenvalues[k]).cell(std::string(to_string(r.classification[k]))).cell(r.residuals[k]);
            w.end_row();
        }
        rep.outputs.push_back(path);
    }
}

inline void run_eisenstein(const EisensteinScanConfig& c, const RunOptions& opt, RunReport& rep) {
    EisensteinParams p;
    p.s = c.s;
    p.n_lat = c.n_lat;
    p.n_four = c.n_four;
    p.lattice_tail_correction = c.tail_correction;
    using M = EisensteinScanConfig::Method;
    std::optional<std::ofstream> f;
    std::optional<CsvWriter> w;
    if (!c.output.empty()) {
        const auto path = output_path(opt, c.output);
        f.emplace(open_output(path.string()));
        w.emplace(*f);
        if (c.method == M::Both)
            w->header({"x", "y", "Re E_fourier", "Im E_fourier", "Re E_lattice", "Im E_lattice", "difference"});
        else
            w->header({"x", "y", "Re E", "Im E", "truncation"});
        rep.outputs.push_back(path);
    }
    double worst = 0.0;
    for (const auto& [x, y] : c.points) {
        UpperHalfPoint z(x, y);
        if (c.reduce) z = reduce_to_fundamental_domain(z).point;
        if (c.method == M::Both) {
            const auto a = eisenstein_fourier(z, p), b = eisenstein_lattice(z, p);
            const double d = std::abs(a.value - b.value);
            worst = std::max(worst, d);
            if (w) {
                w->cell(x).cell(y).cell(a.value.real()).cell(a.value.imag()).cell(b.value.real()).cell(b.value.imag()).cell(d);
                w->end_row();
            }
        } else {
            const auto v = c.method == M::Fourier ? eisenstein_fourier(z, p) : eisenstein_lattice(z, p);
            if (w) {
                w->cell(x).cell(y).cell(v.value.real()).cell(v.value.imag()).cell(v.truncation);
                w->end_row();
            }
        }
    }
    rep.add("points", static_cast<double>(c.points.size()));
    if (c.method == M::Both) {
        rep.add("max method difference", worst);
        rep.check(worst <= c.agreement_tolerance, "lattice and Fourier values disagree");
    }
}

inline void run_scattering(const ScatteringScanConfig& c, const RunOptions& opt, RunReport& rep) {
    const long rows = static_cast<long>(std::floor((c.t_stop - c.t_start) / c.t_step + 1e-9)) + 1;
    std::optional<std::ofstream> f;
    std::optional<CsvWriter> w;
    if (!c.output.empty()) {
        const auto path = output_path(opt, c.output);
        f.emplace(open_output(path.string()));
        w.emplace(*f);
        w->header({"t", "Re phi", "Im phi", "|phi|"});
        rep.outputs.push_back(path);
    }
    double worst = 0.0;
    for (long k = 0; k < rows; ++k) {
        const double t = c.t_start + static_cast<double>(k) * c.t_step;
        const cplx phi = scattering_phi(cplx(c.sigma, t));
        worst = std::max(worst, std::abs(std::abs(phi) - 1.0));
        if (w) {
            w->cell(t).cell(phi.real()).cell(phi.imag()).cell(std::abs(phi));
            w->end_row();
        }
    }
    rep.add("rows", static_cast<double>(rows));
    if (c.sigma == 0.5) {
        rep.add("max ||phi| - 1|", worst);
        rep.check(worst <= c.unitarity_tolerance, "scattering matrix not unitary on the critical line");
    }
}

inline void run_wave(const WaveConfig& c, const RunOptions& opt, RunReport& rep) {
    FundamentalDomainSpec spec;
    spec.a = c.a;
    const SpectralOperator op = assemble(spec, c.h);
    const CuspProfile prof = c.profile.profile();
    ProfileConfig partner_cfg = c.partner.value_or(c.profile);
    if (!c.partner)
        partner_cfg.direction = c.profile.direction == Direction::Outgoing ? Direction::Incoming : Direction::Outgoing;
    WaveState s = make_cusp_data(prof, op);
    WaveState q = make_cusp_data(partner_cfg.profile(), op);
    detail::check_translated_support(prof, op, c.T);
    const double dt_max = c.cfl_fraction * cfl_limit(op);
    const int total_steps = std::max(1, static_cast<int>(std::ceil(std::abs(c.T) / dt_max - 1e-9)));
    const int per_sample = std::max(1, total_steps / c.samples);
    const int steps = per_sample * c.samples;
    const double dt = c.T / static_cast<double>(steps);
    const double E0 = discrete_energy(s, op, dt);
    std::optional<std::ofstream> f;
    std::optional<CsvWriter> w;
    if (!c.output.empty()) {
        const auto path = output_path(opt, c.output);
        f.emplace(open_output(path.string()));
        w.emplace(*f);
        w->header({"t", "E_total", "E_in_K", "orthogonality_residual"});
        rep.outputs.push_back(path);
    }
    auto emit = [&] {
        if (!w) return;
        w->cell(s.time).cell(energy(s, op)).cell(energy_in(s, op, c.region)).cell(dpm_orthogonality(s, q, op));
        w->end_row();
    };
    const double K0 = energy_in(s, op, c.region);
    emit();
    double drift = 0.0;
    for (int k = 0; k < c.samples; ++k) {
        s = step(s, op, dt, per_sample);
        q = step(q, op, dt, per_sample);
        drift = std::max(drift, std::abs(discrete_energy(s, op, dt) - E0));
        emit();
    }
    const double rel = drift / std::max(std::abs(E0), 1e-300);
    rep.add("mesh nodes", static_cast<double>(op.size()));
    rep.add("steps", static_cast<double>(steps));
    rep.add("dt", dt);
    rep.add("energy drift (relative)", rel);
    rep.add("E_in_K final / initial", K0 > 0.0 ? energy_in(s, op, c.region) / K0 : 0.0);
    rep.add("orthogonality residual", dpm_orthogonality(s, q, op));
    rep.check(drift <= c.energy_tolerance * std::abs(E0) + 1e-10, "discrete energy drift above tolerance");
}

inline void run_reduce(const ReduceConfig& c, const RunOptions& opt, RunReport& rep) {
    const Reduction r = reduce_to_fundamental_domain(UpperHalfPoint(c.x, c.y));
    rep.add("reduced x", r.point.x());
    rep.add("reduced y", r.point.y());
    rep.add("gamma", r.gamma.str());
    if (!c.output.empty()) {
        const auto path = output_path(opt, c.output);
        std::ofstream f = open_output(path.string());
        CsvWriter w(f);
        w.header({"x", "y", "reduced_x", "reduced_y", "a", "b", "c", "d"});
        w.cell(c.x).cell(c.y).cell(r.point.x()).cell(r.point.y());
        w.cell(r.gamma.a()).cell(r.gamma.b()).cell(r.gamma.c()).cell(r.gamma.d());
        w.end_row();
        rep.outputs.push_back(path);
    }
}

}  // namespace detail

/// Executes a validated scenario. Exit code 0 on success and 2 when a
/// numerical contract fails (convergence failures included); other module
/// errors propagate as exceptions.
inline RunReport run(const ScenarioConfig& cfg, const RunOptions& opt = {}) {
    RunReport rep;
    const auto t0 = std::chrono::steady_clock::now();
    if (!opt.out_dir.empty()) std::filesystem::create_directories(opt.out_dir);
    try {
        std::visit(
            [&](const auto& c) {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, SurfaceConfig>) detail::run_surface(cfg, c, opt, rep);
                else if constexpr (std::is_same_v<T, SpectrumConfig>) detail::run_spectrum(cfg, c, opt, rep);
                else if constexpr (std::is_same_v<T, EisensteinScanConfig>) detail::run_eisenstein(c, opt, rep);
                else if constexpr (std::is_same_v<T, ScatteringScanConfig>) detail::run_scattering(c, opt, rep);
                else if constexpr (std::is_same_v<T, WaveConfig>) detail::run_wave(c, opt, rep);
                else detail::run_reduce(c, opt, rep);
            },
            cfg.parameters);
    } catch (const ConvergenceError& e) {
        rep.violations.push_back(e.what());
        rep.exit_code = 2;
    }
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace wlp
