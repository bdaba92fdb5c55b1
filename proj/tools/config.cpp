#include "config.hpp"

#include "scg/rayflow.hpp"
#include "scg/smooth.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

namespace scg::cli {

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

bool parse_double(std::string_view s, double& out)
{
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

std::vector<std::string> split_ws(const std::string& s)
{
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string tok; in >> tok;) out.push_back(tok);
    return out;
}

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text, const std::string& origin)
{
    ConfigFile f;
    f.text_ = text;
    f.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']') throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section");
            section = trim(std::string_view(body).substr(1, body.size() - 2));
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (!section.empty()) key = section + "." + key;
        f.entries_[key].push_back(value);
        f.lines_.try_emplace(key, lineno);
    }
    return f;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

bool ConfigFile::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string ConfigFile::where(const std::string& key) const
{
    const auto it = lines_.find(key);
    return origin_ + ":" + (it == lines_.end() ? std::string("?") : std::to_string(it->second)) + ": " + key;
}

const std::vector<std::string>& ConfigFile::values(const std::string& key)
{
    used_.insert(key);
    return entries_.at(key);
}

double ConfigFile::number(const std::string& key, double fallback)
{
    if (!has(key)) return fallback;
    const auto& v = values(key);
    double out = 0;
    if (v.size() != 1 || !parse_double(v.front(), out)) throw ConfigError(where(key) + " expects one number");
    return out;
}

int ConfigFile::integer(const std::string& key, int fallback)
{
    if (!has(key)) return fallback;
    const double d = number(key, 0);
    if (d != static_cast<int>(d)) throw ConfigError(where(key) + " expects an integer");
    return static_cast<int>(d);
}

std::string ConfigFile::word(const std::string& key, const std::string& fallback)
{
    if (!has(key)) return fallback;
    const auto& v = values(key);
    if (v.size() != 1 || v.front().empty()) throw ConfigError(where(key) + " expects one value");
    return v.front();
}

bool ConfigFile::flag(const std::string& key, bool fallback)
{
    if (!has(key)) return fallback;
    const std::string w = word(key, "");
    if (w == "true" || w == "yes" || w == "1") return true;
    if (w == "false" || w == "no" || w == "0") return false;
    throw ConfigError(where(key) + " expects true or false");
}

std::vector<std::vector<double>> ConfigFile::number_rows(const std::string& key)
{
    std::vector<std::vector<double>> rows;
    if (!has(key)) return rows;
    for (const std::string& line : values(key)) {
        std::vector<double> row;
        for (const std::string& tok : split_ws(line)) {
            double d = 0;
            if (!parse_double(tok, d)) throw ConfigError(where(key) + ": not a number: " + tok);
            row.push_back(d);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<double> ConfigFile::numbers(const std::string& key)
{
    std::vector<double> out;
    for (const auto& row : number_rows(key)) out.insert(out.end(), row.begin(), row.end());
    return out;
}

std::vector<std::string> ConfigFile::words(const std::string& key)
{
    std::vector<std::string> out;
    if (!has(key)) return out;
    for (const std::string& line : values(key))
        for (std::string& tok : split_ws(line)) out.push_back(std::move(tok));
    return out;
}

std::map<std::string, std::string> ConfigFile::section(const std::string& prefix)
{
    std::map<std::string, std::string> out;
    const std::string head = prefix + ".";
    for (const auto& [key, vals] : entries_) {
        if (key.rfind(head, 0) != 0) continue;
        if (vals.size() != 1) throw ConfigError(where(key) + " given more than once");
        out[key.substr(head.size())] = vals.front();
        used_.insert(key);
    }
    return out;
}

void ConfigFile::reject_unused() const
{
    for (const auto& [key, vals] : entries_)
        if (!used_.count(key)) throw ConfigError(where(key) + " is not a recognised key");
}

RunConfig read_run_config(ConfigFile& f)
{
    RunConfig c;
    c.text = f.text();

    c.hamiltonian = f.word("hamiltonian.kind", c.hamiltonian);
    for (const auto& [key, value] : f.section("hamiltonian")) {
        if (key == "kind") continue;
        static const std::set<std::string> known{"dim",     "energy",  "p_min",           "index.profile",
                                                 "index.n0", "index.a", "potential",       "potential.omega2",
                                                 "depth"};
        if (!known.count(key)) throw ConfigError("hamiltonian." + key + " is not a recognised key");
        double d = 0;
        if (parse_double(value, d))
            c.hamiltonian_params.numbers[key] = d;
        else
            c.hamiltonian_params.words[key] = value;
    }
    const int dim = static_cast<int>(c.hamiltonian_params.number("dim", 2));
    if (dim < 2 || dim > 3) throw ConfigError("hamiltonian.dim must be 2 or 3");

    SourceConfig& s = c.source;
    s.kind = f.word("source.kind", s.kind);
    const std::vector<double> x0 = f.numbers("source.x0");
    s.x0 = x0.empty() ? Vec::Zero(dim) : to_vec(x0);
    if (s.x0.size() != dim) throw ConfigError("source.x0 needs " + std::to_string(dim) + " coordinates");
    if (s.kind == "point") {
        s.profile = f.word("source.profile", s.profile);
        if (s.profile != "bump" && s.profile != "gaussian") throw ConfigError("source.profile must be bump or gaussian");
        if (f.has("source.bump")) s.bump = f.numbers("source.bump");
        if (s.bump.size() != 4 || !std::is_sorted(s.bump.begin(), s.bump.end()) || s.bump.front() < 0)
            throw ConfigError("source.bump needs 0 <= a <= b <= c <= d");
        s.width = f.number("source.width", s.width);
        if (!(s.width > 0)) throw ConfigError("source.width must be positive");
    } else if (s.kind == "window") {
        s.windows = f.number_rows("source.window");
        if (static_cast<int>(s.windows.size()) != dim) throw ConfigError("source.window needs one line per axis");
        for (const auto& w : s.windows)
            if (w.size() != 4 || !std::is_sorted(w.begin(), w.end()) || w.front() == w.back())
                throw ConfigError("each source.window line needs a <= b <= c <= d with a < d");
        const std::string norm = f.word("source.normalization", "star");
        if (norm == "star")
            s.normalization = SourceSpec::Normalization::star;
        else if (norm == "fourier")
            s.normalization = SourceSpec::Normalization::fourier;
        else
            throw ConfigError("source.normalization must be star or fourier");
    } else {
        throw ConfigError("source.kind must be point or window");
    }

    LevelOptions& lv = c.green.level;
    lv.psi_nodes = f.integer("level.psi_nodes", lv.psi_nodes);
    lv.tau_lo = f.number("level.tau_lo", lv.tau_lo);
    lv.tau_hi = f.number("level.tau_hi", lv.tau_hi);
    if (const auto lo = f.numbers("level.psi_lo"); !lo.empty()) lv.psi_lo = to_vec(lo);
    if (const auto hi = f.numbers("level.psi_hi"); !hi.empty()) lv.psi_hi = to_vec(hi);
    if (s.kind == "window") {
        Vec lo(dim - 1), hi(dim - 1);
        for (int j = 0; j + 1 < dim; ++j) {
            lo(j) = s.windows[j].front();
            hi(j) = s.windows[j].back();
        }
        if (lv.psi_lo.size() == 0) lv.psi_lo = lo;
        if (lv.psi_hi.size() == 0) lv.psi_hi = hi;
    }
    if (lv.psi_nodes < 2) throw ConfigError("level.psi_nodes must be at least 2");
    if (!(lv.tau_lo < lv.tau_hi)) throw ConfigError("level.tau_lo must be below level.tau_hi");

    c.green.quad_tol = f.number("green.quad_tol", c.green.quad_tol);
    c.green.boundary_gap = f.number("green.boundary_gap", c.green.boundary_gap);
    c.green.flow.ray.tol = f.number("green.ray_tol", c.green.flow.ray.tol);
    if (!(c.green.quad_tol > 0) || !(c.green.flow.ray.tol > 0)) throw ConfigError("tolerances must be positive");

    c.cutoffs.tau_width = f.number("cutoffs.tau_width", c.cutoffs.tau_width);
    c.cutoffs.t_width = f.number("cutoffs.t_width", c.cutoffs.t_width);
    const std::string horizon = f.word("cutoffs.horizon", "auto");
    c.auto_horizon = horizon == "auto";
    if (!c.auto_horizon) {
        if (!parse_double(horizon, c.cutoffs.horizon)) throw ConfigError("cutoffs.horizon must be a number or auto");
    }
    c.escape_radius = f.number("cutoffs.escape_radius", c.escape_radius);
    c.horizon_factor = f.number("cutoffs.horizon_factor", c.horizon_factor);
    c.horizon_limit = f.number("cutoffs.horizon_limit", c.horizon_limit);
    if (!(c.escape_radius > 0) || !(c.horizon_factor >= 1) || !(c.horizon_limit > 0))
        throw ConfigError("cutoffs: escape_radius > 0, horizon_factor >= 1 and horizon_limit > 0 required");
    if (!c.auto_horizon) c.cutoffs.validate();

    const auto glo = f.numbers("grid.lo"), ghi = f.numbers("grid.hi"), gcount = f.numbers("grid.counts");
    if (!glo.empty() || !ghi.empty() || !gcount.empty()) {
        if (static_cast<int>(glo.size()) != dim || static_cast<int>(ghi.size()) != dim ||
            static_cast<int>(gcount.size()) != dim)
            throw ConfigError("grid.lo, grid.hi and grid.counts need " + std::to_string(dim) + " entries each");
        c.grid.lo = to_vec(glo);
        c.grid.hi = to_vec(ghi);
        for (double n : gcount) {
            if (n < 1 || n != static_cast<int>(n)) throw ConfigError("grid.counts must be positive integers");
            c.grid.counts.push_back(static_cast<int>(n));
        }
    }
    c.hs = f.numbers("h");
    for (double h : c.hs)
        if (!(h > 0)) throw ConfigError("h values must be positive");
    for (const auto& row : f.number_rows("points")) {
        if (static_cast<int>(row.size()) != dim) throw ConfigError("each points line needs " + std::to_string(dim) + " coordinates");
        c.points.push_back(to_vec(row));
    }

    c.ray_samples = f.integer("rays.samples", c.ray_samples);
    if (c.ray_samples < 2) throw ConfigError("rays.samples must be at least 2");
    c.check_escape = f.flag("rays.check_escape", c.check_escape);
    c.flowout_lagrangian = f.word("flowout.lagrangian", c.flowout_lagrangian);
    c.wavefront_tol = f.number("wavefront.tol", c.wavefront_tol);

    c.validate_only = f.words("validate.only");
    if (f.has("validate.shrink_widths")) c.shrink_widths = f.numbers("validate.shrink_widths");
    for (double w : c.shrink_widths)
        if (!(w > 0)) throw ConfigError("validate.shrink_widths must be positive");

    c.out_dir = f.word("output.dir", c.out_dir.string());
    c.binary = f.flag("output.binary", c.binary);
    c.workers = f.integer("workers", c.workers);
    if (c.workers < 0) throw ConfigError("workers must be >= 0");

    f.reject_unused();
    return c;
}

Hamiltonian build_hamiltonian(const RunConfig& cfg) { return make_builtin(cfg.hamiltonian, cfg.hamiltonian_params); }

SourceSpec build_source(const RunConfig& cfg)
{
    const SourceConfig& s = cfg.source;
    if (s.kind == "point") {
        const RadialProfile g = s.profile == "bump" ? bump_profile(s.bump[0], s.bump[1], s.bump[2], s.bump[3])
                                                    : gaussian_profile(s.width);
        return radial_point_source(s.x0, g);
    }
    SourceSpec src;
    src.lagrangian = SourceLagrangian::vertical_fiber(s.x0, ChartKind::cartesian);
    const auto windows = s.windows;
    src.amplitude = [windows](const Vec& eta) {
        double v = 1;
        for (std::size_t j = 0; j < windows.size(); ++j) {
            const auto& w = windows[j];
            v *= smooth_window(eta(static_cast<Eigen::Index>(j)), w[0], w[1], w[2], w[3]);
        }
        return cplx(v);
    };
    const auto n = static_cast<Eigen::Index>(windows.size());
    src.window_lo.resize(n);
    src.window_hi.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        src.window_lo(j) = windows[j].front();
        src.window_hi(j) = windows[j].back();
    }
    src.normalization = s.normalization;
    return src;
}

LevelOptions level_options(const RunConfig& cfg) { return cfg.green.level; }

double resolve_horizon(const RunConfig& cfg, const Hamiltonian& H, const SourceSpec& src)
{
    if (!cfg.auto_horizon) return cfg.cutoffs.horizon;
    std::optional<LevelIntersection> L;
    try {
        L.emplace(intersect_level(src.lagrangian, H, H.energy(), cfg.green.level));
    } catch (const HypothesisError&) {
        // no level set: elliptic, the horizon only has to satisfy the cutoff ordering
        return std::max(1.0, 8 * cfg.cutoffs.t_width);
    }
    std::vector<PhasePoint> level;
    level.reserve(L->samples().size());
    for (const LevelPoint& lp : L->samples()) level.push_back(lp.z);
    const double escape = nontrapping_escape_time(H, level, cfg.escape_radius, cfg.horizon_limit);
    return cfg.horizon_factor * std::max(escape, 4 * cfg.cutoffs.t_width);
}

GreenSetup build_setup(const RunConfig& cfg, double t_width_override)
{
    RunConfig c = cfg;
    if (t_width_override > 0) c.cutoffs.t_width = t_width_override;
    const Hamiltonian H = build_hamiltonian(c);
    const SourceSpec src = build_source(c);
    CutoffSpec cut = c.cutoffs;
    cut.horizon = resolve_horizon(c, H, src);
    return GreenSetup(src, H, cut, c.green);
}

}  // namespace scg::cli
