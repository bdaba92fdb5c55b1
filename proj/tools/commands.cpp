#include "commands.hpp"

#include "artifacts.hpp"
#include "scg/acceptance.hpp"
#include "scg/parallel.hpp"
#include "scg/rayflow.hpp"

#include <algorithm>
#include <cstdio>

namespace scg::cli {

namespace {

namespace fs = std::filesystem;

constexpr FieldPart all_parts[] = {FieldPart::total, FieldPart::boundary, FieldPart::transient, FieldPart::wave};

void record_common(Manifest& m, const RunConfig& cfg)
{
    m.add("hamiltonian.kind", cfg.hamiltonian);
    for (const auto& [k, v] : cfg.hamiltonian_params.numbers) m.add("hamiltonian." + k, v);
    for (const auto& [k, v] : cfg.hamiltonian_params.words) m.add("hamiltonian." + k, v);
    m.add("source.kind", cfg.source.kind);
}

void record_level(Manifest& m, const LevelOptions& lv)
{
    m.add("level.psi_nodes", static_cast<double>(lv.psi_nodes));
    m.add("level.tau_lo", lv.tau_lo);
    m.add("level.tau_hi", lv.tau_hi);
    m.add("level.margin_min", lv.margin_min);
    m.add("level.scan", static_cast<double>(lv.scan));
    if (lv.psi_lo.size()) m.add("level.psi_lo", std::span<const double>(lv.psi_lo.data(), lv.psi_lo.size()));
    if (lv.psi_hi.size()) m.add("level.psi_hi", std::span<const double>(lv.psi_hi.data(), lv.psi_hi.size()));
}

void record_rays(Manifest& m, const RayOptions& r)
{
    m.add("ray.tol", r.tol);
    m.add("ray.initial_step", r.initial_step);
    m.add("ray.max_steps", static_cast<double>(r.max_steps));
    m.add("ray.rank_tol", r.rank_tol);
}

void record_horizon(Manifest& m, const RunConfig& cfg, double horizon)
{
    m.add("cutoffs.horizon", horizon);
    m.add("cutoffs.horizon_mode", cfg.auto_horizon ? std::string("auto") : std::string("explicit"));
    if (cfg.auto_horizon) {
        m.add("cutoffs.escape_radius", cfg.escape_radius);
        m.add("cutoffs.horizon_factor", cfg.horizon_factor);
        m.add("cutoffs.horizon_limit", cfg.horizon_limit);
    }
}

void record_green(Manifest& m, const GreenSetup& G, const RunConfig& cfg)
{
    const CutoffSpec& c = G.cutoffs();
    m.add("cutoffs.tau_width", c.tau_width);
    m.add("cutoffs.t_width", c.t_width);
    record_horizon(m, cfg, c.horizon);
    const GreenOptions& o = G.options();
    m.add("green.quad_tol", o.quad_tol);
    m.add("green.boundary_gap", o.boundary_gap);
    m.add("arrivals.tol", o.arrivals.tol);
    m.add("arrivals.max_iterations", static_cast<double>(o.arrivals.max_iterations));
    m.add("arrivals.dedupe", o.arrivals.dedupe);
    m.add("arrivals.time_samples", static_cast<double>(o.arrivals.time_samples));
    record_level(m, o.level);
    record_rays(m, o.flow.ray);
    m.add("elliptic", G.elliptic() ? std::string("true") : std::string("false"));
}

LevelIntersection build_level(const RunConfig& cfg, const SourceLagrangian& lagrangian, const Hamiltonian& H)
{
    return intersect_level(lagrangian, H, H.energy(), cfg.green.level);
}

// Horizon for the ray commands; an auto horizon certifies escape from the ball on the way.
double ray_horizon(const RunConfig& cfg, const Hamiltonian& H, const LevelIntersection& L)
{
    std::vector<PhasePoint> level;
    for (const LevelPoint& lp : L.samples()) level.push_back(lp.z);
    if (cfg.auto_horizon || cfg.check_escape) {
        const double escape = nontrapping_escape_time(H, level, cfg.escape_radius, cfg.horizon_limit);
        if (cfg.auto_horizon) return cfg.horizon_factor * std::max(escape, 4 * cfg.cutoffs.t_width);
    }
    return cfg.cutoffs.horizon;
}

std::vector<double> sample_times(double t_end, int samples)
{
    std::vector<double> ts(static_cast<std::size_t>(samples));
    for (int j = 0; j < samples; ++j) ts[static_cast<std::size_t>(j)] = t_end * j / (samples - 1);
    return ts;
}

int run_rays(const RunConfig& cfg, Manifest& m)
{
    const Hamiltonian H = build_hamiltonian(cfg);
    const SourceSpec src = build_source(cfg);
    const LevelIntersection L = build_level(cfg, src.lagrangian, H);
    const double horizon = ray_horizon(cfg, H, L);
    const FlowOut F = flow_out(L, horizon, cfg.green.flow);
    const int n = H.dim();

    CsvWriter rays(cfg.out_dir / "rays.csv",
                   std::vector<std::string>{"ray", "t"} + indexed("x", n) + indexed("p", n) +
                       std::vector<std::string>{"S", "theta", "detJ", "maslov"});
    CsvWriter events(cfg.out_dir / "events.csv", {"ray", "t", "kind", "multiplicity"});
    for (std::size_t i = 0; i < F.rays().size(); ++i) {
        const Ray& r = F.rays()[i];
        for (double t : sample_times(r.t_end(), cfg.ray_samples)) {
            const RayState s = r.at(t);
            rays.cell(i).cell(t).cells(s.x).cells(s.p).cell(s.action).cell(s.theta).cell(r.flow_determinant(t)).cell(s.maslov);
            rays.end_row();
        }
        for (const ConjugateEvent& e : r.events()) {
            events.cell(i).cell(e.t).cell(to_string(e.kind)).cell(e.multiplicity);
            events.end_row();
        }
    }
    m.add("rays.samples", static_cast<double>(cfg.ray_samples));
    m.add("rays.check_escape", cfg.check_escape ? std::string("true") : std::string("false"));
    if (cfg.check_escape && !cfg.auto_horizon) {
        m.add("cutoffs.escape_radius", cfg.escape_radius);
        m.add("cutoffs.horizon_limit", cfg.horizon_limit);
    }
    m.add("cutoffs.t_width", cfg.cutoffs.t_width);
    record_horizon(m, cfg, horizon);
    record_level(m, cfg.green.level);
    record_rays(m, cfg.green.flow.ray);
    return 0;
}

SourceLagrangian flowout_lagrangian(const RunConfig& cfg, const SourceSpec& src, int dim)
{
    const std::string& name = cfg.flowout_lagrangian;
    if (name == "source") return src.lagrangian;
    if (name == "conormal") return SourceLagrangian::conormal(dim);
    if (name == "bessel_cone") return SourceLagrangian::bessel_cone(dim);
    throw ConfigError("flowout.lagrangian must be source, conormal or bessel_cone");
}

int run_flowout(const RunConfig& cfg, Manifest& m)
{
    const Hamiltonian H = build_hamiltonian(cfg);
    const SourceSpec src = build_source(cfg);
    const SourceLagrangian lagrangian = flowout_lagrangian(cfg, src, H.dim());
    const LevelIntersection L = build_level(cfg, lagrangian, H);
    const double horizon = ray_horizon(cfg, H, L);
    const FlowOut F = flow_out(L, horizon, cfg.green.flow);
    const int n = H.dim();

    CsvWriter out(cfg.out_dir / "flowout.csv", std::vector<std::string>{"ray", "t"} + indexed("psi", n - 1) +
                                                   indexed("x", n) + indexed("p", n) +
                                                   std::vector<std::string>{"S", "detJ", "maslov"});
    for (std::size_t i = 0; i < F.rays().size(); ++i) {
        const Ray& r = F.rays()[i];
        const Vec& psi = L.samples()[i].psi;
        for (double t : sample_times(r.t_end(), cfg.ray_samples)) {
            const RayState s = r.at(t);
            out.cell(i).cell(t).cells(psi).cells(s.x).cells(s.p).cell(s.action).cell(r.flow_determinant(t)).cell(s.maslov);
            out.end_row();
        }
    }

    const CleanReport clean = check_clean_intersection(lagrangian, F);
    const EikonalReport eik = eikonal_chart(F);
    CsvWriter checks(cfg.out_dir / "flowout_checks.csv", {"check", "pass", "value", "note"});
    checks.cell("clean_intersection").cell(clean.pass ? "true" : "false").cell(clean.flagged).cell(
        "dims " + std::to_string(clean.min_dimension) + ".." + std::to_string(clean.max_dimension) + " over " +
        std::to_string(clean.samples) + " samples");
    checks.end_row();
    checks.cell("eikonal_chart").cell(eik.accepted ? "true" : "false").cell(eik.max_residual).cell(eik.reason);
    checks.end_row();
    checks.cell("level_residual").cell("true").cell(L.max_residual()).cell("max |H0 - E| on L");
    checks.end_row();

    m.add("flowout.lagrangian", cfg.flowout_lagrangian);
    m.add("rays.samples", static_cast<double>(cfg.ray_samples));
    m.add("cutoffs.t_width", cfg.cutoffs.t_width);
    record_horizon(m, cfg, horizon);
    record_level(m, cfg.green.level);
    record_rays(m, cfg.green.flow.ray);
    m.add("clean.rank_tol", 1e-8);
    return 0;
}

int run_arrivals(const RunConfig& cfg, Manifest& m)
{
    if (cfg.points.empty()) throw ConfigError("arrivals needs at least one points line");
    const GreenSetup G = build_setup(cfg);
    if (G.elliptic()) throw HypothesisError("arrivals: the energy surface does not meet the source");
    const int n = G.hamiltonian().dim();
    const auto found = parallel_map(cfg.points.size(), [&](std::size_t i) {
        return find_arrivals(G.flow(), cfg.points[i], G.options().arrivals);
    });
    CsvWriter out(cfg.out_dir / "arrivals.csv",
                  std::vector<std::string>{"point"} + indexed("x", n) + std::vector<std::string>{"t"} +
                      indexed("psi", n - 1) +
                      std::vector<std::string>{"S", "theta", "J", "sigma", "mu", "nondegenerate", "residual"});
    for (std::size_t i = 0; i < found.size(); ++i)
        for (const ArrivalDatum& a : found[i]) {
            out.cell(i).cells(cfg.points[i]).cell(a.t).cells(a.psi).cell(a.action).cell(a.theta).cell(a.jacobian);
            out.cell(a.signature).cell(a.maslov).cell(a.nondegenerate ? "true" : "false").cell(a.residual);
            out.end_row();
        }
    record_green(m, G, cfg);
    return 0;
}

int run_field(const RunConfig& cfg, Manifest& m)
{
    if (cfg.hs.empty()) throw ConfigError("field needs a non-empty h list");
    if (cfg.grid.counts.empty()) throw ConfigError("field needs grid.lo, grid.hi and grid.counts");
    const GreenSetup G = build_setup(cfg);
    const int n = G.hamiltonian().dim();

    std::vector<FieldGrid> fields;
    for (double h : cfg.hs) fields.push_back(evaluate_field(G, cfg.grid, h));

    std::vector<std::string> header = std::vector<std::string>{"h"} + indexed("x", n);
    for (FieldPart p : all_parts) {
        header.push_back("re_" + std::string(to_string(p)));
        header.push_back("im_" + std::string(to_string(p)));
    }
    header.push_back("arrivals");
    header.push_back("caustic");
    CsvWriter out(cfg.out_dir / "field.csv", header);
    for (const FieldGrid& f : fields)
        for (const FieldValue& v : f.values) {
            out.cell(f.h).cells(v.x);
            for (FieldPart p : all_parts) out.cell(part_value(v, p));
            out.cell(v.arrivals).cell(v.caustic ? "true" : "false");
            out.end_row();
        }

    if (fields.size() >= 2 && !G.elliptic()) {
        CsvWriter wf(cfg.out_dir / "wavefront.csv",
                     std::vector<std::string>{"part"} + indexed("x", n) +
                         std::vector<std::string>{"exponent", "slow", "on_lagrangian"});
        CsvWriter summary(cfg.out_dir / "wavefront_summary.csv", {"part", "slow_nodes", "stray_nodes", "consistent"});
        for (FieldPart p : all_parts) {
            const WavefrontReport rep = wavefront_estimate(fields, G, p, cfg.wavefront_tol);
            for (std::size_t k = 0; k < rep.exponents.size(); ++k) {
                wf.cell(to_string(p)).cells(fields[0].values[k].x).cell(rep.exponents[k]);
                wf.cell(rep.slow[k] ? "true" : "false").cell(rep.on_lagrangian[k] ? "true" : "false");
                wf.end_row();
            }
            summary.cell(to_string(p)).cell(rep.slow_nodes).cell(rep.stray_nodes).cell(rep.consistent() ? "true" : "false");
            summary.end_row();
        }
        m.add("wavefront.tol", cfg.wavefront_tol);
        m.add("wavefront.slow_exponent", 1.0);
    }
    if (cfg.binary) write_field_binary(cfg.out_dir / "field.bin", fields);

    m.add("h", cfg.hs);
    m.add("grid.lo", std::span<const double>(cfg.grid.lo.data(), cfg.grid.lo.size()));
    m.add("grid.hi", std::span<const double>(cfg.grid.hi.data(), cfg.grid.hi.size()));
    std::vector<double> counts(cfg.grid.counts.begin(), cfg.grid.counts.end());
    m.add("grid.counts", counts);
    record_green(m, G, cfg);
    return 0;
}

void run_acceptance(const RunConfig& cfg)
{
    std::vector<std::string> ids = cfg.validate_only;
    if (ids.empty())
        for (const Criterion& c : acceptance_criteria()) ids.emplace_back(c.id);
    for (const std::string& id : ids)
        if (std::none_of(acceptance_criteria().begin(), acceptance_criteria().end(),
                         [&](const Criterion& c) { return c.id == id; }))
            throw ConfigError("validate.only: unknown criterion " + id);

    CsvWriter table(cfg.out_dir / "validation.csv", {"id", "title", "status", "summary"});
    CsvWriter details(cfg.out_dir / "validation_details.csv", {"id", "measurement"});
    for (const std::string& id : ids) {
        const auto it = std::find_if(acceptance_criteria().begin(), acceptance_criteria().end(),
                                     [&](const Criterion& c) { return c.id == id; });
        CriterionResult r;
        try {
            r = it->run();
        } catch (const std::exception& e) {
            r.id = id;
            r.summary = std::string("error: ") + e.what();
        }
        std::printf("%-3s %-4s  %s\n", r.id.c_str(), r.pass ? "PASS" : "FAIL", r.summary.c_str());
        std::fflush(stdout);
        table.cell(r.id).cell(it->title).cell(r.pass ? "PASS" : "FAIL").cell(r.summary);
        table.end_row();
        for (const std::string& d : r.details) {
            details.cell(r.id).cell(d);
            details.end_row();
        }
    }
}

// Shrinks supp chi0 at fixed source and reports the transient part and the total at each point.
void run_transient_shrink(const RunConfig& cfg, Manifest& m)
{
    if (cfg.points.empty()) throw ConfigError("transient-shrink needs at least one points line");
    if (cfg.hs.empty()) throw ConfigError("transient-shrink needs a non-empty h list");
    const int n = static_cast<int>(cfg.points.front().size());
    CsvWriter out(cfg.out_dir / "shrink.csv", std::vector<std::string>{"t_width", "h"} + indexed("x", n) +
                                                  std::vector<std::string>{"re_transient", "im_transient",
                                                                           "abs_transient", "re_total", "im_total"});
    std::vector<double> horizons;
    for (double width : cfg.shrink_widths) {
        const GreenSetup G = build_setup(cfg, width);
        horizons.push_back(G.cutoffs().horizon);
        for (double h : cfg.hs) {
            const auto vals = parallel_map(cfg.points.size(), [&](std::size_t i) { return assemble(G, cfg.points[i], h); });
            for (std::size_t i = 0; i < vals.size(); ++i) {
                out.cell(width).cell(h).cells(cfg.points[i]).cell(vals[i].transient).cell(std::abs(vals[i].transient));
                out.cell(vals[i].total);
                out.end_row();
            }
        }
    }
    m.add("shrink.t_widths", cfg.shrink_widths);
    m.add("shrink.horizons", horizons);
    m.add("h", cfg.hs);
    m.add("cutoffs.tau_width", cfg.cutoffs.tau_width);
    m.add("cutoffs.horizon_mode", cfg.auto_horizon ? std::string("auto") : std::string("explicit"));
    m.add("green.quad_tol", cfg.green.quad_tol);
    m.add("green.boundary_gap", cfg.green.boundary_gap);
    record_level(m, cfg.green.level);
    record_rays(m, cfg.green.flow.ray);
}

int run_validate(const RunConfig& cfg, const ValidateOptions& opt, Manifest& m)
{
    for (const std::string& e : opt.experiments) {
        if (e == "acceptance") {
            run_acceptance(cfg);
            m.add("validate.acceptance", std::string("validation.csv"));
        } else if (e == "transient-shrink") {
            run_transient_shrink(cfg, m);
        } else {
            throw ConfigError("unknown validate experiment " + e + " (acceptance, transient-shrink)");
        }
    }
    return 0;
}

}  // namespace

Subcommand parse_subcommand(std::string_view name)
{
    if (name == "rays") return Subcommand::rays;
    if (name == "flowout") return Subcommand::flowout;
    if (name == "arrivals") return Subcommand::arrivals;
    if (name == "field") return Subcommand::field;
    if (name == "validate") return Subcommand::validate;
    throw ConfigError("unknown subcommand " + std::string(name));
}

int execute(const RunConfig& cfg, Subcommand sub, const ValidateOptions& validate)
{
    set_worker_count(cfg.workers);
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec || !fs::is_directory(cfg.out_dir)) throw ConfigError("cannot create output directory " + cfg.out_dir.string());

    static constexpr const char* names[] = {"rays", "flowout", "arrivals", "field", "validate"};
    Manifest m(names[static_cast<int>(sub)], cfg.text);
    record_common(m, cfg);
    int status = 0;
    switch (sub) {
    case Subcommand::rays: status = run_rays(cfg, m); break;
    case Subcommand::flowout: status = run_flowout(cfg, m); break;
    case Subcommand::arrivals: status = run_arrivals(cfg, m); break;
    case Subcommand::field: status = run_field(cfg, m); break;
    case Subcommand::validate: status = run_validate(cfg, validate, m); break;
    }
    m.write(cfg.out_dir / "manifest.txt");
    return status;
}

}  // namespace scg::cli
