#include "spiralseg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "spiralseg/io.hpp"

namespace spiralseg {

namespace fs = std::filesystem;

namespace {

double trace_scale(const SystemState& s) {
    double m = 0.0;
    for (const Field& f : s.fields)
        for (double v : f.row(0)) m = std::max(m, v);
    return m > 0.0 ? m : 1.0;
}

double normalized_overlap(const SystemState& s) {
    const double t = trace_scale(s);
    return overlap_metrics(s).max_product / (t * t);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double mean_alpha(const std::vector<SpiralFit>& fits) {
    if (fits.empty()) return 0.0;
    double s = 0.0;
    for (const auto& f : fits) s += f.alpha_fit;
    return s / fits.size();
}

}  // namespace

bool AnalysisReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const CheckResult* AnalysisReport::check(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

AnalysisReport analyze(const SystemState& state, const CompetitionMatrix& a, const ExperimentConfig& cfg,
                       const std::vector<SystemState>* trajectory) {
    const StripGrid& g = state.grid();
    const CheckTolerances& tol = cfg.tolerances;
    AnalysisReport r;
    r.beta = state.beta;
    r.h = cfg.h;
    r.presence = cfg.presence;
    r.constants = spectral_constants(a, cfg.h);
    const double alpha_th = r.constants.alpha;
    const double nu_th = r.constants.nu;

    // segregation
    r.overlap = overlap_metrics(state);
    r.overlap_normalized = normalized_overlap(state);
    if (trajectory)
        for (const auto& s : *trajectory) {
            r.beta_trajectory.push_back(s.beta);
            r.overlap_trajectory.push_back(normalized_overlap(s));
        }

    const MultiplicityMap mmap = multiplicity_map(state, cfg.presence);
    r.singular = locate_singular_point(mmap);
    r.center_at_origin = !r.singular.found() || near_origin(r.singular.clusters.front(), g, tol.origin_cells);
    if (!r.center_at_origin) {
        r.center = r.singular.clusters.front().centroid;
        r.warnings.push_back("singular cluster away from the origin; fits use its centroid");
    }
    const NodeMask mask = exclusion_mask(g, r.singular, cfg.presence.rho);
    r.sign = sign_defects(state, a, &mask);

    // windows stop where the core begins
    r.fit_window = cfg.fit_window;
    r.check_window = cfg.check_window;
    if (r.singular.found() && r.center_at_origin) {
        r.core_top = std::max(0.0, g.y(r.singular.clusters.front().min_row) - cfg.presence.rho * g.dy());
        if (cfg.clip_windows) {
            for (auto* w : {&r.fit_window, &r.check_window}) {
                if (w->y_hi <= r.core_top) continue;
                w->y_hi = r.core_top;
                if (w->y_hi - w->y_lo < cfg.min_window_span) w->y_lo = std::max(0.0, w->y_hi - cfg.min_window_span);
            }
            if (r.fit_window.y_hi < cfg.fit_window.y_hi)
                r.warnings.push_back("fit windows clipped at the core, y <= " + fmt(r.core_top));
            if (r.core_top <= cfg.fit_window.y_lo)
                r.warnings.push_back("the core starts above the fit window; raise beta or refine the grid");
        }
    }
    // a re-fit on the same rows says nothing about stability
    const bool distinct_windows = r.check_window.y_lo != r.fit_window.y_lo || r.check_window.y_hi != r.fit_window.y_hi;
    if (!distinct_windows) r.warnings.push_back("fit and check windows coincide after clipping");

    // interfaces
    r.curves = extract_nodal_curves(state, a, mmap);
    for (const auto& c : r.curves) {
        if (c.partial) r.warnings.push_back("curve " + std::to_string(c.i) + "-" + std::to_string(c.j) + " is fragmented");
        for (const auto* w : {&r.fit_window, &r.check_window}) {
            try {
                auto f = fit_spiral(c, *w, cfg.h);
                if (f.reparameterized)
                    r.warnings.push_back("curve " + std::to_string(c.i) + "-" + std::to_string(c.j) +
                                         " is not monotone in y; averaged");
                (w == &r.fit_window ? r.fits : r.check_fits).push_back(f);
            } catch (const std::invalid_argument& e) {
                r.warnings.push_back("curve " + std::to_string(c.i) + "-" + std::to_string(c.j) + ": " + e.what());
            }
        }
    }
    r.alpha_fit = mean_alpha(r.fits);
    r.alpha_check = mean_alpha(r.check_fits);
    r.angles = equal_angle_check(r.curves, cfg.angle_row, cfg.h);

    // vanishing order of the weighted density
    const WeightedDensity U = build_U(state, r.constants.weights);
    r.ambiguous_nodes = U.ambiguous;
    try {
        r.order = vanishing_order(U.U, r.center, r.fit_window);
        r.order_check = vanishing_order(U.U, r.center, r.check_window);
        r.amplitude = amplitude_profile(U.U, r.order.nu, r.center, r.fit_window);
        if (r.order.shrunk) r.warnings.push_back("order fit window shrunk below the noise floor");
    } catch (const std::invalid_argument& e) {
        r.warnings.push_back(std::string("vanishing order: ") + e.what());
    }
    try {
        r.order_unclipped = vanishing_order(U.U, r.center, cfg.fit_window);
        r.has_order_unclipped = true;
    } catch (const std::invalid_argument&) {
    }

    // checks
    auto add = [&](std::string name, bool pass, double value, double limit, std::string detail = {}) {
        r.checks.push_back({std::move(name), pass, value, limit, std::move(detail)});
    };
    int complete = 0;
    for (const auto& c : r.curves)
        if (!c.points.empty()) ++complete;
    add("nodal_curves", complete == cfg.h && static_cast<int>(r.fits.size()) == cfg.h, complete, cfg.h,
        "curves with a fit in the window: " + std::to_string(r.fits.size()));

    {
        bool ok = static_cast<int>(r.fits.size()) == cfg.h;
        double worst = 0.0;
        const double limit = alpha_th != 0.0 ? tol.alpha_rel * std::abs(alpha_th) : tol.alpha_abs;
        for (const auto& f : r.fits) {
            const double err = std::abs(f.alpha_fit - alpha_th);
            worst = std::max(worst, err);
            if (err > limit) ok = false;
            if (alpha_th != 0.0 && (f.alpha_fit > 0) != (alpha_th > 0)) ok = false;
        }
        add("alpha_fit", ok, worst, limit, "mean alpha_fit " + fmt(r.alpha_fit) + " vs " + fmt(alpha_th));
    }
    {
        double spread = 0.0;
        for (const auto& f : r.fits) spread = std::max(spread, std::abs(f.alpha_fit - r.alpha_fit));
        const double limit = tol.alpha_spread * std::max(std::abs(alpha_th), 1.0);
        add("alpha_pairs_agree", !r.fits.empty() && spread <= limit, spread, limit);
    }
    {
        const double scale = alpha_th != 0.0 ? std::abs(alpha_th) : 1.0;
        const double d = std::abs(r.alpha_check - r.alpha_fit);
        add("alpha_window_stable", distinct_windows && !r.check_fits.empty() && d <= tol.window_change * scale, d,
            tol.window_change * scale, "check window alpha " + fmt(r.alpha_check));
    }
    {
        const double err = std::abs(r.order.nu - nu_th);
        add("nu_fit", r.order.rows > 0 && err <= tol.nu_rel * nu_th, err, tol.nu_rel * nu_th,
            "nu_fit " + fmt(r.order.nu) + " vs " + fmt(nu_th));
        const double d = std::abs(r.order_check.nu - r.order.nu);
        add("nu_window_stable", distinct_windows && r.order_check.rows > 0 && d <= tol.window_change * nu_th, d,
            tol.window_change * nu_th, "check window nu " + fmt(r.order_check.nu));
    }
    {
        const double dev = r.angles.max_deviation * 180.0 / std::numbers::pi;
        add("equal_angles", r.angles.complete && dev <= tol.angle_deg, dev, tol.angle_deg,
            "at y=" + fmt(cfg.angle_row));
    }
    {
        const double bound = 2.0 * std::exp(2.0 * std::numbers::pi * std::abs(alpha_th));
        const double ratio = r.amplitude.a_min > 0.0 ? r.amplitude.a_max / r.amplitude.a_min : INFINITY;
        add("amplitude_bounded", r.order.rows > 0 && ratio <= bound, ratio, bound, "A_max / A_min");
    }
    add("singular_unique", r.singular.unique(), static_cast<double>(r.singular.clusters.size()), 1.0);
    add("singular_at_origin", r.singular.found() && r.center_at_origin,
        r.singular.found() ? std::hypot(r.singular.clusters.front().centroid.x, r.singular.clusters.front().centroid.y)
                           : 0.0,
        r.singular.found() ? tol.origin_cells * std::max(r.singular.clusters.front().outer_radius, g.r_min()) *
                                 std::max(g.dtheta(), g.dy())
                           : 0.0);
    add("overlap_final", r.overlap_normalized <= tol.overlap_max, r.overlap_normalized, tol.overlap_max);
    if (r.overlap_trajectory.size() > 1) {
        bool mono = true;
        double worst = 0.0;
        for (std::size_t i = 1; i < r.overlap_trajectory.size(); ++i) {
            const double ratio = r.overlap_trajectory[i] / std::max(r.overlap_trajectory[i - 1], 1e-300);
            worst = std::max(worst, ratio);
            if (ratio > 1.0 + tol.overlap_slack) mono = false;
        }
        add("overlap_nonincreasing", mono, worst, 1.0 + tol.overlap_slack, "largest step ratio");
    }
    {
        double sub = 0.0, sup = 0.0;
        for (const auto& d : r.sign) {
            sub = std::max(sub, d.sub);
            sup = std::max(sup, d.super);
        }
        add("sign_sub", sub <= tol.sign_defect_max, sub, tol.sign_defect_max);
        add("sign_super", sup <= tol.sign_defect_max, sup, tol.sign_defect_max);
    }
    return r;
}

std::string format_summary(const AnalysisReport& r) {
    std::ostringstream out;
    out << "beta " << fmt(r.beta) << "  lambda " << fmt(r.constants.lambda) << "  alpha " << fmt(r.constants.alpha)
        << "  nu " << fmt(r.constants.nu) << "\n";
    out << "overlap " << fmt(r.overlap_normalized) << "  clusters " << r.singular.clusters.size() << "  curves "
        << r.curves.size() << "\n";
    for (const auto& f : r.fits)
        out << "  pair " << f.i << "-" << f.j << "  slope " << fmt(f.slope) << "  alpha_fit " << fmt(f.alpha_fit)
            << "  rms " << fmt(f.rms) << "  points " << f.points << "\n";
    out << "nu_fit " << fmt(r.order.nu) << " on [" << fmt(r.order.window.y_lo) << ", " << fmt(r.order.window.y_hi)
        << "]  amplitude [" << fmt(r.amplitude.a_min) << ", " << fmt(r.amplitude.a_max) << "]\n";
    if (r.has_order_unclipped)
        out << "nu_fit unclipped " << fmt(r.order_unclipped.nu) << " on [" << fmt(r.order_unclipped.window.y_lo) << ", "
            << fmt(r.order_unclipped.window.y_hi) << "]";
    if (r.core_top >= 0.0) out << "  core from y " << fmt(r.core_top);
    out << "\n";
    for (const auto& c : r.checks)
        out << (c.pass ? "PASS " : "FAIL ") << c.name << "  value " << fmt(c.value) << "  limit " << fmt(c.limit)
            << (c.detail.empty() ? "" : "  (" + c.detail + ")") << "\n";
    for (const auto& w : r.warnings) out << "warning: " << w << "\n";
    return out.str();
}

void write_report(const AnalysisReport& r, const SystemState& state, const fs::path& dir) {
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "fits.csv");
        out << "pair,alpha_fit,slope,intercept,residual,y_lo,y_hi,points,nu_fit,A_min,A_max\n";
        auto row = [&](const SpiralFit& f) {
            out << f.i << "-" << f.j << "," << format_double(f.alpha_fit) << "," << format_double(f.slope) << ","
                << format_double(f.intercept) << "," << format_double(f.rms) << "," << format_double(f.window.y_lo)
                << "," << format_double(f.window.y_hi) << "," << f.points << "," << format_double(r.order.nu) << ","
                << format_double(r.amplitude.a_min) << "," << format_double(r.amplitude.a_max) << "\n";
        };
        for (const auto& f : r.fits) row(f);
        for (const auto& f : r.check_fits) row(f);
    }
    {
        std::ofstream out(dir / "summary.csv");
        out << "quantity,theory,fit,relative_error,operation,y_lo,y_hi\n";
        const double at = r.constants.alpha, nt = r.constants.nu;
        const auto rel = [](double fit, double th) { return th != 0.0 ? std::abs(fit - th) / std::abs(th) : std::abs(fit); };
        if (!r.fits.empty())
            out << "alpha," << format_double(at) << "," << format_double(r.alpha_fit) << ","
                << format_double(rel(r.alpha_fit, at)) << ",fit_spiral," << format_double(r.fits.front().window.y_lo)
                << "," << format_double(r.fits.front().window.y_hi) << "\n";
        out << "nu," << format_double(nt) << "," << format_double(r.order.nu) << "," << format_double(rel(r.order.nu, nt))
            << ",vanishing_order," << format_double(r.order.window.y_lo) << "," << format_double(r.order.window.y_hi)
            << "\n";
        if (r.has_order_unclipped)
            out << "nu_unclipped," << format_double(nt) << "," << format_double(r.order_unclipped.nu) << ","
                << format_double(rel(r.order_unclipped.nu, nt)) << ",vanishing_order,"
                << format_double(r.order_unclipped.window.y_lo) << "," << format_double(r.order_unclipped.window.y_hi)
                << "\n";
        out << "overlap,0," << format_double(r.overlap_normalized) << ",,overlap_metrics,,\n";
        for (const auto& c : r.singular.clusters)
            out << "singular_cluster,," << format_double(c.centroid.x) << ";" << format_double(c.centroid.y)
                << ",,locate_singular_point," << format_double(-std::log(std::max(c.outer_radius, 1e-300))) << ",\n";
    }
    {
        std::ofstream out(dir / "checks.csv");
        out << "check,pass,value,limit,detail\n";
        for (const auto& c : r.checks)
            out << c.name << "," << (c.pass ? 1 : 0) << "," << format_double(c.value) << "," << format_double(c.limit)
                << ",\"" << c.detail << "\"\n";
    }
    {
        std::ofstream out(dir / "overlap.csv");
        out << "beta,overlap\n";
        for (std::size_t i = 0; i < r.overlap_trajectory.size(); ++i)
            out << format_double(r.beta_trajectory[i]) << "," << format_double(r.overlap_trajectory[i]) << "\n";
    }
    {
        std::ofstream out(dir / "summary.txt");
        out << format_summary(r);
    }
    write_constants_csv(r.constants, dir / "constants.csv");
    write_curves_csv(r.curves, dir / "curves.csv");
    write_species_pgm(state, dir / "species.pgm");
    write_multiplicity_pgm(multiplicity_map(state, r.presence), state.k(), dir / "multiplicity.pgm");
    const WeightedDensity U = build_U(state, r.constants.weights);
    write_pgm(U.U, dir / "weighted_density.pgm");
}

}  // namespace spiralseg
