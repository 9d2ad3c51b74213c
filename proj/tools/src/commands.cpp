#include "ltmcli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "ltm/annuli.hpp"
#include "ltm/orbits.hpp"
#include "ltm/parallel.hpp"
#include "ltm/twist.hpp"

namespace ltm::cli {

namespace fs = std::filesystem;
using models::Variant;

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Atomic CSV write: temp file in the target directory, then rename.
void write_file(const std::string& dir, const std::string& name,
                const std::string& content) {
    fs::create_directories(dir);
    const fs::path target = fs::path(dir) / name;
    const fs::path tmp = fs::path(dir) / (name + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw NumericError("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, target);
}

struct PreparedScenario {
    Scenario s;
    annuli::LinkCertificate cert;
    twist::SwitchSchedule sched;
};

PreparedScenario prepare(const Scenario& s, bool need_rectangles) {
    PreparedScenario p{s, {}, s.schedule()};
    p.cert = need_rectangles
                 ? annuli::certify_link(s.annulus1(), s.annulus2(), s.integrator)
                 : annuli::link_check(s.annulus1(), s.annulus2());
    return p;
}

std::string rect_name(const annuli::LinkCertificate& cert, int idx) {
    if (cert.kind == annuli::LinkKind::TwoCenters) return idx == 0 ? "A" : "B";
    return "R" + std::to_string(idx + 1);
}

void print_centers(std::ostream& out, const Scenario& s) {
    for (int k = 0; k < 2; ++k) {
        const auto& sys = k == 0 ? s.sys1 : s.sys2;
        const Vec2 c = models::center(sys);
        out << "phase" << (k + 1) << ": center = (" << fmt17(c.x) << ", " << fmt17(c.y)
            << ")  e0 = " << fmt17(models::min_energy(sys))
            << "  omega = " << fmt17(models::linearized_frequency(sys)) << "\n";
    }
}

int cmd_periods(std::ostream& out, const Scenario& s, const Options& opts) {
    const auto grid_for = [&](const models::SystemSpec& sys, double lo, double hi,
                              const std::optional<std::vector<double>>& explicit_grid) {
        std::vector<double> g;
        if (explicit_grid) {
            g = *explicit_grid;
        } else {
            for (int i = 0; i < s.sweep_count; ++i)
                g.push_back(lo + (hi - lo) * i / std::max(1, s.sweep_count - 1));
        }
        const double e0 = models::min_energy(sys);
        std::vector<double> bad;
        for (double e : g)
            if (!(e > e0)) bad.push_back(e);
        if (!bad.empty()) {
            std::ostringstream os;
            os << "period sweep energies not above the minimum e0=" << fmt17(e0) << ":";
            for (double e : bad) os << " " << fmt17(e);
            throw ValidationError(os.str());
        }
        return g;
    };

    for (int k = 0; k < 2; ++k) {
        const auto& sys = k == 0 ? s.sys1 : s.sys2;
        const auto grid = k == 0 ? grid_for(sys, s.e1, s.e2, s.e_grid)
                                 : grid_for(sys, s.h1, s.h2, s.h_grid);
        std::vector<double> taus(grid.size());
        parallel_for(grid.size(), [&](size_t i) {
            taus[i] = orbits::period(sys, grid[i], s.integrator);
        });
        std::ostringstream csv;
        csv << "e,tau\n";
        for (size_t i = 0; i < grid.size(); ++i)
            csv << fmt17(grid[i]) << "," << fmt17(taus[i]) << "\n";
        const std::string name = k == 0 ? "periods_phase1.csv" : "periods_phase2.csv";
        write_file(opts.out_dir, name, csv.str());
        out << "phase" << (k + 1) << ": " << grid.size() << " periods -> "
            << (fs::path(opts.out_dir) / name).string() << "\n";
    }
    return kExitOk;
}

void print_link(std::ostream& out, const annuli::LinkCertificate& cert) {
    out << "linked: yes ("
        << (cert.kind == annuli::LinkKind::TwoCenters ? "two centers, 2 rectangles"
                                                      : "one center, 4 rectangles")
        << (cert.tangent ? ", tangent contacts" : "") << ")\n";
    out << "ordering chain:";
    for (const auto& cp : cert.chain) out << "  " << cp.label << "=" << cp.coord;
    out << "\n";
    for (const auto& rect : cert.rectangles) {
        out << "rectangle " << rect_name(cert, rect.region) << " (region " << rect.region
            << "): corners";
        for (const Vec2& c : rect.corners)
            out << " (" << c.x << ", " << c.y << ")";
        out << "\n";
    }
}

int cmd_link(std::ostream& out, const Scenario& s, const Options& opts) {
    const auto p = prepare(s, true);
    print_link(out, p.cert);
    std::ostringstream csv;
    csv << "rect,x,y\n";
    for (const auto& rect : p.cert.rectangles)
        for (const Vec2& v : rect.polygon)
            csv << rect_name(p.cert, rect.region) << "," << fmt17(v.x) << ","
                << fmt17(v.y) << "\n";
    write_file(opts.out_dir, "rectangles.csv", csv.str());
    out << "rectangle polygons -> " << (fs::path(opts.out_dir) / "rectangles.csv").string()
        << "\n";
    return kExitOk;
}

twist::ThresholdReport compute_thresholds(const Scenario& s) {
    const double t1a = orbits::period(s.sys1, s.e1, s.integrator);
    const double t1b = orbits::period(s.sys1, s.e2, s.integrator);
    const double t2a = orbits::period(s.sys2, s.h1, s.integrator);
    const double t2b = orbits::period(s.sys2, s.h2, s.integrator);
    return twist::thresholds(t1a, t1b, t2a, t2b, s.variant);
}

void print_thresholds(std::ostream& out, const twist::ThresholdReport& r) {
    out << "tau1(e1) = " << r.tau1a << "  tau1(e2) = " << r.tau1b << "\n"
        << "tau2(h1) = " << r.tau2a << "  tau2(h2) = " << r.tau2b << "\n"
        << "constants (c1, c2) = (" << r.c1 << ", " << r.c2 << ")\n"
        << "T1 > " << r.T1_min << "\n"
        << "T2 > " << r.T2_min << "\n";
}

int cmd_thresholds(std::ostream& out, const Scenario& s) {
    print_thresholds(out, compute_thresholds(s));
    return kExitOk;
}

std::string stretch_trace_csv(const twist::PhaseStretch& ph) {
    std::ostringstream csv;
    csv << "lambda,theta,in_target\n";
    for (const auto& t : ph.trace)
        csv << fmt17(t.lam) << "," << fmt17(t.phi) << "," << (t.in_target ? 1 : 0)
            << "\n";
    return csv.str();
}

void print_stretch(std::ostream& out, const annuli::LinkCertificate& cert,
                   const twist::StretchCertificate& sc, int from, int to) {
    const auto phase = [&](const char* name, const twist::PhaseStretch& ph) {
        out << "  " << name << " " << rect_name(cert, ph.source_rect) << " -> "
            << rect_name(cert, ph.target_rect) << ": span = " << ph.span << " rad ("
            << ph.span / kPi << " pi, need > " << ph.span_required / kPi
            << " pi), complete crossings = " << ph.complete_crossings() << " (need >= "
            << ph.required_crossings << ") => " << (ph.pass() ? "pass" : "FAIL") << "\n";
        for (size_t i = 0; i < ph.crossings.size() && i < 2; ++i)
            out << "    H" << i << " = [" << fmt17(ph.crossings[i].lam_lo) << ", "
                << fmt17(ph.crossings[i].lam_hi) << "]\n";
    };
    out << "pair " << rect_name(cert, from) << " -> " << rect_name(cert, to) << ":\n";
    phase("phase-1 stretch", sc.forward);
    phase("phase-2 stretch", sc.backward);
}

int cmd_stretch(std::ostream& out, const Scenario& s, const Options& opts) {
    const auto p = prepare(s, true);
    bool all_pass = true;
    for (const auto& [from, to] : twist::default_rect_pairs(p.cert)) {
        twist::StretchCertificate sc;
        if (s.perturb_eps > 0.0) {
            sc = twist::perturb_and_recheck(p.sched, p.cert, from, to, s.perturb_eps,
                                            s.perturb_shape, s.path_samples, s.integrator);
        } else {
            sc = twist::verify_stretch(p.sched, p.cert, from, to, s.path_samples,
                                       s.integrator);
        }
        print_stretch(out, p.cert, sc, from, to);
        all_pass = all_pass && sc.pass();
        const std::string stem = "stretch_" + rect_name(p.cert, from) + "_to_" +
                                 rect_name(p.cert, to);
        write_file(opts.out_dir, stem + "_phase1.csv", stretch_trace_csv(sc.forward));
        write_file(opts.out_dir, stem + "_phase2.csv", stretch_trace_csv(sc.backward));
    }
    out << (all_pass ? "stretching conditions: PASS" : "stretching conditions: FAIL")
        << "\n";
    return all_pass ? kExitOk : kExitCertificateFailure;
}

int cmd_itinerary(std::ostream& out, const Scenario& s, const Options& opts) {
    if (s.itinerary.empty())
        throw ValidationError("scenario has no [itinerary] symbols");
    const auto p = prepare(s, true);
    const auto res = twist::itinerary_demo(p.sched, p.cert, s.itinerary, s.path_samples,
                                           s.integrator);
    out << "itinerary:";
    for (int sym : res.symbols) out << " " << rect_name(p.cert, sym);
    out << "\nstart point = (" << fmt17(res.x0.x) << ", " << fmt17(res.x0.y) << ")\n";
    std::ostringstream csv;
    csv << "k,x,y,H1,H2\n";
    for (size_t k = 0; k < res.iterates.size(); ++k) {
        const Vec2 q = res.iterates[k];
        csv << k << "," << fmt17(q.x) << "," << fmt17(q.y) << ","
            << fmt17(models::hamiltonian(s.sys1, q)) << ","
            << fmt17(models::hamiltonian(s.sys2, q)) << "\n";
    }
    write_file(opts.out_dir, "itinerary.csv", csv.str());
    out << "iterates -> " << (fs::path(opts.out_dir) / "itinerary.csv").string() << "\n";
    out << "membership verified by direct integration: " << (res.verified ? "yes" : "NO")
        << "\n";
    return res.verified ? kExitOk : kExitCertificateFailure;
}

int cmd_portrait(std::ostream& out, const Scenario& s, const Options& opts) {
    std::ostringstream csv;
    csv << "curve,x,y\n";
    const int n = 512;
    const auto add = [&](const std::string& name, const models::SystemSpec& sys,
                         double e) {
        for (const Vec2& p : orbits::orbit_samples(sys, e, n, s.integrator))
            csv << name << "," << fmt17(p.x) << "," << fmt17(p.y) << "\n";
    };
    add("phase1_e1", s.sys1, s.e1);
    add("phase1_e2", s.sys1, s.e2);
    add("phase2_h1", s.sys2, s.h1);
    add("phase2_h2", s.sys2, s.h2);
    write_file(opts.out_dir, "portrait.csv", csv.str());
    out << "orbit polylines -> " << (fs::path(opts.out_dir) / "portrait.csv").string()
        << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// reproduce: run the full pipeline on a builtin configuration and diff the
// outcome against the published reference values.
// ---------------------------------------------------------------------------

struct Reference {
    struct Value {
        double value;
        int decimals;  // printed decimals, for the half-digit tolerance
    };
    Vec2 center1, center2;
    std::array<Value, 4> taus;       // tau1(e1), tau1(e2), tau2(h1), tau2(h2)
    std::array<Value, 2> thresholds; // printed threshold bounds
    int rectangles;
};

Reference reference_for(const std::string& name) {
    if (name == "ex18")
        return {{0.809, 0.612},
                {0.864, 0.714},
                {{{3.2, 1}, {3.8, 1}, {3.0, 0}, {3.3, 1}}},
                {{{111.467, 3}, {148.500, 3}}},
                2};
    if (name == "ex16")
        return {{0.5, 0.75},
                {0.5, 0.375},
                {{{7.8, 1}, {11.3, 1}, {3.6, 1}, {4.5, 1}}},
                {{{138.5, 1}, {81.0, 0}}},
                2};
    if (name == "bio-r")
        return {{0.8, 0.5},
                {0.8, 0.5},
                {{{1.055, 3}, {1.195, 3}, {1.06, 2}, {1.095, 3}}},
                {{{40.52, 2}, {116.07, 2}}},
                4};
    return {{0.857, 0.5},
            {0.857, 0.5},
            {{{0.355, 3}, {0.360, 3}, {0.635, 3}, {0.650, 3}}},
            {{{115.02, 2}, {96.31, 2}}},
            4};
}

int cmd_reproduce(std::ostream& out, const std::string& name, const Options& opts) {
    Scenario s = builtin_scenario(name);
    if (opts.tol_rel > 0.0) s.integrator.rel_tol = opts.tol_rel;
    if (opts.path_samples > 0) s.path_samples = opts.path_samples;
    const Reference ref = reference_for(name);
    bool ok = true;

    out << "reproduce " << name << "\n";
    print_centers(out, s);
    const Vec2 c1 = models::center(s.sys1);
    const Vec2 c2 = models::center(s.sys2);
    const auto center_ok = [&](Vec2 got, Vec2 want) {
        return std::abs(got.x - want.x) <= 5.5e-4 && std::abs(got.y - want.y) <= 5.5e-4;
    };
    const bool centers_ok = center_ok(c1, ref.center1) && center_ok(c2, ref.center2);
    out << "centers vs reference (" << ref.center1.x << ", " << ref.center1.y << "), ("
        << ref.center2.x << ", " << ref.center2.y << "): "
        << (centers_ok ? "ok" : "MISMATCH") << "\n";
    ok = ok && centers_ok;

    // periods
    const std::array<double, 4> taus = {
        orbits::period(s.sys1, s.e1, s.integrator),
        orbits::period(s.sys1, s.e2, s.integrator),
        orbits::period(s.sys2, s.h1, s.integrator),
        orbits::period(s.sys2, s.h2, s.integrator),
    };
    const char* tau_names[4] = {"tau1(e1)", "tau1(e2)", "tau2(h1)", "tau2(h2)"};
    for (int i = 0; i < 4; ++i) {
        const auto& rv = ref.taus[i];
        const double tol =
            std::max(0.03 * rv.value, 0.5 * std::pow(10.0, -rv.decimals));
        const bool good = std::abs(taus[i] - rv.value) <= tol;
        out << tau_names[i] << " = " << taus[i] << "  reference " << rv.value
            << "  (tol " << tol << "): " << (good ? "ok" : "MISMATCH") << "\n";
        ok = ok && good;
    }

    // thresholds from the reference period inputs (closed form)
    const auto thr = twist::thresholds(ref.taus[0].value, ref.taus[1].value,
                                       ref.taus[2].value, ref.taus[3].value, s.variant);
    const double got_thr[2] = {thr.T1_min, thr.T2_min};
    for (int i = 0; i < 2; ++i) {
        const auto& rv = ref.thresholds[i];
        const double tol = std::max(5e-3, 0.5 * std::pow(10.0, -rv.decimals));
        const bool good = std::abs(got_thr[i] - rv.value) <= tol;
        out << "T" << (i + 1) << "_min = " << got_thr[i] << "  reference " << rv.value
            << ": " << (good ? "ok" : "MISMATCH") << "\n";
        ok = ok && good;
    }

    // linkage + rectangles
    const auto p = prepare(s, true);
    const bool link_ok = static_cast<int>(p.cert.rectangles.size()) == ref.rectangles;
    out << "linked with " << p.cert.rectangles.size() << " rectangles (reference "
        << ref.rectangles << "): " << (link_ok ? "ok" : "MISMATCH") << "\n";
    ok = ok && link_ok;

    // stretching at the builtin switching times
    bool stretch_ok = true;
    for (const auto& [from, to] : twist::default_rect_pairs(p.cert)) {
        const auto sc = twist::verify_stretch(p.sched, p.cert, from, to, s.path_samples,
                                              s.integrator);
        print_stretch(out, p.cert, sc, from, to);
        stretch_ok = stretch_ok && sc.pass();
    }
    out << "stretching at T1 = T2 = " << s.T1 << ": " << (stretch_ok ? "ok" : "FAIL")
        << "\n";
    ok = ok && stretch_ok;

    write_file(opts.out_dir, "scenario_" + name + ".ini", dump_canonical(s));
    out << (ok ? "reproduce: PASS" : "reproduce: FAIL (see MISMATCH lines)") << "\n";
    return ok ? kExitOk : kExitCertificateFailure;
}

}  // namespace

int run_command(const std::string& command, Scenario s, const Options& opts,
                std::ostream& out) {
    if (opts.tol_rel > 0.0) s.integrator.rel_tol = opts.tol_rel;
    if (opts.path_samples > 0) s.path_samples = opts.path_samples;

    if (command == "centers") {
        print_centers(out, s);
        return kExitOk;
    }
    if (command == "periods") return cmd_periods(out, s, opts);
    if (command == "link") return cmd_link(out, s, opts);
    if (command == "thresholds") return cmd_thresholds(out, s);
    if (command == "stretch") return cmd_stretch(out, s, opts);
    if (command == "itinerary") return cmd_itinerary(out, s, opts);
    if (command == "portrait") return cmd_portrait(out, s, opts);
    throw ValidationError("unknown command '" + command + "'");
}

int run_reproduce(const std::string& name, const Options& opts, std::ostream& out) {
    return cmd_reproduce(out, name, opts);
}

int exit_code_for_current_exception(std::ostream& err) {
    try {
        throw;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << "\n";
        return kExitValidationError;
    } catch (const CertificateError& e) {
        err << "certificate failure: " << e.what() << "\n";
        return kExitCertificateFailure;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return kExitNumericFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumericFailure;
    }
}

}  // namespace ltm::cli
