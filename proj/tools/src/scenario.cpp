#include "ltmcli/scenario.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace ltm::cli {

using models::ParamsBio;
using models::ParamsNeg;
using models::ParamsPos;
using models::RawGameParamsNeg;
using models::RawGameParamsPos;
using models::Variant;

namespace {

struct Entry {
    std::string value;
    int line = 0;
    int column = 0;
};

using Section = std::map<std::string, Entry>;
using Sections = std::map<std::string, Section>;

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

Sections tokenize(const std::string& text) {
    Sections out;
    std::string section;  // "" = top level
    std::istringstream is(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        std::string line = raw;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ParseError("unterminated section header", lineno,
                                 static_cast<int>(raw.find('[')) + 1);
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) throw ParseError("empty section name", lineno, 1);
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value'", lineno, 1);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ParseError("missing key before '='", lineno, 1);
        if (value.empty())
            throw ParseError("missing value for key '" + key + "'", lineno,
                             static_cast<int>(eq) + 2);
        if (out[section].count(key))
            throw ParseError("duplicate key '" + key + "'", lineno, 1);
        out[section][key] = Entry{value, lineno, static_cast<int>(eq) + 2};
    }
    return out;
}

double to_double(const Entry& e, const std::string& key) {
    try {
        size_t used = 0;
        const double v = std::stod(e.value, &used);
        if (used != e.value.size())
            throw ParseError("trailing characters in number for '" + key + "'", e.line,
                             e.column);
        return v;
    } catch (const ParseError&) {
        throw;
    } catch (...) {
        throw ParseError("invalid number '" + e.value + "' for key '" + key + "'", e.line,
                         e.column);
    }
}

class SectionReader {
  public:
    SectionReader(const Sections& all, const std::string& name) : name_(name) {
        const auto it = all.find(name);
        if (it != all.end()) section_ = &it->second;
    }

    bool present() const { return section_ != nullptr; }
    bool has(const std::string& key) const { return section_ && section_->count(key); }

    double number(const std::string& key) const {
        if (!has(key))
            throw ValidationError("scenario section [" + name_ + "] is missing key '" +
                                  key + "'");
        return to_double(section_->at(key), key);
    }

    double number_or(const std::string& key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }

    std::string text(const std::string& key) const {
        if (!has(key))
            throw ValidationError("scenario section [" + name_ + "] is missing key '" +
                                  key + "'");
        return section_->at(key).value;
    }

    const Section* raw() const { return section_; }

  private:
    std::string name_;
    const Section* section_ = nullptr;
};

bool has_any(const SectionReader& r, std::initializer_list<const char*> keys) {
    for (const char* k : keys)
        if (r.has(k)) return true;
    return false;
}

models::SystemSpec read_phase_neg(const SectionReader& r,
                                  const models::SystemSpec* base) {
    const bool raw_keys = has_any(r, {"p_D", "p_ND", "B_PH", "E"});
    if (raw_keys) {
        RawGameParamsNeg raw{r.number("p_D"), r.number("p_ND"), r.number("q_D"),
                             r.number("q_ND"), r.number("B_PH"), r.number("E"),
                             r.number("C_L")};
        return models::make_system(models::derive_neg(raw));
    }
    ParamsNeg p = base ? base->neg() : ParamsNeg{};
    p.zeta = r.number_or("zeta", p.zeta);
    p.eta = r.number_or("eta", p.eta);
    p.theta = r.number_or("theta", p.theta);
    p.kappa = r.number_or("kappa", p.kappa);
    return models::make_system(p);
}

models::SystemSpec read_phase_pos(const SectionReader& r,
                                  const models::SystemSpec* base) {
    const bool raw_keys = has_any(r, {"R", "K", "C_D", "C_ND"});
    if (raw_keys) {
        RawGameParamsPos raw{r.number("p"),   r.number("q_D"), r.number("q_ND"),
                             r.number("R"),   r.number("K"),   r.number("C_D"),
                             r.number("C_ND"), r.number("C_L")};
        return models::make_system(models::derive_pos(raw));
    }
    ParamsPos p = base ? base->pos() : ParamsPos{};
    p.p = r.number_or("p", p.p);
    p.lambda = r.number_or("lambda", p.lambda);
    p.mu = r.number_or("mu", p.mu);
    p.nu = r.number_or("nu", p.nu);
    return models::make_system(p);
}

models::SystemSpec read_phase_bio(const SectionReader& r,
                                  const models::SystemSpec* base) {
    ParamsBio p = base ? base->bio() : ParamsBio{};
    p.alpha = r.number_or("alpha", p.alpha);
    p.beta = r.number_or("beta", p.beta);
    p.gamma = r.number_or("gamma", p.gamma);
    p.delta = r.number_or("delta", p.delta);
    p.r_x = r.number_or("r_x", p.r_x);
    p.r_y = r.number_or("r_y", p.r_y);
    p.K_x = r.number_or("K_x", p.K_x);
    p.K_y = r.number_or("K_y", p.K_y);
    return models::make_system(p);
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    std::istringstream is(text);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    return out;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
    const Sections all = tokenize(text);

    Scenario s;
    const SectionReader top(all, "");
    if (!top.has("variant"))
        throw ValidationError("scenario is missing the top-level 'variant' key");
    const std::string var = top.text("variant");
    if (var == "negmed") {
        s.variant = Variant::NegMed;
    } else if (var == "posmed") {
        s.variant = Variant::PosMed;
    } else if (var == "bio-r" || var == "bio-k" || var == "bio") {
        s.variant = Variant::Bio;
    } else {
        throw ValidationError("unknown variant '" + var +
                              "' (expected negmed, posmed, bio-r or bio-k)");
    }

    const SectionReader p1(all, "phase1");
    const SectionReader p2(all, "phase2");
    if (!p1.present()) throw ValidationError("scenario is missing the [phase1] section");
    if (!p2.present()) throw ValidationError("scenario is missing the [phase2] section");

    switch (s.variant) {
        case Variant::NegMed:
            s.sys1 = read_phase_neg(p1, nullptr);
            // phase 2 inherits phase 1: a raw q_ND override re-derives
            if (p2.has("q_ND") && !p2.has("eta")) {
                const bool p1_raw = has_any(p1, {"p_D", "p_ND", "B_PH", "E"});
                if (!p1_raw)
                    throw ValidationError(
                        "phase2 q_ND override requires raw parameters in [phase1]");
                RawGameParamsNeg raw{p1.number("p_D"), p1.number("p_ND"),
                                     p1.number("q_D"), p2.number("q_ND"),
                                     p1.number("B_PH"), p1.number("E"), p1.number("C_L")};
                s.sys2 = models::make_system(models::derive_neg(raw));
            } else {
                s.sys2 = read_phase_neg(p2, &s.sys1);
            }
            break;
        case Variant::PosMed:
            s.sys1 = read_phase_pos(p1, nullptr);
            if (p2.has("p") && p2.raw()->size() == 1) {
                ParamsPos p = s.sys1.pos();
                p.p = p2.number("p");
                s.sys2 = models::make_system(p);
            } else {
                s.sys2 = read_phase_pos(p2, &s.sys1);
            }
            break;
        case Variant::Bio:
            s.sys1 = read_phase_bio(p1, nullptr);
            s.sys2 = read_phase_bio(p2, &s.sys1);
            break;
    }

    if (s.variant == Variant::Bio) {
        const auto& a = s.sys1.bio();
        const auto& b = s.sys2.bio();
        const bool r_switch = a.r_x != b.r_x || a.r_y != b.r_y;
        const bool k_switch = a.K_x != b.K_x || a.K_y != b.K_y;
        if (var == "bio-r" && !r_switch)
            throw ValidationError("variant bio-r but the phases do not switch r");
        if (var == "bio-k" && !k_switch)
            throw ValidationError("variant bio-k but the phases do not switch K");
        s.bio_switch = k_switch ? BioSwitch::CarryingCapacities : BioSwitch::GrowthRates;
    }

    const SectionReader ann(all, "annuli");
    if (!ann.present()) throw ValidationError("scenario is missing the [annuli] section");
    s.e1 = ann.number("e1");
    s.e2 = ann.number("e2");
    s.h1 = ann.number("h1");
    s.h2 = ann.number("h2");

    const SectionReader sched(all, "schedule");
    if (!sched.present())
        throw ValidationError("scenario is missing the [schedule] section");
    s.T1 = sched.number("T1");
    s.T2 = sched.number("T2");

    const SectionReader integ(all, "integrator");
    s.integrator.rel_tol = integ.number_or("rel_tol", s.integrator.rel_tol);
    s.integrator.abs_tol = integ.number_or("abs_tol", s.integrator.abs_tol);
    s.integrator.max_step = integ.number_or("max_step", s.integrator.max_step);
    s.integrator.dense_resolution =
        integ.number_or("dense_resolution", s.integrator.dense_resolution);
    s.integrator.check();

    const SectionReader stretch(all, "stretch");
    s.path_samples = static_cast<int>(stretch.number_or("path_samples", 256));

    const SectionReader iti(all, "itinerary");
    if (iti.present() && iti.has("symbols")) {
        std::istringstream is(iti.text("symbols"));
        std::string tok;
        while (std::getline(is, tok, ',')) {
            tok = trim(tok);
            if (tok.empty()) continue;
            int idx = -1;
            if (tok == "A" || tok == "a") idx = 0;
            else if (tok == "B" || tok == "b") idx = 1;
            else if (tok.size() >= 2 && (tok[0] == 'R' || tok[0] == 'r'))
                idx = std::stoi(tok.substr(1)) - 1;
            else
                idx = std::stoi(tok);
            s.itinerary.push_back(idx);
        }
    }

    const SectionReader pert(all, "perturb");
    s.perturb_eps = pert.number_or("eps", 0.0);
    if (pert.present() && pert.has("shape")) {
        const std::string sh = pert.text("shape");
        if (sh == "square") s.perturb_shape = twist::PerturbShape::SquareWave;
        else if (sh == "smooth") s.perturb_shape = twist::PerturbShape::SmoothBump;
        else throw ValidationError("unknown perturbation shape '" + sh + "'");
    }

    const SectionReader per(all, "periods");
    s.sweep_count = static_cast<int>(per.number_or("count", 9));
    if (per.present() && per.has("e_grid")) s.e_grid = parse_grid(per.text("e_grid"));
    if (per.present() && per.has("h_grid")) s.h_grid = parse_grid(per.text("h_grid"));

    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open scenario file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string dump_canonical(const Scenario& s) {
    std::ostringstream os;
    const auto params = [&](const models::SystemSpec& sys) {
        switch (sys.variant()) {
            case Variant::NegMed: {
                const auto& c = sys.neg();
                os << "zeta = " << fmt17(c.zeta) << "\neta = " << fmt17(c.eta)
                   << "\ntheta = " << fmt17(c.theta) << "\nkappa = " << fmt17(c.kappa)
                   << "\n";
                break;
            }
            case Variant::PosMed: {
                const auto& c = sys.pos();
                os << "p = " << fmt17(c.p) << "\nlambda = " << fmt17(c.lambda)
                   << "\nmu = " << fmt17(c.mu) << "\nnu = " << fmt17(c.nu) << "\n";
                break;
            }
            case Variant::Bio: {
                const auto& c = sys.bio();
                os << "alpha = " << fmt17(c.alpha) << "\nbeta = " << fmt17(c.beta)
                   << "\ngamma = " << fmt17(c.gamma) << "\ndelta = " << fmt17(c.delta)
                   << "\nr_x = " << fmt17(c.r_x) << "\nr_y = " << fmt17(c.r_y)
                   << "\nK_x = " << fmt17(c.K_x) << "\nK_y = " << fmt17(c.K_y) << "\n";
                break;
            }
        }
    };

    os << "variant = ";
    switch (s.variant) {
        case Variant::NegMed: os << "negmed"; break;
        case Variant::PosMed: os << "posmed"; break;
        case Variant::Bio:
            os << (s.bio_switch == BioSwitch::CarryingCapacities ? "bio-k" : "bio-r");
            break;
    }
    os << "\n\n[phase1]\n";
    params(s.sys1);
    os << "\n[phase2]\n";
    params(s.sys2);
    os << "\n[annuli]\ne1 = " << fmt17(s.e1) << "\ne2 = " << fmt17(s.e2)
       << "\nh1 = " << fmt17(s.h1) << "\nh2 = " << fmt17(s.h2) << "\n";
    os << "\n[schedule]\nT1 = " << fmt17(s.T1) << "\nT2 = " << fmt17(s.T2) << "\n";
    os << "\n[integrator]\nrel_tol = " << fmt17(s.integrator.rel_tol)
       << "\nabs_tol = " << fmt17(s.integrator.abs_tol)
       << "\nmax_step = " << fmt17(s.integrator.max_step)
       << "\ndense_resolution = " << fmt17(s.integrator.dense_resolution) << "\n";
    os << "\n[stretch]\npath_samples = " << s.path_samples << "\n";
    if (!s.itinerary.empty()) {
        os << "\n[itinerary]\nsymbols = ";
        for (size_t i = 0; i < s.itinerary.size(); ++i)
            os << (i ? "," : "") << s.itinerary[i];
        os << "\n";
    }
    if (s.perturb_eps != 0.0) {
        os << "\n[perturb]\neps = " << fmt17(s.perturb_eps) << "\nshape = "
           << (s.perturb_shape == twist::PerturbShape::SquareWave ? "square" : "smooth")
           << "\n";
    }
    os << "\n[periods]\ncount = " << s.sweep_count << "\n";
    const auto grid = [&](const char* key, const std::optional<std::vector<double>>& g) {
        if (!g) return;
        os << key << " = ";
        for (size_t i = 0; i < g->size(); ++i) os << (i ? "," : "") << fmt17((*g)[i]);
        os << "\n";
    };
    grid("e_grid", s.e_grid);
    grid("h_grid", s.h_grid);
    return os.str();
}

bool operator==(const Scenario& a, const Scenario& b) {
    const auto sys_eq = [](const models::SystemSpec& x, const models::SystemSpec& y) {
        if (x.variant() != y.variant()) return false;
        switch (x.variant()) {
            case Variant::NegMed: {
                const auto &p = x.neg(), &q = y.neg();
                return p.zeta == q.zeta && p.eta == q.eta && p.theta == q.theta &&
                       p.kappa == q.kappa;
            }
            case Variant::PosMed: {
                const auto &p = x.pos(), &q = y.pos();
                return p.p == q.p && p.lambda == q.lambda && p.mu == q.mu && p.nu == q.nu;
            }
            case Variant::Bio: {
                const auto &p = x.bio(), &q = y.bio();
                return p.alpha == q.alpha && p.beta == q.beta && p.gamma == q.gamma &&
                       p.delta == q.delta && p.r_x == q.r_x && p.r_y == q.r_y &&
                       p.K_x == q.K_x && p.K_y == q.K_y;
            }
        }
        return false;
    };
    return a.variant == b.variant && a.bio_switch == b.bio_switch &&
           sys_eq(a.sys1, b.sys1) && sys_eq(a.sys2, b.sys2) && a.e1 == b.e1 &&
           a.e2 == b.e2 && a.h1 == b.h1 && a.h2 == b.h2 && a.T1 == b.T1 && a.T2 == b.T2 &&
           a.integrator.rel_tol == b.integrator.rel_tol &&
           a.integrator.abs_tol == b.integrator.abs_tol &&
           a.integrator.max_step == b.integrator.max_step &&
           a.integrator.dense_resolution == b.integrator.dense_resolution &&
           a.path_samples == b.path_samples && a.itinerary == b.itinerary &&
           a.perturb_eps == b.perturb_eps && a.perturb_shape == b.perturb_shape &&
           a.sweep_count == b.sweep_count && a.e_grid == b.e_grid && a.h_grid == b.h_grid;
}

Scenario builtin_scenario(const std::string& name) {
    Scenario s;
    if (name == "ex18") {
        s.variant = Variant::NegMed;
        s.sys1 = models::make_system(
            models::derive_neg({0.9, 0.1, 0.1, 0.2, 6.0, 140.0, 90.0}));
        s.sys2 = models::make_system(
            models::derive_neg({0.9, 0.1, 0.1, 0.3, 6.0, 140.0, 90.0}));
        s.e1 = 16.9;
        s.e2 = 18.5;
        s.h1 = 16.9;
        s.h2 = 18.4;
    } else if (name == "ex16") {
        s.variant = Variant::PosMed;
        s.sys1 = models::make_system(
            models::derive_pos({0.1, 0.4, 0.6, 130.0, 70.0, 18.0, 15.0, 30.0}));
        s.sys2 = models::make_system(
            models::derive_pos({0.2, 0.4, 0.6, 130.0, 70.0, 18.0, 15.0, 30.0}));
        s.e1 = 5.4;
        s.e2 = 8.3;
        s.h1 = 12.1;
        s.h2 = 16.2;
    } else if (name == "bio-r") {
        s.variant = Variant::Bio;
        s.bio_switch = BioSwitch::GrowthRates;
        s.sys1 = models::make_system(ParamsBio{16, 32, 24, 30, 2.0, 0.5, 1.0, 1.0});
        s.sys2 = models::make_system(ParamsBio{16, 32, 24, 30, 0.5, 2.0, 1.0, 1.0});
        s.e1 = 53.0;
        s.e2 = 56.9;
        s.h1 = 43.0;
        s.h2 = 44.4;
    } else if (name == "bio-k") {
        s.variant = Variant::Bio;
        s.bio_switch = BioSwitch::CarryingCapacities;
        s.sys1 = models::make_system(ParamsBio{64, 128, 96, 112, 1.0, 1.0, 0.99, 0.90});
        s.sys2 = models::make_system(ParamsBio{64, 128, 96, 112, 1.0, 1.0, 0.90, 0.99});
        s.e1 = 145.3;
        s.e2 = 146.7;
        s.h1 = 129.4;
        s.h2 = 131.1;
    } else {
        throw ValidationError("unknown builtin scenario '" + name +
                              "' (expected ex18, ex16, bio-r or bio-k)");
    }
    s.T1 = 182.5;
    s.T2 = 182.5;
    return s;
}

}  // namespace ltm::cli
