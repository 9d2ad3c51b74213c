#include "ltm/models.hpp"

#include <cmath>
#include <sstream>

namespace ltm::models {

namespace {

constexpr double kBoundaryGuard = 1e-12;

[[noreturn]] void fail(const std::string& what) { throw ValidationError(what); }

void require(bool ok, const char* inequality, double lhs, double rhs) {
    if (!ok) {
        std::ostringstream os;
        os << "parameter regime violated: " << inequality
           << " (lhs=" << lhs << ", rhs=" << rhs << ")";
        fail(os.str());
    }
}

}  // namespace

std::string to_string(Variant v) {
    switch (v) {
        case Variant::NegMed: return "negmed";
        case Variant::PosMed: return "posmed";
        case Variant::Bio: return "bio";
    }
    return "?";
}

ParamsNeg derive_neg(const RawGameParamsNeg& raw) {
    require(raw.q_D > 0.0, "0 < q_D", raw.q_D, 0.0);
    require(raw.q_D < raw.q_ND, "q_D < q_ND", raw.q_D, raw.q_ND);
    require(raw.q_ND < 1.0, "q_ND < 1", raw.q_ND, 1.0);
    require(raw.p_ND >= 0.0, "p_ND >= 0", raw.p_ND, 0.0);
    require(raw.p_ND <= raw.p_D, "p_ND <= p_D", raw.p_ND, raw.p_D);
    require(raw.p_D <= 1.0, "p_D <= 1", raw.p_D, 1.0);
    require(raw.E > 0.0, "E > 0", raw.E, 0.0);
    require(raw.C_L > 0.0, "C_L > 0", raw.C_L, 0.0);

    ParamsNeg c;
    c.zeta = raw.B_PH;
    c.eta = (raw.p_D * raw.q_D - raw.p_ND * raw.q_ND) * raw.E;
    c.theta = raw.q_ND * (raw.C_L - raw.p_ND * raw.E);
    c.kappa = c.theta + raw.q_D * (raw.p_D * raw.E - raw.C_L);
    validate(c);
    return c;
}

ParamsPos derive_pos(const RawGameParamsPos& raw) {
    require(raw.p > 0.0, "0 < p", raw.p, 0.0);
    require(raw.p < 1.0, "p < 1", raw.p, 1.0);
    require(raw.q_D < raw.q_ND, "q_D < q_ND", raw.q_D, raw.q_ND);
    require(raw.R > 0.0, "R > 0", raw.R, 0.0);
    require(raw.K > 0.0, "K > 0", raw.K, 0.0);
    require(raw.C_L > 0.0, "C_L > 0", raw.C_L, 0.0);
    require(raw.C_ND >= 0.0, "C_ND >= 0", raw.C_ND, 0.0);
    require(raw.C_D > raw.C_ND, "C_D > C_ND", raw.C_D, raw.C_ND);

    const double e_d = raw.q_D * raw.R - (1.0 - raw.q_D) * raw.K;
    const double e_nd = raw.q_ND * raw.R - (1.0 - raw.q_ND) * raw.K;

    ParamsPos c;
    c.p = raw.p;
    c.lambda = e_nd - e_d;
    c.mu = raw.C_D - raw.C_ND;
    c.nu = e_nd - raw.C_L;
    validate(c);
    return c;
}

void validate(const ParamsNeg& p) {
    require(p.zeta > 0.0, "0 < zeta", p.zeta, 0.0);
    require(p.zeta < p.eta, "zeta < eta", p.zeta, p.eta);
    require(p.theta > 0.0, "0 < theta", p.theta, 0.0);
    require(p.theta < p.kappa, "theta < kappa", p.theta, p.kappa);
}

void validate(const ParamsPos& p) {
    require(p.mu > 0.0, "0 < mu", p.mu, 0.0);
    require(p.mu < p.p * p.lambda, "mu < p*lambda", p.mu, p.p * p.lambda);
    require(p.nu > 0.0, "0 < nu", p.nu, 0.0);
    require(p.nu < p.lambda, "nu < lambda", p.nu, p.lambda);
    require(p.p > 0.0, "0 < p", p.p, 0.0);
    require(p.p < 1.0, "p < 1", p.p, 1.0);
}

void validate(const ParamsBio& p) {
    require(p.alpha > 0.0, "0 < alpha", p.alpha, 0.0);
    require(p.alpha < p.beta, "alpha < beta", p.alpha, p.beta);
    require(p.gamma > 0.0, "0 < gamma", p.gamma, 0.0);
    require(p.gamma < p.delta, "gamma < delta", p.gamma, p.delta);
    require(p.r_x > 0.0, "r_x > 0", p.r_x, 0.0);
    require(p.r_y > 0.0, "r_y > 0", p.r_y, 0.0);
    require(p.K_x > 0.0, "K_x > 0", p.K_x, 0.0);
    require(p.K_y > 0.0, "K_y > 0", p.K_y, 0.0);
    require(p.gamma / p.delta < p.K_x, "gamma/delta < K_x", p.gamma / p.delta, p.K_x);
    require(p.alpha / p.beta < p.K_y, "alpha/beta < K_y", p.alpha / p.beta, p.K_y);
}

SystemSpec make_system(const ParamsNeg& p) {
    validate(p);
    return SystemSpec{p, Vec2{1.0, 1.0}};
}

SystemSpec make_system(const ParamsPos& p) {
    validate(p);
    return SystemSpec{p, Vec2{1.0, 1.0}};
}

SystemSpec make_system(const ParamsBio& p) {
    validate(p);
    return SystemSpec{p, Vec2{p.K_x, p.K_y}};
}

Vec2 center(const SystemSpec& sys) {
    switch (sys.variant()) {
        case Variant::NegMed: {
            const auto& c = sys.neg();
            return {c.theta / c.kappa, c.zeta / c.eta};
        }
        case Variant::PosMed: {
            const auto& c = sys.pos();
            return {c.nu / c.lambda, c.mu / (c.p * c.lambda)};
        }
        case Variant::Bio: {
            const auto& c = sys.bio();
            return {c.gamma / c.delta, c.alpha / c.beta};
        }
    }
    fail("unreachable");
}

Vec2 vector_field(const SystemSpec& sys, Vec2 x) {
    return std::visit([&](const auto& p) { return rhs(p, x); }, sys.params);
}

bool inside_domain(const SystemSpec& sys, Vec2 x, double margin) {
    return x.x > margin && x.x < sys.domain.x - margin &&
           x.y > margin && x.y < sys.domain.y - margin;
}

namespace {

void check_interior(const SystemSpec& sys, Vec2 x) {
    if (!inside_domain(sys, x, kBoundaryGuard)) {
        std::ostringstream os;
        os << "point (" << x.x << ", " << x.y
           << ") is on or outside the open domain (0," << sys.domain.x
           << ")x(0," << sys.domain.y << ")";
        throw DomainError(os.str());
    }
}

}  // namespace

double hamiltonian(const SystemSpec& sys, Vec2 x) {
    check_interior(sys, x);
    switch (sys.variant()) {
        case Variant::NegMed: {
            const auto& c = sys.neg();
            return -c.theta * std::log(x.x) + (c.theta - c.kappa) * std::log(1.0 - x.x)
                   - c.zeta * std::log(x.y) + (c.zeta - c.eta) * std::log(1.0 - x.y);
        }
        case Variant::PosMed: {
            const auto& c = sys.pos();
            return -c.p * c.nu * std::log(x.x) + c.p * (c.nu - c.lambda) * std::log(1.0 - x.x)
                   - c.mu * std::log(x.y) + (c.mu - c.p * c.lambda) * std::log(1.0 - x.y);
        }
        case Variant::Bio: {
            const auto& c = sys.bio();
            return (-c.alpha * std::log(x.y) + (c.alpha - c.beta * c.K_y) * std::log(c.K_y - x.y)) / c.r_y
                 + (-c.gamma * std::log(x.x) + (c.gamma - c.delta * c.K_x) * std::log(c.K_x - x.x)) / c.r_x;
        }
    }
    fail("unreachable");
}

Vec2 hamiltonian_gradient(const SystemSpec& sys, Vec2 x) {
    check_interior(sys, x);
    switch (sys.variant()) {
        case Variant::NegMed: {
            const auto& c = sys.neg();
            return {-c.theta / x.x - (c.theta - c.kappa) / (1.0 - x.x),
                    -c.zeta / x.y - (c.zeta - c.eta) / (1.0 - x.y)};
        }
        case Variant::PosMed: {
            const auto& c = sys.pos();
            return {-c.p * c.nu / x.x - c.p * (c.nu - c.lambda) / (1.0 - x.x),
                    -c.mu / x.y - (c.mu - c.p * c.lambda) / (1.0 - x.y)};
        }
        case Variant::Bio: {
            const auto& c = sys.bio();
            return {(-c.gamma / x.x - (c.gamma - c.delta * c.K_x) / (c.K_x - x.x)) / c.r_x,
                    (-c.alpha / x.y - (c.alpha - c.beta * c.K_y) / (c.K_y - x.y)) / c.r_y};
        }
    }
    fail("unreachable");
}

double min_energy(const SystemSpec& sys) { return hamiltonian(sys, center(sys)); }

Rotation rotation_direction(const SystemSpec& sys) {
    switch (sys.variant()) {
        case Variant::NegMed: return Rotation::CounterClockwise;
        case Variant::PosMed: return Rotation::Clockwise;
        case Variant::Bio: return Rotation::CounterClockwise;
    }
    fail("unreachable");
}

double linearized_frequency(const SystemSpec& sys) {
    const Vec2 s = center(sys);
    switch (sys.variant()) {
        case Variant::NegMed: {
            const auto& c = sys.neg();
            return std::sqrt(c.eta * c.kappa * s.x * (1.0 - s.x) * s.y * (1.0 - s.y));
        }
        case Variant::PosMed: {
            const auto& c = sys.pos();
            const double pl = c.p * c.lambda;
            return std::sqrt(pl * pl * s.x * (1.0 - s.x) * s.y * (1.0 - s.y));
        }
        case Variant::Bio: {
            const auto& c = sys.bio();
            return std::sqrt(c.r_x * c.r_y * c.beta * c.delta *
                             s.x * (1.0 - s.x / c.K_x) * s.y * (1.0 - s.y / c.K_y));
        }
    }
    fail("unreachable");
}

}  // namespace ltm::models
