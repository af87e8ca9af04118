#include "plate/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "plate/bilaplacian.hpp"
#include "plate/error.hpp"
#include "plate/penalty.hpp"
#include "plate/search.hpp"
#include "plate/theory.hpp"

namespace plate {

namespace {

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c);
    return buf;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<CheckResult> scaling_suite() {
    std::vector<CheckResult> out;
    std::vector<double> errors;
    for (int N : {65, 129}) {
        const Grid g(2, N, 1.0);
        const double small = fundamental_tone(ball_mask(g, {0.0, 0.0, 0.0}, 0.5)).gamma;
        const double large = fundamental_tone(ball_mask(g, {0.0, 0.0, 0.0}, 1.0)).gamma;
        const double err = std::abs(small / large / 16.0 - 1.0);
        errors.push_back(err);
        out.push_back({"disk tone ratio r=0.5/r=1 at N=" + std::to_string(N), err <= 0.03,
                       fmt("ratio %.6f, relative error %.3e", small / large, err)});
    }
    out.push_back({"ratio error shrinks under refinement", errors[1] < errors[0],
                   fmt("%.3e -> %.3e", errors[0], errors[1])});
    return out;
}

std::vector<CheckResult> monotonicity_suite() {
    const Grid g(2, 33, 1.0);
    std::mt19937_64 rng(20240607);
    int violations = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Mask outer = initial_mask(g, InitShape::RandomBlob, uniform(rng, 0.5, 1.2), rng());
        const double drop = uniform(rng, 0.05, 0.4);
        std::vector<NodeIndex> kept;
        for (NodeIndex i : outer.members())
            if (uniform(rng, 0.0, 1.0) >= drop) kept.push_back(i);
        if (kept.empty()) kept.push_back(outer.members().front());
        const Mask inner = Mask::from_nodes(g, kept);
        const double gap = fundamental_tone(inner).gamma - fundamental_tone(outer).gamma;
        worst = std::min(worst, gap);
        if (gap < -1e-8) ++violations;
    }
    return {{"20 nested random pairs: tone(inner) >= tone(outer) - 1e-8", violations == 0,
             std::to_string(violations) + " violations, most negative gap " + fmt("%.3e", worst)}};
}

std::vector<CheckResult> penalty_suite() {
    const double omega0 = 0.75, eps = 0x1.0p-10;
    const PenaltyKind plain(PenaltyVariant::Plain, eps, omega0);
    const PenaltyKind reward(PenaltyVariant::Rewarding, eps, omega0);
    std::vector<CheckResult> out;
    out.push_back({"plain(omega0) = 0", penalty_value(plain, omega0) == 0.0, ""});
    out.push_back({"plain(omega0 + eps) = 1", penalty_value(plain, omega0 + eps) == 1.0, ""});
    out.push_back({"rewarding(omega0 - 1) = -eps", penalty_value(reward, omega0 - 1.0) == -eps, ""});

    bool ordered = true, plain_monotone = true, reward_strict = true, zero_below = true;
    double prev_plain = -1.0, prev_reward = -INFINITY;
    for (int k = 0; k < 1000; ++k) {
        const double s = 2.0 * omega0 * k / 999.0;
        const double p = penalty_value(plain, s), r = penalty_value(reward, s);
        plain_monotone = plain_monotone && p >= prev_plain;
        reward_strict = reward_strict && r > prev_reward;
        zero_below = zero_below && (s > omega0 || p == 0.0);
        ordered = ordered && r <= p && ((r == p) == (s >= omega0));
        prev_plain = p;
        prev_reward = r;
    }
    out.push_back({"plain nondecreasing on a 1000-point sweep", plain_monotone, ""});
    out.push_back({"plain vanishes up to omega0", zero_below, ""});
    out.push_back({"rewarding strictly increasing on a 1000-point sweep", reward_strict, ""});
    out.push_back({"rewarding <= plain, equal exactly above omega0", ordered, ""});
    return out;
}

std::vector<CheckResult> alpha0_suite() {
    std::mt19937_64 rng(7);
    double worst = 0.0;
    bool in_range = true;
    for (int k = 0; k < 100; ++k) {
        const double eps = std::pow(10.0, uniform(rng, -9.0, 0.0));
        const double eps1 = std::pow(10.0, uniform(rng, -6.0, 0.0));
        const double d = uniform(rng, 0.05, 0.95);
        const Alpha0 a = alpha0(eps, eps1, d);
        worst = std::max(worst, std::abs(a.residual));
        in_range = in_range && a.value > 0.0 && a.value <= d;
    }
    const double limit = alpha0(1e-9, 1.0, 0.5).value;
    return {{"defining-equation residual <= 1e-10 over 100 draws", worst <= 1e-10, fmt("max residual %.3e", worst)},
            {"alpha0 in (0, d_n]", in_range, ""},
            {"alpha0 -> d_n as eps -> 0", std::abs(limit - 0.5) <= 1e-6, fmt("alpha0(1e-9) = %.12f", limit)}};
}

std::vector<CheckResult> oracle_suite() {
    std::vector<CheckResult> out;
    for (int n = 2; n <= 8; ++n) {
        const double radial = gamma_ball_radial(n);
        const double bessel = gamma_ball_bessel(n);
        const double rel = std::abs(radial - bessel) / bessel;
        out.push_back({"radial vs Bessel tone of the unit ball, n=" + std::to_string(n), rel <= 1e-6,
                       fmt("radial %.10f, Bessel %.10f, rel %.2e", radial, bessel, rel)});
    }
    return out;
}

}  // namespace

const std::vector<std::string>& verify_cases() {
    static const std::vector<std::string> names{"scaling", "monotonicity", "penalty", "alpha0", "oracle"};
    return names;
}

std::vector<CheckResult> run_verify(const std::string& name) {
    if (name == "scaling") return scaling_suite();
    if (name == "monotonicity") return monotonicity_suite();
    if (name == "penalty") return penalty_suite();
    if (name == "alpha0") return alpha0_suite();
    if (name == "oracle") return oracle_suite();
    throw InvalidArgument("unknown verify case '" + name + "'");
}

}  // namespace plate
