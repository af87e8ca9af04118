#include <cmath>
#include <numbers>

#include "doctest.h"
#include "plate/error.hpp"
#include "plate/search.hpp"

using namespace plate;

namespace {

const Point origin{0.0, 0.0, 0.0};

RunConfig small_config() {
    RunConfig c;
    c.nodes_per_side = 49;
    c.radius_B = 1.5;
    c.omega0 = std::numbers::pi / 4;
    return c;
}

SearchContext context(const RunConfig& c) {
    return make_context(c, resolve_eps(c, gamma_unit_ball(c.dim)));
}

}  // namespace

TEST_CASE("init shape names round-trip") {
    for (auto s : {InitShape::Disk, InitShape::Square, InitShape::Annulus, InitShape::TwoDisks, InitShape::RandomBlob})
        CHECK(parse_init_shape(to_string(s)) == s);
    CHECK_FALSE(parse_init_shape("hexagon").has_value());
}

TEST_CASE("initial masks") {
    const Grid g(2, 129, 1.5);
    const double omega0 = std::numbers::pi / 4;
    const double layer = 5.0 * g.spacing() * equivalent_radius(omega0, 2);

    const Mask disk = initial_mask(g, InitShape::Disk, omega0);
    CHECK(disk == ball_mask(g, origin, 0.5));

    for (auto s : {InitShape::Disk, InitShape::Square, InitShape::Annulus, InitShape::TwoDisks, InitShape::RandomBlob}) {
        const Mask m = initial_mask(g, s, omega0, 4);
        CAPTURE(to_string(s));
        CHECK(std::abs(mask_volume(m) - omega0) <= layer);
        const Point c = mask_centroid(m);
        if (s != InitShape::RandomBlob) CHECK(std::hypot(c[0], c[1]) <= 1e-9);
    }

    const Mask two = initial_mask(g, InitShape::TwoDisks, omega0);
    const Components comps = connected_components(two);
    CHECK(comps.count == 2);
    std::size_t first = 0;
    for (NodeIndex i : two.members()) first += comps.labels[i] == 0;
    CHECK(first * 2 == two.size());

    CHECK(connected_components(initial_mask(g, InitShape::Annulus, omega0)).count == 1);
    CHECK(connected_components(initial_mask(g, InitShape::RandomBlob, omega0, 17)).count == 1);
    CHECK(initial_mask(g, InitShape::RandomBlob, omega0, 3) == initial_mask(g, InitShape::RandomBlob, omega0, 3));
    CHECK_FALSE(initial_mask(g, InitShape::RandomBlob, omega0, 3) == initial_mask(g, InitShape::RandomBlob, omega0, 4));

    CHECK_THROWS_AS(initial_mask(g, InitShape::Disk, 10.0), InvalidArgument);
    CHECK_THROWS_AS(initial_mask(g, InitShape::TwoDisks, 4.0), InvalidArgument);
}

TEST_CASE("superlevel sets") {
    const Grid g(2, 33, 1.0);
    const Mask disk = ball_mask(g, origin, 0.8);
    const ToneResult t = fundamental_tone(disk);
    CHECK(superlevel_set(t.eigenfield, 0.0) == disk);
    const Mask cut = superlevel_set(t.eigenfield, 0.2);
    CHECK(is_subset(cut, disk));
    CHECK(cut.size() <= disk.size() - static_cast<std::size_t>(0.2 * disk.size()));
    CHECK(cut.size() >= disk.size() - static_cast<std::size_t>(0.2 * disk.size()) - 8);  // ties on symmetric orbits

    // nodes with u = 0 never survive
    std::vector<double> v(g.node_count(), 0.0);
    for (NodeIndex i : disk.members()) v[i] = g.position(i)[0] > 0.0 ? 1.0 : 0.0;
    const Mask right = superlevel_set(ScalarField(disk, v), 0.0);
    for (NodeIndex i : right.members()) CHECK(g.position(i)[0] > 0.0);
}

TEST_CASE("candidate list") {
    RunConfig c = small_config();
    const SearchContext ctx = context(c);
    const Grid g(2, c.nodes_per_side, c.radius_B);
    SearchState s = initial_state(initial_mask(g, InitShape::Disk, c.omega0), ctx);
    const auto cands = candidate_masks(s, c);
    const std::size_t q = c.quantiles.size();
    REQUIRE(cands.size() == 2 * q + 3);
    for (std::size_t k = 0; k < q; ++k) {
        CHECK(cands[k] == superlevel_set(s.tone.eigenfield, c.quantiles[k]));
        CHECK(cands[q + 2 + k] == dilate(cands[k]));
    }
    CHECK(cands[q] == dilate(s.mask));
    CHECK(cands[q + 1] == erode(s.mask));
    // rebalanced dilation keeps the node count, less any tied level
    CHECK(cands.back().size() <= s.mask.size());
    CHECK(cands.back().size() + 8 >= s.mask.size());

    // vanishing aggressiveness: quantile candidates collapse to the current mask
    s.aggressiveness = 1e-9;
    const auto calm = candidate_masks(s, c);
    for (std::size_t k = 0; k < q; ++k) CHECK(calm[k] == s.mask);
}

TEST_CASE("descent step acceptance and rejection") {
    RunConfig c = small_config();
    const SearchContext ctx = context(c);
    const Grid g(2, c.nodes_per_side, c.radius_B);
    const SearchState s0 = initial_state(initial_mask(g, InitShape::Disk, c.omega0), ctx);
    REQUIRE(s0.history.size() == 1);
    CHECK(s0.history[0].accepted);
    CHECK(s0.J == s0.tone.gamma + s0.penalty);

    SUBCASE("no improving candidate halves the aggressiveness") {
        const std::vector<Mask> worse{erode(s0.mask)};
        const SearchState s1 = descent_step(s0, worse, ctx, c);
        CHECK(s1.mask == s0.mask);
        CHECK(s1.J == s0.J);
        CHECK(s1.aggressiveness == 0.5);
        CHECK(s1.step == 1);
        CHECK(s1.history.size() == 2);
        CHECK_FALSE(s1.history.back().accepted);
    }
    SUBCASE("single improving candidate is accepted") {
        const Mask bigger = dilate(s0.mask);
        RunConfig loose = c;
        loose.eps = 1e3;
        loose.eps_override = true;
        const SearchContext lctx = make_context(loose, 1e3);
        const SearchState l0 = initial_state(s0.mask, lctx);
        const SearchState l1 = descent_step(l0, std::vector<Mask>{bigger}, lctx, loose);
        CHECK(l1.mask == bigger);
        CHECK(l1.J < l0.J * (1 - loose.delta_rel));
        CHECK(l1.aggressiveness == 1.0);
        CHECK(l1.history.back().accepted);
    }
    SUBCASE("ties go to the lower index") {
        RunConfig loose = c;
        const SearchContext lctx = make_context(loose, 1e3);
        const SearchState l0 = initial_state(s0.mask, lctx);
        const Mask a = dilate(s0.mask);
        const SearchState l1 = descent_step(l0, std::vector<Mask>{a, a}, lctx, loose);
        REQUIRE(l1.history.size() == 3);
        CHECK(l1.history[1].accepted);
        CHECK_FALSE(l1.history[2].accepted);
    }
    SUBCASE("candidates equal to the current mask are not evaluated") {
        const SearchState s1 = descent_step(s0, std::vector<Mask>{s0.mask}, ctx, c);
        CHECK(s1.history.size() == 1);
        CHECK(s1.failures.empty());
    }
    SUBCASE("eigensolver failures are logged, not fatal") {
        SearchContext strict = ctx;
        strict.tone.max_iter = 1;
        const SearchState s1 = descent_step(s0, std::vector<Mask>{dilate(s0.mask)}, strict, c);
        CHECK(s1.failures.size() == 1);
        CHECK(s1.mask == s0.mask);
    }
    SUBCASE("termination when aggressiveness is exhausted or steps run out") {
        SearchState s = s0;
        s.aggressiveness = 1.5e-3;
        s = descent_step(s, std::vector<Mask>{erode(s0.mask)}, ctx, c);
        CHECK(s.finished);
        RunConfig one = c;
        one.max_steps = 1;
        CHECK(descent_step(s0, std::vector<Mask>{erode(s0.mask)}, ctx, one).finished);
    }
}

TEST_CASE("config validation and eps thresholds") {
    RunConfig c = small_config();
    CHECK_NOTHROW(validate(c));
    const double G = gamma_unit_ball(2);
    CHECK(resolve_eps(c, G) == eps1_effective(2, c.omega0, c.radius_B, G));
    c.penalty = PenaltyVariant::Rewarding;
    CHECK(resolve_eps(c, G) == eps0_effective(2, c.omega0, c.radius_B, G, c.d_n));

    c.eps = 1.0;
    CHECK_THROWS_AS(resolve_eps(c, G), ConfigError);
    c.eps_override = true;
    CHECK(resolve_eps(c, G) == 1.0);

    auto field_of = [](RunConfig bad) {
        try {
            validate(bad);
        } catch (const ConfigError& e) {
            return e.field();
        }
        return std::string();
    };
    RunConfig bad = small_config();
    bad.omega0 = -1.0;
    CHECK(field_of(bad) == "omega0");
    bad = small_config();
    bad.nodes_per_side = 64;
    CHECK(field_of(bad) == "nodes_per_side");
    bad = small_config();
    bad.quantiles = {0.2, 0.1};
    CHECK(field_of(bad) == "quantiles");
    bad = small_config();
    bad.omega0 = 100.0;
    CHECK(field_of(bad) == "omega0");
}

TEST_CASE("optimize: disk start is nearly stationary") {
    RunConfig c = small_config();
    c.nodes_per_side = 65;
    const RunResult r = optimize(c);
    const double start = r.final_state.history.front().gamma;
    CHECK(std::abs(r.final_state.tone.gamma / start - 1.0) <= 0.01);
    CHECK(std::abs(r.final_state.volume / c.omega0 - 1.0) <= 0.02);
}

TEST_CASE("optimize: trace invariants and determinism") {
    RunConfig c = small_config();
    c.init_shape = InitShape::Square;
    int callbacks = 0;
    const RunResult a = optimize(c, [&](const SearchState&, int k) { CHECK(k == ++callbacks); });
    const RunResult b = optimize(c);

    const auto& h = a.final_state.history;
    double last = INFINITY;
    int accepted = 0;
    for (const auto& row : h) {
        CHECK(row.J == row.gamma + row.penalty);
        if (!row.accepted) continue;
        CHECK(row.J < last);
        if (std::isfinite(last)) CHECK(row.J <= last - c.delta_rel * std::abs(last));
        last = row.J;
        ++accepted;
    }
    CHECK(accepted == callbacks + 1);
    CHECK(a.final_state.J == last);

    REQUIRE(b.final_state.history.size() == h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        CHECK(b.final_state.history[i].J == h[i].J);
        CHECK(b.final_state.history[i].accepted == h[i].accepted);
    }
    CHECK(a.final_state.mask == b.final_state.mask);

    // the plain-penalty volume bound
    const double r_eq = equivalent_radius(c.omega0, 2);
    const double h_grid = 2.0 * c.radius_B / (c.nodes_per_side - 1);
    CHECK(a.final_state.volume <= c.omega0 * (1.0 + 5.0 * h_grid / r_eq));
}

TEST_CASE("optimize: thread count does not change the trace") {
    RunConfig c = small_config();
    c.init_shape = InitShape::RandomBlob;
    c.max_steps = 6;
    const RunResult one = optimize(c);
    c.threads = 3;
    const RunResult three = optimize(c);
    REQUIRE(one.final_state.history.size() == three.final_state.history.size());
    for (std::size_t i = 0; i < one.final_state.history.size(); ++i)
        CHECK(one.final_state.history[i].J == three.final_state.history[i].J);
}

TEST_CASE("optimize: max_steps bound and termination tag") {
    RunConfig c = small_config();
    c.init_shape = InitShape::Square;
    c.max_steps = 2;
    const RunResult r = optimize(c);
    CHECK(r.final_state.step <= 2);
    CHECK(r.termination == Termination::MaxSteps);

    c.max_steps = 0;
    CHECK(optimize(c).final_state.history.size() == 1);
}

TEST_CASE("optimize: a final 2D domain respects the Ashbaugh-Laugesen bound") {
    RunConfig c = small_config();
    c.init_shape = InitShape::Annulus;
    const RunResult r = optimize(c);
    const double bound = c.d_n * ball_tone_for_volume(r.final_state.volume, 2, gamma_unit_ball(2));
    CHECK(r.final_state.tone.gamma > bound);
}
