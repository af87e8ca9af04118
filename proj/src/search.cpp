#include "plate/search.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>
#include <string>

#include "plate/error.hpp"

namespace plate {

const char* to_string(InitShape s) noexcept {
    switch (s) {
        case InitShape::Disk: return "disk";
        case InitShape::Square: return "square";
        case InitShape::Annulus: return "annulus";
        case InitShape::TwoDisks: return "two_disks";
        case InitShape::RandomBlob: return "random_blob";
    }
    return "unknown";
}

std::optional<InitShape> parse_init_shape(const std::string& s) {
    for (auto shape : {InitShape::Disk, InitShape::Square, InitShape::Annulus, InitShape::TwoDisks,
                       InitShape::RandomBlob})
        if (s == to_string(shape)) return shape;
    return std::nullopt;
}

const char* to_string(Termination t) noexcept {
    return t == Termination::Converged ? "converged" : "max_steps";
}

double eps_threshold(const RunConfig& config, double gamma_B1) {
    if (config.penalty == PenaltyVariant::Plain)
        return eps1_effective(config.dim, config.omega0, config.radius_B, gamma_B1);
    return eps0_effective(config.dim, config.omega0, config.radius_B, gamma_B1, config.d_n);
}

void validate(const RunConfig& c) {
    auto fail = [](const std::string& field, const std::string& why) {
        throw ConfigError("invalid " + field + ": " + why, field);
    };
    if (c.dim != 2 && c.dim != 3) fail("dim", "must be 2 or 3");
    if (c.nodes_per_side < 9 || c.nodes_per_side % 2 == 0) fail("nodes_per_side", "must be odd and >= 9");
    if (!(c.radius_B > 0.0)) fail("radius_B", "must be positive");
    if (!(c.omega0 > 0.0)) fail("omega0", "must be positive");
    if (c.omega0 >= unit_ball_volume(c.dim) * std::pow(c.radius_B, c.dim))
        fail("omega0", "must be smaller than the volume of B");
    if (c.eps && !(*c.eps > 0.0)) fail("eps", "must be positive");
    if (c.quantiles.empty()) fail("quantiles", "must not be empty");
    for (std::size_t i = 0; i < c.quantiles.size(); ++i) {
        if (!(c.quantiles[i] > 0.0 && c.quantiles[i] < 1.0)) fail("quantiles", "entries must lie in (0, 1)");
        if (i > 0 && !(c.quantiles[i] > c.quantiles[i - 1])) fail("quantiles", "must be strictly increasing");
    }
    if (!(c.delta_rel >= 0.0 && c.delta_rel < 1.0)) fail("delta_rel", "must lie in [0, 1)");
    if (c.max_steps < 0) fail("max_steps", "must be nonnegative");
    if (!(c.tone_tol > 0.0)) fail("tone_tol", "must be positive");
    if (!(c.d_n > 0.0 && c.d_n < 1.0)) fail("d_n", "must lie in (0, 1)");
    if (c.snapshot_every < 0) fail("snapshot_every", "must be nonnegative");
    if (c.threads < 1) fail("threads", "must be >= 1");
}

double resolve_eps(const RunConfig& config, double gamma_B1) {
    const double threshold = eps_threshold(config, gamma_B1);
    if (!config.eps) return threshold;
    if (*config.eps > threshold && !config.eps_override)
        throw ConfigError("eps = " + std::to_string(*config.eps) + " exceeds the admissible threshold " +
                              std::to_string(threshold) + " (" +
                              (config.penalty == PenaltyVariant::Plain ? "eps1_effective" : "eps0") +
                              "); set eps_override = true to run anyway",
                          "eps");
    return *config.eps;
}

// ---------------------------------------------------------------------------

namespace {

double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double radius_for_volume(double omega, int n) { return equivalent_radius(omega, n); }

ToneOptions tone_options(const RunConfig& config) {
    ToneOptions t;
    t.tol = config.tone_tol;
    t.solver = config.solver;
    t.closure = config.closure;
    t.seed = config.seed;
    return t;
}

void require_inside(const Grid& g, double extent, const char* shape) {
    if (!(extent < g.radius() - g.spacing()))
        throw InvalidArgument(std::string("initial mask: ") + shape + " of the requested volume does not fit in B");
}

}  // namespace

Mask initial_mask(const Grid& g, InitShape shape, double omega0, std::uint64_t seed) {
    const int n = g.dim();
    if (!(omega0 > 0.0)) throw InvalidArgument("initial mask: omega0 must be positive");
    if (omega0 >= unit_ball_volume(n) * std::pow(g.radius(), n))
        throw InvalidArgument("initial mask: omega0 exceeds the volume of B");
    const Point origin{0.0, 0.0, 0.0};

    switch (shape) {
        case InitShape::Disk: {
            const double r = radius_for_volume(omega0, n);
            require_inside(g, r, "disk");
            return ball_mask(g, origin, r);
        }
        case InitShape::Square: {
            const double half = 0.5 * std::pow(omega0, 1.0 / n);
            require_inside(g, half * std::sqrt(static_cast<double>(n)), "square");
            return Mask::from_predicate(g, [&](NodeIndex i) {
                const Point p = g.position(i);
                for (int k = 0; k < n; ++k)
                    if (!(std::abs(p[k]) < half)) return false;
                return true;
            });
        }
        case InitShape::Annulus: {
            const double outer = radius_for_volume(omega0 / (1.0 - std::pow(0.5, n)), n);
            const double inner = 0.5 * outer;
            require_inside(g, outer, "annulus");
            return Mask::from_predicate(g, [&](NodeIndex i) {
                const double r = distance(g.position(i), origin);
                return r < outer && r >= inner;
            });
        }
        case InitShape::TwoDisks: {
            const double r = radius_for_volume(0.5 * omega0, n);
            const double offset = r + 3.0 * g.spacing();
            require_inside(g, offset + r, "two_disks");
            const Mask left = ball_mask(g, {-offset, 0.0, 0.0}, r);
            const Mask right = ball_mask(g, {offset, 0.0, 0.0}, r);
            return mask_union(left, right);
        }
        case InitShape::RandomBlob: {
            // A core ball plus seeded lobes that overlap it, grown until the volume reaches omega0.
            const double r_eq = radius_for_volume(omega0, n);
            require_inside(g, 1.2 * r_eq, "random_blob");
            std::mt19937_64 rng(seed);
            Mask blob = ball_mask(g, origin, 0.6 * r_eq);
            for (int lobe = 0; lobe < 256 && mask_volume(blob) < omega0 - g.cell_volume(); ++lobe) {
                Point dir{0.0, 0.0, 0.0};
                double norm = 0.0;
                do {
                    for (int k = 0; k < n; ++k) dir[k] = 2.0 * unit_draw(rng) - 1.0;
                    norm = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
                } while (norm < 1e-3 || norm > 1.0);
                const double remaining = omega0 - mask_volume(blob);
                const double rho = std::max(
                    std::min((0.3 + 0.2 * unit_draw(rng)) * r_eq, radius_for_volume(remaining, n)), g.spacing());
                const double dist = std::min((0.3 + 0.4 * unit_draw(rng)) * r_eq, 0.6 * r_eq + rho - 2.0 * g.spacing());
                Point centre{0.0, 0.0, 0.0};
                for (int k = 0; k < n; ++k) centre[k] = dir[k] / norm * dist;
                blob = mask_union(blob, ball_mask(g, centre, rho));
            }
            return blob;
        }
    }
    throw InvalidArgument("initial mask: unknown shape");
}

namespace {

// Members with |u| above the k-th smallest nonzero |u|; ties at that level go too.
Mask drop_lowest(const ScalarField& field, std::size_t k) {
    const Mask& mask = field.mask();
    std::vector<double> levels;
    levels.reserve(mask.size());
    for (NodeIndex i : mask.members())
        if (field[i] != 0.0) levels.push_back(std::abs(field[i]));
    double threshold = 0.0;
    if (k > 0 && !levels.empty()) {
        k = std::min(k, levels.size());
        std::nth_element(levels.begin(), levels.begin() + static_cast<std::ptrdiff_t>(k - 1), levels.end());
        threshold = levels[k - 1];
    }
    std::vector<NodeIndex> keep;
    for (NodeIndex i : mask.members())
        if (std::abs(field[i]) > threshold) keep.push_back(i);
    return Mask::from_nodes(mask.grid(), keep);
}

std::size_t nonzero_count(const ScalarField& field) {
    std::size_t n = 0;
    for (NodeIndex i : field.mask().members()) n += field[i] != 0.0 ? 1 : 0;
    return n;
}

}  // namespace

Mask superlevel_set(const ScalarField& field, double q) {
    const double clamped = std::clamp(q, 0.0, 1.0);
    return drop_lowest(field,
                       static_cast<std::size_t>(std::floor(clamped * static_cast<double>(nonzero_count(field)))));
}

std::vector<Mask> candidate_masks(const SearchState& state, const RunConfig& config) {
    std::vector<Mask> levels;
    for (double q : config.quantiles) levels.push_back(superlevel_set(state.tone.eigenfield, q * state.aggressiveness));

    std::vector<Mask> out;
    out.reserve(2 * levels.size() + 2);
    for (const auto& m : levels) out.push_back(m);
    out.push_back(dilate(state.mask));
    out.push_back(erode(state.mask));
    for (const auto& m : levels) out.push_back(dilate(m));
    if (auto m = rebalanced_dilation(state.mask, tone_options(config))) out.push_back(std::move(*m));
    std::erase_if(out, [](const Mask& m) { return m.empty(); });
    return out;
}

std::optional<Mask> rebalanced_dilation(const Mask& mask, const ToneOptions& tone) {
    const Mask grown = dilate(mask);
    if (grown == mask) return std::nullopt;
    try {
        const ToneResult t = fundamental_tone(grown, tone);
        const std::size_t nonzero = nonzero_count(t.eigenfield);
        if (nonzero <= mask.size()) return std::nullopt;
        return drop_lowest(t.eigenfield, nonzero - mask.size());
    } catch (const Error&) {
        return std::nullopt;
    }
}

SearchContext make_context(const RunConfig& config, double eps) {
    return {PenaltyKind(config.penalty, eps, config.omega0), tone_options(config)};
}

SearchState initial_state(Mask mask, const SearchContext& ctx) {
    ToneResult tone = fundamental_tone(mask, ctx.tone);
    const double volume = mask_volume(mask);
    const double pen = penalty_value(ctx.penalty, volume);
    SearchState s{std::move(mask), std::move(tone), 0.0, 0.0, 0.0, 0, 1.0, false, {}, {}};
    s.volume = volume;
    s.penalty = pen;
    s.J = s.tone.gamma + pen;
    s.history.push_back({0, s.tone.gamma, volume, pen, s.J, true});
    return s;
}

namespace {

struct Evaluation {
    bool ok = false;
    bool skipped = false;  // identical to the current mask
    Objective value;
    std::optional<ToneResult> tone;
    std::string error;
};

Evaluation evaluate(const Mask& candidate, const Mask& current, const SearchContext& ctx) {
    Evaluation e;
    if (candidate == current) {
        e.skipped = true;
        return e;
    }
    try {
        ToneResult tone = fundamental_tone(candidate, ctx.tone);
        e.value = objective_from_tone(candidate, ctx.penalty, tone);
        e.tone = std::move(tone);
        e.ok = true;
    } catch (const Error& err) {
        e.error = err.what();
    }
    return e;
}

}  // namespace

SearchState descent_step(SearchState state, const std::vector<Mask>& candidates, const SearchContext& ctx,
                         const RunConfig& config) {
    if (state.finished) return state;
    const int step = state.step + 1;

    std::vector<Evaluation> evals(candidates.size());
    const auto workers = static_cast<std::size_t>(std::max(1, config.threads));
    if (workers == 1 || candidates.size() < 2) {
        for (std::size_t i = 0; i < candidates.size(); ++i) evals[i] = evaluate(candidates[i], state.mask, ctx);
    } else {
        std::vector<std::future<void>> jobs;
        for (std::size_t w = 0; w < workers; ++w)
            jobs.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t i = w; i < candidates.size(); i += workers)
                    evals[i] = evaluate(candidates[i], state.mask, ctx);
            }));
        for (auto& j : jobs) j.get();
    }

    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < evals.size(); ++i) {
        if (!evals[i].ok) {
            if (!evals[i].skipped)
                state.failures.push_back("step " + std::to_string(step) + " candidate " + std::to_string(i) + ": " +
                                         evals[i].error);
            continue;
        }
        if (!best || evals[i].value.J < evals[*best].value.J) best = i;
    }

    const double bar = state.J - config.delta_rel * std::abs(state.J);
    const bool accept = best && evals[*best].value.J <= bar;
    for (std::size_t i = 0; i < evals.size(); ++i) {
        if (!evals[i].ok) continue;
        const auto& v = evals[i].value;
        state.history.push_back({step, v.gamma, v.volume, v.penalty, v.J, accept && i == *best});
    }

    state.step = step;
    if (accept) {
        auto& e = evals[*best];
        state.mask = candidates[*best];
        state.tone = std::move(*e.tone);
        state.J = e.value.J;
        state.volume = e.value.volume;
        state.penalty = e.value.penalty;
    } else {
        state.aggressiveness *= 0.5;
    }
    if (state.aggressiveness < 1e-3 || state.step >= config.max_steps) state.finished = true;
    return state;
}

SearchState descent_step(SearchState state, const SearchContext& ctx, const RunConfig& config) {
    const auto candidates = candidate_masks(state, config);
    return descent_step(std::move(state), candidates, ctx, config);
}

RunResult optimize(const RunConfig& config, const AcceptCallback& on_accept) {
    validate(config);
    const Grid grid(config.dim, config.nodes_per_side, config.radius_B);
    const double gamma_B1 = gamma_unit_ball(config.dim);
    const double eps = resolve_eps(config, gamma_B1);
    const SearchContext ctx = make_context(config, eps);

    Mask start = initial_mask(grid, config.init_shape, config.omega0, config.seed);
    SearchState state = initial_state(start, ctx);
    if (config.max_steps == 0) state.finished = true;
    int accepted = 0;
    while (!state.finished) {
        const double before = state.J;
        state = descent_step(std::move(state), ctx, config);
        if (state.J < before) {
            ++accepted;
            if (on_accept) on_accept(state, accepted);
        }
    }

    RunResult result{config, eps, compute_constants(config.dim, config.omega0, eps, config.d_n, config.radius_B),
                     std::move(start), std::move(state), Termination::Converged, {}};
    result.termination = result.final_state.aggressiveness < 1e-3 ? Termination::Converged : Termination::MaxSteps;
    result.diagnostics = diagnose(result.final_state.mask, result.final_state.tone.eigenfield, config.omega0);
    return result;
}

}  // namespace plate
