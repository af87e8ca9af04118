#pragma once

// Descent over discrete domains for the penalised objective
//   J(Omega) = Gamma(Omega) + f(|Omega|).
// Each step proposes superlevel sets of the current eigenfunction and
// one-ring morphology moves, evaluates J on every proposal, and accepts the
// best one if it lowers J by a relative margin.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "plate/bilaplacian.hpp"
#include "plate/diagnostics.hpp"
#include "plate/grid.hpp"
#include "plate/penalty.hpp"
#include "plate/theory.hpp"

namespace plate {

enum class InitShape { Disk, Square, Annulus, TwoDisks, RandomBlob };

const char* to_string(InitShape s) noexcept;
std::optional<InitShape> parse_init_shape(const std::string& s);

struct RunConfig {
    int dim = 2;
    int nodes_per_side = 65;
    double radius_B = 1.5;
    double omega0 = 0.78539816339744828;  // pi/4
    std::optional<double> eps;             // unset: the admissible threshold
    PenaltyVariant penalty = PenaltyVariant::Plain;
    InitShape init_shape = InitShape::Disk;
    std::vector<double> quantiles{0.01, 0.02, 0.05, 0.1, 0.2};
    double delta_rel = 1e-6;
    int max_steps = 200;
    double tone_tol = 1e-10;
    std::uint64_t seed = 1;
    double d_n = 0.5;
    bool eps_override = false;  // allow eps above the threshold
    int snapshot_every = 0;     // write a mask snapshot every k accepted steps; 0 = never
    InnerSolver solver = InnerSolver::Cholesky;
    BoundaryClosure closure = BoundaryClosure::MirrorGhost;
    int threads = 1;
};

/// Threshold on eps under which the volume theorems apply:
/// plain -> eps1_effective, rewarding -> eps0_effective.
double eps_threshold(const RunConfig& config, double gamma_B1);

/// Throws InvalidArgument naming the offending field.
void validate(const RunConfig& config);

/// eps actually used: config.eps or the threshold.
double resolve_eps(const RunConfig& config, double gamma_B1);

struct TraceRow {
    int step = 0;
    double gamma = 0.0;
    double volume = 0.0;
    double penalty = 0.0;
    double J = 0.0;
    bool accepted = false;
};

struct SearchState {
    Mask mask;
    ToneResult tone;
    double J = 0.0;
    double volume = 0.0;
    double penalty = 0.0;
    int step = 0;
    double aggressiveness = 1.0;
    bool finished = false;
    std::vector<TraceRow> history;
    std::vector<std::string> failures;  // candidates skipped after eigensolver failure
};

/// Centred mask of the requested topology with volume close to omega0.
/// Throws if omega0 does not fit in B or the shape would be clipped.
Mask initial_mask(const Grid& grid, InitShape shape, double omega0, std::uint64_t seed = 1);

/// Members whose |u| exceeds the level below which a fraction q of the
/// members lie (ties removed together). Nodes where u = 0 are always dropped.
Mask superlevel_set(const ScalarField& field, double q);

/// Superlevel set, with the member count of mask, of the eigenfield on
/// dilate(mask). Moves boundary nodes from where the grown eigenfunction is
/// weak to where it is strong at (nearly) fixed volume. nullopt when the
/// dilation adds nothing or its eigensolve fails.
std::optional<Mask> rebalanced_dilation(const Mask& mask, const ToneOptions& tone);

/// Deterministic proposals, in this order: superlevel sets for each
/// quantile q * aggressiveness; dilate(mask); erode(mask); dilate of each
/// superlevel set; rebalanced_dilation(mask). Empty proposals are dropped.
std::vector<Mask> candidate_masks(const SearchState& state, const RunConfig& config);

struct SearchContext {
    PenaltyKind penalty;
    ToneOptions tone;
};

SearchContext make_context(const RunConfig& config, double eps);

/// Evaluates the starting state (step 0, one accepted trace row).
SearchState initial_state(Mask mask, const SearchContext& ctx);

/// One descent step over an explicit proposal list. Picks the lowest J
/// (lowest index on ties) and accepts it if J_new <= J_old - delta_rel |J_old|;
/// otherwise halves the aggressiveness. Sets finished when the
/// aggressiveness falls below 1e-3 or max_steps is reached.
SearchState descent_step(SearchState state, const std::vector<Mask>& candidates, const SearchContext& ctx,
                         const RunConfig& config);

/// descent_step over candidate_masks(state, config).
SearchState descent_step(SearchState state, const SearchContext& ctx, const RunConfig& config);

enum class Termination { Converged, MaxSteps };

const char* to_string(Termination t) noexcept;

struct RunResult {
    RunConfig config;
    double eps = 0.0;
    TheoryConstants constants;
    Mask initial;
    SearchState final_state;
    Termination termination = Termination::Converged;
    DiagnosticsReport diagnostics;
};

/// Called after each accepted step with the state and the accepted count.
using AcceptCallback = std::function<void(const SearchState&, int accepted_count)>;

RunResult optimize(const RunConfig& config, const AcceptCallback& on_accept = {});

}  // namespace plate
