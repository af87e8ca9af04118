#pragma once

// Piecewise-linear volume penalties and the penalised objective
//   J(Omega) = Gamma(Omega) + f(|Omega|).

#include "plate/bilaplacian.hpp"
#include "plate/grid.hpp"

namespace plate {

enum class PenaltyVariant {
    Plain,      // 0 below omega0, (s - omega0)/eps above
    Rewarding,  // eps (s - omega0) below omega0, (s - omega0)/eps above
};

struct PenaltyKind {
    PenaltyVariant variant = PenaltyVariant::Plain;
    double eps = 1.0;
    double omega0 = 1.0;

    PenaltyKind() = default;
    /// Throws unless eps > 0 and omega0 > 0.
    PenaltyKind(PenaltyVariant variant, double eps, double omega0);
};

double penalty_value(const PenaltyKind& kind, double s);

struct Objective {
    double J = 0.0;
    double gamma = 0.0;
    double volume = 0.0;
    double penalty = 0.0;
};

/// Evaluates J on a mask. When tone_out is given, the eigen-solution is
/// stored there. Eigensolver failures propagate.
Objective objective(const Mask& mask, const PenaltyKind& kind, const ToneOptions& tone_options = {},
                    ToneResult* tone_out = nullptr);

/// J from an already computed tone of the same mask.
Objective objective_from_tone(const Mask& mask, const PenaltyKind& kind, const ToneResult& tone);

const char* to_string(PenaltyVariant v) noexcept;

}  // namespace plate
