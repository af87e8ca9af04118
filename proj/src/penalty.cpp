#include "plate/penalty.hpp"

#include <cmath>

#include "plate/error.hpp"

namespace plate {

PenaltyKind::PenaltyKind(PenaltyVariant v, double e, double w) : variant(v), eps(e), omega0(w) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("penalty: eps must be positive");
    if (!(omega0 > 0.0) || !std::isfinite(omega0)) throw InvalidArgument("penalty: omega0 must be positive");
}

double penalty_value(const PenaltyKind& kind, double s) {
    const double excess = s - kind.omega0;
    if (excess >= 0.0) return excess / kind.eps;
    return kind.variant == PenaltyVariant::Plain ? 0.0 : kind.eps * excess;
}

Objective objective(const Mask& mask, const PenaltyKind& kind, const ToneOptions& tone_options,
                    ToneResult* tone_out) {
    if (mask.empty()) throw InvalidArgument("objective: empty mask");
    ToneResult tone = fundamental_tone(mask, tone_options);
    const Objective out = objective_from_tone(mask, kind, tone);
    if (tone_out) *tone_out = std::move(tone);
    return out;
}

Objective objective_from_tone(const Mask& mask, const PenaltyKind& kind, const ToneResult& tone) {
    Objective out;
    out.gamma = tone.gamma;
    out.volume = mask_volume(mask);
    out.penalty = penalty_value(kind, out.volume);
    out.J = out.gamma + out.penalty;
    return out;
}

const char* to_string(PenaltyVariant v) noexcept {
    return v == PenaltyVariant::Plain ? "plain" : "rewarding";
}

}  // namespace plate
