#include <cmath>
#include <numbers>

#include "doctest.h"
#include "plate/error.hpp"
#include "plate/penalty.hpp"

using namespace plate;

TEST_CASE("penalty values at the reference points") {
    const double omega0 = 0.75, eps = 0x1.0p-10;
    const PenaltyKind plain(PenaltyVariant::Plain, eps, omega0);
    const PenaltyKind reward(PenaltyVariant::Rewarding, eps, omega0);
    CHECK(penalty_value(plain, omega0) == 0.0);
    CHECK(penalty_value(plain, omega0 + eps) == 1.0);
    CHECK(penalty_value(reward, omega0 - 1.0) == -eps);
    CHECK(penalty_value(reward, omega0) == 0.0);

    const PenaltyKind quarter(PenaltyVariant::Plain, 1e-4, std::numbers::pi / 4);
    CHECK(penalty_value(quarter, std::numbers::pi / 4 + 1e-4) == doctest::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("penalty kinds validate their parameters") {
    CHECK_THROWS_AS(PenaltyKind(PenaltyVariant::Plain, 0.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(PenaltyKind(PenaltyVariant::Rewarding, 1e-3, -1.0), InvalidArgument);
    CHECK_THROWS_AS(PenaltyKind(PenaltyVariant::Plain, NAN, 1.0), InvalidArgument);
}

TEST_CASE("penalty sweep: monotonicity, slopes and ordering") {
    for (double eps : {1e-4, 0.3, 2.0}) {
        const double omega0 = 1.3;
        const PenaltyKind plain(PenaltyVariant::Plain, eps, omega0);
        const PenaltyKind reward(PenaltyVariant::Rewarding, eps, omega0);
        double prev_p = -INFINITY, prev_r = -INFINITY;
        for (int k = 0; k < 1000; ++k) {
            const double s = 3.0 * omega0 * k / 999.0;
            const double p = penalty_value(plain, s), r = penalty_value(reward, s);
            CHECK(p >= prev_p);
            CHECK(r > prev_r);
            if (s <= omega0) {
                CHECK(p == 0.0);
                CHECK(r == doctest::Approx(eps * (s - omega0)));
            } else {
                CHECK(p == doctest::Approx((s - omega0) / eps));
            }
            CHECK(r <= p);
            CHECK((r == p) == (s >= omega0));
            prev_p = p;
            prev_r = r;
        }
        // continuity at omega0
        CHECK(std::abs(penalty_value(plain, omega0 * (1 + 1e-12))) < 1e-9 / eps);
        CHECK(std::abs(penalty_value(reward, omega0 * (1 - 1e-12))) < 1e-9);
    }
}

TEST_CASE("objective on disks") {
    const Grid g(2, 65, 1.5);
    const Mask disk = ball_mask(g, {0.0, 0.0, 0.0}, 0.5);
    const double vol = mask_volume(disk);
    const double eps = 1e-3;

    const Objective plain = objective(disk, PenaltyKind(PenaltyVariant::Plain, eps, vol));
    CHECK(plain.J == plain.gamma);
    CHECK(plain.penalty == 0.0);
    CHECK(plain.volume == vol);

    const Objective reward = objective(disk, PenaltyKind(PenaltyVariant::Rewarding, eps, vol));
    CHECK(reward.J == reward.gamma);

    const Objective half = objective(disk, PenaltyKind(PenaltyVariant::Rewarding, eps, 2.0 * vol));
    CHECK(half.J == doctest::Approx(half.gamma - eps * vol).epsilon(1e-14));

    ToneResult tone = fundamental_tone(Mask::from_nodes(g, std::vector<NodeIndex>{g.index({32, 32, 0})}));
    (void)tone;
    const Objective over = objective(disk, PenaltyKind(PenaltyVariant::Plain, eps, 0.5 * vol), {}, &tone);
    CHECK(over.J - over.gamma == penalty_value(PenaltyKind(PenaltyVariant::Plain, eps, 0.5 * vol), over.volume));
    CHECK(tone.gamma == over.gamma);
    CHECK(tone.eigenfield.mask() == disk);

    CHECK_THROWS_AS(objective(Mask(g), PenaltyKind(PenaltyVariant::Plain, eps, vol)), InvalidArgument);
}
