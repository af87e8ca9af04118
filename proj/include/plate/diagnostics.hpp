#pragma once

// Measurements of free-boundary structure on a computed (mask, eigenfield)
// pair: connectedness, the doubling ratio of |B_2R(x0) ∩ Omega| over
// |B_R(x0) ∩ Omega|, gradient nondegeneracy, density quotients, the split
// of the boundary into gradient-free and nodal parts, and the volume
// dichotomy for the rewarding penalty.

#include <string>
#include <utility>
#include <vector>

#include "plate/bilaplacian.hpp"
#include "plate/grid.hpp"

namespace plate {

struct ConnectivityCheck {
    bool connected = false;  // exactly one component
    int component_count = 0;
};

ConnectivityCheck check_connected(const Mask& mask);

/// Dyadic radii R0, R0/2, ... down to (and including) the last one >= 4h.
std::vector<double> dyadic_radii(double R0, double h);

/// min(0.25 (omega0/omega_n)^{1/n}, 32h), raised to at least 4h.
double default_probe_cap(const Grid& grid, double omega0);

/// Member count in B_R(x0) (open ball).
std::size_t count_in_ball(const Mask& mask, NodeIndex x0, double R);

/// |B_2R(x0) ∩ Omega| / |B_R(x0) ∩ Omega|; +inf when the denominator is empty.
double doubling_ratio(const Mask& mask, NodeIndex x0, double R);

struct DoublingEstimate {
    double sigma = 0.0;        // max ratio over probes; +inf if any probe degenerates
    int degenerate_probes = 0; // probes with an empty B_R(x0) ∩ Omega
};

/// Max of doubling_ratio over all boundary nodes and dyadic R in [4h, R0].
/// Throws if R0 < 4h or the mask has no boundary.
DoublingEstimate estimate_doubling_sigma(const Mask& mask, double R0);

/// Min over boundary nodes and dyadic R in [4h, R0] of
/// (max |grad u| over members in B_R(x0)) / R.
double estimate_nondegeneracy_c1(const Mask& mask, const ScalarField& field, double R0);

/// Members of B_R(x0) over lattice nodes of B_R(x0), in (0, 1].
/// x0 must be a boundary node and R >= 2h.
double density_quotient(const Mask& mask, NodeIndex x0, double R);

/// For each R, the minimum density quotient over boundary nodes.
std::vector<std::pair<double, double>> density_profile(const Mask& mask, const std::vector<double>& radii);

struct BoundarySplit {
    std::vector<NodeIndex> sigma0;  // |grad u| <= tol_grad
    std::vector<NodeIndex> sigma1;  // |grad u| >  tol_grad
};

BoundarySplit classify_boundary(const Mask& mask, const ScalarField& field, double tol_grad);

/// 10 h max|grad u|.
double default_grad_tolerance(const ScalarField& field);

enum class Dichotomy { VolumeMet, ScaledFits_Contradiction, ScaledDoesNotFit };

const char* to_string(Dichotomy d) noexcept;

/// 5 h (omega0/omega_n)^{(n-1)/n}: one boundary layer of the equal-volume ball.
double boundary_layer_volume(const Grid& grid, double omega0);

/// VolumeMet if |volume - omega0| <= vol_tol. Otherwise the node set is
/// scaled about its centroid by t = (omega0/volume)^{1/n} and recentred at
/// the origin; if its circumradius is < R_B the scaled set fits
/// (ScaledFits_Contradiction). When the circumradius exceeds R_B by at most
/// 2h, translations on the h-lattice are also tried. Throws on an empty mask.
/// vol_tol < 0 selects boundary_layer_volume.
Dichotomy dichotomy_check(const Mask& mask, double omega0, double vol_tol = -1.0);

struct DiagnosticsOptions {
    double probe_cap = -1.0;   // R0; < 0 selects default_probe_cap
    double tol_grad = -1.0;    // < 0 selects default_grad_tolerance
    double vol_tol = -1.0;     // < 0 selects boundary_layer_volume
};

struct DiagnosticsReport {
    bool connected = false;
    int component_count = 0;
    double doubling_sigma = 0.0;
    int doubling_degenerate_probes = 0;
    double nondegeneracy_c1 = 0.0;
    std::vector<std::pair<double, double>> density_profile;  // (R, min quotient)
    int sigma0_count = 0;
    int sigma1_count = 0;
    Dichotomy dichotomy = Dichotomy::VolumeMet;
    std::vector<double> probe_radii;
    double probe_cap = 0.0;
    double tol_grad = 0.0;
    double vol_tol = 0.0;
};

DiagnosticsReport diagnose(const Mask& mask, const ScalarField& field, double omega0,
                           const DiagnosticsOptions& options = {});

}  // namespace plate
