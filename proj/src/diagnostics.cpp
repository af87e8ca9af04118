#include "plate/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plate/error.hpp"
#include "plate/theory.hpp"

namespace plate {

namespace {

using Offset = std::array<int, 3>;

// Lattice offsets strictly inside a ball of radius R.
std::vector<Offset> ball_offsets(const Grid& g, double R) {
    const double rho = R / g.spacing();
    const int reach = static_cast<int>(std::ceil(rho));
    const int zr = g.dim() == 3 ? reach : 0;
    std::vector<Offset> out;
    for (int dz = -zr; dz <= zr; ++dz)
        for (int dy = -reach; dy <= reach; ++dy)
            for (int dx = -reach; dx <= reach; ++dx)
                if (static_cast<double>(dx * dx + dy * dy + dz * dz) < rho * rho) out.push_back({dx, dy, dz});
    return out;
}

template <typename F>
void for_each_in_ball(const Grid& g, NodeIndex x0, const std::vector<Offset>& offsets, F&& f) {
    const auto c = g.coords(x0);
    for (const auto& o : offsets) {
        const std::array<int, 3> p{c[0] + o[0], c[1] + o[1], c[2] + o[2]};
        if (g.in_box(p)) f(g.index(p));
    }
}

std::size_t count_members(const Mask& mask, NodeIndex x0, const std::vector<Offset>& offsets) {
    std::size_t n = 0;
    for_each_in_ball(mask.grid(), x0, offsets, [&](NodeIndex i) { n += mask.contains(i) ? 1 : 0; });
    return n;
}

void require_probe_cap(const Grid& g, double R0) {
    if (!(R0 >= 4.0 * g.spacing() * (1.0 - 1e-12)))
        throw InvalidArgument("probe cap R0 must be at least 4h");
}

}  // namespace

ConnectivityCheck check_connected(const Mask& mask) {
    const int count = connected_components(mask).count;
    return {count == 1, count};
}

std::vector<double> dyadic_radii(double R0, double h) {
    std::vector<double> out;
    for (double R = R0; R >= 4.0 * h * (1.0 - 1e-12); R *= 0.5) out.push_back(R);
    return out;
}

double default_probe_cap(const Grid& grid, double omega0) {
    const double h = grid.spacing();
    const double cap = std::min(0.25 * equivalent_radius(omega0, grid.dim()), 32.0 * h);
    return std::max(cap, 4.0 * h);
}

std::size_t count_in_ball(const Mask& mask, NodeIndex x0, double R) {
    return count_members(mask, x0, ball_offsets(mask.grid(), R));
}

double doubling_ratio(const Mask& mask, NodeIndex x0, double R) {
    const auto inner = count_in_ball(mask, x0, R);
    if (inner == 0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(count_in_ball(mask, x0, 2.0 * R)) / static_cast<double>(inner);
}

DoublingEstimate estimate_doubling_sigma(const Mask& mask, double R0) {
    const Grid& g = mask.grid();
    require_probe_cap(g, R0);
    const auto boundary = boundary_nodes(mask);
    if (boundary.empty()) throw InvalidArgument("doubling estimate: mask has no boundary");
    DoublingEstimate out;
    for (double R : dyadic_radii(R0, g.spacing())) {
        const auto small = ball_offsets(g, R);
        const auto large = ball_offsets(g, 2.0 * R);
        for (NodeIndex x0 : boundary) {
            const auto inner = count_members(mask, x0, small);
            if (inner == 0) {
                ++out.degenerate_probes;
                out.sigma = std::numeric_limits<double>::infinity();
                continue;
            }
            const double ratio = static_cast<double>(count_members(mask, x0, large)) / static_cast<double>(inner);
            out.sigma = std::max(out.sigma, ratio);
        }
    }
    return out;
}

double estimate_nondegeneracy_c1(const Mask& mask, const ScalarField& field, double R0) {
    const Grid& g = mask.grid();
    require_probe_cap(g, R0);
    const auto boundary = boundary_nodes(mask);
    if (boundary.empty()) throw InvalidArgument("nondegeneracy estimate: mask has no boundary");
    const GradientField grad = gradient_field(field);
    double c1 = std::numeric_limits<double>::infinity();
    for (double R : dyadic_radii(R0, g.spacing())) {
        const auto offsets = ball_offsets(g, R);
        for (NodeIndex x0 : boundary) {
            double sup = 0.0;
            for_each_in_ball(g, x0, offsets, [&](NodeIndex i) {
                if (mask.contains(i)) sup = std::max(sup, grad.magnitude(i));
            });
            c1 = std::min(c1, sup / R);
        }
    }
    return c1;
}

double density_quotient(const Mask& mask, NodeIndex x0, double R) {
    const Grid& g = mask.grid();
    if (!(R >= 2.0 * g.spacing() * (1.0 - 1e-12))) throw InvalidArgument("density quotient: R must be at least 2h");
    const auto boundary = boundary_nodes(mask);
    if (!std::binary_search(boundary.begin(), boundary.end(), x0))
        throw InvalidArgument("density quotient: probe centre is not a boundary node");
    const auto offsets = ball_offsets(g, R);
    return static_cast<double>(count_members(mask, x0, offsets)) / static_cast<double>(offsets.size());
}

std::vector<std::pair<double, double>> density_profile(const Mask& mask, const std::vector<double>& radii) {
    const Grid& g = mask.grid();
    const auto boundary = boundary_nodes(mask);
    std::vector<std::pair<double, double>> out;
    for (double R : radii) {
        if (!(R >= 2.0 * g.spacing() * (1.0 - 1e-12))) throw InvalidArgument("density profile: R must be at least 2h");
        const auto offsets = ball_offsets(g, R);
        double lowest = 1.0;
        for (NodeIndex x0 : boundary)
            lowest = std::min(lowest, static_cast<double>(count_members(mask, x0, offsets)) /
                                          static_cast<double>(offsets.size()));
        out.emplace_back(R, lowest);
    }
    return out;
}

BoundarySplit classify_boundary(const Mask& mask, const ScalarField& field, double tol_grad) {
    const GradientField grad = gradient_field(field);
    BoundarySplit out;
    for (NodeIndex i : boundary_nodes(mask)) (grad.magnitude(i) <= tol_grad ? out.sigma0 : out.sigma1).push_back(i);
    return out;
}

double default_grad_tolerance(const ScalarField& field) {
    const GradientField grad = gradient_field(field);
    double peak = 0.0;
    for (NodeIndex i = 0; i < grad.gradient.size(); ++i) peak = std::max(peak, grad.magnitude(i));
    return 10.0 * field.grid().spacing() * peak;
}

const char* to_string(Dichotomy d) noexcept {
    switch (d) {
        case Dichotomy::VolumeMet: return "VolumeMet";
        case Dichotomy::ScaledFits_Contradiction: return "ScaledFits_Contradiction";
        case Dichotomy::ScaledDoesNotFit: return "ScaledDoesNotFit";
    }
    return "unknown";
}

double boundary_layer_volume(const Grid& grid, double omega0) {
    const int n = grid.dim();
    return 5.0 * grid.spacing() * std::pow(equivalent_radius(omega0, n), n - 1);
}

Dichotomy dichotomy_check(const Mask& mask, double omega0, double vol_tol) {
    if (mask.empty()) throw InvalidArgument("dichotomy check: empty mask");
    const Grid& g = mask.grid();
    if (vol_tol < 0.0) vol_tol = boundary_layer_volume(g, omega0);
    const double volume = mask_volume(mask);
    if (std::abs(volume - omega0) <= vol_tol) return Dichotomy::VolumeMet;

    const double t = std::pow(omega0 / volume, 1.0 / g.dim());
    const Point c = mask_centroid(mask);
    std::vector<Point> scaled;
    for (NodeIndex i : boundary_nodes(mask)) {
        const Point p = g.position(i);
        scaled.push_back({t * (p[0] - c[0]), t * (p[1] - c[1]), t * (p[2] - c[2])});
    }
    const auto circumradius = [&](const Point& shift) {
        double r = 0.0;
        for (const auto& p : scaled) r = std::max(r, distance(p, shift));
        return r;
    };
    const double R_B = g.radius();
    const double rho = circumradius({0.0, 0.0, 0.0});
    if (rho < R_B) return Dichotomy::ScaledFits_Contradiction;
    if (rho - R_B > 2.0 * g.spacing()) return Dichotomy::ScaledDoesNotFit;

    // Near-miss: try every lattice translation that keeps the centroid in the box.
    for (NodeIndex k = 0; k < g.node_count(); ++k) {
        const Point shift = g.position(k);
        if (circumradius({-shift[0], -shift[1], -shift[2]}) < R_B) return Dichotomy::ScaledFits_Contradiction;
    }
    return Dichotomy::ScaledDoesNotFit;
}

DiagnosticsReport diagnose(const Mask& mask, const ScalarField& field, double omega0,
                           const DiagnosticsOptions& options) {
    const Grid& g = mask.grid();
    DiagnosticsReport r;
    const auto conn = check_connected(mask);
    r.connected = conn.connected;
    r.component_count = conn.component_count;
    r.probe_cap = options.probe_cap > 0.0 ? options.probe_cap : default_probe_cap(g, omega0);
    r.probe_radii = dyadic_radii(r.probe_cap, g.spacing());
    r.tol_grad = options.tol_grad >= 0.0 ? options.tol_grad : default_grad_tolerance(field);
    r.vol_tol = options.vol_tol >= 0.0 ? options.vol_tol : boundary_layer_volume(g, omega0);
    if (!mask.empty()) {
        const auto doubling = estimate_doubling_sigma(mask, r.probe_cap);
        r.doubling_sigma = doubling.sigma;
        r.doubling_degenerate_probes = doubling.degenerate_probes;
        r.nondegeneracy_c1 = estimate_nondegeneracy_c1(mask, field, r.probe_cap);
        r.density_profile = density_profile(mask, r.probe_radii);
        const auto split = classify_boundary(mask, field, r.tol_grad);
        r.sigma0_count = static_cast<int>(split.sigma0.size());
        r.sigma1_count = static_cast<int>(split.sigma1.size());
        r.dichotomy = dichotomy_check(mask, omega0, r.vol_tol);
    }
    return r;
}

}  // namespace plate
