#include "plate/theory.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "plate/error.hpp"

namespace plate {

double unit_ball_volume(int n) {
    if (n < 1) throw InvalidArgument("unit_ball_volume: dimension must be >= 1");
    const double half = 0.5 * n;
    return std::exp(half * std::log(std::numbers::pi) - std::lgamma(half + 1.0));
}

namespace {

// Smallest eigenvalue of the radial clamped bilaplacian on m intervals.
// Unknowns u_0..u_{m-1} at r_j = j/m; u_m = 0, the ghost u_{m+1} = u_{m-1}
// encodes u'(1) = 0 and u_{-1} = u_1 encodes regularity at the origin, where
// the radial Laplacian reduces to n u''(0).
double radial_fd_eigenvalue(int n, int m) {
    const double h = 1.0 / m;
    const double h2 = h * h;

    // Laplacian of u on nodes 0..m (m+1 rows, m columns).
    std::vector<Eigen::Triplet<double>> lu;
    lu.reserve(3 * (m + 1));
    lu.emplace_back(0, 0, -2.0 * n / h2);
    lu.emplace_back(0, 1, 2.0 * n / h2);
    for (int j = 1; j < m; ++j) {
        const double drift = (n - 1) / (j * h) / (2.0 * h);
        lu.emplace_back(j, j - 1, 1.0 / h2 - drift);
        lu.emplace_back(j, j, -2.0 / h2);
        if (j + 1 < m) lu.emplace_back(j, j + 1, 1.0 / h2 + drift);
    }
    lu.emplace_back(m, m - 1, 2.0 / h2);

    // Laplacian of w (given on 0..m) at nodes 0..m-1; w carries no boundary condition.
    std::vector<Eigen::Triplet<double>> lw;
    lw.reserve(3 * m);
    lw.emplace_back(0, 0, -2.0 * n / h2);
    lw.emplace_back(0, 1, 2.0 * n / h2);
    for (int j = 1; j < m; ++j) {
        const double drift = (n - 1) / (j * h) / (2.0 * h);
        lw.emplace_back(j, j - 1, 1.0 / h2 - drift);
        lw.emplace_back(j, j, -2.0 / h2);
        lw.emplace_back(j, j + 1, 1.0 / h2 + drift);
    }

    // Solve Lw Lu u = b through the block system [I  -Lu; Lw  0] (w; u) = (0; b).
    // The assembled product Lw Lu has condition ~h^-4 and loses about three
    // digits at these resolutions.
    std::vector<Eigen::Triplet<double>> blk;
    blk.reserve(lu.size() + lw.size() + m + 1);
    for (int i = 0; i <= m; ++i) blk.emplace_back(i, i, 1.0);
    for (const auto& t : lu) blk.emplace_back(t.row(), m + 1 + t.col(), -t.value());
    for (const auto& t : lw) blk.emplace_back(m + 1 + t.row(), t.col(), t.value());
    Eigen::SparseMatrix<double> block(2 * m + 1, 2 * m + 1);
    block.setFromTriplets(blk.begin(), blk.end());
    block.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_solver;
    lu_solver.compute(block);
    if (lu_solver.info() != Eigen::Success) throw Error("radial oracle: LU factorisation failed");

    Eigen::VectorXd x(m);
    for (int j = 0; j < m; ++j) {
        const double r = j * h;
        x[j] = (1.0 - r * r) * (1.0 - r * r);
    }
    x.normalize();
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * m + 1);
        rhs.tail(m) = x;
        const Eigen::VectorXd y = lu_solver.solve(rhs).tail(m);
        const double next = x.dot(x) / x.dot(y);
        x = y.normalized();
        if (it > 2 && std::abs(next - lambda) <= 1e-15 * next) return next;
        lambda = next;
    }
    return lambda;
}

double bessel_series(double nu, double x, bool modified) {
    const double half = 0.5 * x;
    const double q = half * half;
    double term = std::exp(nu * std::log(half) - std::lgamma(nu + 1.0));
    double sum = term;
    for (int k = 1; k < 300; ++k) {
        term *= (modified ? q : -q) / (k * (k + nu));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

double cross_product(double nu, double k) {
    return bessel_series(nu, k, false) * bessel_series(nu + 1, k, true) +
           bessel_series(nu, k, true) * bessel_series(nu + 1, k, false);
}

}  // namespace

RadialToneEstimate gamma_ball_radial_estimate(int n, double tol) {
    if (n < 2) throw InvalidArgument("gamma_ball_radial: dimension must be >= 2");
    const double g1 = radial_fd_eigenvalue(n, 4096);
    const double g2 = radial_fd_eigenvalue(n, 8192);
    const double g3 = radial_fd_eigenvalue(n, 16384);
    const double r1 = (4.0 * g2 - g1) / 3.0;
    const double r2 = (4.0 * g3 - g2) / 3.0;
    const double value = (16.0 * r2 - r1) / 15.0;
    RadialToneEstimate out{value, std::abs(r2 - r1) / std::abs(value), 16384};
    if (!(out.achieved_tol <= tol))
        throw ConvergenceError("gamma_ball_radial: extrapolation reached only " + std::to_string(out.achieved_tol),
                               {g1, g2, g3}, value);
    return out;
}

double gamma_ball_radial(int n, double tol) { return gamma_ball_radial_estimate(n, tol).value; }

double gamma_ball_bessel(int n) {
    if (n < 2) throw InvalidArgument("gamma_ball_bessel: dimension must be >= 2");
    const double nu = 0.5 * n - 1.0;
    // The cross product is positive near 0; scan for its first sign change.
    double lo = 0.5;
    double flo = cross_product(nu, lo);
    double hi = lo;
    for (;;) {
        hi = lo + 0.01;
        if (hi > 40.0) throw Error("gamma_ball_bessel: no root bracketed");
        const double fhi = cross_product(nu, hi);
        if ((flo > 0.0) != (fhi > 0.0)) break;
        lo = hi;
        flo = fhi;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = cross_product(nu, mid);
        if ((fmid > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    const double k = 0.5 * (lo + hi);
    return k * k * k * k;
}

double gamma_unit_ball(int n) {
    static std::mutex guard;
    static std::map<int, double> cache;
    std::lock_guard lock(guard);
    if (auto it = cache.find(n); it != cache.end()) return it->second;
    const double value = gamma_ball_radial(n);
    cache.emplace(n, value);
    return value;
}

double eps1(int n, double omega0, double gamma_B1) {
    if (!(omega0 > 0.0)) throw InvalidArgument("eps1: omega0 must be positive");
    return std::pow(omega0 / unit_ball_volume(n), 4.0 / n) * omega0 / gamma_B1;
}

double eps1_effective(int n, double omega0, double radius_B, double gamma_B1) {
    const double base = eps1(n, omega0, gamma_B1);
    if (n >= 4) return base;
    const double alpha_max = unit_ball_volume(n) * std::pow(radius_B, n) / omega0;
    if (!(alpha_max > 1.0))
        throw InvalidArgument("eps1_effective: omega0 must be smaller than |B|");
    return base * (alpha_max - 1.0) / (std::pow(alpha_max, 4.0 / n) - 1.0);
}

double eps0(int n, double eps1_value, double d_n) {
    if (n < 1) throw InvalidArgument("eps0: dimension must be >= 1");
    return std::min(eps1_value, d_n * (4.0 / n) / eps1_value);
}

double eps0_effective(int n, double omega0, double radius_B, double gamma_B1, double d_n) {
    const double e1 = eps1(n, omega0, gamma_B1);
    return std::min(eps1_effective(n, omega0, radius_B, gamma_B1), d_n * (4.0 / n) / e1);
}

Alpha0 alpha0(double eps, double eps1_value, double d_n) {
    if (!(eps > 0.0)) throw InvalidArgument("alpha0: eps must be positive");
    if (!(eps1_value > 0.0)) throw InvalidArgument("alpha0: eps1 must be positive");
    if (!(d_n > 0.0)) throw InvalidArgument("alpha0: d_n must be positive");
    const double c = eps * eps1_value;
    const double disc = 1.0 + 2.0 * c + c * c - 4.0 * d_n * c;
    if (disc < 0.0) throw InvalidArgument("alpha0: negative discriminant for this (d_n, eps) combination");
    const double a = 2.0 * d_n / (1.0 + c + std::sqrt(disc));
    const double f = (d_n / a - 1.0) / (1.0 - a);
    return {a, f - c};
}

double predicted_tone(double gamma, double t, int /*n*/) {
    if (!(t > 0.0)) throw InvalidArgument("predicted_tone: t must be positive");
    return gamma / (t * t * t * t);
}

double ball_tone_for_volume(double omega, int n, double gamma_B1) {
    if (!(omega > 0.0)) throw InvalidArgument("ball_tone_for_volume: omega must be positive");
    return std::pow(unit_ball_volume(n) / omega, 4.0 / n) * gamma_B1;
}

double equivalent_radius(double omega, int n) { return std::pow(omega / unit_ball_volume(n), 1.0 / n); }

TheoryConstants compute_constants(int n, double omega0, double eps, double d_n, double radius_B) {
    if (n < 2) throw InvalidArgument("constants: dimension must be >= 2");
    if (!(omega0 > 0.0)) throw InvalidArgument("constants: omega0 must be positive");
    if (!(eps > 0.0)) throw InvalidArgument("constants: eps must be positive");
    if (!(d_n > 0.0 && d_n < 1.0)) throw InvalidArgument("constants: d_n must lie in (0, 1)");

    TheoryConstants c;
    c.dim = n;
    c.omega0 = omega0;
    c.eps = eps;
    c.d_n = d_n;
    c.radius_B = radius_B;
    c.omega_n = unit_ball_volume(n);
    const auto radial = gamma_ball_radial_estimate(n);
    c.gamma_B1 = radial.value;
    c.radial_achieved_tol = radial.achieved_tol;
    c.gamma_B1_bessel = gamma_ball_bessel(n);
    c.oracle_rel_diff = std::abs(c.gamma_B1 - c.gamma_B1_bessel) / c.gamma_B1_bessel;
    c.eps1 = eps1(n, omega0, c.gamma_B1);
    c.eps0 = eps0(n, c.eps1, d_n);
    if (radius_B > 0.0) {
        c.eps1_effective = eps1_effective(n, omega0, radius_B, c.gamma_B1);
        c.eps0_effective = eps0_effective(n, omega0, radius_B, c.gamma_B1, d_n);
    } else {
        c.eps1_effective = c.eps1;
        c.eps0_effective = c.eps0;
    }
    c.extends_threshold = c.eps1_effective != c.eps1;
    const auto a0 = alpha0(eps, c.eps1, d_n);
    c.alpha0 = a0.value;
    c.alpha0_residual = a0.residual;
    return c;
}

}  // namespace plate
