#pragma once

// Closed-form constants and thresholds of the volume-penalised clamped plate
// problem, for any dimension n >= 2. The tone of the unit ball, Gamma(B_1),
// comes from two independent computations that are required to agree.

namespace plate {

/// omega_n = pi^{n/2} / Gamma(n/2 + 1).
double unit_ball_volume(int n);

struct RadialToneEstimate {
    double value = 0.0;
    double achieved_tol = 0.0;  // relative gap between the last two extrapolants
    int finest_points = 0;
};

/// Gamma(B_1) from the radial clamped-plate problem
///   (d^2/dr^2 + (n-1)/r d/dr)^2 u = Gamma u on [0,1], u(1) = u'(1) = 0,
/// discretised by second-order finite differences at 4096, 8192 and 16384
/// points and extrapolated twice (h^2 then h^4). Throws if the extrapolants
/// disagree by more than tol.
RadialToneEstimate gamma_ball_radial_estimate(int n, double tol = 1e-8);
double gamma_ball_radial(int n, double tol = 1e-8);

/// Gamma(B_1) = k^4 with k the first positive root of
///   J_nu(k) I_{nu+1}(k) + I_nu(k) J_{nu+1}(k),  nu = n/2 - 1,
/// using power-series Bessel functions and bisection.
double gamma_ball_bessel(int n);

/// Cached radial value; computed once per dimension, thread-safe.
double gamma_unit_ball(int n);

/// eps_1 = (omega0/omega_n)^{4/n} omega0 / Gamma(B_1).
double eps1(int n, double omega0, double gamma_B1);

/// Threshold that keeps the plain-penalty volume bound valid in n = 2, 3,
/// where the ratio (a - 1)/(a^{4/n} - 1) drops below 1. With a bounded by
/// a_max = |B| / omega0 it is eps1 * (a_max - 1)/(a_max^{4/n} - 1); for
/// n >= 4 it is eps1 itself.
double eps1_effective(int n, double omega0, double radius_B, double gamma_B1);

/// eps_0 = min{eps_1, d_n (4/n) / eps_1}.
double eps0(int n, double eps1_value, double d_n);

/// eps_0 with its first argument replaced by eps1_effective in n = 2, 3.
double eps0_effective(int n, double omega0, double radius_B, double gamma_B1, double d_n);

struct Alpha0 {
    double value = 0.0;
    double residual = 0.0;  // f(alpha0) - eps*eps1, f(a) = (d_n/a - 1)/(1 - a)
};

/// Smaller root of (eps eps1) a^2 - (1 + eps eps1) a + d_n = 0, the unique
/// solution of f(a) = eps eps1 in (0, 1). Evaluated in the cancellation-free
/// form 2 d_n / (1 + c + sqrt(disc)).
Alpha0 alpha0(double eps, double eps1_value, double d_n);

/// Tone after scaling a domain by the spatial factor t: gamma t^{-4}.
double predicted_tone(double gamma, double t, int n);

/// (omega_n / omega)^{4/n} Gamma(B_1), the tone of the ball with volume omega.
double ball_tone_for_volume(double omega, int n, double gamma_B1);

/// Radius of the ball with volume omega.
double equivalent_radius(double omega, int n);

struct TheoryConstants {
    int dim = 2;
    double omega0 = 0.0;
    double eps = 0.0;
    double d_n = 0.5;
    double radius_B = 0.0;  // 0 when no reference ball is given

    double omega_n = 0.0;
    double gamma_B1 = 0.0;
    double gamma_B1_bessel = 0.0;
    double oracle_rel_diff = 0.0;
    double radial_achieved_tol = 0.0;
    double eps1 = 0.0;
    double eps1_effective = 0.0;
    double eps0 = 0.0;
    double eps0_effective = 0.0;
    double alpha0 = 0.0;
    double alpha0_residual = 0.0;
    bool extends_threshold = false;  // eps1_effective differs from eps1 (n < 4)
};

/// Every constant for (n, omega0, eps, d_n). radius_B <= 0 skips the
/// effective thresholds and reports them equal to eps1 / eps0.
TheoryConstants compute_constants(int n, double omega0, double eps, double d_n, double radius_B = 0.0);

}  // namespace plate
