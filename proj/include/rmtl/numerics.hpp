// Deterministic numerical kernel: error types, special functions, adaptive
// quadrature, bracketed root finding, and reproducible random-number streams.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace rmtl {

// ---------------------------------------------------------------------------
// Error taxonomy. The CLI maps these onto exit codes, so keep the hierarchy
// stable: input/domain problems, infeasible requests, numeric failures.
// ---------------------------------------------------------------------------

struct domain_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct input_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Requested computation is well-posed but unattainable (tau beyond follow-up,
// censoring target below the administrative floor, zero effect size, ...).
struct infeasible_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct restriction_error : infeasible_error {
    using infeasible_error::infeasible_error;
};

struct undefined_effect_error : infeasible_error {
    using infeasible_error::infeasible_error;
};

struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct convergence_error : numeric_error {
    using numeric_error::numeric_error;
};

struct bracketing_error : numeric_error {
    using numeric_error::numeric_error;
};

// ---------------------------------------------------------------------------
// Tolerances shared by quadrature and root finding.
// ---------------------------------------------------------------------------

struct ToleranceConfig {
    double quadrature_rel_tol = 1e-9;
    double root_tol = 1e-8;
    int max_iter = 200;

    void validate() const {
        if (!(quadrature_rel_tol > 0.0) || !(root_tol > 0.0))
            throw domain_error("ToleranceConfig: tolerances must be strictly positive");
        if (max_iter < 1)
            throw domain_error("ToleranceConfig: max_iter must be >= 1");
    }
};

// ---------------------------------------------------------------------------
// Standard normal distribution.
// ---------------------------------------------------------------------------

inline double normal_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x * 0.7071067811865475244);
}

inline double normal_pdf(double x) noexcept {
    return 0.3989422804014326779 * std::exp(-0.5 * x * x);
}

// Inverse standard normal CDF. Acklam's rational approximation polished with
// one Halley step; absolute error well below 1e-10 across (0,1).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw domain_error("normal_quantile: p must lie in (0,1)");
    if (p == 0.5) return 0.0;

    static constexpr double a[6] = {
        -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
        1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {
        -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
        6.680131188771972e+01, -1.328068155288572e+01};
    static constexpr double c[6] = {
        -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
        -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00};
    static constexpr double d[4] = {
        7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
        3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // Halley refinement. The residual is formed on whichever side of the
    // distribution stays resolvable in doubles: Phi(x) saturates at 1 in the
    // upper tail, so compare survival functions there instead.
    const double e = p <= 0.5 ? normal_cdf(x) - p
                              : (1.0 - p) - 0.5 * std::erfc(x * 0.7071067811865475244);
    const double u = e / normal_pdf(x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

// Survival function of a chi-square variable with one degree of freedom.
inline double chisq1_sf(double x) {
    if (x < 0.0) return 1.0;
    return std::erfc(std::sqrt(0.5 * x));
}

// ---------------------------------------------------------------------------
// Upper incomplete gamma function, non-normalized:
//   Gamma(a, x) = int_x^inf t^(a-1) e^(-t) dt,  a > 0, x >= 0.
// Series for the lower part when x < a+1, Lentz continued fraction otherwise.
// ---------------------------------------------------------------------------

namespace detail {

inline double lower_gamma_series_regularized(double a, double x) {
    // P(a,x) via the standard power series.
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16)
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    throw convergence_error("incomplete gamma: series failed to converge");
}

inline double upper_gamma_cf_regularized(double a, double x) {
    // Q(a,x) via the continued fraction (modified Lentz).
    constexpr double tiny = std::numeric_limits<double>::min() / 1e-30;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16)
            return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    }
    throw convergence_error("incomplete gamma: continued fraction failed to converge");
}

}  // namespace detail

inline double upper_incomplete_gamma(double a, double x) {
    if (!(a > 0.0))
        throw domain_error("upper_incomplete_gamma: a must be > 0");
    if (x < 0.0)
        throw domain_error("upper_incomplete_gamma: x must be >= 0");
    if (x == 0.0) return std::tgamma(a);
    const double gamma_a = std::tgamma(a);
    if (x < a + 1.0)
        return (1.0 - detail::lower_gamma_series_regularized(a, x)) * gamma_a;
    return detail::upper_gamma_cf_regularized(a, x) * gamma_a;
}

// Regularized lower incomplete gamma P(a,x); the Weibull-mixture CDF in time.
inline double lower_regularized_gamma(double a, double x) {
    if (!(a > 0.0))
        throw domain_error("lower_regularized_gamma: a must be > 0");
    if (x < 0.0)
        throw domain_error("lower_regularized_gamma: x must be >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return detail::lower_gamma_series_regularized(a, x);
    return 1.0 - detail::upper_gamma_cf_regularized(a, x);
}

// ---------------------------------------------------------------------------
// Adaptive Simpson quadrature. Integrands here are piecewise smooth; callers
// split at step-function knots.
// ---------------------------------------------------------------------------

namespace detail {

struct SimpsonState {
    const std::function<double(double)>* f;
    int evals = 0;
    int max_evals = 0;

    double eval(double x) {
        if (++evals > max_evals)
            throw convergence_error("integrate: evaluation budget exceeded");
        const double v = (*f)(x);
        if (!std::isfinite(v))
            throw numeric_error("integrate: integrand returned a non-finite value");
        return v;
    }
};

inline double simpson_recurse(SimpsonState& st, double a, double b, double fa,
                              double fm, double fb, double whole, double eps,
                              double min_width, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = st.eval(lm);
    const double frm = st.eval(rm);
    const double h = b - a;
    const double left = h / 12.0 * (fa + 4.0 * flm + fm);
    const double right = h / 12.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    // Accept on the Richardson criterion, or once the interval has shrunk to
    // the width floor (derivative singularities stall the criterion while
    // contributing nothing at this scale).
    if (std::fabs(delta) <= 15.0 * eps || h <= min_width)
        return left + right + delta / 15.0;
    if (depth <= 0)
        throw convergence_error("integrate: maximum subdivision depth reached");
    return simpson_recurse(st, a, m, fa, flm, fm, left, 0.5 * eps, min_width,
                           depth - 1) +
           simpson_recurse(st, m, b, fm, frm, fb, right, 0.5 * eps, min_width,
                           depth - 1);
}

}  // namespace detail

inline double integrate(const std::function<double(double)>& f, double lo, double hi,
                        const ToleranceConfig& cfg = {}) {
    cfg.validate();
    if (!(lo <= hi))
        throw domain_error("integrate: lo must be <= hi");
    if (lo == hi) return 0.0;

    detail::SimpsonState st{&f, 0, std::max(cfg.max_iter, 50) * 10000};
    const double fa = st.eval(lo);
    const double fb = st.eval(hi);
    const double m = 0.5 * (lo + hi);
    const double fm = st.eval(m);
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);

    // Scale-setting pass so the relative tolerance has a magnitude to bite on.
    double scale = std::fabs(whole);
    const int probes = 8;
    double probe_sum = 0.0;
    for (int i = 0; i < probes; ++i) {
        const double x = lo + (hi - lo) * (i + 0.5) / probes;
        probe_sum += std::fabs(st.eval(x));
    }
    scale = std::max(scale, probe_sum / probes * (hi - lo));
    const double eps = cfg.quadrature_rel_tol * std::max(scale, 1e-300);
    const double min_width = (hi - lo) * 0x1.0p-45;

    return detail::simpson_recurse(st, lo, hi, fa, fm, fb, whole, eps, min_width, 64);
}

// ---------------------------------------------------------------------------
// Safeguarded root finding (Brent). Requires a sign change on [lo, hi].
// ---------------------------------------------------------------------------

inline double find_root(const std::function<double(double)>& f, double lo, double hi,
                        const ToleranceConfig& cfg = {}) {
    cfg.validate();
    double a = lo, b = hi;
    double fa = f(a), fb = f(b);
    if (!std::isfinite(fa) || !std::isfinite(fb))
        throw numeric_error("find_root: non-finite function value at bracket endpoint");
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0)
        throw bracketing_error("find_root: f(lo) and f(hi) must bracket a root");

    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        if (fb * fc > 0.0) {
            c = a;
            fc = fa;
            e = d = b - a;
        }
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::fabs(b) +
                            0.5 * cfg.root_tol;
        const double xm = 0.5 * (c - b);
        if (std::fabs(xm) <= tol1 || fb == 0.0 || std::fabs(fb) <= cfg.root_tol)
            return b;
        if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::fabs(p);
            const double min1 = 3.0 * xm * q - std::fabs(tol1 * q);
            const double min2 = std::fabs(e * q);
            if (2.0 * p < std::min(min1, min2)) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::fabs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
        if (!std::isfinite(fb))
            throw numeric_error("find_root: non-finite function value");
    }
    throw convergence_error("find_root: max_iter exceeded");
}

// ---------------------------------------------------------------------------
// Reproducible random streams: xoshiro256++ seeded through splitmix64, keyed
// by (master_seed, stream_id) so parallel replicates are order-independent.
// ---------------------------------------------------------------------------

class RngStream {
  public:
    explicit RngStream(std::uint64_t master_seed, std::uint64_t stream_id = 0) noexcept
        : master_seed_(master_seed), stream_id_(stream_id) {
        std::uint64_t sm = master_seed ^
                           (0x9E3779B97F4A7C15ULL + stream_id * 0xBF58476D1CE4E5B9ULL);
        for (auto& w : state_) w = splitmix64(sm);
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    std::uint64_t master_seed() const noexcept { return master_seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0,1), 53-bit resolution.
    double uniform01() noexcept { return (next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on the open interval (0,1); safe as a survival-probability draw.
    double uniform_open01() noexcept {
        return ((next_u64() >> 12) + 0.5) * 0x1.0p-52;
    }

    double uniform(double lo, double hi) noexcept {
        return lo + (hi - lo) * uniform01();
    }

    // Index in [0, n): rejection-free multiply-shift.
    std::size_t uniform_index(std::size_t n) noexcept {
        return static_cast<std::size_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }
    static std::uint64_t splitmix64(std::uint64_t& s) noexcept {
        std::uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t master_seed_;
    std::uint64_t stream_id_;
    std::uint64_t state_[4];
};

}  // namespace rmtl
