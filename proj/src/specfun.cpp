#include "hilfer/specfun.hpp"

#include <quadmath.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace hilfer::specfun {

namespace {

using qreal = __float128;

// 2^-112, unit roundoff of binary128
constexpr double kQuadEps = 1.925929944387236e-34;
// last argument with tgamma(x) finite in double
constexpr double kGammaMaxArg = 171.62437695630272;
// decay exponent past which the Wright series roundoff would drown the value
constexpr double kWrightReliableExp = 30.0;

double sinpi(double x) {
    const double n = std::nearbyint(x);
    const double s = std::sin(M_PI * (x - n));
    return (std::fmod(n, 2.0) != 0.0) ? -s : s;
}

qreal sinpi_q(qreal x) {
    const qreal n = rintq(x);
    const qreal s = sinq(static_cast<qreal>(M_PIq) * (x - n));
    return (fmodq(n, 2) != 0) ? -s : s;
}

/// Coefficients c_n = 1 / ((n-1)! Gamma(1 - alpha n)) of the M-function
/// series, evaluated through the reflection formula so the Gamma poles land
/// on exact zeros of sin(pi alpha n):
///
///   c_n = sin(pi alpha n) Gamma(alpha n) / (pi Gamma(n)).
///
/// The table is cached per alpha; repeated evaluations (quadrature sweeps)
/// then cost two binary128 multiplies per term.
class WrightCoeffTable {
public:
    std::vector<qreal> c;
    // 0 where alpha n sits near an integer; those terms are excluded from the
    // small-term stopping counter because they are small for the wrong reason.
    std::vector<unsigned char> counts_for_stop;

    static std::shared_ptr<const WrightCoeffTable> get(double alpha, int n_terms) {
        static std::mutex mu;
        static std::map<double, std::shared_ptr<WrightCoeffTable>> cache;
        std::lock_guard<std::mutex> lock(mu);
        auto& slot = cache[alpha];
        if (!slot) slot = std::make_shared<WrightCoeffTable>();
        if (static_cast<int>(slot->c.size()) < n_terms) slot->extend(alpha, n_terms);
        return slot;
    }

    void extend(double alpha, int n_terms) {
        const qreal qa = alpha;
        const qreal qpi = M_PIq;
        c.reserve(n_terms);
        counts_for_stop.reserve(n_terms);
        for (int n = static_cast<int>(c.size()) + 1; n <= n_terms; ++n) {
            const qreal an = qa * n;
            const qreal s = sinpi_q(an);
            // Gamma(alpha n)/Gamma(n) <= 1 for n >= 2, so the log difference
            // never overflows; n = 1 has Gamma(n) = 1.
            const qreal ratio = expq(lgammaq(an) - lgammaq(static_cast<qreal>(n)));
            c.push_back(s * ratio / qpi);
            counts_for_stop.push_back(fabsq(s) >= 0.01 ? 1 : 0);
        }
    }
};

struct QuadSum {
    qreal sum = 0;
    qreal peak = 0; // max over |terms| and |partial sums|
    int terms = 0;

    void add(qreal t) {
        sum += t;
        const qreal a = fabsq(t), b = fabsq(sum);
        if (a > peak) peak = a;
        if (b > peak) peak = b;
        ++terms;
    }
};

EvalResult ml_series_long_double(double alpha, double beta, double z,
                                 const MlOptions& opts) {
    // |z| <= 1: terms decay from the start and alternation is mild, so an
    // 80-bit compensated sum keeps the roundoff far below the 1e-12 contract.
    // z > 1 is also summed here; all terms are then positive.
    long double sum = 0.0L, comp = 0.0L;
    long double peak = 0.0L;
    double max_log_arg = 0.0;
    const long double lz = (z == 0.0) ? 0.0L : logl(fabsl(static_cast<long double>(z)));
    int small_run = 0;
    int k = 0;
    for (; k <= opts.max_terms; ++k) {
        const double garg = alpha * k + beta;
        const long double lt = k * lz - lgammal(static_cast<long double>(garg));
        if (static_cast<double>(lt) > 708.0)
            throw OverflowError("mittag_leffler: value exceeds double range");
        max_log_arg = std::max({max_log_arg, std::fabs(static_cast<double>(k) * static_cast<double>(lz)),
                                std::fabs(static_cast<double>(lt))});
        long double t = expl(lt);
        if (z < 0 && (k & 1)) t = -t;
        // Kahan-Neumaier compensation
        const long double s = sum + t;
        comp += (fabsl(sum) >= fabsl(t)) ? (sum - s) + t : (t - s) + sum;
        sum = s;
        peak = std::max({peak, fabsl(t), fabsl(sum)});
        if (k >= 4) {
            if (fabsl(t) < 1e-19L * peak) { if (++small_run >= 3) { ++k; break; } }
            else small_run = 0;
        }
    }
    if (k > opts.max_terms)
        throw DomainError("mittag_leffler: series did not converge within the validated range");
    const double value = static_cast<double>(sum + comp);
    // per-term rounding scales with the magnitude of the log-space arguments
    const double round_err =
        (max_log_arg + 4.0) * 1.1e-19 * static_cast<double>(peak) * (1.0 + std::log2(2.0 + k));
    const double tail_err = 4e-19 * static_cast<double>(peak);
    double est = round_err + tail_err + 1.2e-16 * std::fabs(value);
    return {value, est, k};
}

EvalResult ml_series_quad(double alpha, double beta, double z, const MlOptions& opts) {
    // z < -1: alternating terms can exceed the result by many orders
    // (E_{1,1}(-20) cancels ~16 decimal digits), so accumulate in binary128
    // and keep an explicit roundoff budget against the running peak.
    const qreal qz = z;
    const qreal labs = logq(fabsq(qz));
    QuadSum acc;
    int small_run = 0;
    int k = 0;
    for (; k <= opts.max_terms; ++k) {
        const qreal lt = k * labs - lgammaq(static_cast<qreal>(alpha) * k + static_cast<qreal>(beta));
        if (static_cast<double>(lt) > 11300.0)
            throw DomainError("mittag_leffler: series peak exceeds binary128 range");
        qreal t = expq(lt);
        if (k & 1) t = -t;
        acc.add(t);
        if (k >= 4) {
            if (fabsq(t) < static_cast<qreal>(1e-35) * acc.peak) { if (++small_run >= 3) { ++k; break; } }
            else small_run = 0;
        }
    }
    if (k > opts.max_terms)
        throw DomainError("mittag_leffler: series did not converge within the validated range");
    const double value = static_cast<double>(acc.sum);
    const double peak = static_cast<double>(acc.peak);
    const double est = peak * (1e-35 + kQuadEps * acc.terms) + 1.2e-16 * std::fabs(value);
    if (est > 1e-12 * std::max(1.0, std::fabs(value)))
        throw DomainError("mittag_leffler: cancellation exceeds the validated series range");
    return {value, est, k};
}

} // namespace

double gamma_max_arg() { return kGammaMaxArg; }

double gamma_fn(double x) {
    if (!std::isfinite(x)) throw DomainError("gamma_fn: argument must be finite");
    if (x <= 0.0 && x == std::floor(x)) throw PoleError("gamma_fn: pole at nonpositive integer");
    if (x > kGammaMaxArg) throw OverflowError("gamma_fn: result exceeds double range");
    const double g = std::tgamma(x);
    if (!std::isfinite(g)) throw OverflowError("gamma_fn: result exceeds double range");
    return g;
}

double reciprocal_gamma(double x) {
    if (x <= 0.0 && x == std::floor(x)) return 0.0;
    if (x > 0.5) {
        if (x > kGammaMaxArg) return std::exp(-std::lgamma(x)); // graceful underflow
        return 1.0 / std::tgamma(x);
    }
    // reflection: 1/Gamma(x) = sin(pi x) Gamma(1-x) / pi
    return sinpi(x) / M_PI * std::exp(std::lgamma(1.0 - x));
}

EvalResult mittag_leffler(double alpha, double beta, double z, const MlOptions& opts) {
    if (!(alpha > 0.0 && alpha <= 2.0))
        throw DomainError("mittag_leffler: alpha must be in (0, 2]");
    if (!(beta > 0.0)) throw DomainError("mittag_leffler: beta must be > 0");
    if (!std::isfinite(z) || std::fabs(z) > opts.z_max)
        throw DomainError("mittag_leffler: |z| exceeds the validated series range");
    if (z == 0.0) {
        const double v = reciprocal_gamma(beta);
        return {v, 1.2e-16 * std::fabs(v), 1};
    }
    if (z >= -1.0) return ml_series_long_double(alpha, beta, z, opts);
    return ml_series_quad(alpha, beta, z, opts);
}

double wright_decay_exponent(double alpha, double theta) {
    if (theta <= 0.0) return 0.0;
    const double c = (1.0 - alpha) * std::pow(alpha, alpha / (1.0 - alpha));
    return c * std::pow(theta, 1.0 / (1.0 - alpha));
}

EvalResult wright_m(double alpha, double theta, const WrightOptions& opts) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("wright_m: alpha must be in (0, 1)");
    if (!(theta >= 0.0)) throw DomainError("wright_m: theta must be >= 0");
    if (theta > opts.theta_max) throw DomainError("wright_m: theta exceeds the validated range");

    const double decay = wright_decay_exponent(alpha, theta);
    if (decay > kWrightReliableExp) {
        // Alternating partial sums peak near exp(decay); past this point the
        // binary128 noise floor exceeds the value itself, which in turn is
        // below exp(-30) ~ 1e-13. Return zero with the envelope as the bound.
        return {0.0, 12.0 * (1.0 + theta) * std::exp(-decay), 0};
    }

    const auto table = WrightCoeffTable::get(alpha, opts.max_terms);
    const qreal qth = theta;
    QuadSum acc;
    qreal p = 1; // (-theta)^{n-1}
    int small_run = 0;
    int n = 1;
    bool converged = false;
    for (; n <= static_cast<int>(table->c.size()); ++n) {
        const qreal t = table->c[n - 1] * p;
        acc.add(t);
        p *= -qth;
        if (fabsq(p) > FLT128_MAX * 1e-32)
            throw DomainError("wright_m: series power exceeds binary128 range");
        if (table->counts_for_stop[n - 1]) {
            // stop once genuine (non pole-adjacent) terms sit at the binary128
            // noise floor relative to the running peak
            if (fabsq(t) < static_cast<qreal>(1e-33) * acc.peak && n >= 8) {
                if (++small_run >= 3) { converged = true; ++n; break; }
            } else {
                small_run = 0;
            }
        }
    }
    if (!converged)
        throw DomainError("wright_m: series did not converge within the validated range");
    const double first_omitted =
        (n <= static_cast<int>(table->c.size()))
            ? std::fabs(static_cast<double>(table->c[n - 1] * p))
            : 0.0;
    const double value = static_cast<double>(acc.sum);
    const double est = first_omitted + static_cast<double>(acc.peak) * kQuadEps * acc.terms +
                       1.2e-16 * std::fabs(value);
    return {value, est, n - 1};
}

EvalResult wright_moment(double alpha, double dbar, bool by_quadrature) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("wright_moment: alpha must be in (0, 1)");
    if (!(dbar >= 0.0)) throw DomainError("wright_moment: dbar must be >= 0");
    const double closed = gamma_fn(1.0 + dbar) / gamma_fn(1.0 + alpha * dbar);
    if (!by_quadrature) return {closed, 4e-16 * closed, 0};

    // Integrate up to the point where the decay envelope guarantees the tail
    // is below exp(-40) * poly; never past the validated argument range.
    const double c = (1.0 - alpha) * std::pow(alpha, alpha / (1.0 - alpha));
    const double cutoff = std::min(30.0, std::pow(40.0 / c, 1.0 - alpha));

    static const double gx[6] = {0.1252334085114689, 0.3678314989981802,
                                 0.5873179542866175, 0.7699026741943047,
                                 0.9041172563704749, 0.9815606342467192};
    static const double gw[6] = {0.2491470458134028, 0.2334925365383548,
                                 0.2031674267230659, 0.1600783285433462,
                                 0.1069393259953184, 0.0471753363865118};
    const int panels = 60;
    const double h = cutoff / panels;
    double integral = 0.0, node_err = 0.0;
    int evals = 0;
    for (int p = 0; p < panels; ++p) {
        const double mid = (p + 0.5) * h, half = 0.5 * h;
        for (int j = 0; j < 6; ++j) {
            for (int sgn = -1; sgn <= 1; sgn += 2) {
                const double th = mid + sgn * half * gx[j];
                const auto wm = wright_m(alpha, th);
                const double w = half * gw[j];
                integral += w * std::pow(th, dbar) * wm.value;
                node_err += w * std::pow(th, dbar) * wm.est_abs_error;
                ++evals;
            }
        }
    }
    const double tail = 50.0 * std::pow(cutoff, dbar) * std::exp(-40.0);
    const double est = node_err + tail + 1e-12 * std::fabs(integral);
    return {integral, est, evals};
}

} // namespace hilfer::specfun
