#include "hilfer/gronwall.hpp"

#include "hilfer/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace hilfer::gronwall {

namespace {

double uniform_draw(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// hi^alpha - lo^alpha for hi >= lo >= 0 without cancellation when the two
/// are close (the bulk of the product-integration cells).
double power_step(double alpha, double hi, double lo) {
    if (lo <= 0.0) return std::pow(hi, alpha);
    const double r = (hi - lo) / lo;
    if (r < 0.5) return std::pow(lo, alpha) * std::expm1(alpha * std::log1p(r));
    return std::pow(hi, alpha) - std::pow(lo, alpha);
}

double ml_one_param(double alpha, double z) {
    return specfun::mittag_leffler(alpha, 1.0, z).value;
}

double eval_nonneg(const std::function<double(double)>& f, double t, const char* name) {
    const double val = f(t);
    if (!std::isfinite(val)) throw DomainError(std::string("bound: ") + name + " must be finite");
    if (val < 0.0) throw DomainError(std::string("bound: ") + name + " must be nonnegative");
    return val;
}

/// Shared evaluation core; assumes ensure() has passed and a <= t <= T. At
/// t == a every warp difference vanishes and the value degenerates to
/// v(a)/(1-delta).
double bound_core(const GronwallInstance& inst, double t) {
    const double slack = 1.0 - inst.delta;
    const double pa = inst.psi.value(inst.a);
    const double pt = inst.psi.value(t);
    if (!std::isfinite(pa) || !std::isfinite(pt) || !(pt >= pa))
        throw SingularityError("bound: warp must be finite and increasing on [a, t]");

    const double vt = eval_nonneg(inst.v, t, "v");
    const double gt = eval_nonneg(inst.g, t, "g");
    const double rate = gt / slack * specfun::gamma_fn(inst.alpha);

    auto ml_at = [&](double x) {
        const double px = inst.psi.value(x);
        if (!std::isfinite(px)) throw SingularityError("bound: warp must be finite on [a, t]");
        return ml_one_param(inst.alpha, rate * std::pow(px - pa, inst.alpha));
    };

    double prod = 1.0;
    for (std::size_t k = 0; k < inst.impulse_times.size(); ++k) {
        if (!(inst.impulse_times[k] < t)) break;
        prod *= 1.0 + inst.betas[k] / slack * ml_at(inst.impulse_times[k]);
    }
    return vt / slack * prod * ml_at(t);
}

} // namespace

void GronwallInstance::ensure() const {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw DomainError("bound: alpha must lie in (0, 1]");
    if (!std::isfinite(a) || !std::isfinite(T) || !(T > a))
        throw DomainError("bound: need finite endpoints with T > a");
    if (!(delta >= 0.0) || delta >= 1.0)
        throw DomainError("bound: implicit coefficient delta must lie in [0, 1)");
    if (!v || !g) throw DomainError("bound: v and g callables are required");
    if (impulse_times.size() != betas.size())
        throw DomainError("bound: need one weight per impulse time");
    for (std::size_t k = 0; k < impulse_times.size(); ++k) {
        if (!(impulse_times[k] > a) || !(impulse_times[k] < T))
            throw DomainError("bound: impulse times must lie inside (a, T)");
        if (k > 0 && !(impulse_times[k] > impulse_times[k - 1]))
            throw DomainError("bound: impulse times must be strictly increasing");
        if (!(betas[k] > 0.0) || !std::isfinite(betas[k]))
            throw DomainError("bound: impulse weights must be positive and finite");
    }
}

double gronwall_bound(const GronwallInstance& inst, double t) {
    inst.ensure();
    if (!(t > inst.a)) throw DomainError("bound: t must exceed the interval start");
    if (!(t <= inst.T)) throw DomainError("bound: t must not exceed the horizon");
    return bound_core(inst, t);
}

double gronwall_bound_simple(const GronwallInstance& inst, double t) {
    if (inst.delta != 0.0)
        throw DomainError("bound: the simple form requires delta = 0");
    if (!inst.impulse_times.empty())
        throw DomainError("bound: the simple form admits no impulse terms");
    return gronwall_bound(inst, t);
}

DominanceReport verify_dominance(const GronwallInstance& inst, int n_grid,
                                 std::uint64_t seed) {
    inst.ensure();
    if (n_grid < 8) throw DomainError("dominance: n_grid must be at least 8");

    const double span = inst.T - inst.a;
    std::mt19937_64 eng(seed);

    // jittered uniform grid with impulse times snapped in as exact nodes
    std::vector<double> nodes;
    nodes.reserve(static_cast<std::size_t>(n_grid) + inst.impulse_times.size() + 1);
    nodes.push_back(inst.a);
    for (int i = 1; i < n_grid; ++i) {
        const double frac = (i + 0.6 * (uniform_draw(eng) - 0.5)) / n_grid;
        nodes.push_back(inst.a + span * frac);
    }
    nodes.push_back(inst.T);
    for (double tk : inst.impulse_times) {
        for (double& x : nodes)
            if (x != tk && std::fabs(x - tk) < 1e-9 * span) x = tk;
        nodes.push_back(tk);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    const std::size_t n = nodes.size();

    std::vector<double> warp(n);
    for (std::size_t i = 0; i < n; ++i) {
        warp[i] = inst.psi.value(nodes[i]);
        if (!std::isfinite(warp[i]) || (i > 0 && !(warp[i] > warp[i - 1])))
            throw SingularityError("dominance: warp must be finite and increasing on [a, T]");
    }

    std::vector<double> vv(n), gg(n);
    double g_scale = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        vv[i] = eval_nonneg(inst.v, nodes[i], "v");
        gg[i] = eval_nonneg(inst.g, nodes[i], "g");
        g_scale = std::max(g_scale, gg[i]);
    }
    for (std::size_t i = 1; i < n; ++i)
        if (gg[i] < gg[i - 1] - 1e-12 * g_scale)
            throw DomainError("dominance: g must be nondecreasing on [a, T]");

    const double slack = 1.0 - inst.delta;
    std::vector<double> u(n);
    u[0] = vv[0] / slack;

    double jump_sum = 0.0;
    std::size_t next_imp = 0;
    for (std::size_t j = 1; j < n; ++j) {
        while (next_imp < inst.impulse_times.size() &&
               inst.impulse_times[next_imp] < nodes[j]) {
            const auto it = std::lower_bound(nodes.begin(), nodes.end(),
                                             inst.impulse_times[next_imp]);
            jump_sum += inst.betas[next_imp] *
                        u[static_cast<std::size_t>(it - nodes.begin())];
            ++next_imp;
        }
        // left-frozen product integration of the weakly singular kernel
        double integral = 0.0;
        for (std::size_t i = 0; i < j; ++i)
            integral +=
                u[i] * power_step(inst.alpha, warp[j] - warp[i], warp[j] - warp[i + 1]);
        integral /= inst.alpha;
        u[j] = (vv[j] + gg[j] * integral + jump_sum) / slack;
        if (!std::isfinite(u[j]))
            throw ConvergenceError("dominance: forward substitution left the finite range");
    }

    DominanceReport rep;
    rep.ts = nodes;
    rep.u_tilde = u;
    rep.bound.resize(n);
    rep.margins.resize(n);
    rep.margin = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        rep.bound[j] = bound_core(inst, nodes[j]);
        rep.margins[j] = (u[j] - rep.bound[j]) / (1.0 + std::fabs(rep.bound[j]));
        rep.margin = std::max(rep.margin, rep.margins[j]);
    }
    return rep;
}

namespace {

/// Nondecreasing nonnegative random profile: a step staircase or a degree-2
/// polynomial with nonnegative coefficients, scaled to roughly [0, scale].
std::function<double(double)> random_monotone(std::mt19937_64& eng, double a, double T,
                                              double scale) {
    if (uniform_draw(eng) < 0.5) {
        const double base = scale * uniform_draw(eng) * 0.3;
        std::vector<double> times(3), heights(3);
        for (int j = 0; j < 3; ++j) {
            times[j] = a + (T - a) * uniform_draw(eng);
            heights[j] = scale * uniform_draw(eng) / 3.0;
        }
        std::sort(times.begin(), times.end());
        return [base, times, heights](double t) {
            double val = base;
            for (std::size_t j = 0; j < times.size(); ++j)
                if (t >= times[j]) val += heights[j];
            return val;
        };
    }
    const double c0 = scale * uniform_draw(eng) * 0.3;
    const double c1 = scale * uniform_draw(eng) * 0.4;
    const double c2 = scale * uniform_draw(eng) * 0.3;
    const double span = T - a;
    return [c0, c1, c2, a, span](double t) {
        const double x = (t - a) / span;
        return c0 + c1 * x + c2 * x * x;
    };
}

} // namespace

GronwallInstance random_instance(std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    GronwallInstance inst;

    if (uniform_draw(eng) < 0.2) {
        inst.psi = fracops::PsiFunction::logarithm();
        inst.a = 1.0;
    } else {
        inst.psi = fracops::PsiFunction::identity();
        inst.a = uniform_draw(eng) < 0.5 ? 0.0 : 0.25;
    }
    inst.T = inst.a + 0.8 + 0.7 * uniform_draw(eng);
    inst.alpha = 0.3 + 0.6 * uniform_draw(eng);
    inst.delta = uniform_draw(eng) < 0.3 ? 0.0 : 0.5 * uniform_draw(eng);
    inst.v = random_monotone(eng, inst.a, inst.T, 2.0);
    inst.g = random_monotone(eng, inst.a, inst.T, 1.0);

    const int m = static_cast<int>(uniform_draw(eng) * 4.0); // 0..3
    const double span = inst.T - inst.a;
    std::vector<double> times;
    for (int k = 0; k < m; ++k)
        times.push_back(inst.a + span * (0.1 + 0.8 * uniform_draw(eng)));
    std::sort(times.begin(), times.end());
    for (double tk : times) {
        if (!inst.impulse_times.empty() && tk - inst.impulse_times.back() < 0.02 * span)
            continue; // keep windows separated
        inst.impulse_times.push_back(tk);
        inst.betas.push_back(0.05 + 0.95 * uniform_draw(eng));
    }
    return inst;
}

} // namespace hilfer::gronwall
