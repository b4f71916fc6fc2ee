#include "hilfer/model.hpp"

#include "hilfer/specfun.hpp"

#include "json.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace hilfer::model {

namespace {

// [0,1) doubles from the full 64-bit engine state; mt19937_64 is fully
// specified by the standard, so sampled certifications replay bit-identically.
class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : eng_(seed) {}

    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::mt19937_64 eng_;
};

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

/// Largest |E| over both kernel parameter values on a horizon grid; this is
/// the weighted-norm size of the scalar resolvent family, never below 1.
double scalar_family_sup(double lambda, const fracops::FracOrder& order, double horizon,
                         int n_grid) {
    const double alpha = order.alpha();
    const double params[2] = {alpha, order.gamma()};
    double sup = 1.0;
    for (int k = 0; k <= n_grid; ++k) {
        const double t = horizon * (static_cast<double>(k) / n_grid);
        const double z = lambda * std::pow(t, alpha);
        for (double b : params)
            sup = std::max(sup, std::fabs(specfun::mittag_leffler(alpha, b, z).value));
    }
    return sup;
}

struct EigenBasis {
    Eigen::MatrixXd V, Vinv;
    Eigen::VectorXd mu;
};

/// Real-spectrum eigendecomposition with a conditioning gate; defective
/// matrices produce nearly parallel pseudo-eigenvectors, caught here by the
/// basis condition number rather than an exact singularity test.
EigenBasis real_eigenbasis(const Eigen::MatrixXd& A) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(A);
    if (es.info() != Eigen::Success)
        throw DomainError("generator: eigendecomposition failed");
    const double scale = std::max(1.0, A.norm());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        if (std::fabs(es.eigenvalues()[i].imag()) > 1e-9 * scale)
            throw DomainError("generator: matrix kind requires a real spectrum");

    EigenBasis basis;
    basis.V = es.eigenvectors().real();
    basis.mu = es.eigenvalues().real();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis.V);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (!(smin > 1e-8 * svd.singularValues()(0)))
        throw DomainError(
            "generator: eigenbasis is numerically singular, matrix must be diagonalizable");
    basis.Vinv = Eigen::FullPivLU<Eigen::MatrixXd>(basis.V).inverse();
    return basis;
}

/// Same sup for a diagonalizable real-spectrum matrix, measured in the
/// spectral norm of V diag(E(mu_i t^alpha)) V^{-1}.
double matrix_family_sup(const Eigen::MatrixXd& V, const Eigen::MatrixXd& Vinv,
                         const Eigen::VectorXd& mu, const fracops::FracOrder& order,
                         double horizon, int n_grid) {
    const double alpha = order.alpha();
    const double params[2] = {alpha, order.gamma()};
    const Eigen::Index n = mu.size();
    double sup = 1.0;
    Eigen::VectorXd diag(n);
    for (int k = 0; k <= n_grid; ++k) {
        const double t = horizon * (static_cast<double>(k) / n_grid);
        const double ta = std::pow(t, alpha);
        for (double b : params) {
            for (Eigen::Index i = 0; i < n; ++i)
                diag[i] = specfun::mittag_leffler(alpha, b, mu[i] * ta).value;
            const Eigen::MatrixXd E = V * diag.asDiagonal() * Vinv;
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(E);
            sup = std::max(sup, svd.singularValues()(0));
        }
    }
    return sup;
}

} // namespace

std::optional<std::string> ImpulseMesh::check() const {
    if (!std::isfinite(T) || T <= 0.0) return "mesh: T must be finite and positive";
    if (t_times.size() != s_times.size())
        return "mesh: t and s must list one entry per impulse window";
    const int mm = m();
    for (int i = 0; i < mm; ++i)
        if (!std::isfinite(t_times[i]) || !std::isfinite(s_times[i]))
            return "mesh: window endpoints must be finite";
    for (int i = 0; i < mm; ++i) {
        const std::string ti = "t_" + std::to_string(i + 1);
        const std::string si = "s_" + std::to_string(i + 1);
        if (i == 0) {
            if (!(t_times[0] > 0.0)) return "mesh ordering: 0 < t_1 violated";
        } else if (!(s_times[i - 1] <= t_times[i])) {
            return "mesh ordering: s_" + std::to_string(i) + " <= " + ti + " violated";
        }
        if (!(t_times[i] <= s_times[i]))
            return "mesh ordering: " + ti + " <= " + si + " violated";
    }
    if (mm > 0 && !(s_times[mm - 1] <= T))
        return "mesh ordering: s_" + std::to_string(mm) + " <= T violated";
    return std::nullopt;
}

void ImpulseMesh::ensure() const {
    if (auto bad = check()) throw DomainError(*bad);
}

Generator Generator::scalar(double lambda, const fracops::FracOrder& order, double horizon) {
    if (!std::isfinite(lambda)) throw DomainError("generator: lambda must be finite");
    if (!std::isfinite(horizon) || horizon <= 0.0)
        throw DomainError("generator: horizon must be finite and positive");
    Generator g;
    g.kind = Kind::scalar;
    g.lambda = lambda;
    g.bound_M = scalar_family_sup(lambda, order, horizon, 256);
    return g;
}

Generator Generator::dense(const Eigen::MatrixXd& A, const fracops::FracOrder& order,
                           double horizon) {
    if (A.rows() == 0 || A.rows() != A.cols())
        throw DomainError("generator: matrix must be square and nonempty");
    if (!A.allFinite()) throw DomainError("generator: matrix entries must be finite");
    if (!std::isfinite(horizon) || horizon <= 0.0)
        throw DomainError("generator: horizon must be finite and positive");

    const EigenBasis basis = real_eigenbasis(A);

    Generator g;
    g.kind = Kind::matrix;
    g.matrix = A;
    g.bound_M = matrix_family_sup(basis.V, basis.Vinv, basis.mu, order, horizon, 64);
    return g;
}

double ImpulseMaps::max_L_xi() const {
    double v = 0.0;
    for (double L : L_xi) v = std::max(v, L);
    return v;
}

PhiData::PhiData(std::function<double(double)> varphi, double phi, double horizon)
    : varphi_(std::move(varphi)), phi_(phi), horizon_(horizon) {
    if (!varphi_) throw DomainError("cumulative dominance: profile callable is empty");
    if (!std::isfinite(horizon_) || horizon_ <= 0.0)
        throw DomainError("cumulative dominance: horizon must be finite and positive");
    if (!std::isfinite(phi_) || phi_ < 0.0)
        throw DomainError("cumulative dominance: impulse tolerance must be finite and nonnegative");

    const int n = 2048;
    std::vector<double> v(n + 1);
    double scale = 0.0;
    for (int k = 0; k <= n; ++k) {
        v[k] = varphi_(horizon_ * (static_cast<double>(k) / n));
        if (!std::isfinite(v[k]))
            throw DomainError("cumulative dominance: profile must be finite on the horizon");
        scale = std::max(scale, std::fabs(v[k]));
    }
    const double tol = 1e-12 * std::max(1.0, scale);
    for (int k = 0; k <= n; ++k)
        if (v[k] < -tol) throw DomainError("cumulative dominance: profile must be nonnegative");
    for (int k = 0; k < n; ++k)
        if (v[k + 1] < v[k] - tol)
            throw DomainError("cumulative dominance: profile must be nondecreasing");

    const double h = horizon_ / n;
    double integral = 0.0;
    double c = 0.0;
    bool any_positive = false;
    for (int k = 1; k <= n; ++k) {
        integral += 0.5 * h * (v[k - 1] + v[k]);
        if (v[k] > tol) {
            any_positive = true;
            c = std::max(c, integral / v[k]);
        } else if (integral > tol * horizon_) {
            // cannot happen for a nondecreasing profile unless the callable is
            // inconsistent between samples
            throw DomainError("cumulative dominance: integral exceeds every multiple of the profile");
        }
    }
    c_ = any_positive ? c : horizon_;
    if (!(c_ > 0.0)) c_ = horizon_;
}

KernelSupIntegrals kernel_sup_integrals(const ProblemSpec& spec, int n_grid) {
    if (n_grid < 16) throw DomainError("kernel integrals: n_grid must be at least 16");
    spec.mesh.ensure();
    const double T = spec.mesh.T;
    const double mu = 2.0 - spec.order.alpha();
    const double gamma_mu = std::tgamma(mu);
    const fracops::PsiFunction id = fracops::PsiFunction::identity();

    auto sup_for = [&](const std::function<double(double, double)>& ker) -> double {
        double best = 0.0;
        fracops::SampledFunction u;
        u.nodes.resize(n_grid + 1);
        u.values.resize(n_grid + 1);
        for (int k = 1; k <= n_grid; ++k) {
            const double t = T * (static_cast<double>(k) / n_grid);
            for (int j = 0; j <= n_grid; ++j) {
                const double s = t * (static_cast<double>(j) / n_grid);
                const double val = ker ? ker(t, s) : 0.0;
                if (!std::isfinite(val))
                    throw DomainError("kernel integrals: kernel not finite at a sampled point");
                u.nodes[j] = s;
                u.values[j] = std::fabs(val);
            }
            best = std::max(best, gamma_mu * fracops::frac_integral(mu, id, u, t));
        }
        return best;
    };

    KernelSupIntegrals out;
    out.F1 = sup_for(spec.kernels.K);
    out.F2 = sup_for(spec.kernels.H);
    out.F3 = std::pow(T, mu) / mu;
    out.F3_quadrature = sup_for([](double, double) { return 1.0; });
    return out;
}

bool ValidationReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

std::string ValidationReport::summary() const {
    std::string out;
    for (const auto& c : checks) {
        out += c.name;
        out += c.pass ? ": PASS" : ": FAIL";
        if (!c.detail.empty()) {
            out += " (";
            out += c.detail;
            out += ")";
        }
        out += "\n";
    }
    return out;
}

std::string ValidationReport::first_failure() const {
    for (const auto& c : checks)
        if (!c.pass) return c.name + ": " + c.detail;
    return {};
}

namespace {

/// Constant-w trajectory respecting the mesh's window structure; degenerate
/// impulse windows (t_i == s_i) carry no segment.
fracops::WeightedTrajectory constant_trajectory(const ImpulseMesh& mesh, double gamma,
                                                double w) {
    fracops::WeightedTrajectory traj;
    traj.gamma = gamma;
    auto push = [&](double anchor, double end) {
        if (!(end > anchor)) return;
        fracops::TrajectorySegment seg;
        seg.anchor = anchor;
        const int n = 8;
        for (int k = 1; k <= n; ++k) {
            seg.nodes.push_back(anchor + (end - anchor) * (static_cast<double>(k) / n));
            seg.w.push_back(w);
        }
        traj.segments.push_back(std::move(seg));
    };
    for (int i = 0; i <= mesh.m(); ++i) {
        push(mesh.evolution_start(i), mesh.evolution_end(i));
        if (i < mesh.m()) push(mesh.t_times[i], mesh.s_times[i]);
    }
    return traj;
}

struct QuotientScan {
    double worst = 0.0;
    bool ok(double declared) const { return worst <= declared * (1.0 + 1e-9) + 1e-12; }
    std::string detail(double declared) const {
        return "max sampled quotient " + fmt(worst) + " vs declared " + fmt(declared);
    }
};

} // namespace

ValidationReport validate(const ProblemSpec& spec, std::uint64_t seed) {
    ValidationReport rep;
    auto add = [&rep](std::string name, bool pass, std::string detail) {
        rep.checks.push_back({std::move(name), pass, std::move(detail)});
    };

    const auto mesh_bad = spec.mesh.check();
    if (mesh_bad)
        add("mesh ordering", false, *mesh_bad);
    else
        add("mesh ordering", true,
            "window chain verified, m = " + std::to_string(spec.mesh.m()));

    {
        const bool ok = std::isfinite(spec.delta) && spec.delta > 0.0 && spec.delta <= 1.0;
        add("metric exponent", ok,
            ok ? "delta = " + fmt(spec.delta) : "delta must lie in (0, 1]");
    }

    add("initial datum", std::isfinite(spec.u0),
        std::isfinite(spec.u0) ? "u0 = " + fmt(spec.u0) : "u0 must be finite");

    {
        const bool ok = spec.impulses.xi.size() == spec.impulses.L_xi.size() &&
                        static_cast<int>(spec.impulses.xi.size()) == spec.mesh.m();
        add("impulse map count", ok,
            ok ? std::to_string(spec.impulses.xi.size()) + " maps with constants"
               : "need one jump map and one constant per impulse window");
    }

    {
        const bool ok = spec.gen.kind == Generator::Kind::scalar ||
                        spec.gen.matrix.rows() == 1;
        add("dimension consistency", ok,
            ok ? "scalar state matches generator"
               : "u0 is scalar but the generator acts on dimension " +
                     std::to_string(spec.gen.matrix.rows()));
    }

    if (!mesh_bad) {
        try {
            double sup = 1.0;
            if (spec.gen.kind == Generator::Kind::scalar) {
                sup = scalar_family_sup(spec.gen.lambda, spec.order, spec.mesh.T, 256);
            } else {
                const EigenBasis basis = real_eigenbasis(spec.gen.matrix);
                sup = matrix_family_sup(basis.V, basis.Vinv, basis.mu, spec.order,
                                        spec.mesh.T, 64);
            }
            const bool ok = spec.gen.bound_M >= 1.0 && spec.gen.bound_M >= sup * (1.0 - 1e-9);
            add("generator bound", ok,
                "resolvent family sup " + fmt(sup) + " vs declared " + fmt(spec.gen.bound_M));
        } catch (const Error& e) {
            add("generator bound", false, e.what());
        }
    }

    const double T = spec.mesh.T;
    const double R = 4.0 * (1.0 + std::fabs(spec.u0));
    Sampler rng(seed);

    if (spec.nonlin.f) {
        const double declared[3] = {spec.nonlin.L1, spec.nonlin.L2, spec.nonlin.L3};
        for (int slot = 0; slot < 3; ++slot) {
            QuotientScan scan;
            for (int trial = 0; trial < 10000; ++trial) {
                const double t = rng.uniform(0.0, T);
                double x[3] = {rng.uniform(-R, R), rng.uniform(-R, R), rng.uniform(-R, R)};
                const double a = x[slot];
                const double fa = spec.nonlin.f(t, x[0], x[1], x[2]);
                x[slot] = rng.uniform(-R, R);
                const double fb = spec.nonlin.f(t, x[0], x[1], x[2]);
                const double dx = std::fabs(x[slot] - a);
                if (dx < 1e-12) continue;
                scan.worst = std::max(scan.worst, std::fabs(fa - fb) / dx);
            }
            add("forcing slot-" + std::to_string(slot + 1) + " Lipschitz",
                scan.ok(declared[slot]), scan.detail(declared[slot]));
        }
    } else {
        add("forcing Lipschitz", true, "no forcing term");
    }

    if (!mesh_bad) {
        const int n_xi = static_cast<int>(
            std::min(spec.impulses.xi.size(), spec.impulses.L_xi.size()));
        for (int i = 0; i < std::min(n_xi, spec.mesh.m()); ++i) {
            QuotientScan scan;
            for (int trial = 0; trial < 2000; ++trial) {
                const double t = rng.uniform(spec.mesh.t_times[i], spec.mesh.s_times[i]);
                const double a = rng.uniform(-R, R);
                const double b = rng.uniform(-R, R);
                if (std::fabs(a - b) < 1e-12) continue;
                scan.worst = std::max(
                    scan.worst, std::fabs(spec.impulses.xi[i](t, a) - spec.impulses.xi[i](t, b)) /
                                    std::fabs(a - b));
            }
            add("impulse " + std::to_string(i + 1) + " Lipschitz",
                scan.ok(spec.impulses.L_xi[i]), scan.detail(spec.impulses.L_xi[i]));
        }
    }

    if (spec.impulses.g && !mesh_bad) {
        QuotientScan scan;
        for (int trial = 0; trial < 200; ++trial) {
            const double a = rng.uniform(-R, R);
            const double b = rng.uniform(-R, R);
            if (std::fabs(a - b) < 1e-12) continue;
            const double ga = spec.impulses.g(constant_trajectory(spec.mesh, spec.order.gamma(), a));
            const double gb = spec.impulses.g(constant_trajectory(spec.mesh, spec.order.gamma(), b));
            scan.worst = std::max(scan.worst, std::fabs(ga - gb) / std::fabs(a - b));
        }
        add("nonlocal term Lipschitz", scan.ok(spec.impulses.L_tilde),
            scan.detail(spec.impulses.L_tilde));
    } else {
        add("nonlocal term Lipschitz", true, "no nonlocal term");
    }

    {
        bool ok = true;
        for (int i = 0; i <= 64 && ok; ++i) {
            const double t = T * (static_cast<double>(i) / 64.0);
            for (int jj = 0; jj <= i && ok; ++jj) {
                const double s = t * (i == 0 ? 0.0 : static_cast<double>(jj) / i);
                if (spec.kernels.K && !std::isfinite(spec.kernels.K(t, s))) ok = false;
                if (spec.kernels.H && !std::isfinite(spec.kernels.H(t, s))) ok = false;
            }
        }
        add("kernel sampling", ok,
            ok ? "finite on the sampled triangle" : "kernel not finite at a sampled point");
    }

    return rep;
}

namespace {

using nlohmann::json;

[[noreturn]] void config_fail(const std::string& field, const std::string& what) {
    throw DomainError("config field '" + field + "': " + what);
}

const json& get_member(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) config_fail(path, "must be an object");
    const auto it = obj.find(key);
    if (it == obj.end()) config_fail(path + "." + key, "is required");
    return *it;
}

const json* find_member(const json& obj, const char* key) {
    if (!obj.is_object()) return nullptr;
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& j, const std::string& field) {
    if (!j.is_number()) config_fail(field, "must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) config_fail(field, "must be finite");
    return v;
}

std::vector<double> get_number_array(const json& j, const std::string& field) {
    if (!j.is_array()) config_fail(field, "must be an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(get_number(j[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

expr::Expression get_expression(const json& j, const std::string& field,
                                std::initializer_list<int> allowed,
                                const char* allowed_names) {
    if (!j.is_string()) config_fail(field, "must be an expression string");
    expr::Expression e;
    try {
        e = expr::Expression::parse(j.get<std::string>());
    } catch (const DomainError& err) {
        config_fail(field, err.what());
    }
    static constexpr int kAll[6] = {expr::Expression::kT,  expr::Expression::kS,
                                    expr::Expression::kU,  expr::Expression::kX1,
                                    expr::Expression::kX2, expr::Expression::kX3};
    for (int var : kAll) {
        if (!e.uses(var)) continue;
        bool ok = false;
        for (int a : allowed) ok = ok || a == var;
        if (!ok)
            config_fail(field, std::string("may only use ") + allowed_names);
    }
    return e;
}

} // namespace

ProblemSpec problem_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw DomainError(std::string("config: not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw DomainError("config: top level must be an object");

    ProblemSpec spec;

    {
        const json& jo = get_member(j, "order", "config");
        const double alpha = get_number(get_member(jo, "alpha", "order"), "order.alpha");
        const double beta = get_number(get_member(jo, "beta", "order"), "order.beta");
        try {
            spec.order = fracops::FracOrder(alpha, beta);
        } catch (const DomainError& e) {
            config_fail("order", e.what());
        }
    }

    {
        const json& jm = get_member(j, "mesh", "config");
        spec.mesh.T = get_number(get_member(jm, "T", "mesh"), "mesh.T");
        if (const json* jt = find_member(jm, "t"))
            spec.mesh.t_times = get_number_array(*jt, "mesh.t");
        if (const json* js = find_member(jm, "s"))
            spec.mesh.s_times = get_number_array(*js, "mesh.s");
        spec.mesh.ensure();
    }

    spec.u0 = get_number(get_member(j, "u0", "config"), "u0");

    spec.delta = 1.0;
    if (const json* jd = find_member(j, "delta")) spec.delta = get_number(*jd, "delta");
    if (!(spec.delta > 0.0 && spec.delta <= 1.0))
        config_fail("delta", "must lie in (0, 1]");

    if (const json* jn = find_member(j, "nonlinearity")) {
        const expr::Expression e =
            get_expression(get_member(*jn, "expr", "nonlinearity"), "nonlinearity.expr",
                           {expr::Expression::kT, expr::Expression::kX1,
                            expr::Expression::kX2, expr::Expression::kX3},
                           "t, x1, x2, x3");
        spec.nonlin.f = [e](double t, double x1, double x2, double x3) {
            expr::Env env;
            env.t = t;
            env.x1 = x1;
            env.x2 = x2;
            env.x3 = x3;
            return e.eval(env);
        };
        spec.nonlin.source = e.text();
        spec.nonlin.uses_x2 = e.uses(expr::Expression::kX2);
        spec.nonlin.uses_x3 = e.uses(expr::Expression::kX3);
        const std::vector<double> L =
            get_number_array(get_member(*jn, "L", "nonlinearity"), "nonlinearity.L");
        if (L.size() != 3) config_fail("nonlinearity.L", "must list three constants");
        for (double v : L)
            if (v < 0.0) config_fail("nonlinearity.L", "constants must be nonnegative");
        spec.nonlin.L1 = L[0];
        spec.nonlin.L2 = L[1];
        spec.nonlin.L3 = L[2];
        if (const json* jM = find_member(*jn, "M"))
            spec.nonlin.M_f = get_number(*jM, "nonlinearity.M");
    } else {
        spec.nonlin.f = [](double, double, double, double) { return 0.0; };
        spec.nonlin.source = "0";
        spec.nonlin.uses_x2 = spec.nonlin.uses_x3 = false;
    }

    if (const json* jk = find_member(j, "kernels")) {
        auto build = [&](const char* key, std::function<double(double, double)>& fn,
                         std::string& source) {
            const json* jker = find_member(*jk, key);
            if (!jker) return;
            const expr::Expression e = get_expression(
                *jker, std::string("kernels.") + key,
                {expr::Expression::kT, expr::Expression::kS}, "t, s");
            fn = [e](double t, double s) {
                expr::Env env;
                env.t = t;
                env.s = s;
                return e.eval(env);
            };
            source = e.text();
        };
        build("K", spec.kernels.K, spec.kernels.K_source);
        build("H", spec.kernels.H, spec.kernels.H_source);
    }

    if (const json* ji = find_member(j, "impulses")) {
        if (!ji->is_array()) config_fail("impulses", "must be an array");
        for (std::size_t i = 0; i < ji->size(); ++i) {
            const std::string path = "impulses[" + std::to_string(i) + "]";
            const json& item = (*ji)[i];
            const expr::Expression e = get_expression(
                get_member(item, "expr", path), path + ".expr",
                {expr::Expression::kT, expr::Expression::kU}, "t, u");
            spec.impulses.xi.push_back([e](double t, double u) {
                expr::Env env;
                env.t = t;
                env.u = u;
                return e.eval(env);
            });
            const double L = get_number(get_member(item, "L", path), path + ".L");
            if (L < 0.0) config_fail(path + ".L", "must be nonnegative");
            spec.impulses.L_xi.push_back(L);
        }
    }
    if (static_cast<int>(spec.impulses.xi.size()) != spec.mesh.m())
        config_fail("impulses", "need exactly one jump map per impulse window (mesh has " +
                                    std::to_string(spec.mesh.m()) + ")");

    if (const json* jg = find_member(j, "g")) {
        const expr::Expression e =
            get_expression(get_member(*jg, "expr", "g"), "g.expr",
                           {expr::Expression::kU}, "u (the weighted terminal value)");
        spec.impulses.g = [e](const fracops::WeightedTrajectory& traj) {
            if (traj.segments.empty() || traj.segments.back().w.empty())
                throw GridError("nonlocal term: trajectory has no terminal value");
            expr::Env env;
            env.u = traj.segments.back().w.back();
            return e.eval(env);
        };
        spec.impulses.g_source = e.text();
        const double L = get_number(get_member(*jg, "L", "g"), "g.L");
        if (L < 0.0) config_fail("g.L", "must be nonnegative");
        spec.impulses.L_tilde = L;
    }

    {
        const json& jgen = get_member(j, "generator", "config");
        const json& jkind = get_member(jgen, "kind", "generator");
        if (!jkind.is_string()) config_fail("generator.kind", "must be a string");
        const std::string kind = jkind.get<std::string>();
        if (kind == "scalar") {
            const double lambda =
                get_number(get_member(jgen, "lambda", "generator"), "generator.lambda");
            spec.gen = Generator::scalar(lambda, spec.order, spec.mesh.T);
        } else if (kind == "matrix") {
            const json& jmat = get_member(jgen, "matrix", "generator");
            if (!jmat.is_array() || jmat.empty())
                config_fail("generator.matrix", "must be a nonempty array of rows");
            const std::size_t n = jmat.size();
            Eigen::MatrixXd A(n, n);
            for (std::size_t r = 0; r < n; ++r) {
                const std::string row = "generator.matrix[" + std::to_string(r) + "]";
                const std::vector<double> vals = get_number_array(jmat[r], row);
                if (vals.size() != n) config_fail(row, "matrix must be square");
                for (std::size_t c = 0; c < n; ++c) A(r, c) = vals[c];
            }
            spec.gen = Generator::dense(A, spec.order, spec.mesh.T);
        } else {
            config_fail("generator.kind", "must be \"scalar\" or \"matrix\"");
        }
    }

    return spec;
}

} // namespace hilfer::model
