#include "hilfer/cli.hpp"

#include "hilfer/errors.hpp"
#include "hilfer/expr.hpp"
#include "hilfer/fracops.hpp"
#include "hilfer/gronwall.hpp"
#include "hilfer/model.hpp"
#include "hilfer/solver.hpp"
#include "hilfer/specfun.hpp"
#include "hilfer/stability.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace hilfer::cli {
namespace {

/// 17 significant digits: the shortest format that round-trips every double.
std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("config file not readable: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// FNV-1a, 64 bit, over raw bytes; the manifest's config fingerprint.
std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Accumulated CSV plus the manifest bookkeeping. Everything is buffered and
/// written once at the end, so partial failures never leave half a file and
/// worker pools cannot interleave rows.
struct Emitter {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string out_path; // empty: stdout, no manifest
    std::string csv;

    void row(std::initializer_list<std::string> fields) {
        bool first = true;
        for (const auto& f : fields) {
            if (!first) csv += ',';
            csv += f;
            first = false;
        }
        csv += '\n';
    }

    void flush() const {
        if (out_path.empty()) {
            std::fwrite(csv.data(), 1, csv.size(), stdout);
            return;
        }
        {
            std::ofstream out(out_path, std::ios::binary);
            if (!out) throw DomainError("cannot write output file: " + out_path);
            out.write(csv.data(), static_cast<std::streamsize>(csv.size()));
        }
        nlohmann::json man;
        man["command"] = command;
        man["config_hash"] = config_hash;
        man["seed"] = seed;
        man["tool_version"] = tool_version;
        man["outputs"] = nlohmann::json::array({out_path});
        const std::string man_path = out_path + ".manifest.json";
        std::ofstream mout(man_path, std::ios::binary);
        if (!mout) throw DomainError("cannot write manifest: " + man_path);
        mout << man.dump(2) << '\n';
    }
};

/// Worker pool sized by the job count, the machine, and HILFER_KIT_THREADS
/// (whichever is smallest; the env var is a cap, not a demand).
int pool_size(int n_jobs) {
    int cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap < 1) cap = 1;
    if (const char* env = std::getenv("HILFER_KIT_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1 && v < cap) cap = v;
    }
    return std::min(cap, std::max(1, n_jobs));
}

/// Runs job(i) for i in [0, n) on the pool; results keep index order. The
/// first failing index wins error reporting, independent of scheduling.
std::vector<std::string> run_indexed(int n, const std::function<std::string(int)>& job) {
    std::vector<std::string> out(static_cast<std::size_t>(n));
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                out[static_cast<std::size_t>(i)] = job(i);
            } catch (...) {
                errs[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    const int workers = pool_size(n);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (const auto& e : errs)
        if (e) std::rethrow_exception(e);
    return out;
}

std::function<double(double)> scalar_expr(const std::string& text,
                                          const std::string& where) {
    try {
        const auto e = expr::Expression::parse(text);
        return [e](double t) {
            expr::Env env;
            env.t = t;
            return e.eval(env);
        };
    } catch (const DomainError& err) {
        throw DomainError(where + ": " + err.what());
    }
}

// ---------------------------------------------------------------------------
// specfun eval

int cmd_specfun(const std::string& fn, const std::string& args_text, Emitter& em) {
    std::vector<double> a;
    std::stringstream ss(args_text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            a.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw DomainError("--args: '" + tok + "' is not a number");
        }
    }
    auto expect = [&](std::size_t n, const char* sig) {
        if (a.size() != n)
            throw DomainError("specfun " + fn + " expects --args " + sig);
    };
    if (fn == "gamma") {
        expect(1, "x");
        const double v = specfun::gamma_fn(a[0]);
        em.row({"fn", "x", "value", "est_err"});
        em.row({fn, num(a[0]), num(v), num(1e-12 * std::fabs(v))});
    } else if (fn == "mlf") {
        expect(3, "alpha,beta,z");
        const auto r = specfun::mittag_leffler(a[0], a[1], a[2]);
        em.row({"fn", "alpha", "beta", "z", "value", "est_err"});
        em.row({fn, num(a[0]), num(a[1]), num(a[2]), num(r.value),
                num(r.est_abs_error)});
    } else if (fn == "wright") {
        expect(2, "alpha,theta");
        const auto r = specfun::wright_m(a[0], a[1]);
        em.row({"fn", "alpha", "theta", "value", "est_err"});
        em.row({fn, num(a[0]), num(a[1]), num(r.value), num(r.est_abs_error)});
    } else if (fn == "moment") {
        expect(2, "alpha,dbar");
        const auto r = specfun::wright_moment(a[0], a[1]);
        em.row({"fn", "alpha", "dbar", "value", "est_err"});
        em.row({fn, num(a[0]), num(a[1]), num(r.value), num(r.est_abs_error)});
    } else {
        throw DomainError("--fn must be one of gamma, mlf, wright, moment");
    }
    em.flush();
    return exit_ok;
}

// ---------------------------------------------------------------------------
// ops

int cmd_ops(const std::string& config_text, int grid, Emitter& em) {
    auto j = nlohmann::json::parse(config_text, nullptr, false);
    if (j.is_discarded()) throw DomainError("ops config: not valid JSON");
    auto need_num = [&](const char* key) -> double {
        if (!j.contains(key) || !j[key].is_number())
            throw DomainError(std::string("ops config: field '") + key +
                              "' must be a number");
        return j[key].get<double>();
    };
    const fracops::FracOrder order(need_num("alpha"), need_num("beta"));
    const double T = need_num("T");
    const double a0 = j.value("a", 0.0);
    if (!(T > a0))
        throw DomainError("ops config: need T > a");
    if (!j.contains("expr") || !j["expr"].is_string())
        throw DomainError("ops config: field 'expr' must be an expression string");
    const auto f = scalar_expr(j["expr"].get<std::string>(), "ops config expr");

    fracops::PsiFunction psi = fracops::PsiFunction::identity();
    const std::string psi_name = j.value("psi", std::string("identity"));
    if (psi_name == "log" || psi_name == "logarithm")
        psi = fracops::PsiFunction::logarithm();
    else if (psi_name != "identity")
        throw DomainError("ops config: psi must be 'identity' or 'log'");

    if (grid < 4) throw DomainError("ops: --grid must be at least 4");
    fracops::SampledFunction u;
    u.nodes.resize(static_cast<std::size_t>(grid) + 1);
    u.values.resize(u.nodes.size());
    for (int i = 0; i <= grid; ++i) {
        const double t = a0 + (T - a0) * i / grid;
        u.nodes[static_cast<std::size_t>(i)] = t;
        u.values[static_cast<std::size_t>(i)] = f(t);
    }
    u.validate();
    psi.validate_on(u.nodes);

    std::vector<double> ts(u.nodes.begin() + 1, u.nodes.end() - 1);
    const auto integ = fracops::frac_integral(order.alpha(), psi, u, ts);
    const auto deriv = fracops::hilfer_derivative(order, psi, u, ts);

    em.row({"t", "integral", "derivative"});
    for (std::size_t i = 0; i < ts.size(); ++i)
        em.row({num(ts[i]), num(integ[i]), num(deriv[i])});
    em.flush();
    return exit_ok;
}

// ---------------------------------------------------------------------------
// bound

gronwall::GronwallInstance gronwall_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw DomainError("bound config: not valid JSON");
    auto need_num = [&](const char* key) -> double {
        if (!j.contains(key) || !j[key].is_number())
            throw DomainError(std::string("bound config: field '") + key +
                              "' must be a number");
        return j[key].get<double>();
    };
    gronwall::GronwallInstance inst;
    inst.alpha = need_num("alpha");
    inst.T = need_num("T");
    inst.a = j.value("a", 0.0);
    inst.delta = j.value("delta", 0.0);
    if (!j.contains("v") || !j["v"].is_string())
        throw DomainError("bound config: field 'v' must be an expression string");
    inst.v = scalar_expr(j["v"].get<std::string>(), "bound config v");
    inst.g = scalar_expr(j.value("g", std::string("0")), "bound config g");
    const std::string psi_name = j.value("psi", std::string("identity"));
    if (psi_name == "log" || psi_name == "logarithm")
        inst.psi = fracops::PsiFunction::logarithm();
    else if (psi_name != "identity")
        throw DomainError("bound config: psi must be 'identity' or 'log'");
    if (j.contains("impulse_times"))
        inst.impulse_times = j["impulse_times"].get<std::vector<double>>();
    if (j.contains("betas")) inst.betas = j["betas"].get<std::vector<double>>();
    inst.ensure();
    return inst;
}

int cmd_bound_config(const std::string& config_text, double t_query, bool has_t,
                     int grid, std::uint64_t seed, Emitter& em) {
    const auto inst = gronwall_from_json(config_text);
    if (has_t && !(t_query > inst.a && t_query <= inst.T))
        throw DomainError("bound: --t must lie in (a, T]");
    const auto rep = gronwall::verify_dominance(inst, grid, seed);
    em.row({"t", "u_tilde", "bound", "margin"});
    if (has_t) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < rep.ts.size(); ++k)
            if (std::fabs(rep.ts[k] - t_query) < std::fabs(rep.ts[best] - t_query))
                best = k;
        em.row({num(rep.ts[best]), num(rep.u_tilde[best]), num(rep.bound[best]),
                num(rep.margins[best])});
    } else {
        for (std::size_t k = 0; k < rep.ts.size(); ++k)
            em.row({num(rep.ts[k]), num(rep.u_tilde[k]), num(rep.bound[k]),
                    num(rep.margins[k])});
    }
    em.flush();
    return exit_ok;
}

int cmd_bound_verify(std::uint64_t seed, int instances, int grid, Emitter& em) {
    if (instances < 1) throw DomainError("bound verify: --instances must be >= 1");
    bool dominated = true;
    std::mutex verdict_mu;
    const auto rows = run_indexed(instances, [&](int i) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
        const auto inst = gronwall::random_instance(s);
        const auto rep = gronwall::verify_dominance(inst, grid, s);
        std::size_t worst = 0;
        for (std::size_t k = 1; k < rep.margins.size(); ++k)
            if (rep.margins[k] > rep.margins[worst]) worst = k;
        if (rep.margin > 1e-9) {
            const std::lock_guard<std::mutex> lock(verdict_mu);
            dominated = false;
        }
        return num(rep.ts[worst]) + ',' + num(rep.u_tilde[worst]) + ',' +
               num(rep.bound[worst]) + ',' + num(rep.margins[worst]);
    });
    em.row({"t", "u_tilde", "bound", "margin"});
    for (const auto& r : rows) em.csv += r + '\n';
    em.flush();
    if (!dominated) {
        std::fprintf(stderr, "bound verify: dominance margin exceeded 1e-9\n");
        return exit_certificate;
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------
// solve

int cmd_solve(const std::string& config_text, int grid, double tol, Emitter& em) {
    const auto spec = model::problem_from_json(config_text);
    const auto rep = solver::picard_solve(spec, grid, tol, 200);
    if (!rep.converged) {
        std::fprintf(stderr,
                     "solve: Picard iteration did not reach tol %.3g in %d "
                     "iterations (last residual %.3g)\n",
                     tol, rep.iterations,
                     rep.residual_history.empty() ? std::nan("")
                                                  : rep.residual_history.back());
        return exit_nonconvergence;
    }
    em.row({"segment", "t", "weighted_value", "value"});
    const auto& traj = rep.trajectory;
    for (std::size_t si = 0; si < traj.segments.size(); ++si) {
        const auto& seg = traj.segments[si];
        for (std::size_t k = 0; k < seg.nodes.size(); ++k)
            em.row({std::to_string(si), num(seg.nodes[k]), num(seg.w[k]),
                    num(traj.unweighted(si, k))});
    }
    em.flush();
    return exit_ok;
}

// ---------------------------------------------------------------------------
// stability

struct PerturbSpec {
    double eps = 0.0;
    double jump = 0.0;
    std::string phi_name = "const";
    std::function<double(double)> phi;
};

/// Grammar: eps=0.01,phi=exp[,jump=0.02]; profiles const|1, t|linear, exp.
PerturbSpec parse_perturb(const std::string& text) {
    PerturbSpec p;
    bool have_eps = false, have_phi = false;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw DomainError("--perturb: expected key=value, got '" + item + "'");
        const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
        if (key == "eps" || key == "jump") {
            double x = 0.0;
            try {
                std::size_t used = 0;
                x = std::stod(val, &used);
                if (used != val.size()) throw std::invalid_argument(val);
            } catch (const std::exception&) {
                throw DomainError("--perturb: '" + val + "' is not a number");
            }
            (key == "eps" ? p.eps : p.jump) = x;
            have_eps |= key == "eps";
        } else if (key == "phi") {
            p.phi_name = val;
            if (val == "const" || val == "1")
                p.phi = [](double) { return 1.0; };
            else if (val == "t" || val == "linear")
                p.phi = [](double t) { return t; };
            else if (val == "exp")
                p.phi = [](double t) { return std::exp(t); };
            else
                throw DomainError("--perturb: unknown profile '" + val +
                                  "' (const, t, exp)");
            have_phi = true;
        } else {
            throw DomainError("--perturb: unknown key '" + key + "'");
        }
    }
    if (!have_eps || !have_phi)
        throw DomainError("--perturb needs eps=<num>,phi=<profile>");
    if (!(p.eps > 0.0)) throw DomainError("--perturb: eps must be positive");
    if (p.jump < 0.0) throw DomainError("--perturb: jump must be nonnegative");
    return p;
}

int cmd_stability(const std::string& config_text, const PerturbSpec& pert, int grid,
                  double tol, Emitter& em) {
    const auto spec = model::problem_from_json(config_text);
    const auto u = solver::picard_solve(spec, grid, tol, 200);
    if (!u.converged) {
        std::fprintf(stderr, "stability: base solve did not converge\n");
        return exit_nonconvergence;
    }
    const auto pspec = stability::perturbed_problem(spec, pert.eps, pert.phi, pert.jump);
    const auto v = solver::picard_solve(pspec, grid, tol, 200);
    if (!v.converged) {
        std::fprintf(stderr, "stability: perturbed solve did not converge\n");
        return exit_nonconvergence;
    }
    const double eps = pert.eps;
    const auto phi = pert.phi;
    const model::PhiData pd([eps, phi](double t) { return eps * phi(t); }, pert.jump,
                            spec.mesh.T);
    const auto cert = stability::certify_uhr(spec, u.trajectory, v.trajectory, pd);

    em.row({"t", "observed_delta", "bound", "margin"});
    for (std::size_t k = 0; k < cert.times.size(); ++k)
        em.row({num(cert.times[k]), num(cert.observed[k]), num(cert.bound[k]),
                num(cert.bound[k] - cert.observed[k])});
    em.row({"C", num(cert.C), "verdict", cert.verdict ? "true" : "false"});
    em.flush();
    if (!cert.verdict) {
        std::fprintf(stderr, "stability: certificate verdict is negative\n");
        return exit_certificate;
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------

int run_impl(const std::vector<std::string>& args) {
    CLI::App app{"Weighted fractional evolution toolkit"};
    app.name("hilferkit");
    app.require_subcommand(1);

    // specfun eval
    auto* sf = app.add_subcommand("specfun", "Special function point evaluation");
    sf->require_subcommand(1);
    auto* sfe = sf->add_subcommand("eval", "Evaluate one function at one point");
    std::string sf_fn, sf_args, sf_out;
    sfe->add_option("--fn", sf_fn, "gamma | mlf | wright | moment")->required();
    sfe->add_option("--args", sf_args, "comma-separated numeric arguments")
        ->required();
    sfe->add_option("--out", sf_out, "CSV output path (default stdout)");

    // ops
    auto* ops = app.add_subcommand("ops", "Fractional integral/derivative tables");
    std::string ops_config, ops_out;
    int ops_grid = 256;
    ops->add_option("--config", ops_config, "JSON: alpha, beta, T, expr [, a, psi]")
        ->required();
    ops->add_option("--grid", ops_grid, "cells per table");
    ops->add_option("--out", ops_out, "CSV output path (default stdout)");

    // bound [verify]
    auto* bd = app.add_subcommand("bound", "Integral-inequality dominance bounds");
    bd->require_subcommand(0, 1);
    std::string bd_config, bd_out;
    double bd_t = 0.0;
    int bd_grid = 256;
    std::uint64_t bd_seed = 0;
    auto* bd_t_opt = bd->add_option("--t", bd_t, "report the node nearest this time");
    bd->add_option("--config", bd_config, "JSON inequality description");
    bd->add_option("--grid", bd_grid, "verification grid size");
    bd->add_option("--seed", bd_seed, "node-jitter seed");
    bd->add_option("--out", bd_out, "CSV output path (default stdout)");
    auto* bv = bd->add_subcommand("verify", "Random-instance dominance sweep");
    std::uint64_t bv_seed = 0;
    int bv_instances = 5, bv_grid = 256;
    std::string bv_out;
    bv->add_option("--seed", bv_seed, "base seed; instance i uses seed+i")
        ->required();
    bv->add_option("--instances", bv_instances, "number of random instances");
    bv->add_option("--grid", bv_grid, "verification grid size");
    bv->add_option("--out", bv_out, "CSV output path (default stdout)");

    // solve
    auto* sol = app.add_subcommand("solve", "Picard solve of a problem config");
    std::string sol_config, sol_out;
    int sol_grid = 256;
    double sol_tol = 1e-10;
    sol->add_option("--config", sol_config, "JSON problem description")->required();
    sol->add_option("--grid", sol_grid, "nodes per window");
    sol->add_option("--tol", sol_tol, "iteration stopping tolerance");
    sol->add_option("--out", sol_out, "CSV output path (default stdout)");

    // stability
    auto* st = app.add_subcommand("stability", "Perturb, re-solve, certify");
    std::string st_config, st_perturb, st_out;
    int st_grid = 256;
    double st_tol = 1e-10;
    st->add_option("--config", st_config, "JSON problem description")->required();
    st->add_option("--perturb", st_perturb, "eps=<num>,phi=<const|t|exp>[,jump=<num>]")
        ->required();
    st->add_option("--grid", st_grid, "nodes per window");
    st->add_option("--tol", st_tol, "iteration stopping tolerance");
    st->add_option("--out", st_out, "CSV output path (default stdout)");

    try {
        // CLI11's vector overload consumes a reversed copy
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    const std::string joined = [&] {
        std::string s;
        for (const auto& a : args) {
            s += a;
            s += '\x1f';
        }
        return s;
    }();

    Emitter em;
    if (app.got_subcommand(sf)) {
        em.command = "specfun eval";
        em.config_hash = hex64(fnv1a(joined));
        em.out_path = sf_out;
        return cmd_specfun(sf_fn, sf_args, em);
    }
    if (app.got_subcommand(ops)) {
        const auto text = read_file(ops_config);
        em.command = "ops";
        em.config_hash = hex64(fnv1a(text));
        em.out_path = ops_out;
        return cmd_ops(text, ops_grid, em);
    }
    if (app.got_subcommand(bd)) {
        if (bd->got_subcommand(bv)) {
            em.command = "bound verify";
            em.config_hash = hex64(fnv1a(joined));
            em.seed = bv_seed;
            em.out_path = bv_out;
            return cmd_bound_verify(bv_seed, bv_instances, bv_grid, em);
        }
        if (bd_config.empty())
            throw DomainError("bound: --config is required (or use 'bound verify')");
        const auto text = read_file(bd_config);
        em.command = "bound";
        em.config_hash = hex64(fnv1a(text));
        em.seed = bd_seed;
        em.out_path = bd_out;
        return cmd_bound_config(text, bd_t, bd_t_opt->count() > 0, bd_grid, bd_seed,
                                em);
    }
    if (app.got_subcommand(sol)) {
        const auto text = read_file(sol_config);
        em.command = "solve";
        em.config_hash = hex64(fnv1a(text));
        em.out_path = sol_out;
        return cmd_solve(text, sol_grid, sol_tol, em);
    }
    if (app.got_subcommand(st)) {
        const auto text = read_file(st_config);
        em.command = "stability";
        em.config_hash = hex64(fnv1a(text));
        em.out_path = st_out;
        return cmd_stability(text, parse_perturb(st_perturb), st_grid, st_tol, em);
    }
    return exit_usage; // unreachable: require_subcommand guarantees a branch
}

} // namespace

int run(const std::vector<std::string>& args) {
    try {
        return run_impl(args);
    } catch (const ConvergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_nonconvergence;
    } catch (const PointwiseImpulseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_nonconvergence;
    } catch (const Error& e) {
        // remaining library errors are validation-shaped: bad domain, grid,
        // precondition, pole, overflow, singular warp
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_validation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_validation;
    }
}

} // namespace hilfer::cli
