#include "nle/solver.hpp"

#include "nle/errors.hpp"
#include "nle/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nle {

void validate(const solver_config& cfg) {
    const bool ok = cfg.max_iter > 0 && cfg.step0 > 0 && cfg.backtrack > 0 && cfg.backtrack < 1 && cfg.armijo > 0 &&
                    cfg.armijo < 1 && cfg.grad_tol > 0 && cfg.ascent_tol > 0 && cfg.polish_iter >= 0 &&
                    cfg.n_restarts > 0 && cfg.deflation_penalty > 0;
    if (!ok)
        throw config_error{"solver config: iteration counts and tolerances must be positive, backtrack in (0, 1)"};
}

namespace {

using vec = std::vector<double>;

Eigen::Map<const Eigen::VectorXd> view(std::span<const double> v) {
    return {v.data(), static_cast<Eigen::Index>(v.size())};
}

// Shared per (ctx, k) data for all restarts and indices.
class workspace {
public:
    workspace(const energy_context& ctx, const int k, const solver_config& cfg)
        : ctx{ctx}
        , k{k}
        , cfg{cfg}
        , B{mass_matrix(ctx)} {
        if (k < 1 || k > ctx.size())
            throw config_error{"solver: need 1 <= k <= basis size"};
        if (cfg.precondition) {
            const Eigen::MatrixXd K = stiffness_matrix(ctx).topLeftCorner(k, k);
            chol.compute(K);
            if (chol.info() != Eigen::Success)
                throw assembly_error{"solver: stiffness matrix is not positive definite"};
        }
    }

    const energy_context& ctx;
    int k;
    solver_config cfg;
    Eigen::MatrixXd B;
    Eigen::LLT<Eigen::MatrixXd> chol;
    std::uint64_t evaluations = 0;

    // zero the components outside V_k
    void restrict(vec& v) const { std::fill(v.begin() + k, v.end(), 0.0); }

    vec precondition(const vec& g) const {
        if (!cfg.precondition)
            return g;
        const Eigen::VectorXd z = chol.solve(view(g).head(k));
        vec out(g.size(), 0.0);
        std::copy(z.data(), z.data() + k, out.begin());
        return out;
    }

    vec gradA(const vec& u) {
        ++evaluations;
        vec g = grad_A(ctx, u);
        restrict(g);
        return g;
    }

    vec gradG(const vec& u) {
        vec g = grad_G(ctx, u);
        restrict(g);
        return g;
    }

    vec retract(const vec& u) {
        evaluations += 8;
        return normalize(ctx, u).unit;
    }

    double b_pairing(const vec& u, const vec& v) const { return view(u).dot(B * view(v)); }
};

struct deflation {
    std::vector<vec> directions; // B-normalized previous eigenvectors
    std::vector<vec> b_directions; // B times the above
};

deflation make_deflation(const workspace& ws, std::span<const eigenpair_result> previous) {
    deflation d;
    for (const auto& p : previous) {
        const double nb = std::sqrt(ws.b_pairing(p.coeffs, p.coeffs));
        vec dir = p.coeffs;
        for (double& c : dir)
            c /= nb;
        const Eigen::VectorXd bd = ws.B * view(dir);
        d.directions.push_back(dir);
        d.b_directions.emplace_back(bd.data(), bd.data() + bd.size());
    }
    return d;
}

struct objective {
    double value = 0;
    vec gradient;
};

// G(u) - mu sum_j <u, B u_j>^2
objective penalized(workspace& ws, const deflation& defl, const vec& u, const bool with_gradient) {
    objective f;
    f.value = energy_G(ws.ctx, u);
    if (with_gradient)
        f.gradient = ws.gradG(u);
    const double mu = ws.cfg.deflation_penalty;
    for (const vec& bd : defl.b_directions) {
        const double c = dot(u, bd);
        f.value -= mu * c * c;
        if (with_gradient)
            for (int j = 0; j < ws.k; ++j)
                f.gradient[j] -= 2 * mu * c * bd[j];
    }
    return f;
}

double ratio(workspace& ws, const vec& u, const vec& gA, const vec& gG) {
    (void)ws;
    return dot(gA, u) / dot(gG, u);
}

double stationarity(const vec& gA, const vec& gG, const double lambda) {
    compensated_sum num;
    for (std::size_t j = 0; j < gA.size(); ++j) {
        const double r = gA[j] - lambda * gG[j];
        num += r * r;
    }
    return std::sqrt(num.value()) / norm2(gA);
}

// Removes the components along earlier pairs so that <u, B u_j> = 0.
vec orthogonalize(const deflation& defl, vec u) {
    const auto n = static_cast<Eigen::Index>(defl.directions.size());
    if (n == 0)
        return u;
    Eigen::MatrixXd gram(n, n);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        rhs[i] = dot(u, defl.b_directions[i]);
        for (Eigen::Index j = 0; j < n; ++j)
            gram(i, j) = dot(defl.directions[j], defl.b_directions[i]);
    }
    const Eigen::VectorXd c = gram.ldlt().solve(rhs);
    for (Eigen::Index j = 0; j < n; ++j)
        for (std::size_t l = 0; l < u.size(); ++l)
            u[l] -= c[j] * defl.directions[j][l];
    return u;
}

// Preconditioned gradient with the components along the constraint normals removed.
vec constrained_direction(const workspace& ws, const std::vector<vec>& normals, const vec& gradient) {
    const auto n = static_cast<Eigen::Index>(normals.size());
    std::vector<vec> z;
    for (const vec& nv : normals)
        z.push_back(ws.precondition(nv));
    Eigen::MatrixXd gram(n, n);
    Eigen::VectorXd rhs(n);
    vec d = ws.precondition(gradient);
    for (Eigen::Index i = 0; i < n; ++i) {
        rhs[i] = dot(normals[i], d);
        for (Eigen::Index j = 0; j < n; ++j)
            gram(i, j) = dot(normals[i], z[j]);
    }
    const Eigen::VectorXd c = gram.completeOrthogonalDecomposition().solve(rhs);
    for (Eigen::Index j = 0; j < n; ++j)
        for (std::size_t l = 0; l < d.size(); ++l)
            d[l] -= c[j] * z[j][l];
    return d;
}

constexpr int stall_window = 10;
constexpr double stall_gain = 1e-3;

struct ascent_outcome {
    vec u;
    int iterations = 0;
    double certificate = std::numeric_limits<double>::infinity();
};

// Projected gradient ascent of the penalized objective on the level set A = 1.
ascent_outcome ascend(workspace& ws, const deflation& defl, vec u) {
    const solver_config& cfg = ws.cfg;
    ascent_outcome out;
    u = orthogonalize(defl, u);
    u = ws.retract(u);
    double step = -1;
    objective f = penalized(ws, defl, u, true);
    std::vector<double> history;
    for (int it = 0; it < cfg.max_iter; ++it) {
        out.iterations = it;
        // flat maxima make the gradient crawl; the polish finishes from here
        history.push_back(f.value);
        if (it >= stall_window && f.value - history[it - stall_window] <= stall_gain * std::abs(f.value))
            break;
        const vec gA = ws.gradA(u);
        // tangent to the level set and B-orthogonal to earlier pairs, in the preconditioned metric
        std::vector<vec> normals{gA};
        normals.insert(normals.end(), defl.b_directions.begin(), defl.b_directions.end());
        const vec d = constrained_direction(ws, normals, f.gradient);
        const double slope = dot(f.gradient, d);
        if (std::sqrt(std::max(slope, 0.0)) <= cfg.ascent_tol * std::sqrt(dot(f.gradient, ws.precondition(f.gradient))))
            break;
        const double dnorm = norm2(d);
        if (!(slope > 0) || dnorm == 0)
            break;
        if (step < 0)
            step = cfg.step0 * norm2(u) / dnorm;

        bool accepted = false;
        bool first_try = true;
        vec trial(u.size());
        objective ft;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t j = 0; j < u.size(); ++j)
                trial[j] = u[j] + step * d[j];
            trial = ws.retract(trial);
            ft = penalized(ws, defl, trial, false);
            if (ft.value >= f.value + cfg.armijo * step * slope) {
                accepted = true;
                break;
            }
            step *= cfg.backtrack;
            first_try = false;
        }
        if (!accepted)
            break;
        out.certificate = std::min(out.certificate, monotonicity_gap(ws.ctx, u, trial));
        u = std::move(trial);
        f = penalized(ws, defl, u, true);
        if (first_try)
            step /= cfg.backtrack;
    }
    out.u = std::move(u);
    return out;
}

struct polish_outcome {
    vec u;
    double lambda = 0;
    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
};

// Newton on A'(u) = lambda G'(u), A(u) = 1 restricted to V_k, retracting after each step.
polish_outcome polish(workspace& ws, vec u) {
    const int k = ws.k;
    polish_outcome out;
    vec gA = ws.gradA(u);
    vec gG = ws.gradG(u);
    double lambda = ratio(ws, u, gA, gG);
    double res = stationarity(gA, gG, lambda);
    // go past grad_tol while Newton still improves, so converged pairs have some margin
    for (int it = 0; it < ws.cfg.polish_iter && res > ws.cfg.grad_tol * 1e-3; ++it) {
        out.iterations = it + 1;
        const Eigen::MatrixXd J = (hessian_A(ws.ctx, u) - lambda * hessian_G(ws.ctx, u)).topLeftCorner(k, k);
        Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(k + 1, k + 1);
        Eigen::VectorXd rhs(k + 1);
        sys.topLeftCorner(k, k) = J;
        for (int j = 0; j < k; ++j) {
            sys(j, k) = -gG[j];
            sys(k, j) = gA[j];
            rhs[j] = -(gA[j] - lambda * gG[j]);
        }
        rhs[k] = -(energy_A(ws.ctx, u) - 1);
        const Eigen::VectorXd delta = sys.fullPivLu().solve(rhs);
        if (!delta.allFinite())
            break;
        double damping = 1;
        bool improved = false;
        for (int bt = 0; bt < 12; ++bt) {
            vec trial = u;
            for (int j = 0; j < k; ++j)
                trial[j] += damping * delta[j];
            trial = ws.retract(trial);
            const vec tA = ws.gradA(trial);
            const vec tG = ws.gradG(trial);
            const double tl = ratio(ws, trial, tA, tG);
            const double tr = stationarity(tA, tG, tl);
            if (tr < res) {
                u = std::move(trial);
                gA = tA;
                gG = tG;
                lambda = tl;
                res = tr;
                improved = true;
                break;
            }
            damping /= 2;
        }
        if (!improved)
            break;
    }
    out.u = std::move(u);
    out.lambda = lambda;
    out.residual = res;
    return out;
}

eigenpair_result finish(workspace& ws, const int index, vec u, const ascent_outcome& asc,
                        const polish_outcome& pol) {
    eigenpair_result r;
    r.index = index;
    r.basis_k = ws.k;
    const vec gA = ws.gradA(u);
    const vec gG = ws.gradG(u);
    r.lambda = dot(gA, u) / dot(gG, u);
    r.residual = stationarity(gA, gG, r.lambda);
    r.a_value = energy_A(ws.ctx, u);
    r.g_value = energy_G(ws.ctx, u);
    r.iterations = asc.iterations + pol.iterations;
    r.monotone_certificate = asc.certificate;
    r.candidate = index > 1;
    r.converged = r.residual <= ws.cfg.grad_tol && std::abs(r.a_value - 1) <= 1e-8;
    r.coeffs = std::move(u);
    r.energy_evaluations = ws.evaluations;
    return r;
}

eigenpair_result run_from(workspace& ws, const deflation& defl, const int index, const vec& start) {
    const ascent_outcome asc = ascend(ws, defl, start);
    const polish_outcome pol = polish(ws, asc.u);
    return finish(ws, index, pol.u, asc, pol);
}

// Deterministic Kronecker-sequence start for restart r.
vec initial_guess(const int n, const int k, const std::uint64_t seed, const int restart) {
    std::uint64_t state = seed;
    vec u(n, 0.0);
    int found = 0;
    for (int cand = 2; found < k; ++cand) {
        bool prime = true;
        for (int d = 2; d * d <= cand && prime; ++d)
            prime = cand % d != 0;
        if (!prime)
            continue;
        const double offset = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
        const double v = offset + (restart + 1) * std::sqrt(static_cast<double>(cand));
        u[found] = 2 * (v - std::floor(v)) - 1;
        ++found;
    }
    if (std::all_of(u.begin(), u.end(), [](const double c) { return c == 0; }))
        u[0] = 1;
    return u;
}

bool duplicates(const workspace& ws, const deflation& defl, const vec& u) {
    const double nu = std::sqrt(ws.b_pairing(u, u));
    for (const vec& bd : defl.b_directions)
        if (std::abs(dot(u, bd)) > 0.9 * nu)
            return true;
    return false;
}

// Highest G wins; near ties go to the lower residual, then the lower restart.
bool better(const eigenpair_result& a, const eigenpair_result& b) {
    const double scale = std::max(std::abs(a.g_value), std::abs(b.g_value));
    if (std::abs(a.g_value - b.g_value) > 1e-10 * std::max(1.0, scale))
        return a.g_value > b.g_value;
    if (a.residual != b.residual)
        return a.residual < b.residual;
    return a.restart < b.restart;
}

eigenpair_result solve_index(workspace& ws, const int index, std::span<const eigenpair_result> previous) {
    const deflation defl = make_deflation(ws, previous);
    std::optional<eigenpair_result> best;
    std::optional<eigenpair_result> fallback;
    for (int r = 0; r < ws.cfg.n_restarts; ++r) {
        const vec start = initial_guess(ws.ctx.size(), ws.k, ws.cfg.rng_seed, r + 97 * (index - 1));
        eigenpair_result res = run_from(ws, defl, index, start);
        res.restart = r;
        if (res.converged && duplicates(ws, defl, res.coeffs))
            res.converged = false;
        if (res.converged) {
            if (!best || better(res, *best))
                best = std::move(res);
        } else if (!fallback || res.residual < fallback->residual) {
            fallback = std::move(res);
        }
    }
    if (best) {
        best->energy_evaluations = ws.evaluations;
        return *best;
    }
    fallback->energy_evaluations = ws.evaluations;
    return *fallback;
}

// Largest-magnitude coefficient positive, for reproducible output.
void fix_sign(vec& u) {
    const auto it = std::max_element(u.begin(), u.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    if (it != u.end() && *it < 0)
        for (double& c : u)
            c = -c;
}

}

eigenpair_result solve_first(const energy_context& ctx, const int k, const solver_config& cfg) {
    validate(cfg);
    workspace ws{ctx, k, cfg};
    eigenpair_result r = solve_index(ws, 1, {});
    if (!r.converged)
        throw nonconvergence_error{"solve_first: no restart converged (best residual " + std::to_string(r.residual) +
                                       ")",
                                   r.residual};
    fix_sign(r.coeffs);
    return r;
}

eigenpair_result ascend_from(const energy_context& ctx, const int k, std::span<const double> start,
                             const solver_config& cfg, std::span<const eigenpair_result> previous) {
    validate(cfg);
    workspace ws{ctx, k, cfg};
    if (static_cast<int>(start.size()) != ctx.size())
        throw shape_error{"ascend_from: start vector length does not match basis size"};
    vec u(start.begin(), start.end());
    ws.restrict(u);
    const deflation defl = make_deflation(ws, previous);
    return run_from(ws, defl, static_cast<int>(previous.size()) + 1, u);
}

std::vector<eigenpair_result> solve_sequence(const energy_context& ctx, const int k, const int i_max,
                                             const solver_config& cfg) {
    validate(cfg);
    if (i_max < 1 || i_max > k)
        throw config_error{"solve_sequence: need 1 <= i_max <= k"};
    workspace ws{ctx, k, cfg};
    std::vector<eigenpair_result> out;
    for (int i = 1; i <= i_max; ++i) {
        eigenpair_result r = solve_index(ws, i, out);
        fix_sign(r.coeffs);
        const bool ok = r.converged;
        if (!out.empty()) {
            const auto& prev = out.back();
            r.order_violation = r.lambda < prev.lambda * (1 - 1e-10) || r.g_value > prev.g_value * (1 + 1e-10);
            r.cluster = std::abs(r.lambda - prev.lambda) < 1e-6 * prev.lambda;
        }
        out.push_back(std::move(r));
        if (!ok)
            break;
    }
    return out;
}

bool is_linear_problem(const problem& prob) {
    return prob.kern.linear_weight.has_value() && prob.src.homogeneity == 2.0;
}

std::vector<oracle_pair> linear_oracle(const energy_context& ctx, const int k) {
    if (!is_linear_problem(ctx.definition()))
        throw config_error{"linear_oracle: needs a linear kernel (plap:2 or weighted-plap:2) and the power:2 source"};
    if (k < 1 || k > ctx.size())
        throw config_error{"linear_oracle: need 1 <= k <= basis size"};
    const Eigen::MatrixXd K = stiffness_matrix(ctx).topLeftCorner(k, k);
    const Eigen::MatrixXd B = mass_matrix(ctx).topLeftCorner(k, k);
    if ((K - K.transpose()).norm() > 1e-12 * K.norm())
        throw assembly_error{"linear_oracle: stiffness matrix is not symmetric"};
    if (B.llt().info() != Eigen::Success)
        throw assembly_error{"linear_oracle: mass matrix is not positive definite"};
    const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, B);
    if (es.info() != Eigen::Success)
        throw assembly_error{"linear_oracle: generalized eigensolver failed"};
    std::vector<oracle_pair> out;
    for (int i = 0; i < k; ++i) {
        Eigen::VectorXd v = es.eigenvectors().col(i);
        // A(u) = u^T K u / 2
        v /= std::sqrt(v.dot(K * v) / 2);
        oracle_pair p;
        p.lambda = es.eigenvalues()[i];
        p.coeffs.assign(ctx.size(), 0.0);
        std::copy(v.data(), v.data() + k, p.coeffs.begin());
        fix_sign(p.coeffs);
        out.push_back(std::move(p));
    }
    return out;
}

double b_distance(const Eigen::MatrixXd& B, std::span<const double> u, std::span<const double> v) {
    const auto n = static_cast<Eigen::Index>(u.size());
    const Eigen::VectorXd a = view(u);
    const Eigen::VectorXd b = view(v);
    const Eigen::MatrixXd Bn = B.topLeftCorner(n, n);
    const Eigen::VectorXd an = a / std::sqrt(a.dot(Bn * a));
    const Eigen::VectorXd bn = b / std::sqrt(b.dot(Bn * b));
    const Eigen::VectorXd dm = an - bn;
    const Eigen::VectorXd dp = an + bn;
    return std::sqrt(std::min(dm.dot(Bn * dm), dp.dot(Bn * dp)));
}

convergence_report k_study(const problem& prob, const solver_config& cfg, const std::vector<int>& k_list,
                           const int i_max) {
    if (k_list.empty())
        throw config_error{"k_study: empty k list"};
    for (std::size_t i = 1; i < k_list.size(); ++i)
        if (k_list[i] <= k_list[i - 1])
            throw config_error{"k_study: k list must be strictly increasing"};
    convergence_report report;
    report.k_list = k_list;
    const bool linear = is_linear_problem(prob);
    for (const int k : k_list) {
        const energy_context ctx{prob, k};
        report.runs.push_back(solve_sequence(ctx, k, std::min(i_max, k), cfg));
        if (linear) {
            std::vector<double> lambdas;
            for (const auto& p : linear_oracle(ctx, k))
                lambdas.push_back(p.lambda);
            report.oracle_lambdas.push_back(std::move(lambdas));
        }
    }
    if (k_list.size() < 2)
        return report;
    bool c_ok = true, l_ok = true;
    for (std::size_t i = 1; i < report.runs.size(); ++i) {
        const auto& prev = report.runs[i - 1].front();
        const auto& cur = report.runs[i].front();
        c_ok = c_ok && cur.g_value >= prev.g_value - 1e-8;
        l_ok = l_ok && cur.lambda <= prev.lambda + 1e-8 * std::max(1.0, prev.lambda);
    }
    report.c1_nondecreasing = c_ok;
    report.lambda1_nonincreasing = l_ok;
    if (linear) {
        double worst = 0;
        for (std::size_t i = 0; i < report.runs.size(); ++i)
            for (const auto& r : report.runs[i])
                worst = std::max(worst, std::abs(r.lambda - report.oracle_lambdas[i][r.index - 1]) /
                                            report.oracle_lambdas[i][r.index - 1]);
        report.max_oracle_deviation = worst;
    }
    return report;
}

}
