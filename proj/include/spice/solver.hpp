#pragma once

#include "spice/problem.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace spice {

struct DegenerateProblemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ScheduleKind { Constant, Power, Exponential, PowerExponential };

/// rho(t): CONSTANT 1, POWER (t+1)^alpha, EXPONENTIAL e^(beta t),
/// POWER_EXPONENTIAL (t+1)^(t+1). Values are clamped at `cap`.
struct ScalingSchedule {
    ScheduleKind kind = ScheduleKind::Constant;
    double alpha = 2.0;
    double beta = 2.0;
    double cap = 1e12;

    static ScalingSchedule constant() { return {}; }
    static ScalingSchedule power(double alpha) { return {ScheduleKind::Power, alpha, 2.0, 1e12}; }
    static ScalingSchedule exponential(double beta) { return {ScheduleKind::Exponential, 2.0, beta, 1e12}; }
    static ScalingSchedule power_exponential() { return {ScheduleKind::PowerExponential, 2.0, 2.0, 1e12}; }

    void validate() const
    {
        if (!(alpha > 0.0) || !(beta > 0.0)) {
            throw ArgumentError("ScalingSchedule: alpha and beta must be positive");
        }
        if (!(cap > 1.0)) {
            throw ArgumentError("ScalingSchedule: cap must exceed 1");
        }
    }
};

inline double rho_value(const ScalingSchedule& s, long t)
{
    if (t < 0) {
        throw ArgumentError("rho_value: t must be nonnegative");
    }
    const double tp1 = static_cast<double>(t) + 1.0;
    double value = 1.0;
    switch (s.kind) {
    case ScheduleKind::Constant:
        return 1.0;
    case ScheduleKind::Power:
        value = std::pow(tp1, s.alpha);
        break;
    case ScheduleKind::Exponential:
        value = std::exp(s.beta * static_cast<double>(t));
        break;
    case ScheduleKind::PowerExponential:
        value = std::pow(tp1, tp1);
        break;
    }
    return std::isfinite(value) ? std::min(value, s.cap) : s.cap;
}

struct RegularizationParams {
    double r = 0.0;
    double s = 0.0;
};

/// r = sqrt(R_x) / eta,  s = mu R_xbar / (eta sqrt(R_x)).
inline RegularizationParams compute_params(double r_x, double r_xbar, double eta, double mu)
{
    if (!(r_x > 0.0)) {
        throw DegenerateProblemError("compute_params: constraint Jacobian vanishes at the current point");
    }
    if (!(r_xbar > 0.0) || !(eta > 0.0) || !(mu > 1.0)) {
        throw ArgumentError("compute_params: requires R_xbar > 0, eta > 0, mu > 1");
    }
    const double root = std::sqrt(r_x);
    return {root / eta, mu * r_xbar / (eta * root)};
}

/// Smallest eta keeping r and s non-increasing relative to the previous iteration.
inline double eta_lower_bound(double eta_prev, double r_x_prev, double r_x, double r_xbar_prev, double r_xbar)
{
    const double from_r = eta_prev * std::sqrt(r_x / r_x_prev);
    const double from_s = eta_prev * (r_xbar * std::sqrt(r_x_prev)) / (r_xbar_prev * std::sqrt(r_x));
    return std::max(from_r, from_s);
}

struct ParamState {
    long k = 0;
    double rho = 1.0;
    double eta = 1.0;
    double r = 0.0;
    double s = 0.0;
    double mu = 1.5;
    double r_x = 0.0;    // R at the current point
    double r_xbar = 0.0; // R at the predictor
};

enum class SolveMode { Spice, TraditionalPc };
enum class RhoMode { PerIteration, Frozen };

/// Geometric: eta <- mu * eta until the lower bound holds (the default).
/// Minimal: eta <- max(eta, lower bound evaluated at the current trial), which
/// stops eta from compounding by mu whenever R creeps upward. Falls back to
/// geometric steps after `kMinimalPasses` passes.
enum class EtaEscalation { Geometric, Minimal };

inline constexpr int kMinimalPasses = 8;

struct SolveConfig {
    ScalingSchedule schedule;
    double mu = 1.5;
    double eta0 = 1.0;
    double tolerance = 1e-9;
    long max_iters = 100000;
    int eta_search_max_passes = 64;
    SolveMode mode = SolveMode::Spice;
    NormMode norm = NormMode::Spectral;
    RhoMode rho_mode = RhoMode::PerIteration;
    long frozen_target = 0; // rho = rho_value(schedule, frozen_target) in Frozen mode
    EtaEscalation escalation = EtaEscalation::Geometric;
    bool diagnostics = false;

    void validate() const
    {
        schedule.validate();
        if (!(mu > 1.0)) {
            throw ArgumentError("SolveConfig: mu must exceed 1");
        }
        if (!(eta0 > 0.0)) {
            throw ArgumentError("SolveConfig: eta0 must be positive");
        }
        if (!(tolerance > 0.0)) {
            throw ArgumentError("SolveConfig: tolerance must be positive");
        }
        if (max_iters < 1 || eta_search_max_passes < 1) {
            throw ArgumentError("SolveConfig: iteration budgets must be at least 1");
        }
    }
};

/// Constraint Jacobians at one primal point. `y` is empty for single-block problems.
struct Jacobians {
    Matrix x;
    Matrix y;
};

template <SpiceProblem P>
Jacobians jacobians_at(const P& prob, const Vector& x, const Vector& y)
{
    Jacobians j{prob.jacobian(Block::X, x), Matrix()};
    if (prob.block_count() == 2) {
        j.y = prob.jacobian(Block::Y, y);
    }
    return j;
}

inline double jacobian_norm_sq(const Jacobians& j, NormMode mode)
{
    double value = matrix_norm_sq(j.x, mode);
    if (j.y.size() > 0) {
        value += matrix_norm_sq(j.y, mode);
    }
    return value;
}

struct PrimalPrediction {
    Vector x;
    Vector y;
};

/// x_bar first, then y_bar (which may use x_bar).
template <SpiceProblem P>
PrimalPrediction predict_primal(const P& prob, const Iterate& w, double rho, double eta, double r)
{
    PrimalPrediction out;
    out.x = prob.predict(Block::X, PredictionRequest{w.lambda, rho, eta, r, w.x});
    if (prob.block_count() == 2) {
        out.y = prob.predict(Block::Y, PredictionRequest{w.lambda, rho, eta, r, w.y});
    }
    return out;
}

/// lambda_bar = P_Z(lambda + (Phi(x_bar) [+ Psi(y_bar)]) / (eta s))
template <SpiceProblem P>
Vector predict_dual(const P& prob, const Vector& lambda, const PrimalPrediction& primal, double eta, double s)
{
    const Vector c = constraint_value(prob, primal.x, primal.y);
    return project_dual(prob.dual_domain(), lambda + c / (eta * s));
}

/// Full predictor w_bar for a complete parameter state.
template <SpiceProblem P>
Iterate predict(const P& prob, const Iterate& w, const ParamState& p)
{
    check_dimensions(prob, w);
    PrimalPrediction primal = predict_primal(prob, w, p.rho, p.eta, p.r);
    Vector lambda_bar = predict_dual(prob, w.lambda, primal, p.eta, p.s);
    return Iterate{std::move(primal.x), std::move(primal.y), std::move(lambda_bar)};
}

/// w^{k+1} = w^k - M_k (w^k - w_bar^k) in closed form:
///   x^{k+1} = x_bar + DPhi(x_bar)^T (lambda^k - lambda_bar) / (eta r), same for y,
///   lambda^{k+1} = lambda_bar.
inline Iterate correct(const Iterate& w, const Iterate& w_bar, double eta, double r, const Jacobians& j_bar)
{
    const Vector dual_step = (w.lambda - w_bar.lambda) / (eta * r);
    Iterate next;
    next.x = w_bar.x + j_bar.x.transpose() * dual_step;
    if (w_bar.two_block()) {
        next.y = w_bar.y + j_bar.y.transpose() * dual_step;
    }
    next.lambda = w_bar.lambda;
    return next;
}

inline Iterate correct(const Iterate& w, const Iterate& w_bar, const ParamState& p, const Jacobians& j_bar)
{
    return correct(w, w_bar, p.eta, p.r, j_bar);
}

struct ExtendedMatrices {
    Matrix q; // predictive
    Matrix m; // corrective
    Matrix h; // Q M^{-1}
    Matrix g; // Q^T + Q - M^T H M
};

/// Dense Q_k, M_k, H_k, G_k for diagnostics; size n [+ m] + p.
inline ExtendedMatrices build_matrices(const ParamState& p, const Jacobians& j_bar)
{
    const Eigen::Index n = j_bar.x.cols();
    const Eigen::Index m = j_bar.y.size() > 0 ? j_bar.y.cols() : 0;
    const Eigen::Index nd = j_bar.x.rows();
    const Eigen::Index primal = n + m;
    const Eigen::Index dim = primal + nd;

    Matrix coupling(primal, nd); // stacked (DPhi^T; DPsi^T)
    coupling.topRows(n) = j_bar.x.transpose();
    if (m > 0) {
        coupling.bottomRows(m) = j_bar.y.transpose();
    }

    ExtendedMatrices out;
    out.q = Matrix::Zero(dim, dim);
    out.q.topLeftCorner(primal, primal).diagonal().setConstant(p.r);
    out.q.topRightCorner(primal, nd) = -coupling / p.eta;
    out.q.bottomRightCorner(nd, nd).diagonal().setConstant(p.s);

    out.m = Matrix::Identity(dim, dim);
    out.m.topRightCorner(primal, nd) = -coupling / (p.eta * p.r);

    out.h = Matrix::Zero(dim, dim);
    out.h.topLeftCorner(primal, primal).diagonal().setConstant(p.r);
    out.h.bottomRightCorner(nd, nd).diagonal().setConstant(p.s);

    out.g = Matrix::Zero(dim, dim);
    out.g.topLeftCorner(primal, primal).diagonal().setConstant(p.r);
    out.g.bottomRightCorner(nd, nd) = p.s * Matrix::Identity(nd, nd) -
                                      coupling.transpose() * coupling / (p.eta * p.eta * p.r);
    return out;
}

/// Smallest eigenvalue of the dual block s I - (J J^T [+ K K^T]) / (eta^2 r) of G_k.
inline double g_dual_block_min_eigenvalue(const ParamState& p, const Jacobians& j_bar)
{
    Matrix gram = j_bar.x * j_bar.x.transpose();
    if (j_bar.y.size() > 0) {
        gram += j_bar.y * j_bar.y.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    return p.s - eig.eigenvalues().maxCoeff() / (p.eta * p.eta * p.r);
}

/// ||w^k - w_bar^k||^2 in the G_k metric.
inline double g_norm_sq(const ParamState& p, const Iterate& w, const Iterate& w_bar, const Jacobians& j_bar)
{
    const Vector dx = w.x - w_bar.x;
    const Vector dl = w.lambda - w_bar.lambda;
    double primal = dx.squaredNorm();
    Vector coupled = j_bar.x.transpose() * dl;
    double coupled_sq = coupled.squaredNorm();
    if (w.two_block()) {
        primal += (w.y - w_bar.y).squaredNorm();
        coupled_sq += (j_bar.y.transpose() * dl).squaredNorm();
    }
    return p.r * primal + p.s * dl.squaredNorm() - coupled_sq / (p.eta * p.eta * p.r);
}

/// Previous-iteration quantities the eta search compares against.
struct EtaHistory {
    double eta = 1.0;
    double r_x = 0.0;
    double r_xbar = 0.0;
};

struct EtaSearchResult {
    double eta = 1.0;
    double r = 0.0;
    double r_xbar = 0.0;
    double eta_required = 0.0;
    int passes = 0;
    PrimalPrediction primal;
    Jacobians j_bar;
};

struct EtaSearchFailure : std::runtime_error {
    EtaSearchFailure(const std::string& what, EtaSearchResult last)
        : std::runtime_error(what), last_trial(std::move(last))
    {
    }
    EtaSearchResult last_trial;
};

struct EtaOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Escalates eta geometrically by mu, starting from the previous eta, until the
/// trial satisfies eta_lower_bound evaluated at its own predictor.
template <SpiceProblem P>
EtaSearchResult eta_search(const P& prob, const Iterate& w, double rho, double r_x, const EtaHistory& prev,
                           const SolveConfig& config)
{
    EtaSearchResult trial;
    trial.eta = prev.eta;
    for (int pass = 1; pass <= config.eta_search_max_passes; ++pass) {
        trial.passes = pass;
        trial.r = std::sqrt(r_x) / trial.eta;
        if (!std::isfinite(trial.eta) || !(trial.r > 0.0)) {
            throw EtaOverflow("eta overflowed during the search");
        }
        trial.primal = predict_primal(prob, w, rho, trial.eta, trial.r);
        trial.j_bar = jacobians_at(prob, trial.primal.x, trial.primal.y);
        trial.r_xbar = jacobian_norm_sq(trial.j_bar, config.norm);
        trial.eta_required = eta_lower_bound(prev.eta, prev.r_x, r_x, prev.r_xbar, trial.r_xbar);
        if (trial.eta >= trial.eta_required) {
            return trial;
        }
        if (pass < config.eta_search_max_passes) {
            if (config.escalation == EtaEscalation::Minimal && pass < kMinimalPasses) {
                trial.eta = std::max(trial.eta, trial.eta_required);
            } else {
                trial.eta *= config.mu;
            }
        }
    }
    throw EtaSearchFailure("eta search exhausted " + std::to_string(config.eta_search_max_passes) + " passes", trial);
}

enum class SolveStatus { Converged, MaxIterations, SearchFailed, Diverged, OracleFailure };

inline const char* to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::Converged: return "CONVERGED";
    case SolveStatus::MaxIterations: return "MAX_ITERATIONS";
    case SolveStatus::SearchFailed: return "SEARCH_FAILED";
    case SolveStatus::Diverged: return "DIVERGED";
    case SolveStatus::OracleFailure: return "ORACLE_FAILURE";
    }
    return "UNKNOWN";
}

struct IterationRecord {
    long k = 0;
    double f = 0.0;       // objective at w^{k+1}
    double delta_f = 0.0; // |f(w^k) - f(w^{k+1})|
    double rho = 1.0;
    double eta = 1.0;
    double r = 0.0;
    double s = 0.0;
    double pred_gap = 0.0; // ||w^k - w_bar^k||
    double feas = 0.0;     // feasibility at w^{k+1}
    double gmin = 0.0;     // smallest eigenvalue of G_k
    double gmin_dual = 0.0;
    double r_x = 0.0;
    double r_xbar = 0.0;
    double gap_g_sq = 0.0; // ||w^k - w_bar^k||^2_{G_k}
    double w_norm = 0.0;   // ||w^k||
    int eta_passes = 0;

    ParamState params(double mu) const { return {k, rho, eta, r, s, mu, r_x, r_xbar}; }
};

/// Iterates kept per iteration when diagnostics are on.
struct IterateSnapshot {
    Iterate w;
    Iterate w_bar;
    Iterate w_next;
};

struct SolveHistory {
    SolveConfig config;
    std::vector<IterationRecord> records;
    std::vector<IterateSnapshot> snapshots;
    Iterate initial;
    Iterate final_iterate;
    Iterate last_predictor;

    // ergodic accumulators
    Vector sum_u_bar;          // sum of (x_bar, [y_bar])
    double sum_inv_eta = 0.0;  // sum of 1 / eta_k
    Vector sum_w_bar_over_eta; // sum of w_bar / eta_k

    SolveStatus status = SolveStatus::MaxIterations;
    std::string message;

    long iterations() const { return static_cast<long>(records.size()); }
    bool converged() const { return status == SolveStatus::Converged; }
};

namespace detail {

inline Vector stack_primal(const Vector& x, const Vector& y)
{
    Vector u(x.size() + y.size());
    u << x, y;
    return u;
}

} // namespace detail

/// Runs the prediction-correction iteration from (x0, [y0,] lambda0).
template <SpiceProblem P>
SolveHistory solve(const P& prob, const SolveConfig& config, const Iterate& start)
{
    config.validate();
    check_dimensions(prob, start);
    if (!prob.dual_domain().contains(start.lambda)) {
        throw ArgumentError("solve: initial lambda is outside the dual domain");
    }

    SolveHistory h;
    h.config = config;
    h.initial = start;
    h.final_iterate = start;

    const bool pc = config.mode == SolveMode::TraditionalPc;
    const double mu = config.mu;
    const Eigen::Index primal_dim = start.x.size() + start.y.size();
    h.sum_u_bar = Vector::Zero(primal_dim);
    h.sum_w_bar_over_eta = Vector::Zero(primal_dim + start.lambda.size());

    Iterate w = start;
    double f_cur = eval_objective(prob, w);
    EtaHistory prev;

    try {
        for (long k = 0; k < config.max_iters; ++k) {
            double rho = 1.0;
            if (!pc) {
                rho = config.rho_mode == RhoMode::Frozen ? rho_value(config.schedule, config.frozen_target)
                                                         : rho_value(config.schedule, k);
            }
            const double r_x = jacobian_norm_sq(jacobians_at(prob, w.x, w.y), config.norm);
            if (!(r_x > 0.0)) {
                throw DegenerateProblemError("constraint Jacobian vanishes at iterate " + std::to_string(k));
            }

            ParamState p;
            p.k = k;
            p.rho = rho;
            p.mu = mu;
            p.r_x = r_x;
            PrimalPrediction primal;
            Jacobians j_bar;
            int passes = 0;
            if (k == 0 || pc) {
                p.eta = pc ? 1.0 : config.eta0;
                p.r = std::sqrt(r_x) / p.eta;
                primal = predict_primal(prob, w, rho, p.eta, p.r);
                j_bar = jacobians_at(prob, primal.x, primal.y);
                p.r_xbar = jacobian_norm_sq(j_bar, config.norm);
            } else {
                EtaSearchResult found = eta_search(prob, w, rho, r_x, prev, config);
                p.eta = found.eta;
                p.r = found.r;
                p.r_xbar = found.r_xbar;
                passes = found.passes;
                primal = std::move(found.primal);
                j_bar = std::move(found.j_bar);
            }
            p.s = compute_params(p.r_x, p.r_xbar, p.eta, mu).s;

            Vector lambda_bar = predict_dual(prob, w.lambda, primal, p.eta, p.s);
            Iterate w_bar{std::move(primal.x), std::move(primal.y), std::move(lambda_bar)};
            Iterate w_next = correct(w, w_bar, p, j_bar);
            const double f_next = eval_objective(prob, w_next);

            if (!std::isfinite(f_next) || !all_finite(w_next.x) || !all_finite(w_next.y) ||
                !all_finite(w_next.lambda) || !std::isfinite(p.s)) {
                h.status = SolveStatus::Diverged;
                h.message = "non-finite values at iteration " + std::to_string(k);
                return h;
            }

            IterationRecord rec;
            rec.k = k;
            rec.f = f_next;
            rec.delta_f = std::abs(f_cur - f_next);
            rec.rho = rho;
            rec.eta = p.eta;
            rec.r = p.r;
            rec.s = p.s;
            const Vector w_stacked = w.stacked();
            const Vector w_bar_stacked = w_bar.stacked();
            rec.pred_gap = (w_stacked - w_bar_stacked).norm();
            rec.w_norm = w_stacked.norm();
            rec.feas = kkt_residual(prob, w_next).feasibility;
            rec.gmin_dual = g_dual_block_min_eigenvalue(p, j_bar);
            rec.gmin = std::min(p.r, rec.gmin_dual);
            rec.r_x = p.r_x;
            rec.r_xbar = p.r_xbar;
            rec.gap_g_sq = g_norm_sq(p, w, w_bar, j_bar);
            rec.eta_passes = passes;
            h.records.push_back(rec);

            h.sum_u_bar += detail::stack_primal(w_bar.x, w_bar.y);
            h.sum_inv_eta += 1.0 / p.eta;
            h.sum_w_bar_over_eta += w_bar_stacked / p.eta;
            if (config.diagnostics) {
                h.snapshots.push_back({w, w_bar, w_next});
            }

            prev = EtaHistory{p.eta, p.r_x, p.r_xbar};
            h.last_predictor = std::move(w_bar);
            w = std::move(w_next);
            h.final_iterate = w;
            f_cur = f_next;

            if (rec.delta_f <= config.tolerance) {
                h.status = SolveStatus::Converged;
                return h;
            }
        }
        h.status = SolveStatus::MaxIterations;
        h.message = "iteration budget exhausted";
    } catch (const EtaOverflow& e) {
        h.status = SolveStatus::Diverged;
        h.message = e.what();
    } catch (const EtaSearchFailure& e) {
        h.status = SolveStatus::SearchFailed;
        h.message = e.what();
    } catch (const std::exception& e) {
        h.status = SolveStatus::OracleFailure;
        h.message = e.what();
    }
    return h;
}

/// Multipliers of the final iterate expressed for the unscaled problem,
/// lambda / (rho_k eta_k) with the parameters of the last iteration.
inline Vector unscaled_multipliers(const SolveHistory& h)
{
    if (h.records.empty()) {
        return h.final_iterate.lambda;
    }
    const IterationRecord& last = h.records.back();
    return h.final_iterate.lambda / (last.rho * last.eta);
}

struct ErgodicAverage {
    Vector x;   // mean of x_bar^k
    Vector y;   // mean of y_bar^k (empty for single-block)
    double eta = 1.0;
    Iterate w;  // (sum w_bar^k / eta_k) / (sum 1 / eta_k)
};

namespace detail {

inline Iterate unstack(const Vector& w, Eigen::Index n, Eigen::Index m)
{
    const Eigen::Index p = w.size() - n - m;
    return Iterate{w.head(n), w.segment(n, m), w.tail(p)};
}

} // namespace detail

/// Ergodic averages over all recorded iterations.
inline ErgodicAverage ergodic_average(const SolveHistory& h)
{
    if (h.records.empty()) {
        throw ArgumentError("ergodic_average: empty history");
    }
    const Eigen::Index n = h.initial.x.size();
    const Eigen::Index m = h.initial.y.size();
    const double count = static_cast<double>(h.records.size());
    ErgodicAverage out;
    const Vector u = h.sum_u_bar / count;
    out.x = u.head(n);
    out.y = u.tail(m);
    out.eta = count / h.sum_inv_eta;
    out.w = detail::unstack(h.sum_w_bar_over_eta / h.sum_inv_eta, n, m);
    return out;
}

/// Ergodic averages over iterations 0..t; needs a diagnostics run.
inline ErgodicAverage ergodic_average(const SolveHistory& h, long t)
{
    if (t < 0 || t >= static_cast<long>(h.snapshots.size())) {
        throw ArgumentError("ergodic_average: t outside the stored diagnostics");
    }
    const Eigen::Index n = h.initial.x.size();
    const Eigen::Index m = h.initial.y.size();
    Vector sum_u = Vector::Zero(n + m);
    Vector sum_w = Vector::Zero(h.initial.stacked().size());
    double sum_inv = 0.0;
    for (long k = 0; k <= t; ++k) {
        const Iterate& wb = h.snapshots[static_cast<std::size_t>(k)].w_bar;
        const double inv = 1.0 / h.records[static_cast<std::size_t>(k)].eta;
        sum_u += detail::stack_primal(wb.x, wb.y);
        sum_w += wb.stacked() * inv;
        sum_inv += inv;
    }
    ErgodicAverage out;
    const Vector u = sum_u / static_cast<double>(t + 1);
    out.x = u.head(n);
    out.y = u.tail(m);
    out.eta = static_cast<double>(t + 1) / sum_inv;
    out.w = detail::unstack(sum_w / sum_inv, n, m);
    return out;
}

/// ||v||^2 in diag(r I_primal, s I_dual).
inline double h_norm_sq(const Vector& v, Eigen::Index primal_dim, double r, double s)
{
    return r * v.head(primal_dim).squaredNorm() + s * v.tail(v.size() - primal_dim).squaredNorm();
}

/// How the multipliers of a reference point are expressed. The saddle point of
/// rho f + lambda^T Phi / eta has multipliers rho * eta * lambda*, where lambda*
/// belongs to the unscaled problem.
enum class ReferenceDuals { Unscaled, AsGiven };

inline Iterate scaled_reference(const Iterate& w_ref, double rho, double eta, ReferenceDuals duals)
{
    Iterate out = w_ref;
    if (duals == ReferenceDuals::Unscaled) {
        out.lambda *= rho * eta;
    }
    return out;
}

/// max_k ||w_ref - w^{k+1}||^2_{H_k} + ||w^k - w_bar^k||^2_{G_k} - ||w_ref - w^k||^2_{H_k}.
/// Non-positive whenever w_ref is a solution; needs a diagnostics run.
inline double check_contraction(const SolveHistory& h, const Iterate& w_ref,
                                ReferenceDuals duals = ReferenceDuals::Unscaled)
{
    if (h.snapshots.size() != h.records.size()) {
        throw ArgumentError("check_contraction: history was recorded without diagnostics");
    }
    const Eigen::Index primal_dim = w_ref.x.size() + w_ref.y.size();
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < h.records.size(); ++k) {
        const IterationRecord& rec = h.records[k];
        const IterateSnapshot& snap = h.snapshots[k];
        const Vector ref = scaled_reference(w_ref, rec.rho, rec.eta, duals).stacked();
        const double after = h_norm_sq(ref - snap.w_next.stacked(), primal_dim, rec.r, rec.s);
        const double before = h_norm_sq(ref - snap.w.stacked(), primal_dim, rec.r, rec.s);
        worst = std::max(worst, after + rec.gap_g_sq - before);
    }
    return worst;
}

/// ||w_ref - w^0||^2 in the eta-free initial metric
/// diag(sqrt(R(x^0)) I, mu R(x_bar^0) / sqrt(R(x^0)) I).
inline double initial_metric_norm_sq(const SolveHistory& h, const Iterate& w_ref)
{
    if (h.records.empty()) {
        throw ArgumentError("initial_metric_norm_sq: empty history");
    }
    const IterationRecord& first = h.records.front();
    const double root = std::sqrt(first.r_x);
    const Eigen::Index primal_dim = w_ref.x.size() + w_ref.y.size();
    return h_norm_sq(w_ref.stacked() - h.initial.stacked(), primal_dim, root, h.config.mu * first.r_xbar / root);
}

/// Right-hand side of the ergodic error bound at iteration t:
/// ||w* - w^0||^2_{H0} / (2 eta_0 rho(t) (t + 1)), with the multipliers of w*
/// taken at scale rho(t) * eta_0 when `duals` is Unscaled.
inline double ergodic_bound(const SolveHistory& h, const Iterate& w_ref, long t,
                            ReferenceDuals duals = ReferenceDuals::Unscaled)
{
    const double rho_t = h.config.mode == SolveMode::TraditionalPc ? 1.0
                         : h.config.rho_mode == RhoMode::Frozen
                             ? rho_value(h.config.schedule, h.config.frozen_target)
                             : rho_value(h.config.schedule, t);
    const double eta0 = h.records.empty() ? h.config.eta0 : h.records.front().eta;
    const Iterate ref = scaled_reference(w_ref, rho_t, eta0, duals);
    return initial_metric_norm_sq(h, ref) / (2.0 * eta0 * rho_t * static_cast<double>(t + 1));
}

} // namespace spice
