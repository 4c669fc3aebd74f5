"""gLSQR: the LSQR iteration built on generalized Golub-Kahan bidiagonalization.

At step k the iterate x_k minimizes the P-seminorm of the projected residual
over the Krylov space span{v_1..v_k}, updated recursively through a Givens
QR factorization of the growing bidiagonal matrix. The quantity

    alpha_{k+1} * beta_{k+1} * |e_k' y_k|

equals the G-seminorm of the transformed residual and, scaled by the
operator norm and the P-seminorm of b, drives the stopping rule. If the
bidiagonalization terminates, the iterate at the termination step is the
exact minimum 2-norm solution.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .ggkb import BidiagState, DensePinvStrategy, ggkb_init, ggkb_step
from .gsvd import gsvd_pair, sigma_max_ca
from .wpinv import GlsProblem, check_gls_criterion

__all__ = [
    "GivensState",
    "SolveReport",
    "OperatorNormEstimate",
    "residual_estimate",
    "operator_norm",
    "glsqr_solve",
    "certify_solution",
    "save_history",
]

_TINY = float(np.finfo(np.float64).tiny)


@dataclass
class GivensState:
    """Running quantities of the Givens QR recurrence."""

    rho_bar: float
    phi_bar: float
    w: np.ndarray
    x: np.ndarray
    last_phi: float = 0.0
    last_rho: float = math.inf


@dataclass
class OperatorNormEstimate:
    """Estimate of the norm of v -> proj_R(P) A v between the G/P spaces."""

    value: float
    source: str
    iterations: int | None = None


@dataclass
class SolveReport:
    """Outcome of a gLSQR run.

    Histories have one entry per completed iteration. The residual-estimate
    history stores the normalized stopping quantity; the true-residual
    history (debug mode only) stores the directly evaluated counterpart.
    """

    x: np.ndarray
    iterations: int
    stop_reason: str
    residual_estimate_history: list
    true_residual_history: list | None
    x_norm_history: list
    alphas: list
    betas: list
    norm_estimate: OperatorNormEstimate
    beta1: float
    state: BidiagState


def residual_estimate(state: BidiagState, givens: GivensState) -> float:
    """alpha_{k+1} * beta_{k+1} * |e_k' y_k| without forming y_k.

    Back substitution in the Givens QR factorization gives
    ``e_k' y_k = phi_k / rho_k``.
    """
    if not math.isfinite(givens.last_rho) or givens.last_rho == 0.0:
        return 0.0
    return state.alphas[-1] * state.betas[-1] * abs(givens.last_phi) / givens.last_rho


def operator_norm(
    prob: GlsProblem, strategy=None, method="auto", max_iters=200, rel_tol=1e-10
) -> OperatorNormEstimate:
    """Norm of the map v -> proj_R(P) A v from (R(G), G) to (R(P), P).

    ``gsvd`` computes it exactly as the largest diagonal of C_A (M = I
    only); ``power`` runs a power iteration on pinv(G) A'PA in the G-inner
    product, seeded with pinv(G) A'P b. ``auto`` picks gsvd for M = I and
    n <= 200, power otherwise.
    """
    if method == "auto":
        method = "gsvd" if prob.M is None and prob.n <= 200 else "power"
    if method == "gsvd":
        if prob.M is not None:
            raise ValueError("the gsvd norm estimate requires M = I")
        value = sigma_max_ca(gsvd_pair(prob.A, prob.L))
        return OperatorNormEstimate(value=value, source="gsvd_exact")
    if method != "power":
        raise ValueError(f"unknown operator norm method {method!r}")

    if strategy is None:
        strategy = DensePinvStrategy(prob.G)
    if prob.b is not None:
        v = strategy.apply(prob.apply_At_P(prob.b))
    else:
        seed = np.random.default_rng(0).standard_normal(prob.m)
        v = strategy.apply(prob.apply_At_P(seed))

    estimate = 0.0
    iterations = 0
    for it in range(1, max_iters + 1):
        gv = prob.G @ v
        v_g = math.sqrt(max(float(v @ gv), 0.0))
        if v_g == 0.0:
            return OperatorNormEstimate(value=0.0, source="power_iteration", iterations=it)
        v = v / v_g
        Av = prob.A @ v
        new_estimate = math.sqrt(max(float(Av @ prob.mult_P(Av)), 0.0))
        iterations = it
        if new_estimate == 0.0:
            return OperatorNormEstimate(value=0.0, source="power_iteration", iterations=it)
        if abs(new_estimate - estimate) <= rel_tol * new_estimate:
            estimate = new_estimate
            break
        estimate = new_estimate
        v = strategy.apply(prob.apply_At_P(Av))
    return OperatorNormEstimate(value=estimate, source="power_iteration", iterations=iterations)


def _true_residual(prob, strategy, x):
    q = strategy.apply(prob.apply_At_P(prob.A @ x - prob.b))
    return math.sqrt(max(float(q @ (prob.G @ q)), 0.0))


def glsqr_solve(
    prob: GlsProblem,
    strategy=None,
    tol=1e-10,
    max_iter=None,
    norm_est=None,
    debug=False,
    reorthogonalize=True,
) -> SolveReport:
    """Iteratively compute the minimum 2-norm GLS solution A_ML^+ b.

    Parameters
    ----------
    prob : GlsProblem
        Problem data including b.
    strategy : Gdag strategy, optional
        How pinv(G) is applied each step (default: dense pseudoinverse).
    tol : float
        Stopping threshold for the normalized residual estimate.
    max_iter : int, optional
        Iteration cap, default ``2 * min(m, n)``. Reaching it is a status,
        not an error.
    norm_est : OperatorNormEstimate, optional
        Operator norm used in the stopping rule; computed on demand.
    debug : bool
        Also record the directly evaluated residual seminorm per iteration
        (dense-cost, for validation).
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if strategy is None:
        strategy = DensePinvStrategy(prob.G)
    if max_iter is None:
        max_iter = 2 * min(prob.m, prob.n)
    max_iter = max(int(max_iter), 1)

    state = ggkb_init(prob, strategy, reorthogonalize=reorthogonalize)
    beta1 = state.betas[0] if state.betas else 0.0
    if norm_est is None:
        norm_est = operator_norm(prob, strategy)

    if state.terminated:
        return SolveReport(
            x=np.zeros(prob.n), iterations=0, stop_reason="ggkb_terminated",
            residual_estimate_history=[], true_residual_history=[] if debug else None,
            x_norm_history=[], alphas=list(state.alphas), betas=list(state.betas),
            norm_estimate=norm_est, beta1=beta1, state=state,
        )

    givens = GivensState(
        rho_bar=state.alphas[0], phi_bar=beta1,
        w=state.vs[0].copy(), x=np.zeros(prob.n),
    )
    denom = max(norm_est.value * beta1, _TINY)

    est_hist = []
    true_hist = [] if debug else None
    xnorm_hist = []
    iterations = 0
    stop_reason = "max_iter"

    for k in range(1, max_iter + 1):
        state = ggkb_step(state, prob, strategy)
        beta_next = state.betas[-1]
        alpha_next = state.alphas[-1]

        rho = math.hypot(givens.rho_bar, beta_next)
        guard = max(1e-10, 10.0 * getattr(strategy, "relative_noise", 0.0))
        if state.terminated and rho <= guard * max(max(state.alphas), max(state.betas)):
            # The trailing column of the bidiagonal matrix is numerically
            # zero (the Krylov space was already exhausted and the last
            # direction sits at the noise floor of the pinv(G) application).
            # The minimum-norm solution of the rank-deficient trailing
            # system keeps its coefficient at zero, so the previous iterate
            # stands.
            est_hist.append(0.0)
            xnorm_hist.append(float(np.linalg.norm(givens.x)))
            if debug:
                true_hist.append(_true_residual(prob, strategy, givens.x) / denom)
            iterations = k
            stop_reason = "ggkb_terminated"
            break
        c = givens.rho_bar / rho
        s = beta_next / rho
        theta = s * alpha_next
        phi = c * givens.phi_bar

        givens.x = givens.x + (phi / rho) * givens.w
        givens.last_phi = phi
        givens.last_rho = rho

        est = residual_estimate(state, givens) / denom
        est_hist.append(est)
        xnorm_hist.append(float(np.linalg.norm(givens.x)))
        if debug:
            true_hist.append(_true_residual(prob, strategy, givens.x) / denom)
        iterations = k

        if state.terminated:
            stop_reason = "ggkb_terminated"
            break
        if est <= tol:
            stop_reason = "tolerance_met"
            break

        givens.w = state.vs[-1] - (theta / rho) * givens.w
        givens.rho_bar = -c * alpha_next
        givens.phi_bar = s * givens.phi_bar

    return SolveReport(
        x=givens.x, iterations=iterations, stop_reason=stop_reason,
        residual_estimate_history=est_hist, true_residual_history=true_hist,
        x_norm_history=xnorm_hist, alphas=list(state.alphas), betas=list(state.betas),
        norm_estimate=norm_est, beta1=beta1, state=state,
    )


def certify_solution(prob: GlsProblem, report: SolveReport, tol=1e-8) -> bool:
    """True iff report.x passes the solution criterion and lies in R(G)."""
    crit = check_gls_criterion(prob, report.x, tol)
    return bool(crit) and crit.in_range_g


def save_history(report: SolveReport, path):
    """Convergence history as CSV with columns
    k, res_estimate, res_true, x_norm, alpha, beta (alpha/beta are the
    step-(k+1) coefficients feeding the estimate; res_true is empty unless
    the run recorded it)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "res_estimate", "res_true", "x_norm", "alpha", "beta"])
        for i in range(report.iterations):
            true_val = ""
            if report.true_residual_history is not None:
                true_val = repr(float(report.true_residual_history[i]))
            writer.writerow(
                [
                    i + 1,
                    repr(float(report.residual_estimate_history[i])),
                    true_val,
                    repr(float(report.x_norm_history[i])),
                    repr(float(report.alphas[i + 1])),
                    repr(float(report.betas[i + 1])),
                ]
            )
