"""Resonance parameter extraction by damped nonlinear least squares.

The dip model (see transmission.s21_power) is fit to a measured power-ratio
trace over (f_r, Q_L, Q_e, phi).  Internally Q_L and Q_e are parameterized as
logs to keep them positive without constraints.  The optimizer is
Gauss-Newton with multiplicative damping (x10 on a cost increase, /10 on a
decrease) and analytic residual derivatives.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConvergenceFailure, NonPhysicalFit, NoResonance
from .transmission import internal_q

MAX_ITERATIONS = 200
STEP_TOL = 1e-8       # relative parameter step
COST_TOL = 1e-12      # relative cost decrease
DAMPING_START = 1e-3


@dataclass
class InitialGuess:
    f_r: float
    q_l: float
    q_e: float
    phi: float = 0.0
    at_edge: bool = False  # dip sits at the span boundary; low confidence


@dataclass
class FitResult:
    f_r: float
    q_l: float
    q_e: float
    q_i: float
    phi: float
    f_r_err: float
    q_l_err: float
    q_e_err: float
    phi_err: float
    rms_residual: float
    n_iterations: int
    converged: bool


def _baseline_and_noise(y):
    # Robust to a dip anywhere in the span (including the edges): baseline
    # from the upper quantile, noise floor from successive differences.
    baseline = float(np.percentile(y, 80))
    diffs = np.abs(np.diff(y))
    noise = 1.4826 * float(np.median(diffs)) / math.sqrt(2.0)
    return baseline, noise


def initial_guess(trace):
    """Heuristic starting point: dip position, half-depth width, dip depth.

    Raises NoResonance when the dip does not stand out from the noise floor.
    """
    f = trace.frequencies
    y = trace.power_ratio
    if len(y) < 16:
        raise NoResonance("trace too short for a guess (< 16 points)")

    baseline, noise_floor = _baseline_and_noise(y)
    imin = int(np.argmin(y))
    depth = baseline - y[imin]
    if depth < 3.0 * max(noise_floor, 1e-12):
        raise NoResonance("dip depth below 3x the noise floor")

    at_edge = imin < 2 or imin > len(y) - 3
    f_r = float(f[imin])

    # Full width at half depth, found by walking outward from the minimum.
    half_level = baseline - depth / 2.0
    left = right = None
    for i in range(imin, 0, -1):
        if y[i - 1] >= half_level:
            frac = (half_level - y[i]) / (y[i - 1] - y[i])
            left = f[i] + frac * (f[i - 1] - f[i])
            break
    for i in range(imin, len(y) - 1):
        if y[i + 1] >= half_level:
            frac = (half_level - y[i]) / (y[i + 1] - y[i])
            right = f[i] + frac * (f[i + 1] - f[i])
            break
    if left is not None and right is not None:
        width = right - left
    elif left is not None:
        width = 2.0 * (f_r - left)
    elif right is not None:
        width = 2.0 * (right - f_r)
    else:
        width = (f[-1] - f[0]) / 2.0
    width = max(width, (f[-1] - f[0]) / (len(f) - 1))

    q_l = f_r / width
    min_ratio = min(max(y[imin] / baseline, 0.0), 1.0 - 1e-9)
    q_e = q_l / (1.0 - math.sqrt(min_ratio))
    return InitialGuess(f_r=f_r, q_l=q_l, q_e=q_e, phi=0.0, at_edge=at_edge)


def _residual_and_jacobian(theta, f, y):
    """Residuals r = model - data and d r / d theta for
    theta = (f_r, ln Q_L, ln Q_e, phi)."""
    f_r, lql, lqe, phi = theta
    q_l = math.exp(lql)
    q_e = math.exp(lqe)

    x = (f - f_r) / f_r
    denom = 1.0 + 2j * q_l * x
    t = (q_l / q_e) * np.exp(1j * phi) / denom
    resp = 1.0 - t
    r = resp.real**2 + resp.imag**2 - y

    # dS/dp = -2 Re[conj(resp) * dt/dp]
    dt_dfr = t * (2j * q_l / denom) * (f / (f_r * f_r))
    dt_dlql = t * (1.0 - 2j * q_l * x / denom)
    dt_dlqe = -t
    dt_dphi = 1j * t

    rc = np.conj(resp)
    jac = np.empty((f.size, 4))
    jac[:, 0] = -2.0 * (rc * dt_dfr).real
    jac[:, 1] = -2.0 * (rc * dt_dlql).real
    jac[:, 2] = -2.0 * (rc * dt_dlqe).real
    jac[:, 3] = -2.0 * (rc * dt_dphi).real
    return r, jac


def fit_resonance(trace, guess: Optional[InitialGuess] = None):
    """Fit the dip model to a trace; returns a FitResult.

    Raises NoResonance (no usable dip), ConvergenceFailure (iteration budget
    exhausted; carries best-so-far), or NonPhysicalFit (Q_L >= Q_e at the
    optimum).
    """
    if guess is None:
        guess = initial_guess(trace)

    f = trace.frequencies
    y = trace.power_ratio
    theta = np.array([guess.f_r, math.log(guess.q_l), math.log(guess.q_e), guess.phi])

    r, jac = _residual_and_jacobian(theta, f, y)
    cost = float(r @ r)
    lam = DAMPING_START
    converged = False
    n_iter = 0

    for n_iter in range(1, MAX_ITERATIONS + 1):
        g = jac.T @ r
        h = jac.T @ jac
        diag = np.diag(h).copy()
        diag[diag <= 0] = 1e-30
        try:
            step = np.linalg.solve(h + lam * np.diag(diag), -g)
        except np.linalg.LinAlgError:
            lam *= 10.0
            continue

        theta_new = theta + step
        # Keep phi inside its domain; the model is undefined beyond +-pi/2.
        theta_new[3] = float(np.clip(theta_new[3], -math.pi / 2 + 1e-9, math.pi / 2 - 1e-9))
        r_new, jac_new = _residual_and_jacobian(theta_new, f, y)
        cost_new = float(r_new @ r_new)

        if cost_new <= cost:
            rel_step = max(
                abs(step[0]) / theta[0], abs(step[1]), abs(step[2]), abs(step[3])
            )
            rel_drop = (cost - cost_new) / max(cost, 1e-300)
            theta, r, jac, cost = theta_new, r_new, jac_new, cost_new
            lam = max(lam / 10.0, 1e-15)
            if rel_step < STEP_TOL or rel_drop < COST_TOL:
                converged = True
                break
        else:
            lam *= 10.0

    f_r = float(theta[0])
    q_l = math.exp(theta[1])
    q_e = math.exp(theta[2])
    phi = float(theta[3])

    # Parameter standard errors from the local quadratic model, assuming
    # independent homoscedastic noise (indicative only).
    dof = max(f.size - 4, 1)
    sigma2 = cost / dof
    try:
        cov = sigma2 * np.linalg.pinv(jac.T @ jac)
        errs = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    except np.linalg.LinAlgError:
        errs = np.full(4, float("nan"))

    def build(conv):
        q_i = internal_q(q_l, q_e) if q_l < q_e else float("inf")
        return FitResult(
            f_r=f_r,
            q_l=q_l,
            q_e=q_e,
            q_i=q_i,
            phi=phi,
            f_r_err=float(errs[0]),
            q_l_err=q_l * float(errs[1]),
            q_e_err=q_e * float(errs[2]),
            phi_err=float(errs[3]),
            rms_residual=math.sqrt(cost / f.size),
            n_iterations=n_iter,
            converged=conv,
        )

    if not converged:
        raise ConvergenceFailure(
            f"no convergence in {MAX_ITERATIONS} iterations", best=build(False)
        )
    if q_l >= q_e:
        raise NonPhysicalFit(
            f"fit landed at Q_L = {q_l:.4g} >= Q_e = {q_e:.4g}"
        )
    if not f[0] <= f_r <= f[-1]:
        raise ConvergenceFailure(
            "fitted f_r outside the trace span", best=build(False)
        )
    return build(True)


@dataclass
class PowerSeriesEntry:
    p_in_dbm: float
    result: Optional[FitResult]
    error: Optional[str]


def fit_power_series(traces):
    """Fit each trace, ordered by input power; failures are recorded per
    entry instead of aborting the batch."""
    entries = []
    for tr in sorted(traces, key=lambda t: t.p_in_dbm):
        try:
            entries.append(PowerSeriesEntry(tr.p_in_dbm, fit_resonance(tr), None))
        except (NoResonance, NonPhysicalFit, ConvergenceFailure) as exc:
            entries.append(PowerSeriesEntry(tr.p_in_dbm, None, type(exc).__name__))
    return entries
