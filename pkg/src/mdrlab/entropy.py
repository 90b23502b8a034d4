"""Renyi entropies, sandwiched divergences and one-shot conditional entropies.

All logarithms are base 2, so every quantity is in bits.  The divergence
family uses the 1/(alpha - 1) normalization throughout; with that sign
choice the quantum (sandwiched) divergence reduces exactly to the
classical formula on commuting inputs, which is enforced by tests.
Support conventions: matrix powers and logarithms act on the support
only, and +inf is a first-class return value whenever the first argument
has weight outside the support of the second (for alpha >= 1).

Conditional entropies H_alpha(A|B) maximize -D_alpha(rho_AB || I (x) eta_B)
over conditioning states eta_B.  Closed forms are used at alpha = 1, the
min-entropy convex program at alpha = inf, purification duality at
alpha = 1/2, and a damped fixed-point ascent everywhere else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DensityOperator,
    SystemLayout,
    hermitian_power,
    partial_trace,
    permute_labels,
    purify,
)
from .sdp import minimize_trace_dominating

INF = math.inf

# alpha values used by the fuzz campaigns: both closed-form endpoints, the
# Kullback-Leibler center and a generic interior point on each side of 1.
ALPHA_GRID = (0.5, 0.75, 1.0, 2.0, INF)

_SUPPORT_RTOL = 1e-12   # relative eigenvalue cutoff defining supports
_MASS_TOL = 1e-10       # weight outside a support that still counts as zero
_ZERO_PROB = 1e-15      # probabilities below this are structural zeros


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if math.isnan(alpha) or alpha < 0.5:
        raise ValueError(f"alpha must lie in [1/2, inf], got {alpha}")
    return alpha


def _check_distribution(p, what: str = "distribution") -> np.ndarray:
    a = np.asarray(p, dtype=float).reshape(-1)
    if a.size == 0:
        raise ValueError(f"{what} is empty")
    if np.min(a) < -1e-10:
        raise ValueError(f"{what} has negative weight {np.min(a):.3e}")
    a = np.clip(a, 0.0, None)
    if abs(a.sum() - 1.0) > 1e-9:
        raise ValueError(f"{what} sums to {a.sum()!r}, expected 1")
    return a


def relative_renyi_entropy(p, q, alpha: float) -> float:
    """Classical Renyi relative entropy D_alpha(P||Q) in bits.

    alpha = 1 is the Kullback-Leibler divergence, alpha = 1/2 equals
    -log2 of the fidelity (sum sqrt(PQ))^2, alpha = inf is log2 max P/Q.
    Returns +inf when P has weight outside supp(Q) and alpha >= 1.
    """
    alpha = _check_alpha(alpha)
    p = _check_distribution(p, "P")
    q = _check_distribution(q, "Q")
    if p.shape != q.shape:
        raise ValueError("P and Q must share an outcome set")
    sp = p > _ZERO_PROB
    sq = q > _ZERO_PROB
    if alpha >= 1.0 and np.any(sp & ~sq):
        return INF
    if alpha == 1.0:
        return float(np.sum(p[sp] * np.log2(p[sp] / q[sp])))
    if alpha == INF:
        return float(np.log2(np.max(p[sp] / q[sp])))
    both = sp & sq
    s = float(np.sum(p[both] ** alpha * q[both] ** (1.0 - alpha)))
    if s <= 0.0:
        return INF
    return math.log2(s) / (alpha - 1.0)


def renyi_entropy(state, alpha: float) -> float:
    """Renyi entropy in bits: log2(d) - D_alpha(P || uniform).

    Accepts a probability vector or a DensityOperator (its spectrum is
    used).  alpha = 1 recovers the Shannon / von Neumann entropy.
    """
    if isinstance(state, DensityOperator):
        p = state.eigenvalues()
    else:
        p = _check_distribution(state)
    d = p.size
    return math.log2(d) - relative_renyi_entropy(p, np.full(d, 1.0 / d), alpha)


def _state_matrix(x, what: str, unit_trace: bool) -> np.ndarray:
    if isinstance(x, DensityOperator):
        return x.matrix
    m = np.asarray(x, dtype=complex)
    dev = np.max(np.abs(m - m.conj().T))
    if dev > 1e-9 * max(1.0, float(np.max(np.abs(m)))):
        raise ValueError(f"{what} is not Hermitian")
    m = 0.5 * (m + m.conj().T)
    w = np.linalg.eigvalsh(m)
    if w[0] < -1e-9 * max(float(w[-1]), 1.0):
        raise ValueError(f"{what} is not positive semidefinite")
    if unit_trace and abs(float(np.real(np.trace(m))) - 1.0) > 1e-8:
        raise ValueError(f"{what} must have unit trace")
    return m


def _sandwiched(rho: np.ndarray, sigma: np.ndarray, alpha: float) -> float:
    """Core sandwiched divergence on raw PSD matrices (sigma any trace)."""
    w_s, v_s = np.linalg.eigh(sigma)
    w_s = np.clip(w_s, 0.0, None)
    scale = float(w_s[-1]) if w_s.size else 0.0
    supp = w_s > _SUPPORT_RTOL * max(scale, 1e-300)
    if not np.any(supp):
        return INF
    rho_in_s = v_s.conj().T @ rho @ v_s
    outside = float(np.real(np.sum(np.diag(rho_in_s)[~supp])))
    if alpha >= 1.0 and outside > _MASS_TOL:
        return INF

    if alpha == 1.0:
        w_r, v_r = np.linalg.eigh(rho)
        w_r = np.clip(w_r, 0.0, None)
        supp_r = w_r > _SUPPORT_RTOL * max(float(w_r[-1]), 1e-300)
        term1 = float(np.sum(w_r[supp_r] * np.log2(w_r[supp_r])))
        overlap = np.abs(v_r.conj().T @ v_s) ** 2
        term2 = float(
            w_r[supp_r] @ overlap[np.ix_(supp_r, supp)] @ np.log2(w_s[supp])
        )
        return term1 - term2

    if alpha == INF:
        inv_root = (v_s[:, supp] / np.sqrt(w_s[supp])) @ v_s[:, supp].conj().T
        m = inv_root @ rho @ inv_root
        top = float(np.max(np.linalg.eigvalsh(m)))
        if top <= 0.0:
            return -INF
        return math.log2(top)

    beta = (1.0 - alpha) / (2.0 * alpha)
    b = (v_s[:, supp] * w_s[supp] ** beta) @ v_s[:, supp].conj().T
    x = b @ rho @ b
    ev = np.clip(np.linalg.eigvalsh(0.5 * (x + x.conj().T)), 0.0, None)
    # floor out eigensolver noise: spurious values ~eps*||X|| would otherwise
    # contribute ~sqrt(eps) to the trace at alpha < 1
    floor = float(ev[-1]) * 1e-13 if ev.size else 0.0
    q = float(np.sum(ev[ev > floor] ** alpha))
    if q <= 0.0:
        return INF
    return math.log2(q) / (alpha - 1.0)


def sandwiched_relative_entropy(rho, sigma, alpha: float) -> float:
    """Sandwiched quantum Renyi divergence D_alpha(rho||sigma) in bits.

    ``rho`` must be a state; ``sigma`` may also be any positive operator
    (unnormalized second arguments support the scaling identity
    D_alpha(rho || lam * sigma) = D_alpha(rho || sigma) - log2(lam)).
    """
    alpha = _check_alpha(alpha)
    if isinstance(rho, DensityOperator) and isinstance(sigma, DensityOperator):
        if rho.layout != sigma.layout:
            raise ValueError(
                f"layout mismatch: {rho.layout.labels} vs {sigma.layout.labels}"
            )
    r = _state_matrix(rho, "rho", unit_trace=True)
    s = _state_matrix(sigma, "sigma", unit_trace=False)
    if r.shape != s.shape:
        raise ValueError("rho and sigma must have equal dimensions")
    return _sandwiched(r, s, alpha)


@dataclass
class EntropyResult:
    """Value of an optimized entropy plus solver diagnostics.

    ``certificate`` is the conditioning state achieving the reported
    optimum, when the computation produces one.
    """

    value: float
    converged: bool
    iterations: int
    certificate: np.ndarray | None = None


def _bipartition(rho: DensityOperator, condition_on) -> tuple[np.ndarray, int, int]:
    cond = (condition_on,) if isinstance(condition_on, str) else tuple(condition_on)
    for l in cond:
        rho.layout.index(l)
    a_labels = [l for l in rho.layout.labels if l not in set(cond)]
    if not a_labels:
        raise ValueError("conditioning on every label leaves no system")
    mat, lay = permute_labels(rho.matrix, rho.layout, a_labels + list(cond))
    d_b = lay.dim_of(cond)
    return mat, lay.dim // d_b, d_b


def min_entropy(rho: DensityOperator, condition_on) -> EntropyResult:
    """Conditional min-entropy H_min(A|B) via the trace-minimization program.

    Solves min tr(Y) subject to I_A (x) Y >= rho_AB; the certificate is the
    normalized optimizer Y / tr(Y), the conditioning state witnessing the
    operator inequality rho_AB <= 2^(-H_min) I (x) eta.
    """
    mat, d_a, d_b = _bipartition(rho, condition_on)
    sol = minimize_trace_dominating(mat, d_a, d_b)
    value = -math.log2(sol.objective) if sol.objective > 0 else INF
    return EntropyResult(value, sol.converged, sol.newton_steps, sol.y / sol.objective)


def max_entropy(rho: DensityOperator, condition_on, with_certificate: bool = False) -> EntropyResult:
    """Conditional max-entropy H_max(A|B) = H_{1/2}(A|B) via duality.

    Purifies rho_AB into a reference system C and returns -H_min(A|C).
    With ``with_certificate`` a fixed-point ascent at alpha = 1/2 supplies
    the optimal conditioning state on B as well.
    """
    cond = (condition_on,) if isinstance(condition_on, str) else tuple(condition_on)
    pure = purify(rho)
    ref = pure.layout.labels[-1]
    keep = [l for l in pure.layout.labels if l not in set(cond)]
    rho_ac = partial_trace(pure, keep)
    res = min_entropy(rho_ac, ref)
    cert = None
    if with_certificate:
        fp = _fixed_point_conditional(rho, cond, 0.5, tol=1e-11, max_iter=10000)
        cert = fp.certificate
    return EntropyResult(-res.value, res.converged, res.iterations, cert)


def _conditional_objective(mat: np.ndarray, d_a: int, eta: np.ndarray, alpha: float) -> float:
    return -_sandwiched(mat, np.kron(np.eye(d_a), eta), alpha)


def _trace_out_a(big: np.ndarray, d_a: int, d_b: int) -> np.ndarray:
    return np.einsum("ibid->bd", big.reshape(d_a, d_b, d_a, d_b))


def _fixed_point_conditional(
    rho: DensityOperator,
    condition_on,
    alpha: float,
    tol: float = 1e-9,
    max_iter: int = 10000,
) -> EntropyResult:
    """Damped fixed-point ascent for H_alpha(A|B) at generic alpha.

    The update map eta -> tr_A[((I (x) eta^beta) rho (I (x) eta^beta))^alpha]
    (normalized) has the optimizer as its fixed point; mixing each step
    with the current iterate and monitoring the objective keeps it an
    ascent.  Restarts from rho_B and from the maximally mixed state guard
    against boundary stalls.
    """
    mat, d_a, d_b = _bipartition(rho, condition_on)
    beta = (1.0 - alpha) / (2.0 * alpha)
    eye_a = np.eye(d_a)
    rho_b = _trace_out_a(mat, d_a, d_b)
    rho_b = 0.5 * (rho_b + rho_b.conj().T)
    starts = [rho_b / np.real(np.trace(rho_b)), np.eye(d_b) / d_b]

    def phi(eta):
        b = hermitian_power(eta, beta)
        big = np.kron(eye_a, b)
        x = big @ mat @ big.conj().T
        xa = hermitian_power(x, alpha)
        m = _trace_out_a(xa, d_a, d_b)
        m = 0.5 * (m + m.conj().T)
        t = float(np.real(np.trace(m)))
        if not np.isfinite(t) or t <= 0.0:
            return None
        return m / t

    def snap_to_face(eta, f):
        """Drop near-zero eigenvalues of the iterate when that helps.

        Boundary optimizers (rank-deficient eta) are only approached at a
        power-law rate by the multiplicative update; once snapped onto the
        exact face the optimum is interior again and convergence is
        geometric.  The update map preserves faces, so iteration continues
        within the face afterwards.
        """
        w, v = np.linalg.eigh(eta)  # ascending
        best = (f, eta)
        for drop in range(1, d_b):
            keep = np.zeros(d_b, dtype=bool)
            keep[drop:] = True
            if w[drop] <= 0.0:
                continue
            proj = (v[:, keep] * w[keep]) @ v[:, keep].conj().T
            proj = proj / float(np.real(np.trace(proj)))
            val = _conditional_objective(mat, d_a, proj, alpha)
            if val > best[0]:
                best = (val, proj)
        return best

    best_value = -INF
    best_eta = starts[0]
    best_converged = False
    total_iter = 0
    for start in starts:
        eta = start
        f = _conditional_objective(mat, d_a, eta, alpha)
        converged = False
        while total_iter < max_iter:
            total_iter += 1
            target = phi(eta)
            if target is None:
                break
            step = 0.5
            cand, f_new = eta, f
            for _ in range(40):
                trial = (1.0 - step) * eta + step * target
                trial = 0.5 * (trial + trial.conj().T)
                trial /= np.real(np.trace(trial))
                val = _conditional_objective(mat, d_a, trial, alpha)
                if val >= f - 1e-13:
                    cand, f_new = trial, val
                    break
                step *= 0.5
            if total_iter % 40 == 0:
                f_new, cand = snap_to_face(cand, f_new)
            delta = f_new - f
            eta, f = cand, f_new
            if abs(delta) < tol:
                f_snap, eta_snap = snap_to_face(eta, f)
                if f_snap > f + tol:
                    f, eta = f_snap, eta_snap
                    continue
                f, eta = f_snap, eta_snap
                converged = True
                break
        if f > best_value:
            best_value, best_eta, best_converged = f, eta, converged
    return EntropyResult(best_value, best_converged, total_iter, best_eta)


def conditional_renyi_entropy(
    rho: DensityOperator,
    condition_on,
    alpha: float,
    method: str = "auto",
    tol: float = 1e-9,
    max_iter: int = 10000,
) -> EntropyResult:
    """Conditional Renyi entropy H_alpha(A|B) (optimized conditioner form).

    ``method="auto"`` dispatches alpha = 1 to the closed form
    H(AB) - H(B), alpha = inf to the min-entropy program, alpha = 1/2 to
    the max-entropy duality, and everything else to a fixed-point ascent.
    ``method="ascent"`` forces the iterative route for any finite alpha,
    which is useful as an independent cross-check of the closed forms.
    """
    alpha = _check_alpha(alpha)
    if method not in ("auto", "ascent"):
        raise ValueError(f"unknown method {method!r}")
    if method == "ascent":
        if alpha == INF:
            raise ValueError("the ascent route does not support alpha = inf")
        return _fixed_point_conditional(rho, condition_on, alpha, tol, max_iter)
    if alpha == 1.0:
        cond = (condition_on,) if isinstance(condition_on, str) else tuple(condition_on)
        rho_b = partial_trace(rho, cond)
        h_ab = renyi_entropy(rho, 1.0)
        h_b = renyi_entropy(rho_b, 1.0)
        return EntropyResult(h_ab - h_b, True, 0, rho_b.matrix)
    if alpha == INF:
        return min_entropy(rho, condition_on)
    if alpha == 0.5:
        return max_entropy(rho, condition_on, with_certificate=True)
    return _fixed_point_conditional(rho, condition_on, alpha, tol, max_iter)


def cq_max_entropy(joint) -> float:
    """Max-entropy H_max(X|M) of a fully classical joint distribution.

    ``joint[x, m]`` holds P(X = x, M = m).  The closed form is
    log2 sum_m (sum_x sqrt(P(x, m)))^2, i.e. each memory value contributes
    its conditional 2^(H_{1/2}) weighted by its probability.
    """
    a = np.asarray(joint, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise ValueError("joint must be a 2-D array P[x, m]")
    if np.min(a) < -1e-10:
        raise ValueError("joint has negative weight")
    a = np.clip(a, 0.0, None)
    if abs(a.sum() - 1.0) > 1e-9:
        raise ValueError(f"joint sums to {a.sum()!r}, expected 1")
    per_m = np.sum(np.sqrt(a), axis=0) ** 2
    return float(np.log2(np.sum(per_m)))


def divergence_entropy_margin(rho_ab, sigma_ab, condition_on, alpha: float) -> float:
    """Slack of D_alpha(rho||sigma) >= H_min(A|B)_sigma - H_alpha(A|B)_rho.

    Nonnegative (up to solver tolerance) for every pair of states and
    every alpha in [1/2, inf].
    """
    alpha = _check_alpha(alpha)
    d = sandwiched_relative_entropy(rho_ab, sigma_ab, alpha)
    if d == INF:
        return INF
    h_min_sigma = min_entropy(sigma_ab, condition_on).value
    h_alpha_rho = conditional_renyi_entropy(rho_ab, condition_on, alpha).value
    return d - (h_min_sigma - h_alpha_rho)


def marginal_optimality_margins(rho_ab: DensityOperator, condition_on, sigmas) -> list[float]:
    """D(rho_AB || I (x) sigma_B) - D(rho_AB || I (x) rho_B) for each sigma.

    The chain rule makes every margin equal D(rho_B || sigma_B) >= 0, so
    the reduced state is the optimal alpha = 1 conditioner.
    """
    cond = (condition_on,) if isinstance(condition_on, str) else tuple(condition_on)
    mat, d_a, d_b = _bipartition(rho_ab, cond)
    eye_a = np.eye(d_a)
    rho_b = _trace_out_a(mat, d_a, d_b)
    base = _sandwiched(mat, np.kron(eye_a, rho_b), 1.0)
    out = []
    for sigma in sigmas:
        s = _state_matrix(sigma, "sigma_B", unit_trace=False)
        if s.shape != (d_b, d_b):
            raise ValueError("conditioner dimension mismatch")
        out.append(_sandwiched(mat, np.kron(eye_a, s), 1.0) - base)
    return out


def check_marginal_optimality(
    rho_ab: DensityOperator, condition_on, trials: int, rng, tol: float = 1e-9
) -> bool:
    """Fuzz the alpha = 1 conditioner optimality against random states."""
    from .ensembles import random_density

    _, _, d_b = _bipartition(rho_ab, condition_on)
    sigmas = [random_density(d_b, d_b, rng).matrix for _ in range(trials)]
    return all(m >= -tol for m in marginal_optimality_margins(rho_ab, condition_on, sigmas))
