"""Self-contained interior-point solver for the min-entropy program.

Solves, for a bipartite PSD matrix rho on A x B,

    minimize    tr(Y)
    subject to  I_A (x) Y >= rho,   Y >= 0,

over Hermitian Y on B, by a standard log-det barrier path-following
method.  System sizes here are tiny (dim <= 64), so dense Newton steps on
the d_B^2 real coordinates of Y are perfectly adequate and keep the
package dependency-free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class BarrierSolution:
    y: np.ndarray          # optimal Y
    objective: float       # tr(Y)
    gap: float             # barrier duality-gap bound nu / t
    newton_steps: int
    converged: bool


def _hermitian_basis(d: int) -> list[np.ndarray]:
    """Orthonormal basis of d x d Hermitian matrices (trace inner product)."""
    basis = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1.0
        basis.append(e)
    s = 1.0 / np.sqrt(2.0)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = s
            e[j, i] = s
            basis.append(e)
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1j * s
            e[j, i] = -1j * s
            basis.append(e)
    return basis


def _is_pd(m: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(m)
        return True
    except np.linalg.LinAlgError:
        return False


def _inv_sqrt_pd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    return (v / np.sqrt(w)) @ v.conj().T


def minimize_trace_dominating(
    rho: np.ndarray,
    d_a: int,
    d_b: int,
    rel_gap: float = 1e-10,
    mu: float = 20.0,
    max_newton: int = 400,
) -> BarrierSolution:
    """Barrier method for min tr(Y) s.t. I_A (x) Y >= rho, Y >= 0."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (d_a * d_b, d_a * d_b):
        raise ValueError("rho shape does not match d_a * d_b")
    if d_b == 1:
        top = float(np.max(np.linalg.eigvalsh(rho)))
        top = max(top, 0.0)
        return BarrierSolution(np.array([[top]], dtype=complex), top, 0.0, 0, True)

    basis = _hermitian_basis(d_b)
    m = len(basis)
    eye_a = np.eye(d_a)
    eye_b = np.eye(d_b)
    nu = float(d_a * d_b + d_b)  # total barrier parameter of the two cones

    lam_max = float(np.max(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
    y = (1.05 * max(lam_max, 1e-12) + 1e-9) * eye_b.astype(complex)

    def s_of(ymat):
        return np.kron(eye_a, ymat) - rho

    def f_of(t, ymat, smat):
        sign_s, logdet_s = np.linalg.slogdet(smat)
        sign_y, logdet_y = np.linalg.slogdet(ymat)
        if sign_s.real <= 0 or sign_y.real <= 0:
            return np.inf
        return t * float(np.real(np.trace(ymat))) - float(logdet_s.real) - float(logdet_y.real)

    t = 1.0
    steps = 0
    converged = True
    while True:
        # Newton iterations at fixed t (centering)
        for _ in range(60):
            s = s_of(y)
            s_inv = np.linalg.inv(s)
            y_inv = np.linalg.inv(y)
            # partial trace of s_inv over A
            tr_a = s_inv.reshape(d_a, d_b, d_a, d_b)
            tr_a = np.einsum("ibid->bd", tr_a)
            grad = t * eye_b - tr_a - y_inv
            g = np.array([float(np.real(np.trace(bk @ grad))) for bk in basis])

            s_half = _inv_sqrt_pd(s)
            y_half = _inv_sqrt_pd(y)
            ws = np.empty((m, (d_a * d_b) ** 2), dtype=complex)
            wy = np.empty((m, d_b * d_b), dtype=complex)
            for k, bk in enumerate(basis):
                wk = s_half @ np.kron(eye_a, bk) @ s_half
                ws[k] = wk.reshape(-1)
                vk = y_half @ bk @ y_half
                wy[k] = vk.reshape(-1)
            hess = np.real(ws @ ws.conj().T) + np.real(wy @ wy.conj().T)
            hess += 1e-14 * np.trace(hess) / m * np.eye(m)
            delta = np.linalg.solve(hess, -g)
            decrement2 = float(-g @ delta)
            dy = sum(c * bk for c, bk in zip(delta, basis))

            step = 1.0
            f0 = f_of(t, y, s)
            accepted = False
            for _ in range(60):
                y_try = y + step * dy
                s_try = s_of(y_try)
                if _is_pd(y_try) and _is_pd(s_try):
                    f1 = f_of(t, y_try, s_try)
                    if f1 <= f0 - 0.25 * step * decrement2 + 1e-12:
                        y = y_try
                        accepted = True
                        break
                step *= 0.5
            steps += 1
            if steps >= max_newton:
                converged = False
                break
            if not accepted or decrement2 / 2.0 <= 1e-13:
                break
        obj = float(np.real(np.trace(y)))
        if not converged or nu / t <= rel_gap * max(obj, 1e-12):
            break
        t *= mu

    obj = float(np.real(np.trace(y)))
    return BarrierSolution(y, obj, nu / t, steps, converged)
