"""Dense complex linear algebra over labeled tensor-product systems.

Everything downstream (entropies, disturbance measures, the scan drivers)
works with the five value types defined here: :class:`SystemLayout`,
:class:`DensityOperator`, :class:`Povm`, :class:`QuantumChannel` and
:class:`ClassicalQuantumState`.  All values are validated at construction
time and immutable afterwards, so they can be shared freely between
threads and reused across scenario evaluations.

Index convention: the leftmost label of a layout is the most significant
(slowest varying) index, matching ``numpy.kron`` ordering.  For a layout
``(A, B)`` with dims ``(dA, dB)`` the joint row index is ``a * dB + b``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# Constructor tolerances.  Hermiticity and trace deviations are absolute
# (states have unit trace so entries are O(1)); the PSD tolerance is
# relative to the largest eigenvalue.
TOL_HERM = 1e-10
TOL_TRACE = 1e-10
TOL_PSD = 1e-10


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(a.matrix if isinstance(a, DensityOperator) else a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def _check_hermitian(m: np.ndarray, what: str, tol: float = TOL_HERM) -> np.ndarray:
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if dev > tol * max(1.0, float(np.max(np.abs(m))) if m.size else 1.0):
        raise ValueError(f"{what} is not Hermitian (max deviation {dev:.3e})")
    return 0.5 * (m + m.conj().T)


def _check_psd(m: np.ndarray, what: str, tol: float = TOL_PSD) -> None:
    w = np.linalg.eigvalsh(m)
    scale = max(float(w[-1]), 0.0) if w.size else 0.0
    if w.size and float(w[0]) < -tol * max(scale, 1.0):
        raise ValueError(
            f"{what} has negative eigenvalue {w[0]:.3e} (largest {scale:.3e})"
        )


@dataclass(frozen=True)
class SystemLayout:
    """Ordered subsystem labels with their dimensions."""

    labels: tuple[str, ...]
    dims: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if len(self.labels) != len(self.dims):
            raise ValueError("labels and dims must have equal length")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate labels in {self.labels}")
        if any(d < 1 for d in self.dims):
            raise ValueError(f"dimensions must be positive, got {self.dims}")

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.dims else 1

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"label {label!r} not in layout {self.labels}") from None

    def dim_of(self, labels: str | Iterable[str]) -> int:
        labels = (labels,) if isinstance(labels, str) else tuple(labels)
        return int(np.prod([self.dims[self.index(l)] for l in labels], dtype=np.int64)) if labels else 1

    def restricted(self, keep: Iterable[str]) -> "SystemLayout":
        """Sub-layout of ``keep`` labels, preserving this layout's order."""
        keep = set(keep)
        unknown = keep - set(self.labels)
        if unknown:
            raise KeyError(f"unknown labels {sorted(unknown)} (layout {self.labels})")
        pairs = [(l, d) for l, d in zip(self.labels, self.dims) if l in keep]
        return SystemLayout(tuple(l for l, _ in pairs), tuple(d for _, d in pairs))

    def concat(self, other: "SystemLayout") -> "SystemLayout":
        clash = set(self.labels) & set(other.labels)
        if clash:
            raise ValueError(f"label collision {sorted(clash)} when joining layouts")
        return SystemLayout(self.labels + other.labels, self.dims + other.dims)


def layout(*pairs: tuple[str, int]) -> SystemLayout:
    """Shorthand: ``layout(("S", 2), ("R", 2))``."""
    return SystemLayout(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))


class DensityOperator:
    """Unit-trace positive semidefinite operator on a labeled layout."""

    __slots__ = ("layout", "matrix")

    def __init__(self, system: SystemLayout, matrix):
        m = _as_matrix(matrix)
        if m.shape[0] != system.dim:
            raise ValueError(
                f"matrix dimension {m.shape[0]} does not match layout dimension {system.dim}"
            )
        m = _check_hermitian(m, "density operator")
        _check_psd(m, "density operator")
        tr = float(np.real(np.trace(m)))
        if abs(tr - 1.0) > TOL_TRACE:
            raise ValueError(f"density operator trace {tr!r} is not 1")
        m.setflags(write=False)
        object.__setattr__(self, "layout", system)
        object.__setattr__(self, "matrix", m)

    def __setattr__(self, name, value):
        raise AttributeError("DensityOperator is immutable")

    def __repr__(self):
        return f"DensityOperator(labels={self.layout.labels}, dims={self.layout.dims})"

    @classmethod
    def from_vector(cls, system: SystemLayout, vec) -> "DensityOperator":
        v = np.asarray(vec, dtype=complex).reshape(-1)
        if v.shape[0] != system.dim:
            raise ValueError("vector dimension does not match layout")
        n = np.linalg.norm(v)
        if n == 0:
            raise ValueError("zero vector cannot be normalized")
        v = v / n
        return cls(system, np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, system: SystemLayout) -> "DensityOperator":
        d = system.dim
        return cls(system, np.eye(d) / d)

    def eigenvalues(self) -> np.ndarray:
        """Spectrum, ascending, with numerically negative values clipped to 0."""
        w = np.linalg.eigvalsh(self.matrix)
        return np.clip(w, 0.0, None)

    def permuted(self, new_order: Sequence[str]) -> "DensityOperator":
        mat, lay = permute_labels(self.matrix, self.layout, new_order)
        return DensityOperator(lay, mat)

    def tensor(self, other: "DensityOperator") -> "DensityOperator":
        return DensityOperator(
            self.layout.concat(other.layout), np.kron(self.matrix, other.matrix)
        )


class Povm:
    """Positive operators summing to the identity on a layout."""

    __slots__ = ("layout", "elements")

    def __init__(self, system: SystemLayout, elements):
        elems = tuple(_check_hermitian(_as_matrix(e), f"POVM element {i}") for i, e in enumerate(elements))
        if not elems:
            raise ValueError("POVM needs at least one element")
        for i, e in enumerate(elems):
            if e.shape[0] != system.dim:
                raise ValueError(f"POVM element {i} dimension mismatch")
            _check_psd(e, f"POVM element {i}")
        total = sum(elems)
        dev = np.max(np.abs(total - np.eye(system.dim)))
        if dev > TOL_TRACE * 10:
            raise ValueError(f"POVM elements do not sum to identity (max deviation {dev:.3e})")
        for e in elems:
            e.setflags(write=False)
        object.__setattr__(self, "layout", system)
        object.__setattr__(self, "elements", elems)

    def __setattr__(self, name, value):
        raise AttributeError("Povm is immutable")

    def __len__(self):
        return len(self.elements)

    @classmethod
    def from_basis(cls, system: SystemLayout, basis) -> "Povm":
        """Rank-1 projective POVM from the columns of a unitary matrix."""
        u = np.asarray(basis, dtype=complex)
        if u.shape != (system.dim, system.dim):
            raise ValueError("basis must be a square matrix of the layout dimension")
        return cls(system, [np.outer(u[:, k], u[:, k].conj()) for k in range(system.dim)])

    def is_projective(self, tol: float = TOL_PSD) -> bool:
        return all(np.max(np.abs(e @ e - e)) <= tol * 10 for e in self.elements)

    def sqrt_elements(self) -> tuple[np.ndarray, ...]:
        return tuple(hermitian_power(e, 0.5) for e in self.elements)


class QuantumChannel:
    """Trace-preserving completely positive map in Kraus form."""

    __slots__ = ("input_layout", "output_layout", "kraus")

    def __init__(self, input_layout: SystemLayout, output_layout: SystemLayout, kraus):
        ops = tuple(np.asarray(k, dtype=complex) for k in kraus)
        if not ops:
            raise ValueError("channel needs at least one Kraus operator")
        d_in, d_out = input_layout.dim, output_layout.dim
        for i, k in enumerate(ops):
            if k.shape != (d_out, d_in):
                raise ValueError(
                    f"Kraus operator {i} has shape {k.shape}, expected {(d_out, d_in)}"
                )
        total = sum(k.conj().T @ k for k in ops)
        dev = np.max(np.abs(total - np.eye(d_in)))
        if dev > TOL_TRACE * 10:
            raise ValueError(f"channel is not trace preserving (max deviation {dev:.3e})")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "input_layout", input_layout)
        object.__setattr__(self, "output_layout", output_layout)
        object.__setattr__(self, "kraus", ops)

    def __setattr__(self, name, value):
        raise AttributeError("QuantumChannel is immutable")

    @classmethod
    def identity(cls, system: SystemLayout) -> "QuantumChannel":
        return cls(system, system, [np.eye(system.dim)])


class ClassicalQuantumState:
    """Outcome-labeled family of positive operators with traces summing to 1.

    With a trivial quantum part this is exactly a probability distribution;
    :meth:`distribution` exposes it as one.
    """

    __slots__ = ("outcomes", "quantum_layout", "branches")

    def __init__(self, outcomes, quantum_layout: SystemLayout, branches):
        outcomes = tuple(outcomes)
        ops = tuple(_check_hermitian(_as_matrix(b), f"branch {i}") for i, b in enumerate(branches))
        if len(outcomes) != len(ops):
            raise ValueError("one branch per outcome required")
        d = quantum_layout.dim
        for i, b in enumerate(ops):
            if b.shape[0] != d:
                raise ValueError(f"branch {i} dimension mismatch")
            _check_psd(b, f"branch {i}")
        total = float(np.real(sum(np.trace(b) for b in ops)))
        if abs(total - 1.0) > TOL_TRACE * 10:
            raise ValueError(f"branch traces sum to {total!r}, expected 1")
        for b in ops:
            b.setflags(write=False)
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "quantum_layout", quantum_layout)
        object.__setattr__(self, "branches", ops)

    def __setattr__(self, name, value):
        raise AttributeError("ClassicalQuantumState is immutable")

    def __len__(self):
        return len(self.outcomes)

    def probabilities(self) -> np.ndarray:
        return np.array([max(float(np.real(np.trace(b))), 0.0) for b in self.branches])

    def distribution(self) -> np.ndarray:
        """Outcome distribution; requires a trivial quantum part."""
        if self.quantum_layout.dim != 1:
            raise ValueError("quantum part is not trivial; use probabilities() instead")
        return self.probabilities()

    def is_classical(self, tol: float = 1e-12) -> bool:
        """True when every branch is diagonal in the computational basis."""
        for b in self.branches:
            off = b - np.diag(np.diag(b))
            if np.max(np.abs(off)) > tol * max(1.0, float(np.max(np.abs(b)))):
                return False
        return True

    def joint_distribution(self) -> np.ndarray:
        """Joint array P[outcome, quantum basis index] for classical branches."""
        if not self.is_classical():
            raise ValueError("branches are not diagonal; no classical joint exists")
        return np.stack([np.clip(np.real(np.diag(b)), 0.0, None) for b in self.branches])

    def to_density_operator(self, classical_label: str = "Z") -> DensityOperator:
        """Embed as a block-diagonal state on [classical_label] + quantum labels."""
        if classical_label in self.quantum_layout.labels:
            raise ValueError(f"label {classical_label!r} collides with quantum layout")
        n = len(self.outcomes)
        lay = SystemLayout((classical_label,), (n,)).concat(self.quantum_layout)
        d = self.quantum_layout.dim
        mat = np.zeros((n * d, n * d), dtype=complex)
        for i, b in enumerate(self.branches):
            mat[i * d : (i + 1) * d, i * d : (i + 1) * d] = b
        return DensityOperator(lay, mat)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def tensor(a, b) -> np.ndarray:
    """Kronecker product; leftmost factor is the most significant index."""
    return np.kron(_as_matrix(a), _as_matrix(b))


def permute_labels(matrix: np.ndarray, system: SystemLayout, new_order: Sequence[str]):
    """Reorder tensor factors of a square matrix to ``new_order``."""
    new_order = tuple(new_order)
    if sorted(new_order) != sorted(system.labels):
        raise ValueError(f"{new_order} is not a permutation of {system.labels}")
    n = len(system.labels)
    perm = [system.index(l) for l in new_order]
    t = matrix.reshape(system.dims * 2)
    t = t.transpose(perm + [p + n for p in perm])
    new_layout = SystemLayout(new_order, tuple(system.dims[p] for p in perm))
    return np.ascontiguousarray(t.reshape(new_layout.dim, new_layout.dim)), new_layout


def _partial_trace_matrix(matrix: np.ndarray, system: SystemLayout, keep: Sequence[str]):
    keep = (keep,) if isinstance(keep, str) else tuple(keep)
    kept_layout = system.restricted(keep)  # validates labels
    n = len(system.labels)
    t = matrix.reshape(system.dims * 2)
    kept_idx = [i for i, l in enumerate(system.labels) if l in set(keep)]
    subs = list(range(n)) + [
        i if i not in kept_idx else i + n for i in range(n)
    ]
    out_subs = kept_idx + [i + n for i in kept_idx]
    reduced = np.einsum(t, subs, out_subs)
    d = kept_layout.dim
    return reduced.reshape(d, d), kept_layout


def partial_trace(rho: DensityOperator, keep: str | Sequence[str]) -> DensityOperator:
    """Reduced state on the kept labels (original order preserved)."""
    mat, lay = _partial_trace_matrix(rho.matrix, rho.layout, keep)
    return DensityOperator(lay, mat)


def hermitian_power(h, p: float) -> np.ndarray:
    """Matrix power acting on the support of a Hermitian PSD matrix.

    Eigenvalues below the relative PSD tolerance are clipped to zero and
    excluded from the power (0**p := 0 for every p, including p <= 0);
    eigenvalues more negative than the tolerance raise.
    """
    m = _check_hermitian(_as_matrix(h), "hermitian_power input")
    w, v = np.linalg.eigh(m)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    cutoff = TOL_PSD * max(scale, 1e-300)
    if w.size and float(w[0]) < -cutoff:
        raise ValueError(f"matrix has negative eigenvalue {w[0]:.3e} beyond tolerance")
    powered = np.zeros_like(w)
    support = w > cutoff
    powered[support] = w[support] ** p
    return (v * powered) @ v.conj().T


def operator_norm(a) -> float:
    """Largest singular value."""
    m = np.asarray(a, dtype=complex)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, ord=2))


def apply_channel(channel: QuantumChannel, rho: DensityOperator) -> DensityOperator:
    """Apply a channel to the matching labels, extending by identity elsewhere.

    The output layout is the channel's output labels followed by the
    untouched labels in their original relative order.
    """
    in_labels = channel.input_layout.labels
    for l, d in zip(in_labels, channel.input_layout.dims):
        if l not in rho.layout.labels:
            raise KeyError(f"channel input label {l!r} not present in state layout")
        if rho.layout.dims[rho.layout.index(l)] != d:
            raise ValueError(f"dimension mismatch on label {l!r}")
    rest = [l for l in rho.layout.labels if l not in set(in_labels)]
    mat, lay = permute_labels(rho.matrix, rho.layout, list(in_labels) + rest)
    rest_layout = lay.restricted(rest)
    out_layout = channel.output_layout.concat(rest_layout)
    d_rest = rest_layout.dim
    eye_rest = np.eye(d_rest)
    out = np.zeros((out_layout.dim, out_layout.dim), dtype=complex)
    for k in channel.kraus:
        kf = np.kron(k, eye_rest)
        out += kf @ mat @ kf.conj().T
    return DensityOperator(out_layout, out)


def measure(rho: DensityOperator, povm: Povm, measured: str) -> ClassicalQuantumState:
    """Measure one subsystem, returning outcome branches on the remainder.

    Uses the square-root instrument sqrt(E) rho sqrt(E), which coincides
    with the projective update for projective POVMs and reproduces the
    outcome statistics tr(E rho) for any POVM.
    """
    pos = rho.layout.index(measured)
    if rho.layout.dims[pos] != povm.layout.dim:
        raise ValueError(
            f"POVM dimension {povm.layout.dim} does not match subsystem "
            f"{measured!r} of dimension {rho.layout.dims[pos]}"
        )
    rest = [l for l in rho.layout.labels if l != measured]
    mat, lay = permute_labels(rho.matrix, rho.layout, [measured] + rest)
    rest_layout = rho.layout.restricted(rest)
    eye_rest = np.eye(rest_layout.dim)
    branches = []
    for root in povm.sqrt_elements():
        a = np.kron(root, eye_rest)
        post = a @ mat @ a.conj().T
        reduced, _ = _partial_trace_matrix(post, lay, rest) if rest else (
            np.array([[np.trace(post)]], dtype=complex),
            rest_layout,
        )
        branches.append(reduced)
    return ClassicalQuantumState(range(len(povm)), rest_layout, branches)


def purify(rho: DensityOperator, ref_label: str | None = None) -> DensityOperator:
    """Pure state on layout + reference whose reference trace returns `rho`.

    The reference dimension equals the rank of the input.
    """
    if ref_label is None:
        ref_label = "ref"
        while ref_label in rho.layout.labels:
            ref_label += "_"
    elif ref_label in rho.layout.labels:
        raise ValueError(f"reference label {ref_label!r} collides with layout")
    w, v = np.linalg.eigh(rho.matrix)
    scale = max(float(w[-1]), 0.0)
    support = w > TOL_PSD * max(scale, 1e-300)
    idx = np.nonzero(support)[0][::-1]  # descending eigenvalues
    rank = len(idx)
    d = rho.layout.dim
    vec = np.zeros(d * rank, dtype=complex)
    for slot, i in enumerate(idx):
        e = np.zeros(rank)
        e[slot] = 1.0
        vec += np.sqrt(w[i]) * np.kron(v[:, i], e)
    out_layout = rho.layout.concat(SystemLayout((ref_label,), (rank,)))
    return DensityOperator.from_vector(out_layout, vec)


def fourier_basis(d: int) -> np.ndarray:
    """Unitary DFT matrix; its columns are mutually unbiased to the computational basis."""
    j, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return np.exp(2j * np.pi * j * k / d) / np.sqrt(d)
