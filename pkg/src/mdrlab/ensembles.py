"""Reproducible random ensembles for fuzz testing the inequalities.

Randomness comes from numpy's Philox counter-based generator, keyed by
(seed, stream id).  The same pair yields the same draws on every platform,
so any fuzz failure can be replayed from two integers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DensityOperator,
    Povm,
    QuantumChannel,
    SystemLayout,
    fourier_basis,
    partial_trace,
)

_MASK64 = (1 << 64) - 1


def stream_rng(seed: int, stream_id: int = 0) -> np.random.Generator:
    """Philox generator keyed by (seed, stream_id); key = seed << 64 | stream."""
    key = ((int(seed) & _MASK64) << 64) | (int(stream_id) & _MASK64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class SeededStream:
    """Replayable random stream handle."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        return stream_rng(self.seed, self.stream_id)

    def substream(self, k: int) -> "SeededStream":
        return SeededStream(self.seed, self.stream_id * 1_000_003 + k + 1)


def _rng(r) -> np.random.Generator:
    return r.generator() if isinstance(r, SeededStream) else r


def haar_pure(system: SystemLayout | int, rng, label: str = "S") -> DensityOperator:
    """Haar-random pure state (normalized complex Gaussian vector)."""
    if isinstance(system, int):
        system = SystemLayout((label,), (system,))
    g = _rng(rng)
    v = g.standard_normal(system.dim) + 1j * g.standard_normal(system.dim)
    return DensityOperator.from_vector(system, v)


def random_density(d: int, rank: int, rng, label: str = "S") -> DensityOperator:
    """Induced-measure random state: trace a Haar pure state on d x rank."""
    if not 1 <= rank <= d * d:
        raise ValueError(f"rank must be in [1, {d * d}], got {rank}")
    g = _rng(rng)
    lay = SystemLayout((label, "_env"), (d, rank))
    return partial_trace(haar_pure(lay, g), label)


def haar_unitary(d: int, rng) -> np.ndarray:
    """Haar-distributed unitary via phase-fixed QR of a Ginibre matrix."""
    g = _rng(rng)
    a = g.standard_normal((d, d)) + 1j * g.standard_normal((d, d))
    q, r = np.linalg.qr(a)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def random_isometry(d_from: int, d_to: int, rng) -> np.ndarray:
    """Haar-random isometry (first d_from columns of a Haar unitary)."""
    if d_to < d_from:
        raise ValueError("target dimension must be at least source dimension")
    g = _rng(rng)
    a = g.standard_normal((d_to, d_from)) + 1j * g.standard_normal((d_to, d_from))
    q, r = np.linalg.qr(a)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def random_channel(
    input_layout: SystemLayout | int,
    output_layout: SystemLayout | int,
    d_env: int,
    rng,
    in_label: str = "S",
    out_label: str = "S",
) -> QuantumChannel:
    """Random channel from a Haar isometry into output x environment."""
    if isinstance(input_layout, int):
        input_layout = SystemLayout((in_label,), (input_layout,))
    if isinstance(output_layout, int):
        output_layout = SystemLayout((out_label,), (output_layout,))
    d_in, d_out = input_layout.dim, output_layout.dim
    if d_out * d_env < d_in:
        raise ValueError("output x environment dimension must cover the input")
    v = random_isometry(d_in, d_out * d_env, _rng(rng))
    # K_e = (I_out ⊗ <e|_env) V with env as the least significant factor
    blocks = v.reshape(d_out, d_env, d_in)
    kraus = [blocks[:, e, :] for e in range(d_env)]
    return QuantumChannel(input_layout, output_layout, kraus)


def random_mub_pair(d: int, rng, label: str = "S") -> tuple[Povm, Povm]:
    """Haar-rotated mutually unbiased basis pair (overlap 1/d throughout)."""
    u = haar_unitary(d, _rng(rng))
    lay = SystemLayout((label,), (d,))
    z = Povm.from_basis(lay, u)
    x = Povm.from_basis(lay, u @ fourier_basis(d))
    return x, z
