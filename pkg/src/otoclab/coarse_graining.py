"""Translation-dephasing coarse graining and the composed channel step.

The dephasing superoperator averages an operator over all phase-space
translations with convex weights,

    D_eps(A) = sum_xi c_eps(xi) T_xi^dag A T_xi,

where c_eps is the 2D discrete Fourier transform of the quasi-Gaussian

    c~(mu, nu) = exp(-(eps N / pi) (sin^2(pi mu/N) + sin^2(pi nu/N)) / 2),

renormalized to unit sum so the channel is exactly unital and trace
preserving.  Translations are eigenoperators of D_eps, which makes the
channel diagonal in the chord (translation) expansion: the production path
multiplies each chord coefficient by a precomputed real eigenvalue in
O(N^2 log N).  The literal weighted sum over all N^2 translations is kept
as a small-N oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .maps import QuantumMap, heisenberg_conjugate
from .phase_space import (OperatorMatrix, POSITION, TorusSpace, _cyclic_diagonals,
                          _from_cyclic_diagonals, _position_entries, translation)

__all__ = [
    "CoarseGrainKernel",
    "build_kernel",
    "apply_dephasing_dense",
    "apply_dephasing_chord",
    "channel_step",
]

_DENSE_LIMIT = 64


@dataclass(frozen=True)
class CoarseGrainKernel:
    """Precomputed dephasing data for one (N, epsilon) pair.

    c_weights are the convex translation weights; diag_chord[chi_q, chi_p]
    is the channel eigenvalue on the translation T_chi, real and in [0, 1].
    clip_magnitude records how much negative DFT leakage was clipped away
    (zero in exact arithmetic: the kernel is a product of von Mises factors,
    whose Fourier coefficients are strictly positive).
    """

    space: TorusSpace
    epsilon: float
    c_tilde: np.ndarray
    c_weights: np.ndarray
    diag_chord: np.ndarray
    clip_magnitude: float


def build_kernel(space: TorusSpace, epsilon: float) -> CoarseGrainKernel:
    """Weights and chord eigenvalues of the dephasing channel.

    diag_chord(chi) = sum_xi c_weights(xi) exp(2i pi <chi, xi> / N); the
    imaginary part vanishes by the even symmetry of the weights and is
    discarded after a consistency check.
    """
    if epsilon < 0:
        raise ValueError(f"epsilon must be non-negative, got {epsilon}")
    n = space.dim
    idx = np.arange(n)
    axis = np.exp(-(epsilon * n / (2.0 * np.pi)) * np.sin(np.pi * idx / n) ** 2)
    c_tilde = np.outer(axis, axis)
    weights = np.fft.ifft2(c_tilde).real
    clip = max(0.0, float(-weights.min()))
    if clip > 1e-10:
        raise ValueError(f"dephasing weights came out negative beyond tolerance ({clip:.2e})")
    if clip > 0.0:
        weights = np.clip(weights, 0.0, None)
    weights /= weights.sum()
    # g[a, b] = sum_xi w[xi_q, xi_p] e^{2i pi (a xi_q - b xi_p)/n}; the chord
    # eigenvalue at chi = (chi_q, chi_p) is g[chi_p, chi_q].
    g = np.fft.fft(np.fft.ifft(weights, axis=0) * n, axis=1)
    if np.abs(g.imag).max() > 1e-10:
        raise ValueError("chord eigenvalues acquired an imaginary part; kernel symmetry broken")
    diag_chord = g.real.T.copy()
    return CoarseGrainKernel(space, float(epsilon), c_tilde, weights, diag_chord, clip)


def apply_dephasing_dense(kernel: CoarseGrainKernel, a, force: bool = False) -> OperatorMatrix:
    """Oracle path: the literal weighted sum over all N^2 translations.

    Cost O(N^4); refused above N = 64 unless forced.
    """
    space = kernel.space
    n = space.dim
    if n > _DENSE_LIMIT and not force:
        raise ValueError(f"dense dephasing is O(N^4); pass force=True above N={_DENSE_LIMIT}")
    entries = _position_entries(space, a)
    out = np.zeros_like(entries)
    for xq in range(n):
        for xp in range(n):
            t = translation(space, (xq, xp)).entries
            out += kernel.c_weights[xq, xp] * (t.conj().T @ entries @ t)
    if isinstance(a, OperatorMatrix):
        return OperatorMatrix(out, POSITION)
    return out


def apply_dephasing_chord(kernel: CoarseGrainKernel, a):
    """Production path: multiply each chord coefficient by its eigenvalue.

    Works diagonal by diagonal; the translation phases cancel between the
    forward and inverse transforms, leaving one FFT pair per diagonal.
    """
    wrapped = isinstance(a, OperatorMatrix)
    entries = _position_entries(kernel.space, a)
    d = _cyclic_diagonals(entries)
    d = np.fft.ifft(np.fft.fft(d, axis=1) * kernel.diag_chord, axis=1)
    out = _from_cyclic_diagonals(d)
    return OperatorMatrix(out, POSITION) if wrapped else out


def channel_step(umap: QuantumMap, kernel: CoarseGrainKernel | None, a):
    """One coarse-grained Heisenberg step: dephasing after U^dag A U."""
    wrapped = isinstance(a, OperatorMatrix)
    entries = a.entries if wrapped else np.asarray(a, dtype=complex)
    if entries.shape[0] != umap.dim:
        raise ValueError(f"dimension mismatch: operator {entries.shape[0]}, map {umap.dim}")
    if wrapped and a.basis != POSITION:
        raise ValueError("channel_step expects position-basis operator entries")
    out = heisenberg_conjugate(umap, entries)
    if kernel is not None and kernel.epsilon > 0:
        out = apply_dephasing_chord(kernel, out)
    return OperatorMatrix(out, POSITION) if wrapped else out
