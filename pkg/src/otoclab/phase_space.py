"""Discrete torus phase-space kinematics.

Every other module inherits the conventions fixed here:

* position basis states |q>, q = 0 .. N-1, with momentum states related by
  <q|p> = exp(+2i pi q p / N) / sqrt(N);
* tau = exp(i pi / N), the primitive 2N-th root of unity;
* symplectic product <u, v> = u_p v_q - u_q v_p.

Operators are dense N x N complex arrays wrapped in :class:`OperatorMatrix`
together with a tag naming the basis the entries are written in.  Diagonal
observables (sine of position in the position basis, sine of momentum in the
momentum basis) stay recognizable through the tag, which lets the correlator
code run its trace contractions in O(N^2) instead of O(N^3).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

POSITION = "position"
MOMENTUM = "momentum"

__all__ = [
    "POSITION",
    "MOMENTUM",
    "TorusSpace",
    "PhaseVector",
    "OperatorMatrix",
    "ChordCoefficients",
    "shift_v",
    "clock_u",
    "symplectic_product",
    "translation",
    "sine_position",
    "sine_momentum",
    "hermitian_f",
    "chord_transform",
    "chord_inverse",
    "change_basis",
    "hermiticity_defect",
    "unitarity_defect",
]


@dataclass(frozen=True)
class TorusSpace:
    """Hilbert space of dimension N quantizing the unit torus.

    Position and momentum each take N values; the two bases are related by
    the discrete Fourier transform with kernel exp(+2i pi q p / N)/sqrt(N).
    """

    dim: int

    def __post_init__(self) -> None:
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError(f"torus dimension must be an integer >= 2, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def tau(self) -> complex:
        """exp(i pi / N), the phase unit of the translation algebra."""
        return complex(np.exp(1j * np.pi / self.dim))

    @property
    def h_eff(self) -> float:
        """Effective Planck constant 1/(2 pi N).  Stored for reference; only N
        itself enters any formula in this package."""
        return 1.0 / (2.0 * np.pi * self.dim)

    def tau_power(self, k) -> np.ndarray | complex:
        """tau**k computed exactly from integer exponents (k reduced mod 2N)."""
        k = np.mod(k, 2 * self.dim)
        return np.exp(1j * np.pi * np.asarray(k, dtype=float) / self.dim)


class PhaseVector(NamedTuple):
    """Integer phase-space displacement (q component, p component)."""

    q: int
    p: int

    def canonical(self, n: int) -> "PhaseVector":
        """Representative with both components reduced into [0, n)."""
        return PhaseVector(self.q % n, self.p % n)


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense operator with a tag naming the basis its entries are written in."""

    entries: np.ndarray
    basis: str = POSITION

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"operator entries must be square, got shape {entries.shape}")
        if self.basis not in (POSITION, MOMENTUM):
            raise ValueError(f"unknown basis tag {self.basis!r}")
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries.conj().T, self.basis)

    def to_basis(self, space: TorusSpace, basis: str) -> "OperatorMatrix":
        if basis == self.basis:
            return self
        return OperatorMatrix(change_basis(space, self.entries, self.basis, basis), basis)


@dataclass(frozen=True)
class ChordCoefficients:
    """Expansion of an operator over translations, coeffs[chi_q, chi_p]."""

    coeffs: np.ndarray

    @property
    def dim(self) -> int:
        return self.coeffs.shape[0]


def _entries(a) -> np.ndarray:
    return a.entries if isinstance(a, OperatorMatrix) else np.asarray(a, dtype=complex)


def _position_entries(space: TorusSpace, a) -> np.ndarray:
    """Entries in the position basis, converting tagged operators as needed."""
    if isinstance(a, OperatorMatrix):
        return a.to_basis(space, POSITION).entries
    return np.asarray(a, dtype=complex)


def change_basis(space: TorusSpace, entries: np.ndarray, frm: str, to: str) -> np.ndarray:
    """Re-express operator entries between the position and momentum bases.

    With F[q, p] = exp(2i pi q p / N)/sqrt(N), the momentum representation is
    F^dag A F; the FFT normalization factors cancel exactly.
    """
    if frm == to:
        return entries
    if frm == POSITION and to == MOMENTUM:
        return np.fft.ifft(np.fft.fft(entries, axis=0), axis=1)
    if frm == MOMENTUM and to == POSITION:
        return np.fft.fft(np.fft.ifft(entries, axis=0), axis=1)
    raise ValueError(f"unknown basis pair {frm!r} -> {to!r}")


def hermiticity_defect(a) -> float:
    e = _entries(a)
    return float(np.abs(e - e.conj().T).max())


def unitarity_defect(a) -> float:
    e = _entries(a)
    return float(np.abs(e.conj().T @ e - np.eye(e.shape[0])).max())


def shift_v(space: TorusSpace) -> OperatorMatrix:
    """Cyclic shift V with V|q> = |q+1 mod N>.  Unitary, V^N = 1."""
    n = space.dim
    v = np.zeros((n, n), dtype=complex)
    q = np.arange(n)
    v[(q + 1) % n, q] = 1.0
    return OperatorMatrix(v, POSITION)


def clock_u(space: TorusSpace) -> OperatorMatrix:
    """Clock phase U = diag(tau^{2q}) = diag(exp(2i pi q / N)).  U^N = 1."""
    n = space.dim
    q = np.arange(n)
    return OperatorMatrix(np.diag(space.tau_power(2 * q)), POSITION)


def symplectic_product(xi, chi) -> int:
    """<xi, chi> = xi_p chi_q - xi_q chi_p, exact integer arithmetic.

    Not reduced mod N: callers feeding the result into phases do their own
    reduction, which keeps sin and tau powers exact for arbitrarily large
    integer displacements.
    """
    return int(xi[1]) * int(chi[0]) - int(xi[0]) * int(chi[1])


def translation(space: TorusSpace, xi) -> OperatorMatrix:
    """Weyl translation T_xi = V^{xi_q} U^{xi_p} tau^{xi_q xi_p}.

    The operator powers only depend on xi mod N, but the symmetrizing phase
    tau^{xi_q xi_p} is computed from the integers as given (reduced mod 2N
    exactly).  With that convention the composition law

        T_xi T_chi = tau^{<xi, chi>} T_{xi+chi}

    holds exactly for all integer displacements, including sums that leave
    the canonical [0, N) square; canonicalizing the phase instead would cost
    a sign on every wrap.
    """
    n = space.dim
    a, b = int(xi[0]), int(xi[1])
    q = np.arange(n)
    diag = space.tau_power(2 * (b % n) * q)
    phase = space.tau_power((a * b) % (2 * n))
    t = np.zeros((n, n), dtype=complex)
    t[(q + a) % n, q] = phase * diag
    return OperatorMatrix(t, POSITION)


def hermitian_f(space: TorusSpace, xi) -> OperatorMatrix:
    """Hermitian combination F_xi = (T_xi - T_xi^dag) / 2i.

    F_(0,1) is the sine-of-position observable and F_(1,0) the
    sine-of-momentum one; those two are exactly the operators returned by
    :func:`sine_position` and :func:`sine_momentum`.
    """
    t = translation(space, xi).entries
    return OperatorMatrix((t - t.conj().T) / 2j, POSITION)


def sine_position(space: TorusSpace) -> OperatorMatrix:
    """(U - U^dag)/2i: diagonal in position with entries sin(2 pi q / N)."""
    return hermitian_f(space, PhaseVector(0, 1))


def sine_momentum(space: TorusSpace) -> OperatorMatrix:
    """(V - V^dag)/2i: diagonal in momentum, circulant in position."""
    return hermitian_f(space, PhaseVector(1, 0))


def _cyclic_diagonals(a: np.ndarray) -> np.ndarray:
    """d[j, q] = a[(q + j) % n, q]: the j-th cyclic diagonal as a row."""
    n = a.shape[0]
    q = np.arange(n)
    return a[(q[None, :] + q[:, None]) % n, q[None, :]]


def _from_cyclic_diagonals(d: np.ndarray) -> np.ndarray:
    n = d.shape[0]
    q = np.arange(n)
    a = np.empty((n, n), dtype=complex)
    a[(q[None, :] + q[:, None]) % n, q[None, :]] = d
    return a


def chord_transform(space: TorusSpace, a) -> ChordCoefficients:
    """Expansion coefficients c(chi) = Tr(T_chi^dag A) / N.

    Computed diagonal by diagonal with FFTs in O(N^2 log N); the inverse
    transform reconstructs A = sum_chi c(chi) T_chi exactly because the
    translations are trace-orthogonal.  Tagged operators are converted to
    the position basis first.
    """
    n = space.dim
    d = _cyclic_diagonals(_position_entries(space, a))
    c = np.fft.fft(d, axis=1) / n
    j = np.arange(n)
    c *= space.tau_power(-(j[:, None] * j[None, :]))
    return ChordCoefficients(c)


def chord_inverse(space: TorusSpace, coefficients: ChordCoefficients | np.ndarray) -> OperatorMatrix:
    """Rebuild the operator from its translation expansion."""
    n = space.dim
    c = coefficients.coeffs if isinstance(coefficients, ChordCoefficients) else np.asarray(coefficients)
    j = np.arange(n)
    d = np.fft.ifft(c * space.tau_power(j[:, None] * j[None, :]), axis=1) * n
    return OperatorMatrix(_from_cyclic_diagonals(d), POSITION)


def coherent_state(space: TorusSpace, q0: float, p0: float) -> np.ndarray:
    """Minimum-uncertainty periodized Gaussian centered at (q0, p0).

    Phased so that <sine_position> tracks sin(2 pi q0) and <sine_momentum>
    tracks sin(2 pi p0), each up to an O(1/N) width correction.  Centers on
    the grid (integer multiples of 1/N) avoid an extra phase mismatch across
    the periodization images.
    """
    n = space.dim
    x = np.arange(n) / n
    psi = np.zeros(n, dtype=complex)
    for m in range(-4, 5):
        psi += np.exp(-np.pi * n * (x - q0 + m) ** 2 - 2j * np.pi * n * p0 * (x + m))
    return psi / np.linalg.norm(psi)
