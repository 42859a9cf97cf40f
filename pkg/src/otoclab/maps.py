"""Classical torus maps and their quantizations as kick-DFT-kick unitaries.

Three map families are supported on the unit torus (q, p in [0, 1)):

* perturbed Arnold cat map
      p' = p + q - 2 pi k sin(2 pi q)
      q' = q + p' + 2 pi k sin(2 pi p')
* Chirikov standard map
      p' = p + (K / 2 pi) sin(2 pi q)
      q' = q + p'
* Harper map (kicked Harper, symmetric case K1 = K2 by default)
      p' = p - K1 sin(2 pi q)
      q' = q + K2 sin(2 pi p')

Each quantum map is a product of two diagonal kick factors, one in the
position basis and one in the momentum basis, applied with FFTs and never
materialized unless asked for.  The kick phases are calibrated so that a
narrow wavepacket follows the classical step: under the chord/DFT
conventions of :mod:`otoclab.phase_space` that calibration fixes both the
sign and the magnitude of every phase (a sign flip on either factor yields
the propagator of an elliptic, non-chaotic map).  See ``kick_prefactor``
for the as-printed alternative coefficients of the nonlinear kicks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .phase_space import POSITION, OperatorMatrix, TorusSpace

__all__ = [
    "ClassicalMapSpec",
    "cat_map",
    "standard_map",
    "harper_map",
    "QuantumMap",
    "classical_step",
    "jacobian",
    "quantize",
    "kick_prefactor",
    "apply_map",
    "materialize",
    "heisenberg_conjugate",
]

CAT = "cat"
STANDARD = "standard"
HARPER = "harper"

CORRESPONDENCE = "correspondence"
AS_PRINTED = "as_printed"

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ClassicalMapSpec:
    """Map family plus its kick strength(s).

    ``k`` is the cat perturbation k, the standard-map K, or the Harper K1;
    ``k2`` is the Harper K2 and defaults to ``k`` (symmetric case).
    """

    kind: str
    k: float
    k2: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in (CAT, STANDARD, HARPER):
            raise ValueError(f"unknown map kind {self.kind!r}")
        if not math.isfinite(self.k):
            raise ValueError("map parameter must be finite")
        if self.k2 is not None:
            if self.kind != HARPER:
                raise ValueError("k2 is only meaningful for the harper map")
            if not math.isfinite(self.k2):
                raise ValueError("map parameter must be finite")

    @property
    def k_second(self) -> float:
        """Second Harper kick strength (equals k in the symmetric case)."""
        return self.k if self.k2 is None else self.k2


def cat_map(k: float = 0.0) -> ClassicalMapSpec:
    return ClassicalMapSpec(CAT, float(k))


def standard_map(kk: float) -> ClassicalMapSpec:
    return ClassicalMapSpec(STANDARD, float(kk))


def harper_map(k1: float, k2: float | None = None) -> ClassicalMapSpec:
    return ClassicalMapSpec(HARPER, float(k1), None if k2 is None else float(k2))


def classical_step(spec: ClassicalMapSpec, point):
    """One iteration of the map; accepts scalars or arrays, reduces mod 1."""
    q = np.mod(np.asarray(point[0], dtype=float), 1.0)
    p = np.mod(np.asarray(point[1], dtype=float), 1.0)
    if spec.kind == CAT:
        p1 = np.mod(p + q - _TWO_PI * spec.k * np.sin(_TWO_PI * q), 1.0)
        q1 = np.mod(q + p1 + _TWO_PI * spec.k * np.sin(_TWO_PI * p1), 1.0)
    elif spec.kind == STANDARD:
        p1 = np.mod(p + spec.k / _TWO_PI * np.sin(_TWO_PI * q), 1.0)
        q1 = np.mod(q + p1, 1.0)
    else:
        p1 = np.mod(p - spec.k * np.sin(_TWO_PI * q), 1.0)
        q1 = np.mod(q + spec.k_second * np.sin(_TWO_PI * p1), 1.0)
    if q1.ndim == 0:
        return float(q1), float(p1)
    return q1, p1


def _jacobian_qp(spec: ClassicalMapSpec, q, p):
    """Tangent map entries d(q', p')/d(q, p), broadcasting over q, p arrays."""
    if spec.kind == CAT:
        dp_dq = 1.0 - _TWO_PI**2 * spec.k * np.cos(_TWO_PI * q)
        p1 = np.mod(p + q - _TWO_PI * spec.k * np.sin(_TWO_PI * q), 1.0)
        dq_dp1 = 1.0 + _TWO_PI**2 * spec.k * np.cos(_TWO_PI * p1)
        j = np.empty(np.broadcast(q, p).shape + (2, 2))
        j[..., 0, 0] = 1.0 + dq_dp1 * dp_dq
        j[..., 0, 1] = dq_dp1
        j[..., 1, 0] = dp_dq
        j[..., 1, 1] = 1.0
        return j
    if spec.kind == STANDARD:
        kick = spec.k * np.cos(_TWO_PI * q)
        j = np.empty(np.broadcast(q, p).shape + (2, 2))
        j[..., 0, 0] = 1.0 + kick
        j[..., 0, 1] = 1.0
        j[..., 1, 0] = kick
        j[..., 1, 1] = 1.0
        return j
    dp_dq = -_TWO_PI * spec.k * np.cos(_TWO_PI * q)
    p1 = np.mod(p - spec.k * np.sin(_TWO_PI * q), 1.0)
    dq_dp1 = _TWO_PI * spec.k_second * np.cos(_TWO_PI * p1)
    j = np.empty(np.broadcast(q, p).shape + (2, 2))
    j[..., 0, 0] = 1.0 + dq_dp1 * dp_dq
    j[..., 0, 1] = dq_dp1
    j[..., 1, 0] = dp_dq
    j[..., 1, 1] = 1.0
    return j


def jacobian(spec: ClassicalMapSpec, point) -> np.ndarray:
    """Exact 2x2 tangent map of classical_step at the point, det = 1.

    Rows and columns are ordered (q, p).
    """
    q = np.mod(float(point[0]), 1.0)
    p = np.mod(float(point[1]), 1.0)
    return _jacobian_qp(spec, q, p)


@dataclass(frozen=True)
class QuantumMap:
    """One-step unitary stored as its two kick-phase diagonals.

    The propagator is (momentum kick) o (position kick): acting on a state,
    the position-diagonal phases are applied first, then the momentum
    diagonal is applied between a DFT pair.  Dense matrices exist only on
    request via :func:`materialize`.
    """

    space: TorusSpace
    phase_position: np.ndarray
    phase_momentum: np.ndarray
    map_spec: ClassicalMapSpec
    kick_mode: str = CORRESPONDENCE
    kick_order: str = "position-then-momentum"

    @property
    def dim(self) -> int:
        return self.space.dim


def kick_prefactor(spec: ClassicalMapSpec, space: TorusSpace, kick_mode: str = CORRESPONDENCE) -> float:
    """Coefficient of the cosine kick inside each map's phase template.

    cat       kappa = k N            in exp(-2i pi (q^2/2N + kappa cos(2 pi q/N)))
    standard  kappa = N K / (2 pi)   in exp(+i kappa cos(2 pi q/N))
    harper    kappa = N K            in exp(-+i kappa cos(2 pi ./N))

    The cat value is also what a stationary-phase expansion of its classical
    kick demands, so it has no mode switch.  For the standard and Harper maps
    the correspondence-derived values above differ from the literal quantized
    forms usually quoted (exp(-+2i pi N K cos)) by 2 pi factors;
    ``kick_mode="as_printed"`` selects those literal coefficients instead.
    The wavepacket correspondence oracle in the test suite discriminates the
    two calibrations sharply.
    """
    if kick_mode not in (CORRESPONDENCE, AS_PRINTED):
        raise ValueError(f"unknown kick mode {kick_mode!r}")
    n = space.dim
    if spec.kind == CAT:
        return spec.k * n
    if spec.kind == STANDARD:
        return n * spec.k / _TWO_PI if kick_mode == CORRESPONDENCE else _TWO_PI * n * spec.k
    return n * spec.k if kick_mode == CORRESPONDENCE else _TWO_PI * n * spec.k


def quantize(spec: ClassicalMapSpec, space: TorusSpace, kick_mode: str = CORRESPONDENCE) -> QuantumMap:
    """Quantize the map as kick-phase diagonals plus DFT placement.

    The quadratic phases use exact integer reduction of q^2 mod 2N so the
    stored phases stay on the unit circle to machine precision for any N.
    """
    if space.dim <= 0:
        raise ValueError("Hilbert-space dimension must be positive")
    n = space.dim
    idx = np.arange(n)
    quad = np.pi * ((idx * idx) % (2 * n)) / n
    cosine = np.cos(_TWO_PI * idx / n)
    if spec.kind == CAT:
        kappa = kick_prefactor(spec, space, kick_mode)
        pos = np.exp(-1j * (quad + _TWO_PI * kappa * cosine))
        mom = np.exp(+1j * (quad - _TWO_PI * kappa * cosine))
    elif spec.kind == STANDARD:
        kappa = kick_prefactor(spec, space, kick_mode)
        pos = np.exp(+1j * kappa * cosine)
        mom = np.exp(+1j * quad)
    else:
        kappa1 = kick_prefactor(spec, space, kick_mode)
        kappa2 = kick_prefactor(harper_map(spec.k_second), space, kick_mode)
        pos = np.exp(-1j * kappa1 * cosine)
        mom = np.exp(-1j * kappa2 * cosine)
    return QuantumMap(space, pos, mom, spec, kick_mode)


def _column_phases(phase: np.ndarray, x: np.ndarray) -> np.ndarray:
    return phase if x.ndim == 1 else phase[:, None]


def _lmul(umap: QuantumMap, x: np.ndarray, adjoint: bool = False) -> np.ndarray:
    """U @ x (or U^dag @ x) for a vector or matrix x, O(N log N) per column."""
    pos = _column_phases(umap.phase_position, x)
    mom = _column_phases(umap.phase_momentum, x)
    if not adjoint:
        return np.fft.ifft(mom * np.fft.fft(pos * x, axis=0), axis=0)
    return pos.conj() * np.fft.ifft(mom.conj() * np.fft.fft(x, axis=0), axis=0)


def _rmul(x: np.ndarray, umap: QuantumMap, adjoint: bool = False) -> np.ndarray:
    """x @ U (or x @ U^dag) for a matrix x."""
    pos = umap.phase_position[None, :]
    mom = umap.phase_momentum[None, :]
    if not adjoint:
        return pos * np.fft.fft(mom * np.fft.ifft(x, axis=1), axis=1)
    return np.fft.fft(mom.conj() * np.fft.ifft(pos.conj() * x, axis=1), axis=1)


def apply_map(umap: QuantumMap, operand, direction: str = "forward"):
    """Multiply a state vector or operator from the left by U (or U^dag).

    Equivalent to the materialized matrix product but costs O(N log N) per
    column.  Operator entries must be written in the position basis.
    """
    if direction not in ("forward", "adjoint"):
        raise ValueError(f"unknown direction {direction!r}")
    adjoint = direction == "adjoint"
    if isinstance(operand, OperatorMatrix):
        if operand.basis != POSITION:
            raise ValueError("apply_map expects position-basis operator entries")
        if operand.dim != umap.dim:
            raise ValueError(f"dimension mismatch: operator {operand.dim}, map {umap.dim}")
        return OperatorMatrix(_lmul(umap, operand.entries, adjoint), POSITION)
    x = np.asarray(operand, dtype=complex)
    if x.shape[0] != umap.dim:
        raise ValueError(f"dimension mismatch: operand {x.shape[0]}, map {umap.dim}")
    return _lmul(umap, x, adjoint)


def heisenberg_conjugate(umap: QuantumMap, entries: np.ndarray) -> np.ndarray:
    """One Heisenberg step U^dag A U on raw position-basis entries."""
    return _rmul(_lmul(umap, entries, adjoint=True), umap, adjoint=False)


def materialize(umap: QuantumMap) -> OperatorMatrix:
    """Dense unitary matrix of the map in the position basis."""
    return OperatorMatrix(_lmul(umap, np.eye(umap.dim, dtype=complex)), POSITION)
