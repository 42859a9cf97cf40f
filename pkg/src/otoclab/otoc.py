"""Out-of-time-ordered correlator series and the exact cat-map results.

The correlator of Hermitian A, B under a one-step propagator is

    C(t) = <[A(t), B] [A(t), B]^dag> = -2 Re[O1(t) - O2(t)]
    O1(t) = <A(t) B A(t) B>,   O2(t) = <A(t)^2 B^2>

with the infinite-temperature average <.> = Tr(.)/N.  All values reported
here carry that 1/N normalization, so O2 = 1/4 and C saturates at 1/2 for
the sine observables.  A(t) is advanced one map step per iteration, by
unitary conjugation or by the coarse-grained channel when a dephasing
kernel is supplied.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import coarse_graining
from .classical import CAT_LYAPUNOV, cat_matrix_power
from .maps import CAT, ClassicalMapSpec, QuantumMap, heisenberg_conjugate
from .phase_space import (MOMENTUM, POSITION, OperatorMatrix, change_basis,
                          hermiticity_defect, symplectic_product)

__all__ = [
    "OtocSeries",
    "heisenberg_evolve",
    "otoc_series",
    "otoc_via_commutator",
    "analytic_cat_otoc",
    "otoc_family_linear",
    "fit_lyapunov_from_otoc",
    "loglinear_fit",
]

_HERMITIAN_TOL = 1e-10
_DIAG_TOL = 1e-12


@dataclass(frozen=True)
class OtocSeries:
    """Per-step record of C(t), O1(t), O2(t) plus the run parameters."""

    t: np.ndarray
    c: np.ndarray
    o1: np.ndarray
    o2: np.ndarray
    map_spec: ClassicalMapSpec
    n: int
    epsilon: float
    operators: str = "XP"
    kick_mode: str = "correspondence"

    @property
    def o1_abs(self) -> np.ndarray:
        return np.abs(self.o1)


def heisenberg_evolve(a: OperatorMatrix, umap: QuantumMap, steps: int) -> OperatorMatrix:
    """U^dag^steps A U^steps via FFT conjugation, O(N^2 log N) per step."""
    if steps < 0:
        raise ValueError(f"steps must be non-negative, got {steps}")
    if a.dim != umap.dim:
        raise ValueError(f"dimension mismatch: operator {a.dim}, map {umap.dim}")
    entries = a.to_basis(umap.space, POSITION).entries
    for _ in range(steps):
        entries = heisenberg_conjugate(umap, entries)
    return OperatorMatrix(entries, POSITION)


class _RightFactor:
    """Right multiplication by a fixed observable, exploiting its structure.

    Operators diagonal in position multiply columns; operators diagonal in
    momentum act as circulants, applied with one FFT pair per product.  Only
    genuinely unstructured observables fall back to dense matmul.
    """

    def __init__(self, space, b: OperatorMatrix):
        pos = b.to_basis(space, POSITION).entries
        diag = _diagonal_of(pos)
        if diag is not None:
            self.kind = "posdiag"
            self.diag = diag
            self.diag_sq = diag * diag
            return
        mom = change_basis(space, pos, POSITION, MOMENTUM)
        diag = _diagonal_of(mom)
        if diag is not None:
            self.kind = "momdiag"
            self.diag = diag
            self.diag_sq = diag * diag
            return
        self.kind = "dense"
        self.matrix = pos
        self.matrix_sq = pos @ pos

    def times(self, a: np.ndarray, squared: bool = False) -> np.ndarray:
        if self.kind == "posdiag":
            d = self.diag_sq if squared else self.diag
            return a * d[None, :]
        if self.kind == "momdiag":
            d = self.diag_sq if squared else self.diag
            return np.fft.fft(d[None, :] * np.fft.ifft(a, axis=1), axis=1)
        return a @ (self.matrix_sq if squared else self.matrix)


def _diagonal_of(entries: np.ndarray):
    diag = np.diag(entries).copy()
    off = entries - np.diag(diag)
    scale = max(np.abs(diag).max(), 1.0)
    if np.abs(off).max() <= _DIAG_TOL * scale:
        return diag
    return None


def otoc_series(umap: QuantumMap, a: OperatorMatrix, b: OperatorMatrix, t_max: int,
                kernel: "coarse_graining.CoarseGrainKernel | None" = None,
                operators: str = "XP") -> OtocSeries:
    """Compute C(t), O1(t), O2(t) for t = 0 .. t_max.

    A(t) advances one step per iteration: unitary conjugation when ``kernel``
    is None or has epsilon 0, otherwise the dephasing channel step.  A and B
    must be Hermitian.
    """
    for name, op in (("A", a), ("B", b)):
        defect = hermiticity_defect(op.to_basis(umap.space, POSITION).entries)
        if defect > _HERMITIAN_TOL:
            raise ValueError(f"operator {name} is not Hermitian (defect {defect:.2e})")
    if t_max < 0:
        raise ValueError("t_max must be non-negative")
    n = umap.dim
    dephase = kernel is not None and kernel.epsilon > 0
    right = _RightFactor(umap.space, b)
    at = a.to_basis(umap.space, POSITION).entries.copy()
    o1 = np.empty(t_max + 1, dtype=complex)
    o2 = np.empty(t_max + 1)
    for t in range(t_max + 1):
        ab = right.times(at)
        o1[t] = np.einsum("ij,ji->", ab, ab) / n
        o2[t] = np.einsum("ij,ji->", at, right.times(at, squared=True)).real / n
        if t < t_max:
            at = heisenberg_conjugate(umap, at)
            if dephase:
                at = coarse_graining.apply_dephasing_chord(kernel, at)
    c = -2.0 * (o1 - o2).real
    return OtocSeries(np.arange(t_max + 1), c, o1, o2, umap.map_spec, n,
                      0.0 if kernel is None else kernel.epsilon, operators, umap.kick_mode)


def otoc_via_commutator(umap: QuantumMap, a: OperatorMatrix, b: OperatorMatrix,
                        t_max: int, kernel=None, force: bool = False) -> np.ndarray:
    """Slow-path oracle: C(t) from the materialized commutator.

    Evaluates Tr([A(t), B][A(t), B]^dag)/N with dense products, independent
    of the O1/O2 decomposition.  Cost O(N^3) per step, refused above N = 64
    unless forced.
    """
    if umap.dim > 64 and not force:
        raise ValueError("commutator oracle is O(N^3) per step; pass force=True above N=64")
    space = umap.space
    at = a.to_basis(space, POSITION).entries.copy()
    bb = b.to_basis(space, POSITION).entries
    dephase = kernel is not None and kernel.epsilon > 0
    c = np.empty(t_max + 1)
    for t in range(t_max + 1):
        comm = at @ bb - bb @ at
        c[t] = np.einsum("ij,ij->", comm, comm.conj()).real / umap.dim
        if t < t_max:
            at = heisenberg_conjugate(umap, at)
            if dephase:
                at = coarse_graining.apply_dephasing_chord(kernel, at)
    return c


class CatOtocPoint(NamedTuple):
    c: float
    o1: float
    o2: float
    c_growth_approx: float


def analytic_cat_otoc(t: int, n: int) -> CatOtocPoint:
    """Closed-form OTOC of the unperturbed cat map for the sine pair.

    C(t) = sin^2(pi a_t / N), O1(t) = cos(2 pi a_t / N)/4, O2 = 1/4, where
    a_t is the top-left integer entry of the t-th cat matrix power, reduced
    mod N before evaluating the trig functions so large t stays exact.  The
    last field is the small-angle growth approximation (pi^2/N^2) e^{2 lam t}.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if n < 2:
        raise ValueError("n must be >= 2")
    a_mod = cat_matrix_power(t).a % n
    angle = np.pi * a_mod / n
    c = float(np.sin(angle) ** 2)
    o1 = float(np.cos(2 * angle) / 4.0)
    approx = float((np.pi / n) ** 2 * np.exp(2.0 * CAT_LYAPUNOV * t))
    return CatOtocPoint(c, o1, 0.25, approx)


def otoc_family_linear(xi, chi, t: int, n: int,
                       map_spec: ClassicalMapSpec | None = None) -> float:
    """Exact OTOC sin^2(pi <M^t xi, chi> / N) of the unperturbed cat map.

    Valid for the linear (k = 0) cat map only; the symplectic product is
    taken with exact integers and reduced mod N inside the sine.  This
    quantization realizes the translation covariance with q and p mirrored,
    so the matching numerical correlator evolves F_(xi_p, xi_q) against the
    static F_(chi_p, chi_q); the sine pair (1,0)/(0,1) is mirror-fixed.
    """
    if map_spec is not None and (map_spec.kind != CAT or map_spec.k != 0.0):
        raise ValueError("the closed-form translation OTOC only holds for the k=0 cat map")
    image = cat_matrix_power(t).apply(xi)
    s = symplectic_product(image, chi) % n
    return float(np.sin(np.pi * s / n) ** 2)


def loglinear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares line through (x, ln y); returns slope, intercept, R^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two points to fit")
    if np.any(y <= 0):
        raise ValueError("values must be strictly positive for a log-linear fit")
    logy = np.log(y)
    slope, intercept = np.polyfit(x, logy, 1)
    resid = logy - (slope * x + intercept)
    total = logy - logy.mean()
    denom = float(total @ total)
    r2 = 1.0 if denom == 0.0 else 1.0 - float(resid @ resid) / denom
    return float(slope), float(intercept), r2


def fit_lyapunov_from_otoc(series: OtocSeries, window: tuple[int, int],
                           t_ehrenfest: float | None = None) -> float:
    """Half the log-linear growth rate of C(t) over [window[0], window[1]].

    Warns when the fit quality drops below R^2 = 0.98.  When the Ehrenfest
    time is supplied the window is checked against [1, t_E - 1].
    """
    lo, hi = int(window[0]), int(window[1])
    if lo < 1:
        raise ValueError("growth-rate window must start at t >= 1")
    if t_ehrenfest is not None and hi > t_ehrenfest - 1:
        raise ValueError(f"window end {hi} exceeds the growth regime bound {t_ehrenfest - 1:.2f}")
    mask = (series.t >= lo) & (series.t <= hi)
    if mask.sum() < 2:
        raise ValueError(f"window [{lo}, {hi}] selects fewer than two samples")
    cvals = series.c[mask]
    if np.any(cvals <= 0):
        raise ValueError("C(t) must be positive inside the growth window")
    slope, _, r2 = loglinear_fit(series.t[mask], cvals)
    if r2 < 0.98:
        warnings.warn(f"Lyapunov fit R^2 = {r2:.4f} below 0.98; window may span a regime change",
                      stacklevel=2)
    return 0.5 * slope
