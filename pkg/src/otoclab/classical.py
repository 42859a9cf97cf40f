"""Classical diagnostics: Lyapunov exponents, cat monodromy powers, Ehrenfest time."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .maps import ClassicalMapSpec, _jacobian_qp, classical_step

__all__ = [
    "MonodromyPower",
    "cat_matrix_power",
    "LyapunovEstimate",
    "lyapunov",
    "ehrenfest_time",
    "CAT_LYAPUNOV",
]

# ln((3 + sqrt(5))/2), the unperturbed cat exponent
CAT_LYAPUNOV = float(np.log((3.0 + np.sqrt(5.0)) / 2.0))

_FIXED_POINT_TOL = 1e-12


@dataclass(frozen=True)
class MonodromyPower:
    """Exact integer entries of the t-th power of the cat matrix (2 1; 1 1)."""

    t: int
    a: int
    b: int
    c: int
    d: int

    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def mod(self, n: int) -> tuple[int, int, int, int]:
        return (self.a % n, self.b % n, self.c % n, self.d % n)

    def apply(self, xi) -> tuple[int, int]:
        """Image of the integer displacement (xi_q, xi_p) under the power."""
        return (self.a * int(xi[0]) + self.b * int(xi[1]),
                self.c * int(xi[0]) + self.d * int(xi[1]))


def cat_matrix_power(t: int) -> MonodromyPower:
    """M^t for M = (2 1; 1 1) in arbitrary-precision integers."""
    if t < 0 or int(t) != t:
        raise ValueError(f"power must be a non-negative integer, got {t}")
    t = int(t)
    ra, rb, rc, rd = 1, 0, 0, 1
    ba, bb, bc, bd = 2, 1, 1, 1
    e = t
    while e:
        if e & 1:
            ra, rb, rc, rd = (ra * ba + rb * bc, ra * bb + rb * bd,
                              rc * ba + rd * bc, rc * bb + rd * bd)
        ba, bb, bc, bd = (ba * ba + bb * bc, ba * bb + bb * bd,
                          bc * ba + bd * bc, bc * bb + bd * bd)
        e >>= 1
    return MonodromyPower(t, ra, rb, rc, rd)


@dataclass(frozen=True)
class LyapunovEstimate:
    lam: float
    lam_generalized: float
    n_trajectories: int
    t_horizon: int
    standard_error: float
    seed: int
    resampled: int


def lyapunov(spec: ClassicalMapSpec, n_traj: int = 100, t_horizon: int = 1000,
             seed: int = 0, warmup: int = 100) -> LyapunovEstimate:
    """Lyapunov exponents from tangent-vector renormalization.

    Initial conditions are drawn uniformly on [0,1)^2 with one generator per
    trajectory (spawned from ``seed``), so the result is independent of
    evaluation order.  Tangent vectors are renormalized every step with the
    log growth accumulated only after ``warmup`` alignment steps; that keeps
    the transient from biasing the mean.  ``lam`` averages the per-trajectory
    log growth rates; ``lam_generalized`` averages the growth factors before
    taking the logarithm, so it is never below ``lam``.  Trajectories that
    start within 1e-12 of a fixed point are redrawn and counted.
    """
    if t_horizon < 10:
        raise ValueError(f"t_horizon must be at least 10, got {t_horizon}")
    if n_traj < 1:
        raise ValueError("need at least one trajectory")
    points = np.empty((n_traj, 2))
    vectors = np.empty((n_traj, 2))
    resampled = 0
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(n_traj)):
        rng = np.random.default_rng(child)
        x = rng.random(2)
        while _near_fixed_point(spec, x):
            x = rng.random(2)
            resampled += 1
        points[i] = x
        angle = rng.random() * 2.0 * np.pi
        vectors[i] = (np.cos(angle), np.sin(angle))

    q, p = points[:, 0], points[:, 1]
    log_growth = np.zeros(n_traj)
    for t in range(warmup + t_horizon):
        jac = _jacobian_qp(spec, q, p)
        vectors = np.einsum("nij,nj->ni", jac, vectors)
        norms = np.linalg.norm(vectors, axis=1)
        vectors /= norms[:, None]
        if t >= warmup:
            log_growth += np.log(norms)
        q, p = classical_step(spec, (q, p))

    rates = log_growth / t_horizon
    lam = float(rates.mean())
    stderr = float(rates.std(ddof=1) / np.sqrt(n_traj)) if n_traj > 1 else 0.0
    lam_gen = float((logsumexp(log_growth) - np.log(n_traj)) / t_horizon)
    if lam != 0.0 and stderr > 0.05 * abs(lam):
        warnings.warn(
            f"Lyapunov standard error {stderr:.3g} exceeds 5% of the estimate {lam:.3g}; "
            "increase n_traj or t_horizon", stacklevel=2)
    return LyapunovEstimate(lam, lam_gen, n_traj, t_horizon, stderr, seed, resampled)


def _near_fixed_point(spec: ClassicalMapSpec, x) -> bool:
    q1, p1 = classical_step(spec, x)
    dq = min(abs(q1 - x[0]), 1.0 - abs(q1 - x[0]))
    dp = min(abs(p1 - x[1]), 1.0 - abs(p1 - x[1]))
    return max(dq, dp) < _FIXED_POINT_TOL


def ehrenfest_time(n: int, lam: float) -> float:
    """ln(N) / lambda, the log time separating growth from relaxation."""
    if n < 2:
        raise ValueError(f"dimension must be >= 2, got {n}")
    if lam <= 0:
        raise ValueError(f"Lyapunov exponent must be positive, got {lam}")
    return float(np.log(n) / lam)
