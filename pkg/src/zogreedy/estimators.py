"""Sphere sampling, two-point gradient estimation, and momentum averaging.

The gradient of the ball-averaged surrogate of an objective F admits unbiased
single-query and double-query estimators built from uniform directions on the
unit sphere.  These are the only derivative probes the optimizers use; the
momentum recursion then damps their variance across iterations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constraints import DomainError
from .oracles import SetOracle, sample_subset


@dataclass(frozen=True)
class MomentumState:
    """Running weighted average of gradient estimates with its step index."""

    g_bar: np.ndarray
    t: int = 0

    def __post_init__(self):
        arr = np.array(self.g_bar, dtype=float, copy=True).reshape(-1)
        arr.setflags(write=False)
        object.__setattr__(self, "g_bar", arr)
        if self.t < 0:
            raise ValueError("step index must be non-negative")

    @classmethod
    def initial(cls, dim: int) -> "MomentumState":
        return cls(g_bar=np.zeros(int(dim)), t=0)

    @property
    def dim(self) -> int:
        return self.g_bar.size


@dataclass(frozen=True)
class GradientSample:
    """A batched gradient estimate with its oracle cost and evaluation center."""

    estimate: np.ndarray
    queries_used: int
    center: np.ndarray


def sample_sphere(dim: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Uniform draw(s) from the unit sphere, via normalized Gaussians.

    Returns shape (dim,) when ``size`` is None, else (size, dim).
    """
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    n = 1 if size is None else int(size)
    u = rng.standard_normal((n, dim))
    norms = np.linalg.norm(u, axis=1)
    while np.any(norms < 1e-12):
        bad = norms < 1e-12
        u[bad] = rng.standard_normal((int(np.sum(bad)), dim))
        norms = np.linalg.norm(u, axis=1)
    u /= norms[:, None]
    return u[0] if size is None else u


def sample_ball(dim: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Uniform draw(s) from the unit ball: sphere direction times U^(1/dim)."""
    n = 1 if size is None else int(size)
    u = sample_sphere(dim, rng, size=n)
    r = rng.random(n) ** (1.0 / dim)
    out = u * r[:, None]
    return out[0] if size is None else out


def one_point_grad(oracle, x: np.ndarray, delta: float, u: np.ndarray) -> np.ndarray:
    """Single-query estimate (d/delta) * F(x + delta*u) * u."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    d = x.size
    return (d / delta) * oracle(x + delta * u) * u


def two_point_grad(oracle, x: np.ndarray, delta: float, u: np.ndarray) -> np.ndarray:
    """Antithetic estimate (d/2delta) * (F(x + delta*u) - F(x - delta*u)) * u.

    Unbiased for the gradient of the delta-ball average of F; two queries.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    d = x.size
    diff = oracle(x + delta * u) - oracle(x - delta * u)
    return (d / (2.0 * delta)) * diff * u


def batch_grad(
    oracle, x_t: np.ndarray, delta: float, batch: int, rng: np.random.Generator
) -> GradientSample:
    """Average of ``batch`` two-point estimates centered at x_t + delta*1.

    The center shift keeps both probe points inside the original box whenever
    x_t lies in the twice-shrunk domain.  Spends exactly ``2 * batch`` queries.
    """
    if batch < 1:
        raise ValueError("batch size must be >= 1")
    x_t = np.asarray(x_t, dtype=float)
    center = x_t + delta
    total = np.zeros_like(center)
    for _ in range(batch):
        u = sample_sphere(center.size, rng)
        total += two_point_grad(oracle, center, delta, u)
    return GradientSample(estimate=total / batch, queries_used=2 * batch, center=center)


def discrete_batch_grad(
    f: SetOracle,
    x_t: np.ndarray,
    delta: float,
    batch: int,
    inner_samples: int,
    rng: np.random.Generator,
) -> GradientSample:
    """Two-point estimate for a multilinear extension known only by sampling.

    Each probe value is the average of ``inner_samples`` evaluations f(S) with
    S drawn from the probe point's product distribution.  Spends exactly
    ``2 * batch * inner_samples`` set evaluations.
    """
    if batch < 1 or inner_samples < 1:
        raise ValueError("batch and inner sample sizes must be >= 1")
    x_t = np.asarray(x_t, dtype=float)
    d = x_t.size
    center = x_t + delta
    total = np.zeros(d)
    for _ in range(batch):
        u = sample_sphere(d, rng)
        y_plus = center + delta * u
        y_minus = center - delta * u
        for y in (y_plus, y_minus):
            if np.any(y < -1e-9) or np.any(y > 1.0 + 1e-9):
                raise DomainError(
                    "probe point leaves the unit cube; keep x_t + delta in "
                    "[delta, 1 - delta] per coordinate"
                )
        f_plus = np.mean([f(sample_subset(y_plus, rng)) for _ in range(inner_samples)])
        f_minus = np.mean([f(sample_subset(y_minus, rng)) for _ in range(inner_samples)])
        total += (d / (2.0 * delta)) * (f_plus - f_minus) * u
    return GradientSample(
        estimate=total / batch,
        queries_used=2 * batch * inner_samples,
        center=center,
    )


def momentum_update(state: MomentumState, g_t: np.ndarray, rho_t: float) -> MomentumState:
    """One step of the averaging recursion g_bar <- (1-rho) g_bar + rho g_t."""
    g_t = np.asarray(g_t, dtype=float)
    if g_t.shape != state.g_bar.shape:
        raise ValueError(f"gradient has shape {g_t.shape}, expected {state.g_bar.shape}")
    if not 0.0 < rho_t <= 1.0:
        raise ValueError("momentum weight must lie in (0, 1]")
    return MomentumState(g_bar=(1.0 - rho_t) * state.g_bar + rho_t * g_t, t=state.t + 1)


def rho_schedule(t: int) -> float:
    """Decaying momentum weight 2 / (t + 3)^(2/3), clamped into (0, 1]."""
    if t < 1:
        raise ValueError("step index must be >= 1")
    return min(1.0, 2.0 / (t + 3.0) ** (2.0 / 3.0))
