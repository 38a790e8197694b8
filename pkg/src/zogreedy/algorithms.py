"""The two derivative-free conditional-gradient maximizers and three baselines.

* :func:`bcg` - zeroth-order Frank-Wolfe ascent for monotone DR-submodular
  objectives: batched two-point gradient estimates on the shrunk/translated
  feasible set, momentum averaging, closed-form linear maximization, and a
  final lift back into the original constraint.  Accepts exact or noisy
  value oracles.
* :func:`dbg` - the same scheme for monotone submodular set functions through
  sampled multilinear-extension values, finished by lossless swap rounding.
* :func:`scg` - first-order momentum Frank-Wolfe (exact gradients for
  continuous objectives, a 2d-query per-coordinate estimator for set
  functions).
* :func:`ga` / :func:`zga` - projected gradient ascent with exact gradients /
  two-point estimates.

All runs are sequential in the iteration counter, deterministic given
(parameters, seed), and do exact query accounting: bcg and zga spend `2*B*T`
evaluations, dbg spends ``2*B*l*T`` set evaluations, and discrete scg spends
``2*d*T`` set evaluations.  Trace instrumentation uses uncounted peeks and a
separate random stream.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .constraints import (
    PARTITION_MATROID,
    BoxDomain,
    ConstraintSpec,
    contains,
    independent,
    transform_constraint,
)
from .estimators import (
    MomentumState,
    batch_grad,
    discrete_batch_grad,
    momentum_update,
    rho_schedule,
)
from .oracles import NoisyOracle, SetOracle, ValueOracle, sample_subset
from .polytope import lmo, project, swap_round

ContinuousOracle = Union[ValueOracle, NoisyOracle]


@dataclass(frozen=True)
class AlgoParams:
    """Shared knob set for one optimizer run.

    ``T`` is the iteration budget (at least 4), ``delta`` the smoothing
    radius, ``B`` the per-iteration direction batch, ``l`` the per-probe
    sample count for set objectives, ``eta0`` the base step of the ascent
    baselines (defaults to a feasible-set-diameter / Lipschitz ratio), and
    ``trace_value_samples`` the uncounted sample size behind the discrete
    trace's value column.
    """

    T: int = 100
    delta: float = 0.05
    B: int = 1
    l: int = 1
    seed: int = 0
    eta0: Optional[float] = None
    trace_value_samples: int = 64

    def __post_init__(self):
        if int(self.T) != self.T or self.T < 4:
            raise ValueError("iteration count T must be an integer >= 4")
        if self.delta <= 0:
            raise ValueError("smoothing radius delta must be positive")
        if self.B < 1 or self.l < 1:
            raise ValueError("batch sizes must be >= 1")
        if self.eta0 is not None and self.eta0 <= 0:
            raise ValueError("eta0 must be positive when given")
        if self.trace_value_samples < 1:
            raise ValueError("trace_value_samples must be >= 1")


@dataclass(frozen=True)
class TraceRecord:
    t: int
    queries: int
    elapsed_s: float
    z: np.ndarray
    value: float
    grad_norm: float


@dataclass
class RunTrace:
    """Per-iteration record of an optimizer run."""

    records: list[TraceRecord] = field(default_factory=list)
    rounding_overshoot: Optional[float] = None

    def iterations(self) -> np.ndarray:
        return np.array([r.t for r in self.records], dtype=int)

    def queries(self) -> np.ndarray:
        return np.array([r.queries for r in self.records], dtype=int)

    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.records])

    def iterates(self) -> np.ndarray:
        return np.array([r.z for r in self.records])

    @property
    def final(self) -> TraceRecord:
        return self.records[-1]


def _rng_pair(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    main_seq, instr_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(main_seq), np.random.default_rng(instr_seq)


def _query_progress(oracle, q0: int, gq0: int) -> int:
    """Oracle accesses spent so far, on the algorithm's dominant channel."""
    dq = oracle.query_count - q0
    if dq > 0:
        return dq
    return getattr(oracle, "gradient_query_count", 0) - gq0


def _ascent_scale(constraint) -> float:
    """Crude feasible-set diameter proxy: norm of the budget-saturating point."""
    return float(np.linalg.norm(lmo(constraint, np.ones(constraint.dim))))


def _sampled_set_value(
    f: SetOracle, z: np.ndarray, samples: int, rng: np.random.Generator
) -> float:
    draws = [f.peek(sample_subset(z, rng)) for _ in range(samples)]
    return float(np.mean(draws))


def bcg(
    oracle: ContinuousOracle,
    domain: BoxDomain,
    constraint: ConstraintSpec,
    params: AlgoParams,
) -> tuple[np.ndarray, RunTrace]:
    """Derivative-free conditional-gradient ascent over a convex body.

    Runs ``T`` Frank-Wolfe steps on the shrunk/translated feasible set using
    momentum-averaged two-point gradient estimates centered at
    ``x_t + delta*1``, then returns ``x_{T+1} + delta*1``, which is feasible
    in the original constraint.  Spends exactly ``2*B*T`` oracle evaluations.
    """
    if oracle.dim != domain.dim or oracle.dim != constraint.dim:
        raise ValueError("oracle, domain, and constraint dimensions differ")
    kprime = transform_constraint(domain, constraint, params.delta)
    rng, _ = _rng_pair(params.seed)
    d = oracle.dim
    x = np.zeros(d)
    state = MomentumState.initial(d)
    q0 = oracle.query_count
    start = time.perf_counter()
    trace = RunTrace()
    for t in range(1, params.T + 1):
        sample = batch_grad(oracle, x, params.delta, params.B, rng)
        state = momentum_update(state, sample.estimate, rho_schedule(t))
        v = lmo(kprime, state.g_bar)
        x = x + v / params.T
        z = x + params.delta
        trace.records.append(
            TraceRecord(
                t=t,
                queries=oracle.query_count - q0,
                elapsed_s=time.perf_counter() - start,
                z=z,
                value=oracle.peek(z),
                grad_norm=float(np.linalg.norm(state.g_bar)),
            )
        )
    out = x + params.delta
    if not contains(constraint, out, tol=1e-9):
        raise RuntimeError("final iterate left the constraint set; internal error")
    return out, trace


def _repair_matroid_point(
    z: np.ndarray, matroid: ConstraintSpec
) -> tuple[float, np.ndarray]:
    """Clamp tolerance-level rounding-input violations; report their size.

    The lifted final iterate satisfies the matroid polytope up to floating
    point; anything beyond 1e-6 signals a real bug and raises.
    """
    overshoot = max(0.0, float(np.max(z - 1.0)), float(np.max(-z)))
    z = np.clip(z, 0.0, 1.0).copy()
    for block, limit in zip(matroid.blocks, matroid.budgets):
        idx = list(block)
        s = float(np.sum(z[idx]))
        if s > limit:
            overshoot = max(overshoot, s - limit)
            z[idx] *= limit / s
    if overshoot > 1e-6:
        raise RuntimeError(
            f"rounding input violates the matroid polytope by {overshoot}"
        )
    return overshoot, z


def dbg(
    f: SetOracle, matroid: ConstraintSpec, params: AlgoParams
) -> tuple[frozenset, RunTrace]:
    """Derivative-free maximization of a monotone submodular set function.

    Identical skeleton to :func:`bcg` on the unit cube, with probe values
    replaced by ``l``-sample multilinear estimates; the final fractional point
    is lifted by ``delta`` and swap-rounded to an independent set.  Spends
    exactly ``2*B*l*T`` set evaluations.
    """
    if matroid.kind != PARTITION_MATROID:
        raise ValueError("dbg expects a partition-matroid constraint")
    if matroid.dim != f.ground_size:
        raise ValueError("oracle and matroid dimensions differ")
    if params.delta >= 0.5:
        raise ValueError("delta must be < 1/2 on the unit cube")
    domain = BoxDomain.unit_cube(f.ground_size)
    kprime = transform_constraint(domain, matroid, params.delta)
    rng, instr = _rng_pair(params.seed)
    d = f.ground_size
    x = np.zeros(d)
    state = MomentumState.initial(d)
    q0 = f.query_count
    start = time.perf_counter()
    trace = RunTrace()
    for t in range(1, params.T + 1):
        sample = discrete_batch_grad(f, x, params.delta, params.B, params.l, rng)
        state = momentum_update(state, sample.estimate, rho_schedule(t))
        v = lmo(kprime, state.g_bar)
        x = x + v / params.T
        z = x + params.delta
        trace.records.append(
            TraceRecord(
                t=t,
                queries=f.query_count - q0,
                elapsed_s=time.perf_counter() - start,
                z=z,
                value=_sampled_set_value(f, z, params.trace_value_samples, instr),
                grad_norm=float(np.linalg.norm(state.g_bar)),
            )
        )
    overshoot, z_final = _repair_matroid_point(x + params.delta, matroid)
    trace.rounding_overshoot = overshoot
    chosen = swap_round(z_final, matroid, rng)
    if not independent(matroid, chosen):
        raise RuntimeError("rounded set violates the matroid; internal error")
    return chosen, trace


def scg(
    oracle: Union[ValueOracle, SetOracle],
    constraint: ConstraintSpec,
    params: AlgoParams,
) -> tuple[Union[np.ndarray, frozenset], RunTrace]:
    """First-order momentum Frank-Wolfe on the untransformed constraint.

    Continuous oracles must expose an exact gradient.  Set oracles get the
    per-coordinate stochastic estimate ``f(S + i) - f(S - i)`` from a single
    sampled set per iteration (``2*d`` set queries) and a swap-rounded output.
    """
    if isinstance(oracle, SetOracle):
        return _scg_discrete(oracle, constraint, params)
    return _scg_continuous(oracle, constraint, params)


def _scg_continuous(oracle, constraint, params):
    if oracle.dim != constraint.dim:
        raise ValueError("oracle and constraint dimensions differ")
    if not getattr(oracle, "has_gradient", False):
        raise ValueError("continuous scg needs a gradient-bearing oracle")
    d = oracle.dim
    x = np.zeros(d)
    state = MomentumState.initial(d)
    q0, gq0 = oracle.query_count, oracle.gradient_query_count
    start = time.perf_counter()
    trace = RunTrace()
    for t in range(1, params.T + 1):
        g = oracle.gradient(x)
        state = momentum_update(state, g, rho_schedule(t))
        v = lmo(constraint, state.g_bar)
        x = x + v / params.T
        trace.records.append(
            TraceRecord(
                t=t,
                queries=_query_progress(oracle, q0, gq0),
                elapsed_s=time.perf_counter() - start,
                z=x,
                value=oracle.peek(x),
                grad_norm=float(np.linalg.norm(state.g_bar)),
            )
        )
    if not contains(constraint, x, tol=1e-9):
        raise RuntimeError("final iterate left the constraint set; internal error")
    return x, trace


def _scg_discrete(f: SetOracle, matroid: ConstraintSpec, params: AlgoParams):
    if matroid.kind != PARTITION_MATROID:
        raise ValueError("discrete scg expects a partition-matroid constraint")
    if matroid.dim != f.ground_size:
        raise ValueError("oracle and matroid dimensions differ")
    rng, instr = _rng_pair(params.seed)
    d = f.ground_size
    x = np.zeros(d)
    state = MomentumState.initial(d)
    q0 = f.query_count
    start = time.perf_counter()
    trace = RunTrace()
    for t in range(1, params.T + 1):
        base = sample_subset(x, rng)
        g = np.empty(d)
        for i in range(d):
            g[i] = f(base | {i}) - f(base - {i})
        state = momentum_update(state, g, rho_schedule(t))
        v = lmo(matroid, state.g_bar)
        x = x + v / params.T
        trace.records.append(
            TraceRecord(
                t=t,
                queries=f.query_count - q0,
                elapsed_s=time.perf_counter() - start,
                z=x,
                value=_sampled_set_value(f, x, params.trace_value_samples, instr),
                grad_norm=float(np.linalg.norm(state.g_bar)),
            )
        )
    overshoot, x_final = _repair_matroid_point(x, matroid)
    trace.rounding_overshoot = overshoot
    chosen = swap_round(x_final, matroid, rng)
    return chosen, trace


def ga(
    oracle: ValueOracle,
    constraint: ConstraintSpec,
    params: AlgoParams,
    x0: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, RunTrace]:
    """Projected gradient ascent with step size eta0 / sqrt(t).

    Requires an oracle exposing a gradient (exact or stochastic).  Spends no
    function-value queries; the trace column counts gradient accesses instead
    (or the set evaluations behind stochastic gradients).
    """
    if oracle.dim != constraint.dim:
        raise ValueError("oracle and constraint dimensions differ")
    if not oracle.has_gradient:
        raise ValueError("ga needs a gradient-bearing oracle")
    eta0 = params.eta0
    if eta0 is None:
        eta0 = _ascent_scale(constraint) / oracle.lipschitz_G
    x = project(constraint, np.zeros(oracle.dim) if x0 is None else np.asarray(x0, float))
    q0, gq0 = oracle.query_count, oracle.gradient_query_count
    start = time.perf_counter()
    trace = RunTrace()
    for t in range(1, params.T + 1):
        g = oracle.gradient(x)
        x = project(constraint, x + (eta0 / np.sqrt(t)) * g)
        trace.records.append(
            TraceRecord(
                t=t,
                queries=_query_progress(oracle, q0, gq0),
                elapsed_s=time.perf_counter() - start,
                z=x,
                value=oracle.peek(x),
                grad_norm=float(np.linalg.norm(g)),
            )
        )
    return x, trace


def zga(
    oracle: ContinuousOracle,
    domain: BoxDomain,
    constraint: ConstraintSpec,
    params: AlgoParams,
) -> tuple[np.ndarray, RunTrace]:
    """Projected ascent driven by the same two-point estimator as :func:`bcg`.

    Iterates live on the shrunk/translated feasible set so every probe stays
    inside the domain; the returned point is lifted by ``delta``.  Spends
    exactly ``2*B*T`` oracle evaluations.
    """
    if oracle.dim != domain.dim or oracle.dim != constraint.dim:
        raise ValueError("oracle, domain, and constraint dimensions differ")
    kprime = transform_constraint(domain, constraint, params.delta)
    rng, _ = _rng_pair(params.seed)
    eta0 = params.eta0
    if eta0 is None:
        eta0 = _ascent_scale(kprime) / oracle.lipschitz_G
    x = np.zeros(oracle.dim)
    q0 = oracle.query_count
    start = time.perf_counter()
    trace = RunTrace()
    for t in range(1, params.T + 1):
        sample = batch_grad(oracle, x, params.delta, params.B, rng)
        x = project(kprime, x + (eta0 / np.sqrt(t)) * sample.estimate)
        z = x + params.delta
        trace.records.append(
            TraceRecord(
                t=t,
                queries=oracle.query_count - q0,
                elapsed_s=time.perf_counter() - start,
                z=z,
                value=oracle.peek(z),
                grad_norm=float(np.linalg.norm(sample.estimate)),
            )
        )
    out = x + params.delta
    if not contains(constraint, out, tol=1e-9):
        raise RuntimeError("final iterate left the constraint set; internal error")
    return out, trace
