"""Boxes, budget polytopes, partition matroids, and their shrunk/translated images.

The optimizers in this package keep their iterates inside a feasible set that
has been pulled away from the boundary of the objective's box domain by a
margin ``delta``, so that every smoothing sample ``x + delta*u`` stays inside
the domain.  This module owns that geometry: the box domain, the three
supported constraint families, the shrink-and-translate transform, and the
feasibility predicates everything else relies on.

All types are immutable after construction and safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_FEASIBILITY_TOL = 1e-9

BOX = "box"
BLOCK_BUDGET = "block_budget"
PARTITION_MATROID = "partition_matroid"

_KINDS = (BOX, BLOCK_BUDGET, PARTITION_MATROID)


class DomainError(ValueError):
    """A point or parameter leaves the box domain (e.g. delta too large)."""


class InfeasibleTransformError(ValueError):
    """The shrunk/translated constraint set is empty."""


def _as_readonly_array(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True).reshape(-1)
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box ``prod_i [0, upper_i]`` with strictly positive sides."""

    upper: np.ndarray

    def __post_init__(self):
        arr = _as_readonly_array(self.upper, "upper")
        if np.any(arr <= 0):
            raise ValueError("box upper bounds must be strictly positive")
        object.__setattr__(self, "upper", arr)

    @property
    def dim(self) -> int:
        return self.upper.size

    @classmethod
    def unit_cube(cls, dim: int) -> "BoxDomain":
        return cls(np.ones(int(dim)))

    def contains(self, x: np.ndarray, tol: float = DEFAULT_FEASIBILITY_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"point has shape {x.shape}, expected ({self.dim},)")
        return bool(np.all(x >= -tol) and np.all(x <= self.upper + tol))


def _normalize_blocks(dim: int, blocks) -> tuple[tuple[int, ...], ...]:
    seen: set[int] = set()
    out = []
    for block in blocks:
        idx = tuple(int(i) for i in block)
        if not idx:
            raise ValueError("blocks must be non-empty")
        for i in idx:
            if not 0 <= i < dim:
                raise ValueError(f"block index {i} out of range for dim {dim}")
            if i in seen:
                raise ValueError(f"blocks must be pairwise disjoint (index {i} repeated)")
            seen.add(i)
        out.append(idx)
    return tuple(out)


@dataclass(frozen=True)
class ConstraintSpec:
    """One of the three supported constraint families.

    * ``box``: the box ``[0, upper]`` itself.
    * ``block_budget``: ``{0 <= x <= cap, sum_{i in B_k} x_i <= b_k}`` over
      disjoint blocks; coordinates outside every block see only the box.
    * ``partition_matroid``: the polytope of a partition matroid, i.e. a
      block-budget set with unit caps and integer per-block limits.

    ``upper`` stores the per-coordinate cap for all three kinds so membership,
    linear maximization, and projection can treat them uniformly.
    """

    kind: str
    upper: np.ndarray
    blocks: tuple[tuple[int, ...], ...] = ()
    budgets: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown constraint kind {self.kind!r}")
        arr = _as_readonly_array(self.upper, "upper")
        if np.any(arr <= 0):
            raise ValueError("per-coordinate caps must be strictly positive")
        object.__setattr__(self, "upper", arr)
        blocks = _normalize_blocks(arr.size, self.blocks)
        budgets = tuple(float(b) for b in self.budgets)
        if len(blocks) != len(budgets):
            raise ValueError("need one budget per block")
        for block, budget in zip(blocks, budgets):
            if budget <= 0:
                raise ValueError("budgets must be strictly positive")
            cap_total = float(np.sum(self.upper[list(block)]))
            if budget > cap_total + 1e-12:
                raise ValueError(
                    f"budget {budget} exceeds block capacity {cap_total}"
                )
        if self.kind == BOX and blocks:
            raise ValueError("box constraints carry no blocks")
        if self.kind == PARTITION_MATROID:
            for budget in budgets:
                if abs(budget - round(budget)) > 1e-12:
                    raise ValueError("partition matroid limits must be integers")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "budgets", budgets)

    @property
    def dim(self) -> int:
        return self.upper.size

    @classmethod
    def box(cls, upper) -> "ConstraintSpec":
        return cls(kind=BOX, upper=upper)

    @classmethod
    def block_budget(cls, dim: int, blocks, budgets, cap: float = 1.0) -> "ConstraintSpec":
        return cls(
            kind=BLOCK_BUDGET,
            upper=np.full(int(dim), float(cap)),
            blocks=tuple(tuple(b) for b in blocks),
            budgets=tuple(budgets),
        )

    @classmethod
    def partition_matroid(cls, dim: int, blocks, limits) -> "ConstraintSpec":
        return cls(
            kind=PARTITION_MATROID,
            upper=np.ones(int(dim)),
            blocks=tuple(tuple(b) for b in blocks),
            budgets=tuple(float(k) for k in limits),
        )


@dataclass(frozen=True)
class TransformedConstraint:
    """Shrunk and translated image of a constraint inside its box domain.

    For domain ``[0, a]``, base set K, and margin ``delta`` this is
    ``{x : 0 <= x <= min(a - 2*delta, cap - delta), block sums <= b_k - delta*|B_k|}``,
    i.e. the intersection of the twice-shrunk box with K translated by
    ``-delta``.  Every member x satisfies ``x + delta*1 in K``.
    """

    base: ConstraintSpec
    delta: float
    upper: np.ndarray
    budgets: tuple[float, ...] = field(default=())

    def __post_init__(self):
        arr = _as_readonly_array(self.upper, "upper")
        object.__setattr__(self, "upper", arr)

    @property
    def blocks(self) -> tuple[tuple[int, ...], ...]:
        return self.base.blocks

    @property
    def dim(self) -> int:
        return self.upper.size


def shrink_domain(domain: BoxDomain, delta: float) -> BoxDomain:
    """Shrink ``[0, a]`` by ``delta`` on both sides and translate to the origin.

    Returns ``prod_i [0, a_i - 2*delta]``.  Raises :class:`DomainError` when
    the result would be empty or degenerate.
    """
    delta = float(delta)
    if delta <= 0:
        raise ValueError("delta must be strictly positive")
    shrunk = domain.upper - 2.0 * delta
    if np.any(shrunk <= 0):
        raise DomainError(
            f"delta={delta} leaves an empty or degenerate box (need delta < min(a)/2)"
        )
    return BoxDomain(shrunk)


def transform_constraint(
    domain: BoxDomain, constraint: ConstraintSpec, delta: float
) -> TransformedConstraint:
    """Intersect the shrunk domain with the constraint translated by ``-delta``.

    Raises :class:`InfeasibleTransformError` when some block budget drops
    below zero (the transformed set would not contain the origin).
    """
    if constraint.dim != domain.dim:
        raise ValueError("constraint and domain dimensions differ")
    if np.any(constraint.upper > domain.upper + 1e-12):
        raise ValueError("constraint caps must not exceed the domain box")
    shrunk = shrink_domain(domain, delta)
    upper = np.minimum(shrunk.upper, constraint.upper - delta)
    if np.any(upper < 0):
        raise InfeasibleTransformError(
            "a per-coordinate cap is below delta; transformed set is empty"
        )
    budgets = []
    for block, budget in zip(constraint.blocks, constraint.budgets):
        adjusted = budget - delta * len(block)
        if adjusted < -1e-12:
            raise InfeasibleTransformError(
                f"budget {budget} < delta*|block| = {delta * len(block)}"
            )
        budgets.append(max(adjusted, 0.0))
    return TransformedConstraint(
        base=constraint, delta=float(delta), upper=upper, budgets=tuple(budgets)
    )


def linear_system(constraint) -> tuple[np.ndarray, tuple, tuple]:
    """Uniform (caps, blocks, budgets) view over raw and transformed sets."""
    if isinstance(constraint, TransformedConstraint):
        return constraint.upper, constraint.base.blocks, constraint.budgets
    if isinstance(constraint, ConstraintSpec):
        return constraint.upper, constraint.blocks, constraint.budgets
    raise TypeError(f"unsupported constraint type {type(constraint).__name__}")


def contains(constraint, x: np.ndarray, tol: float = DEFAULT_FEASIBILITY_TOL) -> bool:
    """True iff every box and budget inequality holds within additive ``tol``."""
    upper, blocks, budgets = linear_system(constraint)
    x = np.asarray(x, dtype=float)
    if x.shape != upper.shape:
        raise ValueError(f"point has shape {x.shape}, expected {upper.shape}")
    if np.any(x < -tol) or np.any(x > upper + tol):
        return False
    for block, budget in zip(blocks, budgets):
        if float(np.sum(x[list(block)])) > budget + tol:
            return False
    return True


def independent(matroid: ConstraintSpec, subset) -> bool:
    """True iff ``subset`` respects every block limit of a partition matroid."""
    if matroid.kind != PARTITION_MATROID:
        raise ValueError("independence is defined for partition matroids only")
    members = set(int(i) for i in subset)
    for i in members:
        if not 0 <= i < matroid.dim:
            raise ValueError(f"element {i} outside the ground set")
    for block, limit in zip(matroid.blocks, matroid.budgets):
        if len(members.intersection(block)) > limit + 1e-12:
            return False
    return True
