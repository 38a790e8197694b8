"""The four benchmark objective families and their oracle builders.

Continuous objectives: non-convex quadratic programs with non-positive
interaction matrix, and probabilistic topic coverage (the closed-form
multilinear extension of a coverage set function).  Discrete objectives:
log-determinant active-set selection and one-hop influence coverage on an
undirected graph.  All four are monotone (DR-)submodular on their domains.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constraints import BoxDomain
from .oracles import SetOracle, ValueOracle


# ---------------------------------------------------------------------------
# Quadratic programs
# ---------------------------------------------------------------------------

def nqp_generate(d: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw a random monotone DR-submodular quadratic instance.

    Entries of H are minus the absolute value of standard normals; H is then
    symmetrized so the gradient H x + b is entrywise non-negative on the unit
    cube, and b = -H^T 1 pins the gradient to zero at the all-ones corner.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    rng = np.random.default_rng(seed)
    H = -np.abs(rng.standard_normal((d, d)))
    H = 0.5 * (H + H.T)
    b = -H.T @ np.ones(d)
    return H, b


def nqp_eval(H: np.ndarray, b: np.ndarray, x: np.ndarray) -> float:
    """Evaluate x^T H x / 2 + b^T x."""
    H = np.asarray(H, dtype=float)
    b = np.asarray(b, dtype=float)
    x = np.asarray(x, dtype=float)
    d = b.size
    if H.shape != (d, d) or x.shape != (d,):
        raise ValueError(f"inconsistent shapes H{H.shape}, b{b.shape}, x{x.shape}")
    return float(0.5 * x @ H @ x + b @ x)


def nqp_oracle(H: np.ndarray, b: np.ndarray, domain: BoxDomain | None = None) -> ValueOracle:
    """Value oracle for a quadratic instance with exact gradient H x + b.

    With entrywise non-positive symmetric H and b = -H^T 1, the gradient over
    the unit cube stays in [0, b] per coordinate, so ||b|| is a valid
    Lipschitz constant.
    """
    H = np.asarray(H, dtype=float)
    b = np.asarray(b, dtype=float)
    d = b.size
    if domain is None:
        domain = BoxDomain.unit_cube(d)
    G = float(np.linalg.norm(b))
    return ValueOracle(
        fn=lambda x: nqp_eval(H, b, x),
        dim=d,
        lipschitz_G=max(G, 1e-12),
        grad=lambda x: H @ x + b,
        domain=domain,
        smooth_L=float(np.linalg.norm(H, 2)),
        name="nqp",
    )


# ---------------------------------------------------------------------------
# Probabilistic coverage of topics
# ---------------------------------------------------------------------------

def coverage_eval(P: np.ndarray, x: np.ndarray) -> float:
    """Average probabilistic topic coverage of a fractional article selection.

    ``P`` is a (topics x articles) matrix with entries in [0, 1]; column ``a``
    is the topic distribution of article ``a``.  Returns
    ``mean_j [1 - prod_a (1 - P[j, a] * x[a])]``, which at 0/1 vectors equals
    the coverage set function.
    """
    P = np.asarray(P, dtype=float)
    x = np.asarray(x, dtype=float)
    if P.ndim != 2 or x.shape != (P.shape[1],):
        raise ValueError(f"inconsistent shapes P{P.shape}, x{x.shape}")
    if np.any(P < 0) or np.any(P > 1):
        raise ValueError("topic matrix entries must lie in [0, 1]")
    if np.any(x < -1e-12) or np.any(x > 1 + 1e-12):
        raise ValueError("selection entries must lie in [0, 1]")
    return float(np.mean(1.0 - np.prod(1.0 - P * x, axis=1)))


def coverage_gradient(P: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Exact gradient of :func:`coverage_eval` in the selection vector."""
    P = np.asarray(P, dtype=float)
    x = np.asarray(x, dtype=float)
    k, d = P.shape
    factors = 1.0 - P * x  # (k, d)
    grad = np.zeros(d)
    for j in range(k):
        row = factors[j]
        zeros = np.flatnonzero(np.abs(row) < 1e-300)
        if zeros.size == 0:
            full = np.prod(row)
            grad += P[j] * (full / row)
        elif zeros.size == 1:
            # only the zeroed factor's coordinate sees a non-zero partial
            others = np.prod(np.delete(row, zeros[0]))
            contrib = np.zeros(d)
            contrib[zeros[0]] = P[j, zeros[0]] * others
            grad += contrib
        # two or more vanishing factors: the whole row's partials vanish
    return grad / k


def coverage_value_oracle(P: np.ndarray) -> ValueOracle:
    """Continuous coverage oracle with exact gradient, on the unit cube."""
    P = np.asarray(P, dtype=float)
    d = P.shape[1]
    col = P.sum(axis=0) / P.shape[0]
    G = float(np.linalg.norm(col))
    return ValueOracle(
        fn=lambda x: coverage_eval(P, x),
        dim=d,
        lipschitz_G=max(G, 1e-12),
        grad=lambda x: coverage_gradient(P, x),
        domain=BoxDomain.unit_cube(d),
        name="coverage",
    )


def coverage_set_oracle(P: np.ndarray) -> SetOracle:
    """Coverage as a set function; its multilinear extension is coverage_eval."""
    P = np.asarray(P, dtype=float)
    d = P.shape[1]

    def fn(S: frozenset) -> float:
        x = np.zeros(d)
        if S:
            x[sorted(S)] = 1.0
        return coverage_eval(P, x)

    return SetOracle(fn, ground_size=d, bound_M=1.0, name="coverage")


# ---------------------------------------------------------------------------
# Active set selection
# ---------------------------------------------------------------------------

def rbf_covariance(X: np.ndarray, h: float) -> np.ndarray:
    """Gaussian-kernel similarity between the columns of a data matrix.

    ``Sigma[i, j] = exp(-||X[:, i] - X[:, j]||^2 / h^2)``; symmetric with unit
    diagonal.
    """
    if h <= 0:
        raise ValueError("bandwidth h must be strictly positive")
    X = np.asarray(X, dtype=float)
    sq = np.sum(X * X, axis=0)
    dist2 = sq[:, None] + sq[None, :] - 2.0 * X.T @ X
    np.maximum(dist2, 0.0, out=dist2)
    sigma = np.exp(-dist2 / (h * h))
    sigma = 0.5 * (sigma + sigma.T)
    np.fill_diagonal(sigma, 1.0)
    return sigma


def logdet_eval(sigma: np.ndarray, S) -> float:
    """log det(I + Sigma[S, S]) via Cholesky; 0 on the empty set.

    Raises ``numpy.linalg.LinAlgError`` when I + Sigma[S, S] is not positive
    definite (i.e. Sigma is not PSD).
    """
    sigma = np.asarray(sigma, dtype=float)
    idx = sorted(int(i) for i in S)
    if not idx:
        return 0.0
    if idx[0] < 0 or idx[-1] >= sigma.shape[0]:
        raise ValueError(f"subset {idx} outside the index range of Sigma")
    sub = np.eye(len(idx)) + sigma[np.ix_(idx, idx)]
    chol = np.linalg.cholesky(sub)
    return float(2.0 * np.sum(np.log(np.diag(chol))))


def logdet_set_oracle(sigma: np.ndarray) -> SetOracle:
    """Active-set selection objective f(S) = log det(I + Sigma[S, S])."""
    sigma = np.asarray(sigma, dtype=float)
    d = sigma.shape[0]
    bound = max(logdet_eval(sigma, range(d)), 1e-12)
    return SetOracle(
        lambda S: logdet_eval(sigma, S), ground_size=d, bound_M=bound, name="logdet"
    )


# ---------------------------------------------------------------------------
# Influence coverage on a graph
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Graph:
    """Undirected simple graph as per-node neighbor sets."""

    neighbors: tuple[frozenset, ...]

    @property
    def num_nodes(self) -> int:
        return len(self.neighbors)

    @property
    def num_edges(self) -> int:
        return sum(len(n) for n in self.neighbors) // 2

    @classmethod
    def from_edges(cls, num_nodes: int, edges) -> "Graph":
        adj: list[set] = [set() for _ in range(num_nodes)]
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                continue
            adj[u].add(v)
            adj[v].add(u)
        return cls(tuple(frozenset(a) for a in adj))


def influence_eval(graph: Graph, S) -> float:
    """Number of nodes reached by the seed set through one hop, seeds included."""
    members = set(int(i) for i in S)
    for u in members:
        if not 0 <= u < graph.num_nodes:
            raise ValueError(f"node {u} outside the graph")
    reached = set(members)
    for u in members:
        reached |= graph.neighbors[u]
    return float(len(reached))


def influence_set_oracle(graph: Graph) -> SetOracle:
    return SetOracle(
        lambda S: influence_eval(graph, S),
        ground_size=graph.num_nodes,
        bound_M=float(graph.num_nodes),
        name="influence",
    )
