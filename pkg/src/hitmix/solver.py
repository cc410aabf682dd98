"""Restricted normalized-Laplacian operator and conjugate gradient solver.

The operator is H = I - D^{-1/2} A D^{-1/2} restricted to a vertex subset.
It is symmetric, and positive definite whenever every subset vertex has a
path to a vertex outside the subset (for us: to the seed set).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .graph import Graph, NonSeedIndex


@dataclass
class CgConfig:
    rel_tol: float = 1e-10
    max_iters: int | None = None  # default: max(1000, 10 * n)
    start: str = "zeros"  # "zeros" or "random"
    start_seed: int | None = None

    def __post_init__(self):
        if not (0.0 < self.rel_tol < 1.0):
            raise ValueError("rel_tol must lie in (0, 1)")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.start not in ("zeros", "random"):
            raise ValueError("start must be 'zeros' or 'random'")

    def resolve_max_iters(self, n: int) -> int:
        if self.max_iters is not None:
            return self.max_iters
        return max(1000, 10 * n)


@dataclass
class CgStats:
    iterations: int
    final_rel_residual: float
    converged: bool


class NonSpdError(RuntimeError):
    """CG recurrences produced NaN/Inf: the operator is not positive definite.

    This typically means the vertex subset contains vertices with no path to
    the seed set; filter with ReachabilityReport before solving.
    """


class RestrictedOperator:
    """Matrix action of I - A_hat over a vertex subset, built once as CSR."""

    def __init__(self, graph: Graph, index: NonSeedIndex):
        vertices = index.local_to_global
        deg = graph.degrees[vertices].astype(np.float64)
        if vertices.size and deg.min() <= 0:
            raise ValueError("subset contains an isolated vertex (degree 0); "
                             "filter unreachable vertices first")
        self.graph = graph
        self.index = index
        self.inv_sqrt_deg = 1.0 / np.sqrt(deg)
        a_sub = graph.restricted_adjacency(vertices).astype(np.float64)
        scale = sp.diags(self.inv_sqrt_deg)
        self._matrix = (sp.identity(vertices.size, format="csr")
                        - scale @ a_sub @ scale).tocsr()

    @property
    def n(self) -> int:
        return self.index.size

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise ValueError(f"expected vector of length {self.n}, got shape {x.shape}")
        return self._matrix @ x


# Recursive residuals drift; recompute the true residual on this cadence.
_RESIDUAL_REFRESH = 50


def conjugate_gradient(op: RestrictedOperator, b: np.ndarray,
                       cfg: CgConfig | None = None) -> tuple[np.ndarray, CgStats]:
    """Solve op @ x = b to a relative 2-norm residual of cfg.rel_tol."""
    if cfg is None:
        cfg = CgConfig()
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (op.n,):
        raise ValueError(f"rhs length {b.shape} does not match operator size {op.n}")
    if not np.all(np.isfinite(b)):
        raise ValueError("rhs contains non-finite entries")

    b_norm = np.linalg.norm(b)
    if b_norm == 0.0:
        return np.zeros(op.n), CgStats(0, 0.0, True)

    if cfg.start == "zeros":
        x = np.zeros(op.n)
        r = b.copy()
    else:
        rng = np.random.default_rng(cfg.start_seed)
        x = rng.standard_normal(op.n)
        r = b - op.apply(x)

    p = r.copy()
    rr = float(r @ r)
    max_iters = cfg.resolve_max_iters(op.n)
    rel = np.sqrt(rr) / b_norm
    if rel <= cfg.rel_tol:
        return x, CgStats(0, float(rel), True)

    for k in range(1, max_iters + 1):
        hp = op.apply(p)
        php = float(p @ hp)
        # A vanishing Rayleigh quotient means p sits in a numerical nullspace
        # (unreachable vertices make the operator singular).
        if not np.isfinite(php) or php <= 1e-14 * float(p @ p):
            raise NonSpdError(
                "conjugate gradient broke down (non-positive or non-finite "
                "curvature); the operator is not SPD. Filter unreachable "
                "vertices using ReachabilityReport")
        alpha = rr / php
        x += alpha * p
        if k % _RESIDUAL_REFRESH == 0:
            r = b - op.apply(x)
            rr_new = float(r @ r)
            p = r.copy()  # restart direction along the true residual
            rr = rr_new
            rel = np.sqrt(rr) / b_norm
            if not np.isfinite(rel):
                raise NonSpdError("non-finite residual in conjugate gradient")
            if rel <= cfg.rel_tol:
                return x, CgStats(k, float(rel), True)
            continue
        r -= alpha * hp
        rr_new = float(r @ r)
        if not np.isfinite(rr_new):
            raise NonSpdError("non-finite residual in conjugate gradient")
        if np.sqrt(rr_new) / b_norm <= cfg.rel_tol:
            true_r = b - op.apply(x)
            rel = np.linalg.norm(true_r) / b_norm
            if rel <= cfg.rel_tol:
                return x, CgStats(k, float(rel), True)
            r = true_r
            rr_new = float(r @ r)
            p = r.copy()
            rr = rr_new
            continue
        beta = rr_new / rr
        p = r + beta * p
        rr = rr_new

    rel = np.linalg.norm(b - op.apply(x)) / b_norm
    return x, CgStats(max_iters, float(rel), bool(rel <= cfg.rel_tol))
