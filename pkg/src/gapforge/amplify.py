"""Gap amplification by strong graph powers.

In the strong product, distinct tuples are adjacent when every
coordinate pair is equal or adjacent in the base.  Cliques multiply
exactly: tuples built from base cliques are cliques, and projecting a
product clique to any coordinate yields a base clique, so
omega(g^t) = omega(g)^t.  A completeness/soundness pair (C, S) on the
base therefore becomes (C^t, S^t), shrinking the ratio to (S/C)^t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceededError
from .explicit import ExplicitGraph


@dataclass(frozen=True)
class ProductGraph:
    """Implicit t-fold strong power; vertices are t-tuples over the base.

    Tuple indices are big-endian: the first coordinate varies slowest,
    matching the Kronecker layout of export_power."""

    base: ExplicitGraph
    t: int

    def __post_init__(self):
        if self.t < 1:
            raise ValueError("power must be positive")

    @property
    def num_vertices(self) -> int:
        return self.base.n**self.t

    def index_of(self, tup) -> int:
        if len(tup) != self.t:
            raise ValueError(f"need a {self.t}-tuple")
        idx = 0
        for c in tup:
            if not 0 <= c < self.base.n:
                raise ValueError("coordinate out of range")
            idx = idx * self.base.n + c
        return idx

    def tuple_of(self, idx: int) -> tuple[int, ...]:
        if not 0 <= idx < self.num_vertices:
            raise ValueError("index out of range")
        out = []
        for _ in range(self.t):
            idx, c = divmod(idx, self.base.n)
            out.append(c)
        return tuple(reversed(out))

    def adjacent(self, u, w) -> bool:
        u, w = tuple(u), tuple(w)
        if len(u) != self.t or len(w) != self.t:
            raise ValueError(f"need {self.t}-tuples")
        if u == w:
            return False
        return all(a == b or self.base.adjacent(a, b) for a, b in zip(u, w))


def strong_power(g: ExplicitGraph, t: int) -> ProductGraph:
    return ProductGraph(g, t)


def export_power(p: ProductGraph, budget: int = 20_000) -> ExplicitGraph:
    """Materialize the power as an explicit graph.

    The closed adjacency (edges plus loops) turns the strong product
    into a plain Kronecker product; stripping the diagonal afterwards
    restores loop-freeness.
    """
    total = p.num_vertices
    if total > budget:
        raise BudgetExceededError(
            f"power has {total} vertices", needed=total, budget=budget
        )
    closed = p.base.to_bool_matrix().astype(np.uint8)
    np.fill_diagonal(closed, 1)
    mat = closed
    for _ in range(p.t - 1):
        mat = np.kron(mat, closed)
    out = mat.astype(bool)
    np.fill_diagonal(out, False)
    return ExplicitGraph.from_bool_matrix(out)
