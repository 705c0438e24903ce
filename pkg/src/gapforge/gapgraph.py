"""FGLSS-style gap graph over the tuple CSP.

Vertex universe (never materialized unless exported):

  B vertices  ("B", p, q, y, z)  one group per ordered tuple pair (p, q),
              holding the additivity-satisfying triples: the values of
              x_{p+q}, x_p, x_q are (y+z, y, z), so y, z range freely
              over F^ell and the first value is forced.
  A vertices  ("A", p, i, val)   r copy groups per tuple p, one vertex
              per value val in F^ell.

Two distinct vertices are adjacent unless their assignments conflict on
a shared variable or the union violates a constraint it fully covers.
For this constraint system the fully-covered checks reduce to:

  * each vertex is internally sound (consistent on its own variables,
    assigns 0 to the zero tuple if it assigns it at all, and violates no
    binary constraint between its own variables);
  * shared variables agree;
  * every pair of distinct assigned variables passes the binary
    constraints classified by the packed tuple difference d = a XOR b:
    a single nonzero slot i with value alpha demands the value
    difference lie in {f(alpha, v) : v in V_i}; all slots equal and
    nonzero demand it equal f(alpha, target).

Additivity triples never straddle two vertices: a B vertex's variable
set {p+q, p, q} is XOR-closed, so a triple with two variables on one
side already lives entirely on that side, and the remaining degenerate
triples collapse to the zero-tuple rule.  This is what makes clique
checking linear in the set size plus quadratic in the number of
distinct variables."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

from .cliquered import SelectionCertificate, verify_selection
from .csp import CSPInstance, honest_assignment
from .errors import BudgetExceededError
from .explicit import ExplicitGraph
from .field import FVector

Vertex = tuple


@dataclass(frozen=True)
class CliqueCheck:
    ok: bool
    violating_pair: tuple[Vertex, Vertex] | None


class GapGraph:
    def __init__(self, csp: CSPInstance, r: int):
        if r < 1:
            raise ValueError("replication must be positive")
        self.csp = csp
        self.r = r
        self.num_tuples = csp.num_vars
        self.num_values = 4**csp.ell
        self._checks_cache: dict[int, tuple] = {}
        self._self_ok_cache: dict[Vertex, bool] = {}

    # -- counting ---------------------------------------------------------

    @property
    def num_b_groups(self) -> int:
        return self.num_tuples**2

    @property
    def num_a_groups(self) -> int:
        return self.num_tuples * self.r

    @property
    def b_group_size(self) -> int:
        return self.num_values**2

    @property
    def a_group_size(self) -> int:
        return self.num_values

    @property
    def num_b_vertices(self) -> int:
        return self.num_b_groups * self.b_group_size

    @property
    def num_a_vertices(self) -> int:
        return self.num_a_groups * self.a_group_size

    @property
    def num_vertices(self) -> int:
        return self.num_b_vertices + self.num_a_vertices

    def planted_size(self) -> int:
        return self.num_b_groups + self.num_a_groups

    # -- vertex handling ----------------------------------------------------

    def b_vertex(self, p: int, q: int, y: int, z: int) -> Vertex:
        self._check_tuple(p)
        self._check_tuple(q)
        self._check_value(y)
        self._check_value(z)
        return ("B", p, q, y, z)

    def a_vertex(self, p: int, i: int, val: int) -> Vertex:
        self._check_tuple(p)
        if not 1 <= i <= self.r:
            raise ValueError(f"copy index {i} outside 1..{self.r}")
        self._check_value(val)
        return ("A", p, i, val)

    def _check_tuple(self, p: int) -> None:
        if not 0 <= p < self.num_tuples:
            raise ValueError(f"packed tuple {p} out of range")

    def _check_value(self, v: int) -> None:
        if not 0 <= v < self.num_values:
            raise ValueError(f"packed value {v} out of range")

    def validate_vertex(self, v: Vertex) -> Vertex:
        if v[0] == "B" and len(v) == 5:
            return self.b_vertex(*v[1:])
        if v[0] == "A" and len(v) == 4:
            return self.a_vertex(*v[1:])
        raise ValueError(f"malformed vertex {v!r}")

    def assignments(self, v: Vertex) -> list[tuple[int, int]]:
        """(variable, value) pairs contributed by a vertex, possibly with
        repeated variables in degenerate groups."""
        if v[0] == "B":
            _, p, q, y, z = v
            return [(p ^ q, y ^ z), (p, y), (q, z)]
        _, p, _i, val = v
        return [(p, val)]

    def vertex_by_index(self, idx: int) -> Vertex:
        """Canonical enumeration: B groups (p major, then q, then (y, z)
        with y major), then A groups (p major, then copy index, then val)."""
        if not 0 <= idx < self.num_vertices:
            raise ValueError("vertex index out of range")
        if idx < self.num_b_vertices:
            group, local = divmod(idx, self.b_group_size)
            p, q = divmod(group, self.num_tuples)
            y, z = divmod(local, self.num_values)
            return ("B", p, q, y, z)
        idx -= self.num_b_vertices
        group, val = divmod(idx, self.a_group_size)
        p, i = divmod(group, self.r)
        return ("A", p, i + 1, val)

    # -- adjacency ------------------------------------------------------------

    def _checks(self, d: int) -> tuple:
        """Binary constraint checks keyed by nonzero variable difference."""
        cached = self._checks_cache.get(d)
        if cached is not None:
            return cached
        csp = self.csp
        slots = [csp.slot(d, i) for i in range(csp.k)]
        nonzero = [(i, s) for i, s in enumerate(slots) if s]
        checks = []
        if len(nonzero) == 1:
            i, a = nonzero[0]
            checks.append(("c2", i, a))
        if len(nonzero) == csp.k and len({s for _, s in nonzero}) == 1:
            checks.append(("c3", slots[0]))
        result = tuple(checks)
        self._checks_cache[d] = result
        return result

    def binary_ok(self, var_a: int, val_a: int, var_b: int, val_b: int) -> bool:
        diff_val = val_a ^ val_b
        for check in self._checks(var_a ^ var_b):
            if check[0] == "c2":
                _, i, a = check
                if diff_val not in self.csp.allowed_diffs(i, a):
                    return False
            else:
                if diff_val != self.csp.target_code(check[1]):
                    return False
        return True

    def self_ok(self, v: Vertex) -> bool:
        cached = self._self_ok_cache.get(v)
        if cached is not None:
            return cached
        merged: dict[int, int] = {}
        ok = True
        for var, val in self.assignments(v):
            if merged.setdefault(var, val) != val:
                ok = False
                break
        if ok and merged.get(0, 0) != 0:
            ok = False
        if ok:
            for a, b in itertools.combinations(sorted(merged), 2):
                if not self.binary_ok(a, merged[a], b, merged[b]):
                    ok = False
                    break
        self._self_ok_cache[v] = ok
        return ok

    def _merged(self, v: Vertex) -> dict[int, int]:
        out: dict[int, int] = {}
        for var, val in self.assignments(v):
            out[var] = val
        return out

    def adjacent(self, u: Vertex, w: Vertex) -> bool:
        if u == w:
            return False
        if not (self.self_ok(u) and self.self_ok(w)):
            return False
        mu, mw = self._merged(u), self._merged(w)
        for var, val in mw.items():
            if var in mu and mu[var] != val:
                return False
        for a in mu:
            if a in mw:
                continue
            for b in mw:
                if b in mu:
                    continue
                if not self.binary_ok(a, mu[a], b, mw[b]):
                    return False
        return True

    # -- cliques -----------------------------------------------------------

    def planted_clique(
        self, sel: SelectionCertificate, allow_unsatisfying: bool = False
    ) -> list[Vertex]:
        """One vertex per group matching the honest assignment of sel.

        Size is num_b_groups + num_a_groups; with a satisfying selection
        is_clique accepts it (with r = |F|^{kh} that is twice the number
        of B groups).
        """
        if not allow_unsatisfying and not verify_selection(self.csp.inst, sel):
            raise ValueError("selection does not satisfy the instance")
        hv = honest_assignment(self.csp, sel).values
        out: list[Vertex] = []
        for p in range(self.num_tuples):
            for q in range(self.num_tuples):
                out.append(("B", p, q, hv[p], hv[q]))
        for p in range(self.num_tuples):
            for i in range(1, self.r + 1):
                out.append(("A", p, i, hv[p]))
        return out

    def planted_clique_ok(self, sel: SelectionCertificate) -> bool:
        """Clique property of the whole planted family, without
        materializing it.

        Planted vertices all read off the honest assignment, so shared
        variables agree for free; what remains is the zero-tuple rule
        and every binary check between honest values, swept per variable
        difference.  Agrees with is_clique(planted_clique(sel)) but
        stays feasible when the family has millions of members."""
        if not verify_selection(self.csp.inst, sel):
            return False
        hv = np.array(honest_assignment(self.csp, sel).values, dtype=np.int64)
        if hv[0] != 0:
            return False
        n = self.num_tuples
        idx = np.arange(n)
        allowed = self._allowed_bool()
        target = self.csp._target_code
        for d in range(1, n):
            checks = self._checks(d)
            if not checks:
                continue
            diffs = hv ^ hv[idx ^ d]
            for check in checks:
                if check[0] == "c2":
                    if not allowed[(check[1], check[2])][diffs].all():
                        return False
                elif not (diffs == target[check[1]]).all():
                    return False
        return True

    def is_clique(self, vertices: Iterable[Vertex]) -> CliqueCheck:
        """All-pairs adjacency, decided without quadratic pair scans.

        Equivalent to checking adjacent(u, w) for every pair: per-vertex
        soundness, a single consistency pass over the union assignment,
        and binary checks over distinct assigned variable pairs.  The
        reported violating pair is the first in this scan order (vertices
        and variables scanned in sorted order)."""
        vs = sorted(set(vertices))
        for v in vs:
            self.validate_vertex(v)
        if len(vs) <= 1:
            return CliqueCheck(True, None)
        for v in vs:
            if not self.self_ok(v):
                other = next(u for u in vs if u != v)
                return CliqueCheck(False, (v, other))
        owner: dict[int, Vertex] = {}
        value: dict[int, int] = {}
        for v in vs:
            for var, val in self.assignments(v):
                if var in value:
                    if value[var] != val:
                        return CliqueCheck(False, (owner[var], v))
                else:
                    owner[var] = v
                    value[var] = val
        for a, b in itertools.combinations(sorted(value), 2):
            if not self.binary_ok(a, value[a], b, value[b]):
                return CliqueCheck(False, (owner[a], owner[b]))
        return CliqueCheck(True, None)

    # -- explicit export ------------------------------------------------------

    def _allowed_bool(self) -> dict[tuple[int, int], np.ndarray]:
        out = {}
        for i in range(self.csp.k):
            for a in range(self.csp.num_alphas):
                table = np.zeros(self.num_values, dtype=bool)
                for x in self.csp.allowed_diffs(i, a):
                    table[x] = True
                out[(i, a)] = table
        return out

    def _group_list(self) -> list[tuple]:
        groups = []
        for p in range(self.num_tuples):
            for q in range(self.num_tuples):
                groups.append(("B", p, q))
        for p in range(self.num_tuples):
            for i in range(1, self.r + 1):
                groups.append(("A", p, i))
        return groups

    def export_explicit(self, budget: int = 20_000) -> tuple[ExplicitGraph, list[Vertex]]:
        """Materialize vertices (canonical order) and the full adjacency.

        Work is grouped: every vertex group carries per-variable value
        arrays over its local vertex enumeration, group pairs get their
        adjacency block computed with vectorized masks, and each group's
        strip of rows is packed into adjacency bitsets.
        """
        n = self.num_vertices
        if n > budget:
            raise BudgetExceededError(
                f"graph has {n} vertices", needed=n, budget=budget
            )
        L = self.num_values
        yz = np.arange(L * L)
        Y, Z = yz // L, yz % L
        X = Y ^ Z
        val_arr = np.arange(L)
        allowed = self._allowed_bool()
        target = self.csp._target_code

        def group_vars(g) -> dict[int, np.ndarray]:
            # variable -> value array; merges duplicates (consistency is
            # folded into the self mask below)
            if g[0] == "B":
                _, p, q = g
                entries = [(p ^ q, X), (p, Y), (q, Z)]
            else:
                _, p, _i = g
                entries = [(p, val_arr)]
            out: dict[int, np.ndarray] = {}
            for var, arr in entries:
                out.setdefault(var, arr)
            return out

        def pair_mask(a, va, b, vb):
            # boolean mask (broadcasting over the value arrays) of the
            # binary checks between distinct variables a and b
            checks = self._checks(a ^ b)
            if not checks:
                return None
            diff = va ^ vb
            m = None
            for check in checks:
                if check[0] == "c2":
                    part = allowed[(check[1], check[2])][diff]
                else:
                    part = diff == target[check[1]]
                m = part if m is None else (m & part)
            return m

        def self_mask(g, gvars) -> np.ndarray:
            size = L * L if g[0] == "B" else L
            mask = np.ones(size, dtype=bool)
            if g[0] == "B":
                _, p, q = g
                seen: dict[int, np.ndarray] = {}
                for var, arr in [(p ^ q, X), (p, Y), (q, Z)]:
                    if var in seen:
                        mask &= seen[var] == arr
                    else:
                        seen[var] = arr
            if 0 in gvars:
                mask &= gvars[0] == 0
            for a, b in itertools.combinations(sorted(gvars), 2):
                pm = pair_mask(a, gvars[a], b, gvars[b])
                if pm is not None:
                    mask &= pm
            return mask

        groups = self._group_list()
        gvars = [group_vars(g) for g in groups]
        gself = [self_mask(g, gv) for g, gv in zip(groups, gvars)]
        sizes = [L * L if g[0] == "B" else L for g in groups]
        offsets = np.concatenate([[0], np.cumsum(sizes)]).tolist()

        vertices: list[Vertex] = [self.vertex_by_index(i) for i in range(n)]
        graph = ExplicitGraph(n)
        nbytes = (n + 7) // 8
        for gi, g1 in enumerate(groups):
            buf = np.zeros((sizes[gi], n), dtype=bool)
            v1 = gvars[gi]
            for gj, g2 in enumerate(groups):
                v2 = gvars[gj]
                block = np.ones((sizes[gi], sizes[gj]), dtype=bool)
                for var in v1:
                    if var in v2:
                        block &= v1[var][:, None] == v2[var][None, :]
                for a in v1:
                    if a in v2:
                        continue
                    for b in v2:
                        if b in v1:
                            continue
                        pm = pair_mask(a, v1[a][:, None], b, v2[b][None, :])
                        if pm is not None:
                            block &= pm
                block &= gself[gi][:, None]
                block &= gself[gj][None, :]
                if gi == gj:
                    np.fill_diagonal(block, False)
                buf[:, offsets[gj] : offsets[gj + 1]] = block
            packed = np.packbits(buf, axis=1, bitorder="little")
            for local in range(sizes[gi]):
                graph.adj[offsets[gi] + local] = int.from_bytes(
                    packed[local].tobytes()[:nbytes], "little"
                )
        return graph, vertices


def build_gap_graph(csp: CSPInstance, r: int) -> GapGraph:
    return GapGraph(csp, r)


def write_sidecar(vertices: Sequence[Vertex], g: GapGraph, fp: IO[str]) -> None:
    """Map integer DIMACS ids (1-based) to vertex descriptors."""
    kh = g.csp.k * g.csp.h
    ell = g.csp.ell
    for idx, v in enumerate(vertices, start=1):
        if v[0] == "B":
            _, p, q, y, z = v
            tup = FVector(2 * kh, p | (q << (2 * kh))).to_text()
            val = FVector(2 * ell, y | (z << (2 * ell))).to_text()
            fp.write(f"{idx} B {tup} {val}\n")
        else:
            _, p, i, x = v
            fp.write(f"{idx} A {FVector(kh, p).to_text()} {i} {FVector(ell, x).to_text()}\n")


def read_sidecar(fp: IO[str], g: GapGraph) -> list[Vertex]:
    kh = g.csp.k * g.csp.h
    ell = g.csp.ell
    out: dict[int, Vertex] = {}
    for line in fp:
        tok = line.split()
        if not tok or tok[0] == "#":
            continue
        idx = int(tok[0])
        if tok[1] == "B":
            packed = FVector.from_text(tok[2])
            vals = FVector.from_text(tok[3])
            if packed.dim != 2 * kh or vals.dim != 2 * ell:
                raise ValueError("sidecar widths disagree with graph parameters")
            p = packed.bits & (4**kh - 1)
            q = packed.bits >> (2 * kh)
            y = vals.bits & (4**ell - 1)
            z = vals.bits >> (2 * ell)
            out[idx] = g.b_vertex(p, q, y, z)
        elif tok[1] == "A":
            p = FVector.from_text(tok[2])
            i = int(tok[3])
            val = FVector.from_text(tok[4])
            if p.dim != kh or val.dim != ell:
                raise ValueError("sidecar widths disagree with graph parameters")
            out[idx] = g.a_vertex(p.bits, i, val.bits)
        else:
            raise ValueError(f"unrecognized sidecar line {line!r}")
    return [out[i] for i in range(1, len(out) + 1)]


def write_clique_set(vertices: Iterable[Vertex], g: GapGraph, fp: IO[str]) -> None:
    """Vertex descriptor lines (same shape as the sidecar, without ids)."""
    kh = g.csp.k * g.csp.h
    ell = g.csp.ell
    for v in sorted(set(vertices)):
        if v[0] == "B":
            _, p, q, y, z = v
            tup = FVector(2 * kh, p | (q << (2 * kh))).to_text()
            val = FVector(2 * ell, y | (z << (2 * ell))).to_text()
            fp.write(f"B {tup} {val}\n")
        else:
            _, p, i, x = v
            fp.write(f"A {FVector(kh, p).to_text()} {i} {FVector(ell, x).to_text()}\n")
