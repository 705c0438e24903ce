from __future__ import annotations

import numpy as np
import pytest

from gapforge.amplify import ProductGraph, export_power, strong_power
from gapforge.cliquered import VectorSumInstance, brute_force_vector_sum
from gapforge.csp import build_csp
from gapforge.encoding import EncodingScheme
from gapforge.errors import BudgetExceededError
from gapforge.explicit import ExplicitGraph
from gapforge.field import FMat, FVector
from gapforge.gapgraph import build_gap_graph
from gapforge.verify import max_clique_exact


def random_graph(rng, n: int, p: float) -> ExplicitGraph:
    m = np.triu(rng.random((n, n)) < p, 1)
    return ExplicitGraph.from_bool_matrix(m | m.T)


def complete_graph(n: int) -> ExplicitGraph:
    return ExplicitGraph.from_bool_matrix(~np.eye(n, dtype=bool))


def cycle_graph(n: int) -> ExplicitGraph:
    g = ExplicitGraph(n)
    for i in range(n):
        g.add_edge(i, (i + 1) % n)
    return g


def test_power_one_is_identity():
    g = cycle_graph(5)
    assert export_power(strong_power(g, 1)) == g


def test_k2_squared():
    p = strong_power(complete_graph(2), 2)
    assert p.num_vertices == 4
    assert max_clique_exact(export_power(p)).lower_bound == 4


def test_c5_squared():
    p = strong_power(cycle_graph(5), 2)
    g = export_power(p)
    assert g.n == 25
    assert max_clique_exact(g).lower_bound == 4


def test_k3_squared():
    g = export_power(strong_power(complete_graph(3), 2))
    assert g.n == 9
    assert max_clique_exact(g).lower_bound == 9


def test_power_requires_positive_t():
    with pytest.raises(ValueError):
        strong_power(cycle_graph(4), 0)


def test_index_tuple_roundtrip():
    p = strong_power(cycle_graph(4), 3)
    for idx in range(p.num_vertices):
        assert p.index_of(p.tuple_of(idx)) == idx


def test_adjacency_definition():
    p = strong_power(cycle_graph(4), 2)
    assert p.adjacent((0, 0), (0, 1))  # equal, adjacent
    assert p.adjacent((0, 1), (1, 2))  # adjacent, adjacent
    assert not p.adjacent((0, 0), (0, 0))
    assert not p.adjacent((0, 0), (0, 2))  # 0 and 2 nonadjacent in C4


def test_export_matches_predicate():
    rng = np.random.default_rng(31)
    base = random_graph(rng, 5, 0.5)
    p = strong_power(base, 2)
    g = export_power(p)
    count = 0
    for i in range(g.n):
        for j in range(i + 1, g.n):
            ok = p.adjacent(p.tuple_of(i), p.tuple_of(j))
            assert ok == g.adjacent(i, j)
            count += ok
    assert count == g.num_edges()


def test_omega_multiplicative_on_random_corpus():
    rng = np.random.default_rng(32)
    for trial in range(30):
        n = int(rng.integers(2, 7))
        base = random_graph(rng, n, float(rng.uniform(0.2, 0.9)))
        w = max_clique_exact(base).lower_bound
        for t in (2, 3):
            g = export_power(strong_power(base, t))
            rep = max_clique_exact(g, vertex_budget=400)
            assert rep.exact
            assert rep.lower_bound == w**t


def test_budget():
    with pytest.raises(BudgetExceededError):
        export_power(strong_power(complete_graph(20), 4), budget=100_000)


def tiny_gap(target_text: str):
    inst = VectorSumInstance([[FVector.from_text("10")]], FVector.from_text(target_text))
    scheme = EncodingScheme(1, 2, 1, (FMat.from_entries([(1, 2)]),), "explicit")
    return build_gap_graph(build_csp(inst, scheme, 1, 1, 1), 1)


def induced(g: ExplicitGraph, keep: list[int]) -> ExplicitGraph:
    m = g.to_bool_matrix()
    return ExplicitGraph.from_bool_matrix(m[np.ix_(keep, keep)])


def test_gap_composition_on_gap_graph_exports():
    """Powering a completeness/soundness pair tightens the ratio to its
    t-th power; checked on induced pieces of real gap graph exports."""
    yes = tiny_gap("10")
    sel = brute_force_vector_sum(yes.csp.inst)
    g_yes, verts = yes.export_explicit()
    planted_ids = sorted(
        verts.index(v) for v in yes.planted_clique(sel)
    )
    comp_base = induced(g_yes, planted_ids)
    assert max_clique_exact(comp_base).lower_bound == 20

    no = tiny_gap("01")
    g_no, _ = no.export_explicit()
    rng = np.random.default_rng(33)
    keep = sorted(int(i) for i in rng.choice(g_no.n, size=20, replace=False))
    sound_base = induced(g_no, keep)
    s = max_clique_exact(sound_base).lower_bound
    assert s < 20

    comp_sq = max_clique_exact(export_power(strong_power(comp_base, 2))).lower_bound
    sound_sq = max_clique_exact(export_power(strong_power(sound_base, 2))).lower_bound
    assert comp_sq == 400 and sound_sq == s * s
    from fractions import Fraction

    assert Fraction(sound_sq, comp_sq) == Fraction(s, 20) ** 2
