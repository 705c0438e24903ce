"""End-to-end orchestration: plain graph or multicolor graph in, gap
graph artifacts out.

Stage order: color layering (plain inputs), clique-to-vector-sum
reduction, encoding scheme (seeded sample or derandomized), tuple CSP,
gap graph, then verification (completeness via the honest assignment
and planted family, soundness via exact solve or seeded search).  Every
stage draws randomness from the root seed through a documented tag, so
a bundle is a pure function of (input, config) and reruns are
byte-identical.

Default parameters follow the source construction: k' = k + k(k-1)/2,
h = k'^2, ell = 2*ceil(log2 n) + 2h, r = |F|^{k'h}.  Those defaults are
astronomically infeasible on purpose; dry_run reports the exact sizes
instead of materializing anything, and desk-scale runs override h, ell
and r downward.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from io import StringIO

from .cliquered import (
    MulticolorGraph,
    SelectionCertificate,
    VectorSumInstance,
    brute_force_vector_sum,
    reduce_clique,
    write_vsi,
)
from .csp import CSPInstance, SatReport, build_csp, evaluate, honest_assignment
from .encoding import (
    EncodingScheme,
    SchemeReport,
    check_scheme,
    derandomize_scheme,
    sample_scheme,
    write_scheme,
)
from .errors import BudgetExceededError, StageError
from .explicit import ExplicitGraph, write_dimacs
from .gapgraph import GapGraph, build_gap_graph, write_clique_set, write_sidecar
from .rng import derive_seed
from .verify import SoundnessProbe, soundness_probe


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs for one pipeline run; None means the source default."""

    k: int
    h: int | None = None
    ell: int | None = None
    replication: int | None = None
    epsilon: Fraction = Fraction(1, 20)
    seed: int = 0
    derandomize: bool = False
    dry_run: bool = False
    gadget_budget: int = 1_000_000
    scheme_budget: int = 10_000_000
    csp_var_budget: int = 1 << 14
    eval_budget: int = 50_000_000
    export_budget: int = 20_000
    planted_budget: int = 200_000
    probe_mode: str = "auto"
    probe_restarts: int = 200

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie strictly between 0 and 1")
        if self.probe_mode not in ("auto", "exact", "search", "skip"):
            raise ValueError(f"unknown probe mode {self.probe_mode!r}")


@dataclass
class PipelineBundle:
    config: PipelineConfig
    k_prime: int
    multicolor: MulticolorGraph | None
    instance: VectorSumInstance | None
    scheme: EncodingScheme | None
    scheme_report: SchemeReport | None
    csp: CSPInstance | None
    gap: GapGraph | None
    selection: SelectionCertificate | None
    completeness: SatReport | None
    planted_ok: bool | None
    explicit_graph: ExplicitGraph | None
    probe: SoundnessProbe | None
    report_text: str
    files: dict[str, str] = dc_field(default_factory=dict)


def plain_to_multicolor(g: ExplicitGraph, k: int) -> MulticolorGraph:
    """k color classes, each a full copy of the vertex set; classes are
    joined exactly along edges of g between distinct vertices, so a
    multicolor clique picks k distinct pairwise-adjacent vertices.

    Vertex u in class i gets the integer label u*k + (i-1).
    """
    if k < 1:
        raise ValueError("k must be positive")
    colors = {u * k + (i - 1): i for u in range(g.n) for i in range(1, k + 1)}
    edges = []
    for u, v in g.edges():
        for i in range(1, k + 1):
            for j in range(1, k + 1):
                if i != j:
                    edges.append((u * k + (i - 1), v * k + (j - 1)))
    return MulticolorGraph(k, colors, edges)


def default_k_prime(k: int) -> int:
    return k + k * (k - 1) // 2


def _resolved(cfg: PipelineConfig, k_prime: int, n_vectors: int, m: int):
    h = cfg.h if cfg.h is not None else k_prime * k_prime
    ell = (
        cfg.ell
        if cfg.ell is not None
        else 2 * (max(n_vectors, 2) - 1).bit_length() + 2 * h
    )
    r = cfg.replication if cfg.replication is not None else 4 ** (k_prime * h)
    return h, ell, r


def _size_lines(k_prime: int, h: int, ell: int, r: int, m: int, n_vectors: int):
    num_tuples = 4 ** (k_prime * h)
    b_groups = num_tuples**2
    b_vertices = b_groups * 4 ** (2 * ell)
    a_vertices = num_tuples * r * 4**ell
    planted = b_groups + num_tuples * r
    return [
        ("k_prime", k_prime),
        ("m", m),
        ("n_vectors", n_vectors),
        ("h", h),
        ("ell", ell),
        ("replication", r),
        ("num_tuples", num_tuples),
        ("vertices_b", b_vertices),
        ("vertices_a", a_vertices),
        ("vertices_total", b_vertices + a_vertices),
        ("planted_size", planted),
    ]


def run_pipeline(graph, cfg: PipelineConfig, out_dir: str | None = None) -> PipelineBundle:
    """Run every stage and return the bundle; write artifacts if out_dir.

    graph is a MulticolorGraph, or an ExplicitGraph layered into one
    with cfg.k classes.  Budget overruns surface as StageError carrying
    the stage name.
    """
    if isinstance(graph, MulticolorGraph):
        if graph.k != cfg.k:
            raise ValueError("multicolor input must have cfg.k color classes")
        mcg = graph
    else:
        mcg = plain_to_multicolor(graph, cfg.k)
    k_prime = default_k_prime(cfg.k)

    inst = _run_stage("reduce", lambda: _reduce(mcg, cfg))
    assert inst.num_sets == k_prime
    m = inst.dim
    n_vectors = sum(len(s) for s in inst.sets)
    h, ell, r = _resolved(cfg, k_prime, n_vectors, m)

    lines: list[tuple[str, object]] = [
        ("k", cfg.k),
        ("seed", cfg.seed),
        ("epsilon", cfg.epsilon),
        ("derandomize", int(cfg.derandomize)),
    ]

    if cfg.dry_run:
        lines += _size_lines(k_prime, h, ell, r, m, n_vectors)
        lines.append(("dry_run", 1))
        text = _render(lines)
        files = {}
        if out_dir is not None:
            files["report.txt"] = _write(out_dir, "report.txt", text)
        return PipelineBundle(
            cfg, k_prime, mcg, inst, None, None, None, None, None, None,
            None, None, None, text, files,
        )

    scheme, scheme_report = _run_stage(
        "scheme", lambda: _make_scheme(inst, cfg, h, ell)
    )
    ell = scheme.ell
    lines += _size_lines(k_prime, h, ell, r, m, n_vectors)
    lines.append(("scheme", scheme.provenance))
    if scheme_report is not None:
        lines.append(("scheme_injective", int(scheme_report.cond_injective)))
        lines.append(("scheme_separating", int(scheme_report.cond_separating)))
        lines.append(("scheme_self_correcting", int(scheme_report.cond_self_correcting)))

    csp = _run_stage("csp", lambda: _make_csp(inst, scheme, k_prime, h, ell, cfg))
    gap = build_gap_graph(csp, r)

    sel = _run_stage(
        "selection", lambda: brute_force_vector_sum(inst, budget=cfg.gadget_budget)
    )
    lines.append(("satisfiable", "yes" if sel is not None else "no"))

    completeness = None
    planted_ok = None
    planted = None
    if sel is not None:
        completeness = _run_stage(
            "completeness",
            lambda: evaluate(csp, honest_assignment(csp, sel), budget=cfg.eval_budget),
        )
        planted_ok = gap.planted_clique_ok(sel)
        lines.append(("completeness_all_satisfied", int(completeness.all_satisfied)))
        lines.append(("planted_clique_ok", int(planted_ok)))
        if gap.planted_size() <= cfg.planted_budget:
            planted = gap.planted_clique(sel)

    explicit_graph = None
    vertices = None
    if gap.num_vertices <= cfg.export_budget:
        explicit_graph, vertices = _run_stage(
            "export", lambda: gap.export_explicit(budget=cfg.export_budget)
        )
    lines.append(("graph_explicit", int(explicit_graph is not None)))

    probe = _run_stage("probe", lambda: _probe(gap, sel, cfg, explicit_graph))
    threshold = (1 - cfg.epsilon) * gap.planted_size()
    if probe is not None:
        lines.append(("soundness_verdict", probe.verdict))
        lines.append(("max_clique_lower", probe.clique.lower_bound))
        if probe.clique.upper_bound is not None:
            lines.append(("max_clique_upper", probe.clique.upper_bound))
        lines.append(("soundness_threshold", threshold))
        if sel is None:
            below = (
                probe.clique.upper_bound is not None
                and probe.clique.upper_bound < threshold
            )
            lines.append(("gap_certified", "yes" if below else "no"))
    elif sel is not None and planted_ok:
        lines.append(("soundness_verdict", "reached"))
        lines.append(("soundness_witness", "planted"))
    else:
        lines.append(("soundness_verdict", "skipped"))

    text = _render(lines)
    files = {}
    if out_dir is not None:
        files["instance.vsi"] = _write_with(out_dir, "instance.vsi", write_vsi, inst)
        files["scheme.txt"] = _write_with(out_dir, "scheme.txt", write_scheme, scheme)
        files["csp.meta"] = _write(out_dir, "csp.meta", _csp_meta(csp, r))
        if explicit_graph is not None:
            files["graph.dimacs"] = _write_with(
                out_dir, "graph.dimacs", write_dimacs, explicit_graph
            )
            buf = StringIO()
            write_sidecar(vertices, gap, buf)
            files["graph.map"] = _write(out_dir, "graph.map", buf.getvalue())
        if planted is not None:
            buf = StringIO()
            write_clique_set(planted, gap, buf)
            files["planted.clq"] = _write(out_dir, "planted.clq", buf.getvalue())
        files["report.txt"] = _write(out_dir, "report.txt", text)

    return PipelineBundle(
        cfg, k_prime, mcg, inst, scheme, scheme_report, csp, gap, sel,
        completeness, planted_ok, explicit_graph, probe, text, files,
    )


def _run_stage(name: str, thunk):
    try:
        return thunk()
    except BudgetExceededError as e:
        raise StageError(name, e) from e


def _reduce(mcg: MulticolorGraph, cfg: PipelineConfig) -> VectorSumInstance:
    inst = reduce_clique(mcg)
    if inst.dim > cfg.gadget_budget:
        raise BudgetExceededError(
            f"gadget dimension {inst.dim} over budget",
            needed=inst.dim,
            budget=cfg.gadget_budget,
        )
    return inst


def _make_scheme(inst: VectorSumInstance, cfg: PipelineConfig, h: int, ell: int):
    union = inst.union()
    if cfg.derandomize:
        if not union:
            raise ValueError("cannot derandomize with no gadget vectors")
        scheme, _stats = derandomize_scheme(union, h, inst.dim, budget=cfg.scheme_budget)
    else:
        scheme = sample_scheme(derive_seed(cfg.seed, "scheme"), h, inst.dim, ell)
    # an all-empty instance leaves nothing to test the scheme against
    report = check_scheme(scheme, union, budget=cfg.scheme_budget) if union else None
    return scheme, report


def _make_csp(inst, scheme, k_prime: int, h: int, ell: int, cfg: PipelineConfig):
    num_vars = 4 ** (k_prime * h)
    if num_vars > cfg.csp_var_budget:
        raise BudgetExceededError(
            f"{num_vars} tuple variables over budget",
            needed=num_vars,
            budget=cfg.csp_var_budget,
        )
    return build_csp(inst, scheme, k_prime, h, ell)


def _probe(gap, sel, cfg: PipelineConfig, explicit_graph) -> SoundnessProbe | None:
    mode = cfg.probe_mode
    if mode == "skip":
        return None
    if mode == "auto":
        if explicit_graph is not None and gap.num_vertices <= 1_000:
            mode = "exact"
        elif sel is not None:
            # soundness side is settled by the planted family; searching
            # for it blindly would only waste restarts
            return None
        else:
            mode = "search"
    return soundness_probe(
        gap,
        mode=mode,
        restarts=cfg.probe_restarts,
        seed=derive_seed(cfg.seed, "probe"),
        export_budget=cfg.export_budget,
    )


def _csp_meta(csp: CSPInstance, r: int) -> str:
    n = csp.num_vars
    lines = [
        ("k", csp.k),
        ("h", csp.h),
        ("ell", csp.ell),
        ("num_vars", n),
        ("num_alphas", csp.num_alphas),
        ("c1_constraints", n * n),
        ("c2_constraints", csp.k * n * csp.num_alphas),
        ("c3_constraints", n * csp.num_alphas),
        ("replication", r),
        ("set_sizes", ",".join(str(len(s)) for s in csp.inst.sets)),
    ]
    return _render(lines)


def _render(lines) -> str:
    return "".join(f"{key}={value}\n" for key, value in lines)


def _write(out_dir: str, name: str, text: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w") as fp:
        fp.write(text)
    return path


def _write_with(out_dir: str, name: str, writer, obj) -> str:
    buf = StringIO()
    writer(obj, buf)
    return _write(out_dir, name, buf.getvalue())
