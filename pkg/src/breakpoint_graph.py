"""Labeled intergenic breakpoint graph of a genome pair.

The graph is drawn on a line: ``+0``, then the two extremities of each
interior source gene (ALPHA genes removed), then ``-(m+1)``. Origin edges
join neighbours of that line, target edges join ``+x`` to ``-next(x)``.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Mapping

from .genome_model import ALPHA, Genome, InvalidOperationError, NormalizedPair

logger = logging.getLogger("breakpoint_graph")

BALANCED, POSITIVE, NEGATIVE = "balanced", "positive", "negative"
CONVERGENT, DIVERGENT = "convergent", "divergent"
ORIENTED, NON_ORIENTED = "oriented", "non-oriented"

CYCLE_COLORS = (
    "black", "red", "blue", "cyan", "green", "orange", "purple", "brown",
    "magenta", "gold", "gray", "navy", "olive", "teal", "maroon", "pink",
)


@dataclass(frozen=True)
class GraphVertex:
    gene: int
    polarity: str
    position: int

    @property
    def name(self) -> str:
        return f"{self.polarity}{self.gene}"


@dataclass(frozen=True)
class OriginEdge:
    """Edge ``o_index`` between interior genes ``index-1`` and ``index`` of pi."""

    index: int
    left: GraphVertex
    right: GraphVertex
    weight: int
    regions: tuple[int, ...]  # source region indices spanned, left to right
    alpha_genes: tuple[int, ...]  # source gene indices of the ALPHA genes inside
    kind = "origin"

    @property
    def labeled(self) -> bool:
        return bool(self.alpha_genes)

    @property
    def label(self) -> str | None:
        return "alpha" if self.alpha_genes else None


@dataclass(frozen=True)
class TargetEdge:
    """Edge ``t_gene`` from ``+gene`` to ``-next``."""

    gene: int
    next: int
    plus: GraphVertex
    minus: GraphVertex
    weight: int
    missing: tuple[int, ...]  # target genes strictly between gene and next
    virtual: int = 0
    kind = "target"

    @property
    def labeled(self) -> bool:
        return bool(self.missing)

    @property
    def label(self) -> str | None:
        return ",".join(str(x) for x in self.missing) if self.missing else None


@dataclass(frozen=True)
class CycleTraversal:
    """A cycle as walked from its rightmost vertex, before classification."""

    origin_edges: tuple[OriginEdge, ...]
    right_to_left: tuple[bool, ...]
    target_edges: tuple[TargetEdge, ...]


@dataclass(frozen=True)
class CycleRecord:
    origin_edges: tuple[OriginEdge, ...]
    target_edges: tuple[TargetEdge, ...]
    trivial: bool
    labeled: bool
    balance: str
    good: bool
    direction: str
    orientation: str | None
    origin_weight: int
    target_weight: int
    leftmost: int

    @property
    def size(self) -> int:
        return len(self.origin_edges)

    @property
    def clean(self) -> bool:
        return not self.labeled

    @property
    def bad(self) -> bool:
        return not self.good

    @property
    def imbalance(self) -> int:
        """Target weight minus origin weight."""
        return self.target_weight - self.origin_weight

    def describe(self) -> str:
        flags = [
            "trivial" if self.trivial else f"size {self.size}",
            "good" if self.good else "bad",
            "labeled" if self.labeled else "clean",
            self.balance,
            self.direction,
        ]
        if self.orientation:
            flags.append(self.orientation)
        edges = " ".join(f"o{o.index}" for o in self.origin_edges)
        return f"cycle@{self.leftmost} [{edges}] " + ", ".join(flags) + (
            f" (origin {self.origin_weight}, target {self.target_weight})"
        )


@dataclass(frozen=True)
class GraphMeasures:
    pi_len: int
    c: int
    c_g: int

    @property
    def b(self) -> int:
        return self.pi_len + 1 - self.c

    @property
    def b_g(self) -> int:
        return self.pi_len + 1 - self.c_g


@dataclass(eq=False)
class BreakpointGraph:
    source: Genome
    target: Genome
    ledger: Mapping[int, int]
    pi: tuple[int, ...]
    vertices: tuple[GraphVertex, ...]
    origin_edges: tuple[OriginEdge, ...]
    target_edges: tuple[TargetEdge, ...]
    _target_at: dict[int, TargetEdge] = field(repr=False, default_factory=dict)

    @property
    def m(self) -> int:
        return self.target.n

    @property
    def pi_len(self) -> int:
        return len(self.pi) - 2

    @cached_property
    def cycles(self) -> tuple[CycleRecord, ...]:
        return decompose_cycles(self)

    def target_edge(self, gene: int) -> TargetEdge:
        for edge in self.target_edges:
            if edge.gene == gene:
                return edge
        raise KeyError(gene)


def _extremities(gene: int) -> tuple[tuple[int, str], tuple[int, str]]:
    """Left and right vertex of an interior gene in the drawing."""
    a = abs(gene)
    if gene > 0:
        return (a, "-"), (a, "+")
    return (a, "+"), (a, "-")


def graph_of(source: Genome, target: Genome, ledger: Mapping[int, int] | None = None) -> BreakpointGraph:
    """Build the graph of ``source`` against the identity ``target``.

    ``ledger`` maps target genes ``x`` to nucleotides virtually inserted into
    the clean target edge ``t_x``.
    """
    ledger = dict(ledger or {})
    pending = dict(ledger)
    m = target.n
    interior = tuple(g for g in source.genes if g != ALPHA)
    pi = (0,) + interior + (m + 1,)

    vertices = [GraphVertex(0, "+", 0)]
    for k, gene in enumerate(interior, start=1):
        (lg, lp), (rg, rp) = _extremities(gene)
        vertices.append(GraphVertex(lg, lp, 2 * k - 1))
        vertices.append(GraphVertex(rg, rp, 2 * k))
    vertices.append(GraphVertex(m + 1, "-", 2 * len(interior) + 1))

    origin_edges = []
    regions, alphas = [1], []
    for idx, gene in enumerate(source.genes, start=1):
        if gene == ALPHA:
            alphas.append(idx)
            regions.append(idx + 1)
            continue
        index = len(origin_edges) + 1
        origin_edges.append(OriginEdge(
            index=index,
            left=vertices[2 * index - 2],
            right=vertices[2 * index - 1],
            weight=sum(source.regions[r - 1] for r in regions),
            regions=tuple(regions),
            alpha_genes=tuple(alphas),
        ))
        regions, alphas = [idx + 1], []
    index = len(origin_edges) + 1
    origin_edges.append(OriginEdge(
        index=index,
        left=vertices[2 * index - 2],
        right=vertices[2 * index - 1],
        weight=sum(source.regions[r - 1] for r in regions),
        regions=tuple(regions),
        alpha_genes=tuple(alphas),
    ))

    by_name = {(v.gene, v.polarity): v for v in vertices}
    present = sorted({0} | {abs(g) for g in interior})
    stops = present + [m + 1]
    target_edges = []
    for x, nxt in zip(stops, stops[1:]):
        missing = tuple(range(x + 1, nxt))
        virtual = pending.pop(x, 0)
        if virtual and missing:
            raise InvalidOperationError(f"virtual insertion on labeled target edge t_{x}")
        target_edges.append(TargetEdge(
            gene=x,
            next=nxt,
            plus=by_name[(x, "+")],
            minus=by_name[(nxt, "-")],
            weight=sum(target.regions[x:nxt]) + virtual,
            missing=missing,
            virtual=virtual,
        ))
    if pending:
        raise InvalidOperationError(f"virtual insertions on missing target edges: {sorted(pending)}")

    target_at = {}
    for edge in target_edges:
        target_at[edge.plus.position] = edge
        target_at[edge.minus.position] = edge

    return BreakpointGraph(
        source=source,
        target=target,
        ledger=ledger,
        pi=pi,
        vertices=tuple(vertices),
        origin_edges=tuple(origin_edges),
        target_edges=tuple(target_edges),
        _target_at=target_at,
    )


def build_graph(pair: NormalizedPair, ledger: Mapping[int, int] | None = None) -> BreakpointGraph:
    return graph_of(pair.source, pair.target, ledger)


def classify_cycle(traversal: CycleTraversal) -> CycleRecord:
    origin = traversal.origin_edges
    targets = traversal.target_edges
    origin_weight = sum(o.weight for o in origin)
    target_weight = sum(t.weight for t in targets)
    labeled = any(o.labeled for o in origin) or any(t.labeled for t in targets)
    if origin_weight == target_weight:
        balance = BALANCED
    elif origin_weight < target_weight:
        balance = POSITIVE
    else:
        balance = NEGATIVE
    trivial = len(origin) == 1
    direction = CONVERGENT if all(traversal.right_to_left) else DIVERGENT
    orientation = None
    if not trivial and direction == CONVERGENT:
        indices = [o.index for o in origin]
        decreasing = all(a > b for a, b in zip(indices, indices[1:]))
        orientation = NON_ORIENTED if decreasing else ORIENTED
    return CycleRecord(
        origin_edges=origin,
        target_edges=targets,
        trivial=trivial,
        labeled=labeled,
        balance=balance,
        good=balance == BALANCED and not labeled,
        direction=direction,
        orientation=orientation,
        origin_weight=origin_weight,
        target_weight=target_weight,
        leftmost=min(o.left.position for o in origin),
    )


def decompose_cycles(g: BreakpointGraph) -> tuple[CycleRecord, ...]:
    """Split the graph into alternating cycles, ordered by leftmost vertex."""
    visited = [False] * len(g.vertices)
    traversals = []
    for start in range(len(g.vertices) - 1, -1, -1):
        if visited[start]:
            continue
        origin, directions, targets = [], [], []
        v = start
        while True:
            u = v ^ 1  # origin partner: positions 2i-2 and 2i-1 share o_i
            visited[v] = visited[u] = True
            origin.append(g.origin_edges[min(u, v) // 2])
            directions.append(u < v)
            edge = g._target_at[u]
            targets.append(edge)
            v = edge.minus.position if edge.plus.position == u else edge.plus.position
            if v == start:
                break
        traversals.append(CycleTraversal(tuple(origin), tuple(directions), tuple(targets)))
    cycles = sorted((classify_cycle(t) for t in traversals), key=lambda c: c.leftmost)
    return tuple(cycles)


def measures(g: BreakpointGraph) -> GraphMeasures:
    cycles = g.cycles
    return GraphMeasures(
        pi_len=g.pi_len,
        c=len(cycles),
        c_g=sum(1 for c in cycles if c.good),
    )


@lru_cache(maxsize=200_000)
def _cached_measures(source: Genome, target: Genome, ledger: tuple[tuple[int, int], ...]) -> GraphMeasures:
    return measures(graph_of(source, target, dict(ledger)))


def measure_genomes(source: Genome, target: Genome, ledger: Mapping[int, int] | None = None) -> GraphMeasures:
    """Measures of a genome pair, memoized on the (immutable) inputs."""
    return _cached_measures(source, target, tuple(sorted((ledger or {}).items())))


def delta_measures(before: GraphMeasures, after: GraphMeasures) -> tuple[int, int]:
    """(delta c, delta c_g) as the decrease of b and b_g."""
    return before.b - after.b, before.b_g - after.b_g


def potential(m: GraphMeasures, p1, p2):
    return p1 * m.b_g + p2 * m.b


def _edge_label(weight: int, label: str | None) -> str:
    return f"{weight} [{label}]" if label else str(weight)


def to_dot(g: BreakpointGraph) -> str:
    """Render the standard drawing as a Graphviz document.

    Origin edges are solid, target edges dashed, one color per cycle.
    """
    lines = ["graph breakpoint {", "\trankdir=LR;", "\tnode [shape=circle];"]
    lines.append("\t{")
    lines.append("\t\trank = same;")
    for v in g.vertices:
        lines.append(f'\t\t"v{v.position}" [label="{v.name}"];')
    lines.append("\t}")
    for idx, cycle in enumerate(g.cycles):
        color = CYCLE_COLORS[idx % len(CYCLE_COLORS)]
        for o in cycle.origin_edges:
            lines.append(
                f'\t"v{o.left.position}" -- "v{o.right.position}" '
                f'[style=solid, color={color}, label="{_edge_label(o.weight, o.label)}"];'
            )
        for t in cycle.target_edges:
            a, b = sorted((t.plus.position, t.minus.position))
            lines.append(
                f'\t"v{a}" -- "v{b}" '
                f'[style=dashed, color={color}, label="{_edge_label(t.weight, t.label)}"];'
            )
    lines.append("}")
    return "\n".join(lines) + "\n"
