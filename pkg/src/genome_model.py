"""Genomes with intergenic regions and the four rearrangement operations.

Genomes are caps-free: genes are 1-indexed ``1..n`` and regions ``1..n+1``,
where region ``i`` precedes gene ``i`` and region ``n+1`` trails the last gene.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

logger = logging.getLogger("genome_model")

# Placeholder for source-exclusive genes. Stored as 0 so that its sign is
# meaningless (-0 == 0).
ALPHA = 0


class GenomeError(ValueError):
    """Malformed genome or genome pair."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InvalidOperationError(ValueError):
    """An operation does not fit the genome it is applied to."""

    def __init__(self, message: str, index: int | None = None):
        if index is not None:
            message = f"operation {index}: {message}"
        super().__init__(message)
        self.index = index


def _check_regions(regions: Sequence[int], gene_count: int, what: str) -> None:
    if len(regions) != gene_count + 1:
        raise GenomeError(
            f"{what}: expected {gene_count + 1} intergenic regions for {gene_count} genes, got {len(regions)}"
        )
    for value in regions:
        if value < 0:
            raise GenomeError(f"{what}: negative intergenic region {value}")


@dataclass(frozen=True)
class Genome:
    genes: tuple[int, ...]
    regions: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "genes", tuple(self.genes))
        object.__setattr__(self, "regions", tuple(self.regions))
        _check_regions(self.regions, len(self.genes), "genome")

    @property
    def n(self) -> int:
        return len(self.genes)

    @property
    def total_nucleotides(self) -> int:
        return sum(self.regions)

    def gene_ids(self) -> set[int]:
        """Unsigned identifiers of the non-ALPHA genes."""
        return {abs(g) for g in self.genes if g != ALPHA}

    def describe(self) -> str:
        genes = " ".join("alpha" if g == ALPHA else f"{g:+d}" for g in self.genes)
        regions = " ".join(str(r) for r in self.regions)
        return f"({genes}) / ({regions})"


class RawGene(NamedTuple):
    name: str
    forward: bool = True


@dataclass(frozen=True)
class RawGenome:
    """A genome as read from input, before relabeling."""

    genes: tuple[RawGene, ...]
    regions: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "genes", tuple(RawGene(*g) for g in self.genes))
        object.__setattr__(self, "regions", tuple(self.regions))


@dataclass(frozen=True)
class NormalizedPair:
    source: Genome
    target: Genome
    name_map: Mapping[str, int] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        m = self.target.n
        if self.target.genes != tuple(range(1, m + 1)):
            raise GenomeError("target must be the identity +1..+m")
        seen = set()
        previous_alpha = False
        for g in self.source.genes:
            if g == ALPHA:
                if previous_alpha:
                    raise GenomeError("source has two adjacent ALPHA genes")
                previous_alpha = True
                continue
            previous_alpha = False
            if not 1 <= abs(g) <= m:
                raise GenomeError(f"source gene {g} is not a target gene")
            if abs(g) in seen:
                raise GenomeError(f"source gene {abs(g)} appears twice")
            seen.add(abs(g))

    @property
    def m(self) -> int:
        return self.target.n

    def missing_genes(self) -> list[int]:
        """Target genes absent from the source, in target order."""
        present = self.source.gene_ids()
        return [x for x in self.target.genes if x not in present]


# --- Operations ---

@dataclass(frozen=True)
class Reversal:
    i: int
    j: int
    x: int
    y: int
    kind = "reversal"

    def describe(self) -> str:
        return f"rev(i={self.i}, j={self.j}; x={self.x}, y={self.y})"


@dataclass(frozen=True)
class Transposition:
    i: int
    j: int
    k: int
    x: int
    y: int
    z: int
    kind = "transposition"

    def describe(self) -> str:
        return f"transp(i={self.i}, j={self.j}, k={self.k}; x={self.x}, y={self.y}, z={self.z})"


@dataclass(frozen=True)
class Insertion:
    i: int
    genes: tuple[int, ...]
    regions: tuple[int, ...]
    x: int
    kind = "insertion"

    def __post_init__(self):
        object.__setattr__(self, "genes", tuple(self.genes))
        object.__setattr__(self, "regions", tuple(self.regions))

    def describe(self) -> str:
        genes = " ".join(f"{g:+d}" for g in self.genes)
        regions = " ".join(str(r) for r in self.regions)
        return f"ins(i={self.i}; genes=({genes}), regions=({regions}), x={self.x})"


@dataclass(frozen=True)
class Deletion:
    i: int
    j: int
    x: int
    y: int
    kind = "deletion"

    def describe(self) -> str:
        return f"del(i={self.i}, j={self.j}; x={self.x}, y={self.y})"


@dataclass(frozen=True)
class VirtualInsertion:
    """Nucleotides added to the clean target edge leaving target gene ``gene``."""

    gene: int
    amount: int
    kind = "virtual"

    def describe(self) -> str:
        return f"virtual(t_{self.gene}, +{self.amount})"


RearrangementOp = Union[Reversal, Transposition, Insertion, Deletion, VirtualInsertion]
OperationSequence = list[RearrangementOp]

INDEL_KINDS = ("insertion", "deletion", "virtual")


def _region(g: Genome, r: int, name: str, value: int) -> int:
    size = g.regions[r - 1]
    if not 0 <= value <= size:
        raise InvalidOperationError(f"split {name}={value} outside region {r} of size {size}")
    return size


def apply_reversal(g: Genome, op: Reversal) -> Genome:
    i, j = op.i, op.j
    if not 1 <= i <= j <= g.n:
        raise InvalidOperationError(f"reversal indices ({i}, {j}) out of range for {g.n} genes")
    first = _region(g, i, "x", op.x)
    last = _region(g, j + 1, "y", op.y)
    genes = g.genes[: i - 1] + tuple(-s for s in reversed(g.genes[i - 1 : j])) + g.genes[j:]
    interior = tuple(reversed(g.regions[i:j]))
    regions = (
        g.regions[: i - 1]
        + (op.x + op.y,)
        + interior
        + ((first - op.x) + (last - op.y),)
        + g.regions[j + 1 :]
    )
    return Genome(genes, regions)


def apply_transposition(g: Genome, op: Transposition) -> Genome:
    i, j, k = op.i, op.j, op.k
    if not 1 <= i < j < k <= g.n + 1:
        raise InvalidOperationError(f"transposition indices ({i}, {j}, {k}) out of range for {g.n} genes")
    ri = _region(g, i, "x", op.x)
    rj = _region(g, j, "y", op.y)
    rk = _region(g, k, "z", op.z)
    block_a = g.genes[i - 1 : j - 1]
    block_b = g.genes[j - 1 : k - 1]
    genes = g.genes[: i - 1] + block_b + block_a + g.genes[k - 1 :]
    regions = (
        g.regions[: i - 1]
        + (op.x + (rj - op.y),)
        + g.regions[j : k - 1]
        + (op.z + (ri - op.x),)
        + g.regions[i : j - 1]
        + (op.y + (rk - op.z),)
        + g.regions[k:]
    )
    return Genome(genes, regions)


def apply_insertion(g: Genome, op: Insertion) -> Genome:
    i = op.i
    if not 1 <= i <= g.n + 1:
        raise InvalidOperationError(f"insertion position {i} out of range for {g.n} genes")
    if len(op.regions) != len(op.genes) + 1:
        raise InvalidOperationError("inserted regions must number one more than inserted genes")
    if any(r < 0 for r in op.regions):
        raise InvalidOperationError("inserted regions must be non-negative")
    size = _region(g, i, "x", op.x)
    present = g.gene_ids()
    inserted = set()
    for gene in op.genes:
        if gene == ALPHA:
            raise InvalidOperationError("ALPHA cannot be inserted")
        if abs(gene) in present or abs(gene) in inserted:
            raise InvalidOperationError(f"gene {abs(gene)} is already present")
        inserted.add(abs(gene))
    if not op.genes:
        new_regions = (op.x + op.regions[0] + (size - op.x),)
    else:
        new_regions = (
            (op.x + op.regions[0],)
            + op.regions[1:-1]
            + (op.regions[-1] + (size - op.x),)
        )
    genes = g.genes[: i - 1] + op.genes + g.genes[i - 1 :]
    regions = g.regions[: i - 1] + new_regions + g.regions[i:]
    return Genome(genes, regions)


def deleted_amount(g: Genome, op: Deletion) -> int:
    """Nucleotides removed by a valid deletion."""
    if op.i == op.j:
        return op.y - op.x
    return (g.regions[op.i - 1] - op.x) + sum(g.regions[op.i : op.j - 1]) + op.y


def apply_deletion(g: Genome, op: Deletion) -> Genome:
    i, j = op.i, op.j
    if not 1 <= i <= j <= g.n + 1:
        raise InvalidOperationError(f"deletion indices ({i}, {j}) out of range for {g.n} genes")
    _region(g, i, "x", op.x)
    last = _region(g, j, "y", op.y)
    if i == j and op.x > op.y:
        raise InvalidOperationError(f"nucleotide deletion needs x <= y, got x={op.x}, y={op.y}")
    for gene in g.genes[i - 1 : j - 1]:
        if gene != ALPHA:
            raise InvalidOperationError(f"gene {gene} is not source-exclusive and cannot be deleted")
    genes = g.genes[: i - 1] + g.genes[j - 1 :]
    regions = g.regions[: i - 1] + (op.x + (last - op.y),) + g.regions[j:]
    return Genome(genes, regions)


_APPLY = {
    "reversal": apply_reversal,
    "transposition": apply_transposition,
    "insertion": apply_insertion,
    "deletion": apply_deletion,
}


def apply_operation(g: Genome, op: RearrangementOp) -> Genome:
    apply = _APPLY.get(op.kind)
    if apply is None:
        raise InvalidOperationError(f"{op.describe()} only exists in the breakpoint graph")
    return apply(g, op)


def apply_sequence(g: Genome, ops: Iterable[RearrangementOp]) -> Genome:
    for index, op in enumerate(ops):
        try:
            g = apply_operation(g, op)
        except InvalidOperationError as e:
            raise InvalidOperationError(str(e), index=index) from e
    return g


# --- Normalization ---

def _merge_runs(genes: list, regions: list[int], exclusive) -> tuple[list, list[int]]:
    """Collapse runs of exclusive genes into their first member.

    Interior regions of a run are added to the region that follows the run.
    """
    out_genes, out_regions = [], [regions[0]]
    for idx, gene in enumerate(genes):
        if out_genes and exclusive(gene) and exclusive(out_genes[-1]):
            out_regions.append(regions[idx + 1] + out_regions.pop())
            continue
        out_genes.append(gene)
        out_regions.append(regions[idx + 1])
    return out_genes, out_regions


def _check_unique(raw: RawGenome, what: str) -> None:
    seen = set()
    for gene in raw.genes:
        if gene.name in seen:
            raise GenomeError(f"{what}: duplicate gene {gene.name!r}")
        seen.add(gene.name)


def normalize_pair(source_raw: RawGenome, target_raw: RawGenome) -> NormalizedPair:
    """Relabel a raw pair so the target becomes the identity.

    Target genes are numbered 1..m in target order, runs of target-exclusive
    genes are merged first. Shared source genes take the number (and relative
    orientation) of their target counterpart; source-exclusive genes become
    ALPHA, and adjacent ALPHA genes are merged.
    """
    _check_regions(source_raw.regions, len(source_raw.genes), "source")
    _check_regions(target_raw.regions, len(target_raw.genes), "target")
    _check_unique(source_raw, "source")
    _check_unique(target_raw, "target")

    source_names = {g.name for g in source_raw.genes}
    target_names = {g.name for g in target_raw.genes}

    target_genes, target_regions = _merge_runs(
        list(target_raw.genes), list(target_raw.regions), lambda g: g.name not in source_names
    )
    name_map: dict[str, int] = {}
    orientation: dict[str, bool] = {}
    for number, gene in enumerate(target_genes, start=1):
        name_map[gene.name] = number
        orientation[gene.name] = gene.forward
    # merged target-exclusive names share their representative's number
    current = 0
    for gene in target_raw.genes:
        if gene.name in name_map:
            current = name_map[gene.name]
        else:
            name_map[gene.name] = current

    labelled = []
    for gene in source_raw.genes:
        if gene.name in target_names:
            sign = 1 if gene.forward == orientation[gene.name] else -1
            labelled.append(sign * name_map[gene.name])
        else:
            name_map[gene.name] = ALPHA
            labelled.append(ALPHA)
    source_genes, source_regions = _merge_runs(labelled, list(source_raw.regions), lambda g: g == ALPHA)

    pair = NormalizedPair(
        source=Genome(tuple(source_genes), tuple(source_regions)),
        target=Genome(tuple(range(1, len(target_genes) + 1)), tuple(target_regions)),
        name_map=name_map,
    )
    logger.debug("normalized pair: source %s, target %s", pair.source.describe(), pair.target.describe())
    return pair
