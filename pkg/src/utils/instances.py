import random
from dataclasses import dataclass

import yaml

from ..approx_algorithm import WeightScheme
from ..genome_model import (
    Genome,
    NormalizedPair,
    RawGene,
    RawGenome,
    Reversal,
    Transposition,
    apply_reversal,
    apply_transposition,
    normalize_pair,
)


@dataclass(frozen=True)
class InstanceSpec:
    m: int
    k: int
    max_region: int
    exclusive_counts: tuple[int, int] = (0, 0)  # (source-exclusive, target-exclusive)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "exclusive_counts", tuple(self.exclusive_counts))
        if self.m < 1:
            raise ValueError(f"instance needs m >= 1, got {self.m}")
        if min(self.k, self.max_region, *self.exclusive_counts) < 0:
            raise ValueError("instance counts must be non-negative")

    @property
    def instance_id(self) -> str:
        s, t = self.exclusive_counts
        return f"m{self.m}-k{self.k}-r{self.max_region}-x{s}.{t}-s{self.seed}"


def _scramble_step(rng: random.Random, g: Genome, kind: str, max_region: int) -> Genome:
    n, R = g.n, g.regions
    if kind == "transposition" and n >= 2:
        i, j, k = sorted(rng.sample(range(1, n + 2), 3))
        return apply_transposition(g, Transposition(
            i, j, k, rng.randint(0, R[i - 1]), rng.randint(0, R[j - 1]), rng.randint(0, R[k - 1])
        ))
    if kind == "indel":
        r = rng.randrange(n + 1)
        regions = list(R)
        if regions[r] > 0 and rng.random() < 0.5:
            regions[r] -= rng.randint(1, regions[r])
        else:
            regions[r] += rng.randint(1, max(1, max_region))
        return Genome(g.genes, tuple(regions))
    i = rng.randint(1, n)
    j = rng.randint(i, n)
    return apply_reversal(g, Reversal(i, j, rng.randint(0, R[i - 1]), rng.randint(0, R[j])))


def _operation_kinds(weights: WeightScheme | None) -> tuple[list[str], list[float]]:
    kinds = ["reversal", "transposition", "indel"]
    if weights is None:
        return kinds, [1.0, 1.0, 1.0]
    return kinds, [float(1 / w) for w in (weights.w_rev, weights.w_trans, weights.w_indel)]


def generate_instance(spec: InstanceSpec, weights: WeightScheme | None = None) -> NormalizedPair:
    """Random pair: identity target, source scrambled by ``spec.k`` operations.

    Operation types are drawn with probability proportional to ``1 / W(op)``
    under ``weights`` (uniformly when no scheme is given). Target-exclusive
    genes are then removed from the source and source-exclusive genes are
    inserted at random positions.
    """
    rng = random.Random(spec.seed)
    target_regions = tuple(rng.randint(0, spec.max_region) for _ in range(spec.m + 1))
    g = Genome(tuple(range(1, spec.m + 1)), target_regions)

    kinds, probabilities = _operation_kinds(weights)
    for _ in range(spec.k):
        g = _scramble_step(rng, g, rng.choices(kinds, probabilities)[0], spec.max_region)

    source_only, target_only = spec.exclusive_counts
    genes, regions = list(g.genes), list(g.regions)
    for _ in range(min(target_only, len(genes))):
        idx = rng.randrange(len(genes))
        genes.pop(idx)
        regions[idx] += regions.pop(idx + 1)

    names = [RawGene(f"g{abs(gene)}", gene > 0) for gene in genes]
    for number in range(1, source_only + 1):
        idx = rng.randint(0, len(names))
        size = regions[idx]
        split = rng.randint(0, size)
        names.insert(idx, RawGene(f"x{number}", True))
        regions[idx:idx + 1] = [split, size - split + rng.randint(0, spec.max_region)]

    source = RawGenome(tuple(names), tuple(regions))
    target = RawGenome(tuple(RawGene(f"g{x}") for x in range(1, spec.m + 1)), target_regions)
    return normalize_pair(source, target)


def load_instance_specs(path: str) -> list[InstanceSpec]:
    """Instance specs from a bench YAML file.

    Each entry under ``instances`` takes ``m``, ``k``, ``max_region``, an
    optional ``exclusive`` pair, a ``seed`` and an optional ``count`` of
    consecutive seeds.
    """
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    specs = []
    for number, entry in enumerate(data.get("instances") or [], start=1):
        try:
            count = int(entry.get("count", 1))
            seed = int(entry.get("seed", 0))
            for offset in range(count):
                specs.append(InstanceSpec(
                    m=int(entry["m"]),
                    k=int(entry.get("k", 0)),
                    max_region=int(entry.get("max_region", 0)),
                    exclusive_counts=tuple(int(v) for v in entry.get("exclusive", (0, 0))),
                    seed=seed + offset,
                ))
        except (KeyError, TypeError, ValueError) as e:
            raise ValueError(f"{path}: instance entry {number} is invalid: {e}") from e
    return specs
