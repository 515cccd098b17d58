"""Text format for genome pairs.

    # comment
    >source
    genes: A ~B C
    intergenic: 1 2 0 4
    >target
    genes: A B C
    intergenic: 2 2 2 2

``~NAME`` and ``-NAME`` are reverse genes, ``NAME`` and ``+NAME`` forward ones.
"""

from ..genome_model import ALPHA, GenomeError, NormalizedPair, RawGene, RawGenome, normalize_pair

BLOCKS = ("source", "target")


def parse_gene(token: str, line: int) -> RawGene:
    forward = True
    name = token
    if token[0] in "~-":
        forward, name = False, token[1:]
    elif token[0] == "+":
        name = token[1:]
    if not name:
        raise GenomeError(f"gene token {token!r} has no name", line=line)
    return RawGene(name, forward)


def _parse_regions(values: str, line: int) -> tuple[int, ...]:
    regions = []
    for token in values.split():
        try:
            value = int(token)
        except ValueError:
            raise GenomeError(f"intergenic size {token!r} is not an integer", line=line) from None
        if value < 0:
            raise GenomeError(f"negative intergenic size {value}", line=line)
        regions.append(value)
    return tuple(regions)


def parse_raw_pair(text: str) -> tuple[RawGenome, RawGenome]:
    blocks: dict[str, dict] = {}
    current = None
    for number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith(">"):
            name = line[1:].strip().lower()
            if name not in BLOCKS:
                raise GenomeError(f"unknown block {line!r}, expected >source or >target", line=number)
            if name in blocks:
                raise GenomeError(f"block >{name} appears twice", line=number)
            current = blocks[name] = {"line": number}
            continue
        if current is None:
            raise GenomeError("content before the first >source/>target header", line=number)
        key, sep, values = line.partition(":")
        key = key.strip().lower()
        if not sep or key not in ("genes", "intergenic"):
            raise GenomeError(f"expected 'genes:' or 'intergenic:', got {line!r}", line=number)
        if key in current:
            raise GenomeError(f"second '{key}:' line in the same block", line=number)
        if key == "genes":
            genes = tuple(parse_gene(token, number) for token in values.split())
            seen = set()
            for gene in genes:
                if gene.name in seen:
                    raise GenomeError(f"duplicate gene {gene.name!r}", line=number)
                seen.add(gene.name)
            current["genes"] = genes
        else:
            current["intergenic"] = _parse_regions(values, number)
            current["intergenic_line"] = number

    raws = []
    for name in BLOCKS:
        block = blocks.get(name)
        if block is None:
            raise GenomeError(f"missing >{name} block")
        for key in ("genes", "intergenic"):
            if key not in block:
                raise GenomeError(f">{name} block has no '{key}:' line", line=block["line"])
        genes, regions = block["genes"], block["intergenic"]
        if len(regions) != len(genes) + 1:
            raise GenomeError(
                f"{name}: {len(genes)} genes need {len(genes) + 1} intergenic sizes, got {len(regions)}",
                line=block["intergenic_line"],
            )
        raws.append(RawGenome(genes, regions))
    return raws[0], raws[1]


def parse_pair_file(text: str) -> NormalizedPair:
    source, target = parse_raw_pair(text)
    return normalize_pair(source, target)


def read_pair_file(path: str) -> NormalizedPair:
    with open(path, "r", encoding="utf-8") as f:
        return parse_pair_file(f.read())


def write_pair_file(pair: NormalizedPair) -> str:
    """Normalized pair in the file format; target genes are named ``1..m``."""
    names = []
    alpha = 0
    for gene in pair.source.genes:
        if gene == ALPHA:
            alpha += 1
            names.append(f"alpha{alpha}")
        else:
            names.append(f"{gene:+d}")
    lines = [
        ">source",
        "genes: " + " ".join(names),
        "intergenic: " + " ".join(str(r) for r in pair.source.regions),
        ">target",
        "genes: " + " ".join(f"{g:+d}" for g in pair.target.genes),
        "intergenic: " + " ".join(str(r) for r in pair.target.regions),
    ]
    return "\n".join(line.rstrip() for line in lines) + "\n"
