"""Combinatorics of 0/1 vectors: splittings, richness, refinement and the
section map used to collapse tuples of group elements.

Bit vectors are plain tuples of ints. Splittings store their elements in
descending lexicographic order so that equality is structural.
Indices in messages and in :func:`section_map` output are 1-based.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Hashable, Iterable, Iterator, Sequence

from .errors import InputError

BitVector = tuple[int, ...]

MAX_EXHAUSTIVE_N = 16


def bitvector(bits: Iterable[int] | str) -> BitVector:
    """Coerce ``"1100"`` or ``[1, 1, 0, 0]`` to a bit tuple, validating entries."""
    if isinstance(bits, str):
        bits = [int(c) if c in "01" else -1 for c in bits.strip()]
    out = tuple(int(b) for b in bits)
    if any(b not in (0, 1) for b in out):
        raise InputError(f"bit vector entries must be 0 or 1, got {out}")
    return out


def format_bits(v: BitVector) -> str:
    return "".join(str(b) for b in v)


def _common_length(vectors: Sequence[BitVector], n: int | None = None) -> int:
    lengths = {len(v) for v in vectors}
    if n is not None:
        lengths.add(n)
    if len(lengths) > 1:
        raise InputError(f"bit vectors have mixed lengths {sorted(lengths)}")
    if not lengths:
        raise InputError("cannot infer the length of an empty vector set")
    return lengths.pop()


def _canonical(vectors: Iterable[BitVector]) -> tuple[BitVector, ...]:
    return tuple(sorted(set(vectors), reverse=True))


def is_splitting(vectors: Iterable[Iterable[int]], n: int) -> bool:
    """True iff the vectors sum to the all-ones vector and none is zero."""
    vs = [bitvector(v) for v in vectors]
    if not vs:
        return False
    _common_length(vs, n)
    if len(set(vs)) != len(vs):
        return False
    if any(sum(v) == 0 for v in vs):
        return False
    return all(sum(col) == 1 for col in zip(*vs))


@dataclass(frozen=True)
class Splitting:
    """A partition of the slots ``1..n`` encoded as 0/1 indicator vectors."""

    elements: tuple[BitVector, ...]

    def __post_init__(self):
        raw = [bitvector(v) for v in self.elements]
        canon = _canonical(raw)
        if len(canon) != len(raw):
            raise InputError("splitting elements must be pairwise distinct")
        if not canon:
            raise InputError("a splitting needs at least one element")
        n = _common_length(canon)
        if not is_splitting(canon, n):
            raise InputError(
                "not a splitting: "
                + ",".join(format_bits(v) for v in canon)
                + " (columns must sum to 1, no zero vector)"
            )
        object.__setattr__(self, "elements", canon)

    @classmethod
    def of(cls, *vectors: Iterable[int] | str) -> "Splitting":
        return cls(tuple(bitvector(v) for v in vectors))

    @property
    def n(self) -> int:
        return len(self.elements[0])

    def __iter__(self) -> Iterator[BitVector]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, v) -> bool:
        return tuple(v) in self.elements

    def blocks(self) -> list[tuple[int, ...]]:
        """Slot blocks as sorted 0-based index tuples, ordered by smallest slot."""
        bl = [tuple(i for i, b in enumerate(v) if b) for v in self.elements]
        return sorted(bl)

    def block_of(self, slot: int) -> BitVector:
        """Element containing the 1-based ``slot``."""
        for v in self.elements:
            if v[slot - 1]:
                return v
        raise InputError(f"slot {slot} out of range 1..{self.n}")

    def __str__(self) -> str:
        return "{" + ",".join(format_bits(v) for v in self.elements) + "}"


def is_rich(vectors: Sequence[Iterable[int]], n: int) -> bool:
    """Richness: every pair of slots is separated and every slot is covered."""
    return rich_violation(vectors, n) is None


def rich_violation(vectors: Sequence[Iterable[int]], n: int) -> tuple[str, tuple[int, ...]] | None:
    """First failure of the richness conditions, or ``None`` if rich.

    Returns ``("unseparated", (i, j))`` or ``("uncovered", (i,))`` with 1-based
    slot numbers.
    """
    vs = [bitvector(v) for v in vectors]
    if vs:
        _common_length(vs, n)
    for i, j in itertools.combinations(range(n), 2):
        if not any(v[i] != v[j] for v in vs):
            return "unseparated", (i + 1, j + 1)
    for i in range(n):
        if not any(v[i] for v in vs):
            return "uncovered", (i + 1,)
    return None


def _as_sum(target: BitVector, parts: Sequence[BitVector]) -> bool:
    # In a splitting the parts are disjoint, so target is a sum of parts iff
    # every part is inside or outside target.
    covered = [0] * len(target)
    for p in parts:
        inside = all(t >= b for t, b in zip(target, p))
        if inside:
            covered = [c + b for c, b in zip(covered, p)]
    return tuple(covered) == target


def refines(V: Splitting, Vp: Splitting) -> bool:
    """True iff ``Vp >= V``: each element of ``V`` is a sum of elements of ``Vp``."""
    if V.n != Vp.n:
        raise InputError(f"splittings have different lengths {V.n} and {Vp.n}")
    return all(_as_sum(v, Vp.elements) for v in V.elements)


def section_map(V: Splitting) -> tuple[int, ...]:
    """``s(i)`` = smallest slot sharing an element of ``V`` with slot ``i`` (1-based)."""
    s = [0] * V.n
    for v in V.elements:
        ones = [i for i, b in enumerate(v) if b]
        for i in ones:
            s[i] = ones[0] + 1
    return tuple(s)


def project_tuple(V: Splitting, g: Sequence) -> tuple:
    """Replace entry ``i`` by entry ``s(i)``; the tuple analogue of collapsing
    all group variables of a block onto its first slot."""
    if len(g) != V.n:
        raise InputError(f"tuple has length {len(g)}, splitting has n={V.n}")
    return tuple(g[k - 1] for k in section_map(V))


def splitting_of_tuple(s: Sequence[Hashable]) -> Splitting:
    """Partition slots by equality of entries: ``v_i = 1 = v_j`` iff ``s_i == s_j``."""
    if len(s) == 0:
        raise InputError("need a tuple of length >= 1")
    classes: dict[Hashable, list[int]] = {}
    for i, x in enumerate(s):
        classes.setdefault(x, []).append(i)
    n = len(s)
    return Splitting(tuple(tuple(int(i in idx) for i in range(n)) for idx in classes.values()))


def max_splitting(n: int) -> Splitting:
    """The finest splitting: the ``n`` unit vectors."""
    if n < 1:
        raise InputError(f"n must be positive, got {n}")
    return Splitting(tuple(tuple(int(i == k) for i in range(n)) for k in range(n)))


def from_blocks(blocks: Iterable[Iterable[int]], n: int) -> Splitting:
    """Build a splitting from 0-based slot blocks."""
    return Splitting(tuple(tuple(int(i in set(b)) for i in range(n)) for b in blocks))


def set_partitions(n: int) -> Iterator[Splitting]:
    """All splittings of length ``n`` (restricted-growth strings)."""
    if not 1 <= n <= MAX_EXHAUSTIVE_N:
        raise InputError(f"exhaustive enumeration supports 1 <= n <= {MAX_EXHAUSTIVE_N}")

    def rgs(prefix: list[int], m: int):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for c in range(m + 2):
            yield from rgs(prefix + [c], max(m, c))

    for labels in rgs([0], 0):
        yield splitting_of_tuple(labels)


def random_splitting(n: int, rng: random.Random) -> Splitting:
    """Uniform-ish random splitting: each slot picks a label in ``0..n-1``."""
    return splitting_of_tuple([rng.randrange(n) for _ in range(n)])


def coarsen(V: Splitting, rng: random.Random) -> Splitting:
    """Merge two random blocks of ``V`` (returns ``V`` when it has one block)."""
    blocks = [list(b) for b in V.blocks()]
    if len(blocks) < 2:
        return V
    a, b = rng.sample(range(len(blocks)), 2)
    merged = blocks[a] + blocks[b]
    rest = [bl for k, bl in enumerate(blocks) if k not in (a, b)]
    return from_blocks(rest + [merged], V.n)


def parse_splitting_blocks(text: str) -> list[list[BitVector]]:
    """Parse the splitting text format: one bitstring per line; blank lines
    separate input blocks. Lines starting with ``#`` are ignored."""
    blocks: list[list[BitVector]] = []
    current: list[BitVector] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#"):
            continue
        if not line:
            if current:
                blocks.append(current)
                current = []
            continue
        if set(line) - {"0", "1"}:
            raise InputError(f"line {lineno}: expected a bitstring, got {line!r}")
        current.append(bitvector(line))
    if current:
        blocks.append(current)
    return blocks
