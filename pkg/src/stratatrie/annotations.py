"""Heritable marker records carried by organisms.

An annotation is the chronological record of (rank, differentia) markers a
lineage has deposited and still retains.  Ranks and differentiae are stored
as two parallel tuples: the ranks tuple is shared between all annotations of
the same generation under one policy, which matters when corpora run to
millions of genomes.
"""

from __future__ import annotations

from typing import NamedTuple

from .errors import CodecError
from .retention import RetentionPolicy, retained_ranks


class RankDifferentia(NamedTuple):
    """One heritable marker: deposition generation plus fingerprint value."""

    rank: int
    differentia: int


class Annotation(NamedTuple):
    """An organism's retained marker record.

    ``ranks`` is strictly ascending and always ends at
    ``generations_elapsed``; each differentia fits in
    ``differentia_bitwidth`` bits.
    """

    ranks: tuple[int, ...]
    differentiae: tuple[int, ...]
    generations_elapsed: int
    differentia_bitwidth: int

    @property
    def pairs(self) -> tuple[RankDifferentia, ...]:
        return tuple(
            RankDifferentia(r, d) for r, d in zip(self.ranks, self.differentiae)
        )


def make_annotation(
    pairs, generations_elapsed: int, differentia_bitwidth: int
) -> Annotation:
    """Build an annotation from an iterable of (rank, differentia) pairs."""
    pairs = list(pairs)
    ranks = tuple(r for r, _ in pairs)
    diffs = tuple(d for _, d in pairs)
    return Annotation(ranks, diffs, generations_elapsed, differentia_bitwidth)


def validate_annotation(a: Annotation, policy: RetentionPolicy) -> None:
    """Check annotation invariants against ``policy``; raise CodecError if bad."""
    g = a.generations_elapsed
    if g < 0:
        raise CodecError("generations_elapsed must be >= 0")
    if any(r2 <= r1 for r1, r2 in zip(a.ranks, a.ranks[1:])):
        raise CodecError("ranks must be strictly ascending")
    if not a.ranks or a.ranks[-1] != g:
        raise CodecError(f"last retained rank must equal generation {g}")
    expected = retained_ranks(policy, g)
    if a.ranks != expected:
        raise CodecError(
            f"ranks do not match {policy.kind} policy at generation {g}"
        )
    limit = 1 << a.differentia_bitwidth
    if any(d < 0 or d >= limit for d in a.differentiae):
        raise CodecError(
            f"differentia out of range for {a.differentia_bitwidth}-bit width"
        )
