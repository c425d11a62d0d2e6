"""Marker-retention policies.

A retention policy decides, deterministically, which generation indices
(ranks) an annotation keeps once its lineage has lived longer than the
annotation has marker slots.  Every policy here guarantees the monotone-drop
property the trie builders depend on: a rank absent at generation ``g`` is
absent at every later generation too.  Both bounded policies achieve this by
thinning old ranks to multiples of a power of two; nested multiples can only
lose members as the exponent grows.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import RetentionViolation

POLICY_KINDS = ("steady", "tilted", "full")


@dataclass(frozen=True)
class RetentionPolicy:
    """A named retention rule plus its slot capacity.

    ``capacity`` is the number of marker slots available (the annotation
    "surface size"); it is ignored by the ``full`` kind, which never drops.
    """

    kind: str
    capacity: int = 64

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.capacity < 2:
            raise ValueError("capacity must be >= 2")


def _steady(capacity: int, g: int) -> tuple[int, ...]:
    if g + 1 <= capacity:
        return tuple(range(g + 1))
    # Smallest spacing 2**k such that the multiples plus rank g fit.
    k = 0
    while (g >> k) + 2 > capacity:
        k += 1
    step = 1 << k
    ranks = list(range(0, g + 1, step))
    if ranks[-1] != g:
        ranks.append(g)
    return tuple(ranks)


def _tilted(capacity: int, g: int) -> tuple[int, ...]:
    if g + 1 <= capacity:
        return tuple(range(g + 1))
    # Half the slots hold the most recent ranks verbatim; the rest thin the
    # older range to multiples of 2**k, exactly as in the steady rule.
    m = capacity // 2
    budget = capacity - m
    old_end = g - m  # inclusive end of the thinned range
    k = 0
    while (old_end >> k) + 1 > budget:
        k += 1
    step = 1 << k
    ranks = list(range(0, old_end + 1, step))
    ranks.extend(range(g - m + 1, g + 1))
    return tuple(ranks)


@lru_cache(maxsize=None)
def _retained(kind: str, capacity: int, g: int) -> tuple[int, ...]:
    if kind == "full":
        return tuple(range(g + 1))
    if kind == "steady":
        return _steady(capacity, g)
    return _tilted(capacity, g)


def retained_ranks(policy: RetentionPolicy, g: int) -> tuple[int, ...]:
    """The ascending ranks an annotation retains at generation ``g``."""
    if g < 0:
        raise ValueError("generation must be >= 0")
    return _retained(policy.kind, policy.capacity, g)


@lru_cache(maxsize=None)
def retained_rank_set(policy: RetentionPolicy, g: int) -> frozenset[int]:
    """Set view of :func:`retained_ranks`, cached for membership tests."""
    return frozenset(retained_ranks(policy, g))


@lru_cache(maxsize=None)
def inheritance_keep_indices(policy: RetentionPolicy, g_child: int) -> tuple[int, ...]:
    """Positions of the parent's marker list a child born at ``g_child`` keeps.

    The parent is at generation ``g_child - 1``; the child keeps exactly the
    parent markers whose ranks survive at ``g_child`` and then appends its own
    fresh marker at rank ``g_child``.
    """
    if g_child < 1:
        raise ValueError("child generation must be >= 1")
    parent = retained_ranks(policy, g_child - 1)
    child_keeps = retained_rank_set(policy, g_child)
    indices = tuple(i for i, r in enumerate(parent) if r in child_keeps)
    # Sanity: the child set minus its fresh rank must be coverable by the
    # parent, otherwise the policy broke monotone drop.
    if len(indices) != len(retained_ranks(policy, g_child)) - 1:
        raise RetentionViolation(g_child - 1, g_child, -1)
    return indices


def check_monotone_drop(policy: RetentionPolicy, g_max: int) -> None:
    """Verify no rank ever reappears after being dropped, up to ``g_max``.

    Equivalent to checking every ordered generation pair ``g < g'``: a rank
    first dropped at ``g`` must stay absent at all later generations.  Raises
    :class:`RetentionViolation` with the offending ``(g, g', r)`` triple.

    ``policy`` may also be a bare callable ``g -> iterable of ranks`` so that
    candidate rules can be vetted before being wired in as a policy kind.
    """
    if g_max < 0:
        raise ValueError("g_max must be >= 0")
    if isinstance(policy, RetentionPolicy):
        ranks_of = lambda g: retained_rank_set(policy, g)  # noqa: E731
    else:
        ranks_of = lambda g: frozenset(policy(g))  # noqa: E731
    first_dropped: dict[int, int] = {}
    for g_later in range(g_max + 1):
        retained = ranks_of(g_later)
        for rank in retained:
            if rank in first_dropped:
                raise RetentionViolation(first_dropped[rank], g_later, rank)
        for rank in range(g_later + 1):
            if rank not in retained and rank not in first_dropped:
                first_dropped[rank] = g_later
