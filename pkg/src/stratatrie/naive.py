"""Reference trie builder with recursive wildcard lookahead.

This is the slow baseline: every time an organism's record skips over ranks
that still exist in the trie, the inserter looks ahead through the candidate
subtrees for the longest run of matching differentiae before deciding where
to descend.  The lookahead repeats for every organism, which is what the
shortcut builder exists to avoid, so this module doubles as the correctness
oracle and the benchmark baseline.  It stays deliberately unoptimized.
"""

from __future__ import annotations

from bisect import bisect_left

from .annotations import Annotation
from .errors import OrderingError
from .trie_table import ROOT_ID, TrieTable, new_table


def differentia_at_rank(o: Annotation, rank: int) -> int | None:
    """The differentia ``o`` retains at ``rank``, or None if dropped."""
    i = bisect_left(o.ranks, rank)
    if i < len(o.ranks) and o.ranks[i] == rank:
        return o.differentiae[i]
    return None


def deepest_rank(table: TrieTable, n: int, o: Annotation, r: int) -> int:
    """Score of the lookahead through node ``n``, with fallback rank ``r``.

    Recurses through ``n``'s subtree along paths whose present differentiae
    all match ``o``, treating dropped ranks as wildcards.  A mismatch or a
    childless node reports the fallback rank handed down by its parent, so
    the overall score is the rank of the deepest matching-or-wildcard node
    that still has children.
    """
    d = differentia_at_rank(o, table.ranks[n])
    if d is not None and d != table.differentiae[n]:
        return r
    kids = table.children.get(n)
    if not kids:
        return r
    rank_n = table.ranks[n]
    return max(deepest_rank(table, c, o, rank_n) for c in kids)


def subtree_contains_match(
    table: TrieTable, n: int, o: Annotation, rank: int, differentia: int
) -> bool:
    """True if a (rank, differentia) node is reachable from ``n`` along a
    path whose present differentiae all match ``o``."""
    stack = [n]
    ranks = table.ranks
    diffs = table.differentiae
    while stack:
        v = stack.pop()
        d = differentia_at_rank(o, ranks[v])
        if d is not None and d != diffs[v]:
            continue
        if ranks[v] == rank and diffs[v] == differentia:
            return True
        if ranks[v] >= rank:
            continue
        stack.extend(table.children.get(v, ()))
    return False


def most_likely_child(
    table: TrieTable, n: int, o: Annotation, r_next: int
) -> int:
    """The child of ``n`` most likely to already hold ``o``'s lineage.

    Only children whose rank falls inside the gap before ``r_next`` are
    candidates (an exactly-matching child at ``r_next`` is handled by the
    caller's descend-or-create step).  A candidate qualifies only if the
    organism's next marker is actually reachable through it; otherwise the
    organism belongs on a fresh branch off ``n`` and descending into a
    dead-end subtree would disagree with the shortcut builder.  Qualifying
    candidates are ranked by :func:`deepest_rank`; ties go to the lowest
    node id.  Returns ``n`` itself when no candidate qualifies.
    """
    d_next = differentia_at_rank(o, r_next)
    best = n
    best_score = table.ranks[n]
    for c in sorted(table.children.get(n, ())):
        if table.ranks[c] >= r_next:
            continue
        if not subtree_contains_match(table, c, o, r_next, d_next):
            continue
        score = deepest_rank(table, c, o, table.ranks[n])
        if score > best_score:
            best = c
            best_score = score
    return best


def naive_insert(table: TrieTable, o: Annotation, label: str, metadata: dict) -> None:
    """Place one organism, creating nodes for unmatched markers.

    Requires non-decreasing generations across successive calls; sorted
    insertion is what guarantees dropped ranks never resurface.
    """
    if o.generations_elapsed < table.last_inserted_generation:
        raise OrderingError(
            f"organism at generation {o.generations_elapsed} inserted after "
            f"generation {table.last_inserted_generation}"
        )
    ranks = table.ranks
    diffs = table.differentiae
    n = ROOT_ID
    for r, d in zip(o.ranks, o.differentiae):
        # Consecutive dropped ranks need repeated wildcard steps.
        while True:
            m = most_likely_child(table, n, o, r)
            if m == n:
                break
            n = m
        match = -1
        for c in table.children.get(n, ()):
            if ranks[c] == r and diffs[c] == d and (match < 0 or c < match):
                match = c
        n = match if match >= 0 else table.create_child(n, r, d)
    table.attach_leaf(n, label, metadata)
    table.last_inserted_generation = o.generations_elapsed


def naive_build(organisms) -> TrieTable:
    """Build a trie from (annotation, label, metadata) triples.

    Organisms are stable-sorted by generations elapsed before insertion.
    """
    table = new_table()
    for o, label, metadata in sorted(
        organisms, key=lambda item: item[0].generations_elapsed
    ):
        naive_insert(table, o, label, metadata)
    return table
