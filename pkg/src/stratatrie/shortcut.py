"""Shortcut-enabled trie builder.

Sorted insertion means that once an organism's record skips a rank, every
later organism skips it too, so trie nodes at skipped ranks can never again
be exact-match targets.  When a gap is detected at a node, consolidation
detaches the whole pocket of skipped-rank nodes below it from the search
structure and wires their first at-or-beyond-gap descendants in as direct
search children.  Sibling nodes made indistinguishable by that rewiring
(same rank and differentia) are merged down to one survivor.  Trie edges are
never touched: bypassed nodes keep recording lineage structure for export.

Each node's lowest search-child rank is cached so the gap test on the insert
hot path is O(1).  The cache is a conservative lower bound (detachments can
leave it stale-low, which only costs a no-op consolidation sweep, never a
missed gap); consolidation refreshes it.
"""

from __future__ import annotations

from .annotations import Annotation
from .errors import OrderingError
from .retention import RetentionPolicy, retained_rank_set
from .trie_table import DETACHED, ROOT_ID, _NO_CHILD, TrieTable, new_table


def consolidate(table: TrieTable, n: int, r2: int) -> None:
    """Bypass all search descendants of ``n`` with rank below ``r2``.

    The frontier (first descendants at rank >= ``r2`` reached through
    bypassed nodes, plus pre-existing direct children already at or beyond
    ``r2``) becomes the new search-child set of ``n``; indistinguishable
    frontier members are merged, keeping the lowest node id and transferring
    the other members' search children to the survivor.  Re-running with the
    same arguments is a no-op.
    """
    ranks = table.ranks
    children = table.children
    search_parents = table.search_parents
    min_child_rank = table.min_child_rank

    kids = children.get(n, ())
    gap_roots = [c for c in kids if ranks[c] < r2]
    if not gap_roots:
        # Stale min-child-rank fired the gap test; refresh it and bail.
        min_child_rank[n] = min((ranks[c] for c in kids), default=_NO_CHILD)
        return

    frontier = [c for c in kids if ranks[c] >= r2]
    stack = list(reversed(gap_roots))
    while stack:
        v = stack.pop()
        search_parents[v] = DETACHED
        for c in children.pop(v, ()):
            if ranks[c] < r2:
                stack.append(c)
            else:
                frontier.append(c)

    # Group the frontier by (rank, differentia); one survivor per group.
    diffs = table.differentiae
    groups: dict[tuple[int, int], list[int]] = {}
    for c in frontier:
        groups.setdefault((ranks[c], diffs[c]), []).append(c)
    final: list[int] = []
    for group in groups.values():
        keep = min(group)
        final.append(keep)
        for dup in group:
            if dup == keep:
                continue
            for c2 in children.pop(dup, ()):
                search_parents[c2] = keep
                children.setdefault(keep, []).append(c2)
                if ranks[c2] < min_child_rank[keep]:
                    min_child_rank[keep] = ranks[c2]
            search_parents[dup] = DETACHED
        search_parents[keep] = n

    if final:
        children[n] = final
        min_child_rank[n] = min(ranks[c] for c in final)
    else:
        children.pop(n, None)
        min_child_rank[n] = _NO_CHILD


def shortcut_insert(
    table: TrieTable, o: Annotation, label: str, metadata: dict
) -> None:
    """Place one organism using search edges only, consolidating gaps.

    Descent never looks ahead: each marker either lands on an exact-match
    search child (lowest id on ties) or branches off a fresh node.
    """
    g = o.generations_elapsed
    if g < table.last_inserted_generation:
        raise OrderingError(
            f"organism at generation {g} inserted after "
            f"generation {table.last_inserted_generation}"
        )
    ranks = table.ranks
    diffs = table.differentiae
    children = table.children
    min_child_rank = table.min_child_rank
    n = ROOT_ID
    for r, d in zip(o.ranks, o.differentiae):
        if min_child_rank[n] < r:
            consolidate(table, n, r)
        match = -1
        for c in children.get(n, ()):
            if ranks[c] == r and diffs[c] == d and (match < 0 or c < match):
                match = c
        n = match if match >= 0 else table.create_child(n, r, d)
    table.attach_leaf(n, label, metadata)
    table.last_inserted_generation = g


def shortcut_build(organisms, gc_interval: int | None = None) -> TrieTable:
    """Build a trie from (annotation, label, metadata) triples.

    Organisms are stable-sorted by generations elapsed first.  When
    ``gc_interval`` is set, dropped unifurcations are purged every that many
    insertions; the default leaves garbage collection off, which is fine for
    desk-scale builds.
    """
    table = new_table()
    inserted = 0
    for o, label, metadata in sorted(
        organisms, key=lambda item: item[0].generations_elapsed
    ):
        shortcut_insert(table, o, label, metadata)
        inserted += 1
        if gc_interval and inserted % gc_interval == 0:
            purge_dropped_unifurcations(table)
    return table


def purge_dropped_unifurcations(
    table: TrieTable,
    mode: str = "conservative",
    policy: RetentionPolicy | None = None,
) -> int:
    """Excise inner nodes that can no longer affect reconstruction output.

    A node is purged when it has exactly one surviving trie child, no
    attached organism, and its marker rank is known dropped.  Conservative
    mode infers droppedness from search-structure modification (the node was
    detached by consolidation); aggressive mode additionally consults the
    retention policy at the latest inserted generation, which catches
    unifurcations no consolidation has happened to sweep past yet.  The
    purged node's child inherits its trie parent, the one sanctioned
    trie-edge mutation; pairwise ancestry among leaves is unchanged.
    Returns the number of nodes removed.
    """
    if mode not in ("conservative", "aggressive"):
        raise ValueError(f"unknown purge mode {mode!r}")
    aggressive = mode == "aggressive"
    if aggressive and policy is None:
        raise ValueError("aggressive purge requires the retention policy")

    n_rows = len(table)
    ranks = table.ranks
    trie_parents = table.trie_parents
    search_parents = table.search_parents
    purged = table.purged
    leaf_counts = table.leaf_counts
    children = table.children

    trie_child_count = [0] * n_rows
    for i in range(1, n_rows):
        if not purged[i]:
            trie_child_count[trie_parents[i]] += 1

    if aggressive and table.last_inserted_generation >= 0:
        still_live = retained_rank_set(policy, table.last_inserted_generation)
    else:
        still_live = None

    candidate = bytearray(n_rows)
    total = 0
    for i in range(1, n_rows):
        if purged[i] or trie_child_count[i] != 1 or leaf_counts.get(i):
            continue
        if search_parents[i] == DETACHED:
            candidate[i] = 1
            total += 1
        elif still_live is not None and ranks[i] not in still_live:
            candidate[i] = 1
            total += 1
    if not total:
        return 0

    # Splice surviving trie edges past purged chains.
    for i in range(1, n_rows):
        if purged[i] or candidate[i]:
            continue
        p = trie_parents[i]
        if candidate[p]:
            while candidate[p]:
                p = trie_parents[p]
            trie_parents[i] = p

    # Aggressive candidates may still sit in the search structure; splice
    # their search children up to the nearest surviving search ancestor
    # (the same rewiring consolidation would eventually perform).
    attached = [
        i for i in range(1, n_rows) if candidate[i] and search_parents[i] != DETACHED
    ]
    if attached:
        rewires = []
        for c in attached:
            for v in children.get(c, ()):
                if candidate[v]:
                    continue
                t = search_parents[v]
                while candidate[t]:
                    t = search_parents[t]
                rewires.append((v, t))
        for c in attached:
            children.pop(c, None)
        for v, t in rewires:
            search_parents[v] = t
            children.setdefault(t, []).append(v)
            if ranks[v] < table.min_child_rank[t]:
                table.min_child_rank[t] = ranks[v]
        for c in attached:
            p = search_parents[c]
            if not candidate[p]:
                children[p].remove(c)
            search_parents[c] = DETACHED

    for i in range(1, n_rows):
        if candidate[i]:
            purged[i] = 1
            children.pop(i, None)
    table.purged_count += total
    return total
