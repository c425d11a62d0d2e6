"""Flat node table holding the reconstruction trie.

Nodes live in parallel columns indexed by a dense id.  Every node carries two
parent links: the trie parent, fixed at creation and used for phylogeny
readout, and the search parent, used only for insert-time traversal and
rewireable by consolidation.  Bypassed nodes are detached from the search
structure (search parent set to the ``DETACHED`` sentinel) but stay in the
table so the lineage structure they record survives into the export.

A table is single-writer: all mutation happens from one execution context at
a time.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass
from typing import NamedTuple

from .errors import StructureError

ROOT_ID = 0
ROOT_RANK = -1
DETACHED = -1  # search_parent value for nodes removed from the search tree
_NO_CHILD = 1 << 62  # min-child-rank sentinel for nodes without search children


@dataclass(frozen=True)
class NodeRecord:
    """Read-only view of one table row."""

    id: int
    rank: int
    differentia: int
    trie_parent: int
    search_parent: int


class LeafAttachment(NamedTuple):
    """One organism attached to the node its insertion resolved to."""

    label: str
    node_id: int
    metadata: dict


class TrieTable:
    """Append-only trie node table with mutable search edges.

    The root sentinel occupies row 0 at rank -1 so rank monotonicity holds
    uniformly, including for generation-0 markers.
    """

    __slots__ = (
        "ranks",
        "differentiae",
        "trie_parents",
        "search_parents",
        "min_child_rank",
        "children",
        "purged",
        "leaves",
        "leaf_counts",
        "last_inserted_generation",
        "purged_count",
    )

    def __init__(self):
        self.ranks = array("q", [ROOT_RANK])
        self.differentiae = array("Q", [0])
        self.trie_parents = array("q", [ROOT_ID])
        self.search_parents = array("q", [ROOT_ID])
        self.min_child_rank = array("q", [_NO_CHILD])
        # Search adjacency, inverse of search_parents; nodes without children
        # have no entry.  Lists are kept in deterministic traversal order.
        self.children: dict[int, list[int]] = {}
        self.purged = bytearray(1)
        self.leaves: list[LeafAttachment] = []
        self.leaf_counts: dict[int, int] = {}
        self.last_inserted_generation = ROOT_RANK
        self.purged_count = 0

    def __len__(self) -> int:
        """Rows ever created, including purged ones."""
        return len(self.ranks)

    def node(self, node_id: int) -> NodeRecord:
        self._require(node_id)
        return NodeRecord(
            node_id,
            self.ranks[node_id],
            self.differentiae[node_id],
            self.trie_parents[node_id],
            self.search_parents[node_id],
        )

    def _require(self, node_id: int) -> None:
        if not 0 <= node_id < len(self.ranks):
            raise StructureError("unknown node id", node_id)
        if self.purged[node_id]:
            raise StructureError("node has been purged", node_id)

    def create_child(self, parent: int, rank: int, differentia: int) -> int:
        """Append a new node under ``parent`` on both edge kinds."""
        self._require(parent)
        if rank <= self.ranks[parent]:
            raise StructureError(
                f"child rank {rank} not above parent rank {self.ranks[parent]}",
                parent,
            )
        if differentia < 0:
            raise StructureError("differentia must be non-negative", parent)
        node_id = len(self.ranks)
        self.ranks.append(rank)
        self.differentiae.append(differentia)
        self.trie_parents.append(parent)
        self.search_parents.append(parent)
        self.min_child_rank.append(_NO_CHILD)
        self.purged.append(0)
        self.children.setdefault(parent, []).append(node_id)
        if rank < self.min_child_rank[parent]:
            self.min_child_rank[parent] = rank
        return node_id

    def search_children(self, node_id: int) -> list[int]:
        """Current search children of ``node_id`` in creation (id) order."""
        self._require(node_id)
        return sorted(self.children.get(node_id, ()))

    def attach_leaf(self, node_id: int, label: str, metadata: dict) -> None:
        self._require(node_id)
        self.leaves.append(LeafAttachment(label, node_id, metadata))
        self.leaf_counts[node_id] = self.leaf_counts.get(node_id, 0) + 1

    # -- search-edge mutation primitives used by consolidation ---------------

    def rewire_search_parent(self, node_id: int, new_parent: int) -> None:
        """Move ``node_id`` under ``new_parent`` in the search structure."""
        old = self.search_parents[node_id]
        if old == new_parent:
            return
        if old != DETACHED:
            self.children[old].remove(node_id)
        self.search_parents[node_id] = new_parent
        self.children.setdefault(new_parent, []).append(node_id)
        if self.ranks[node_id] < self.min_child_rank[new_parent]:
            self.min_child_rank[new_parent] = self.ranks[node_id]

    def detach_from_search(self, node_id: int) -> None:
        """Remove ``node_id`` from the search structure entirely."""
        old = self.search_parents[node_id]
        if old != DETACHED:
            self.children[old].remove(node_id)
            self.search_parents[node_id] = DETACHED

    # -- validation -----------------------------------------------------------

    def check(self) -> None:
        """Verify every structural invariant; raise StructureError on the
        first violation found, naming the offending node."""
        n = len(self.ranks)
        if n == 0 or self.ranks[0] != ROOT_RANK:
            raise StructureError("missing root sentinel", 0)
        if self.trie_parents[0] != ROOT_ID or self.search_parents[0] != ROOT_ID:
            raise StructureError("root must be its own parent", 0)
        if self.purged[0]:
            raise StructureError("root may not be purged", 0)
        seen_in_lists: dict[int, int] = {}
        for parent, kids in self.children.items():
            if self.purged[parent] and kids:
                raise StructureError("purged node retains children", parent)
            if self.search_parents[parent] == DETACHED and kids:
                raise StructureError("detached node retains children", parent)
            for child in kids:
                if child in seen_in_lists:
                    raise StructureError("node in two child lists", child)
                seen_in_lists[child] = parent
            if kids and self.min_child_rank[parent] > min(
                self.ranks[c] for c in kids
            ):
                raise StructureError("min-child-rank above actual minimum", parent)
        for i in range(1, n):
            if self.purged[i]:
                if self.search_parents[i] != DETACHED:
                    raise StructureError("purged node still in search tree", i)
                if i in seen_in_lists:
                    raise StructureError("purged node in a child list", i)
                continue
            tp = self.trie_parents[i]
            if not 0 <= tp < i:
                raise StructureError("trie parent must precede node", i)
            if self.purged[tp]:
                raise StructureError("trie parent was purged", i)
            if self.ranks[i] <= self.ranks[tp]:
                raise StructureError("rank not above trie parent rank", i)
            sp = self.search_parents[i]
            if sp == DETACHED:
                if i in seen_in_lists:
                    raise StructureError("detached node in a child list", i)
                continue
            if not 0 <= sp < n or self.purged[sp]:
                raise StructureError("search parent invalid or purged", i)
            if self.search_parents[sp] == DETACHED:
                raise StructureError("search parent is detached", i)
            if self.ranks[i] <= self.ranks[sp]:
                raise StructureError("rank not above search parent rank", i)
            if seen_in_lists.get(i) != sp:
                raise StructureError("search adjacency out of sync", i)
        for leaf in self.leaves:
            if not 0 <= leaf.node_id < n or self.purged[leaf.node_id]:
                raise StructureError("leaf attached to missing node", leaf.node_id)


def new_table() -> TrieTable:
    """A fresh table holding only the root sentinel."""
    return TrieTable()


def check_table(table: TrieTable) -> None:
    """Module-level alias for :meth:`TrieTable.check`."""
    table.check()
