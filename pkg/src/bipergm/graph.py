"""Bipartite network storage with O(1) edge queries and in-place toggles.

Nodes are 1-based integers: mode-1 nodes are 1..n1, mode-2 nodes are
n1+1..n1+n2.  Edges are only permitted between modes.  The structure keeps
neighbor sets on both sides plus an indexed edge list so that samplers can
pick a uniformly random edge in O(1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np


class ModeViolationError(ValueError):
    """A dyad or node argument does not respect the two-mode structure."""


class ColumnTypeError(TypeError):
    """An attribute column has the wrong type for the requested operation."""


class BipartiteNetwork:
    """Binary two-mode network on n1 + n2 nodes."""

    __slots__ = ("n1", "n2", "_nbr1", "_nbr2", "_edge_list", "_edge_pos")

    def __init__(self, n1: int, n2: int):
        if n1 < 0 or n2 < 0:
            raise ValueError(f"node counts must be nonnegative, got n1={n1} n2={n2}")
        self.n1 = n1
        self.n2 = n2
        self._nbr1: list[set[int]] = [set() for _ in range(n1)]
        self._nbr2: list[set[int]] = [set() for _ in range(n2)]
        self._edge_list: list[tuple[int, int]] = []
        self._edge_pos: dict[tuple[int, int], int] = {}

    # -- basic queries ------------------------------------------------------

    @property
    def n(self) -> int:
        return self.n1 + self.n2

    @property
    def edge_count(self) -> int:
        return len(self._edge_list)

    @property
    def dyad_count(self) -> int:
        return self.n1 * self.n2

    def is_mode1(self, node: int) -> bool:
        self._check_node(node)
        return node <= self.n1

    def mode_of(self, node: int) -> int:
        return 1 if self.is_mode1(node) else 2

    def has_edge(self, i: int, k: int) -> bool:
        self.check_dyad(i, k)
        return k in self._nbr1[i - 1]

    def edges(self) -> Iterator[tuple[int, int]]:
        """Iterate current edges in insertion order."""
        return iter(self._edge_list)

    def edge_at(self, index: int) -> tuple[int, int]:
        """Edge by position in the internal list (for uniform edge choice)."""
        return self._edge_list[index]

    def neighbors(self, node: int) -> set[int]:
        """Neighbor set of a node (mode-2 partners of a mode-1 node and
        vice versa).  The returned set is live; do not mutate it."""
        if self.is_mode1(node):
            return self._nbr1[node - 1]
        return self._nbr2[node - self.n1 - 1]

    def degree(self, node: int) -> int:
        return len(self.neighbors(node))

    # -- validation ---------------------------------------------------------

    def _check_node(self, node: int) -> None:
        if not 1 <= node <= self.n:
            raise ValueError(f"node {node} out of range 1..{self.n}")

    def check_dyad(self, i: int, k: int) -> None:
        """Validate that (i, k) is a legal mode-1 x mode-2 dyad."""
        self._check_node(i)
        self._check_node(k)
        if i > self.n1 or k <= self.n1:
            raise ModeViolationError(
                f"dyad ({i}, {k}) violates the mode restriction: "
                f"expected 1<={i}<={self.n1} and {self.n1}<{k}<={self.n}"
            )

    # -- mutation -----------------------------------------------------------

    def toggle(self, i: int, k: int) -> bool:
        """Flip the state of dyad (i, k) in place.

        Returns True if the edge is present after the toggle.
        """
        self.check_dyad(i, k)
        if k in self._nbr1[i - 1]:
            self._remove(i, k)
            return False
        self._add(i, k)
        return True

    def _add(self, i: int, k: int) -> None:
        self._nbr1[i - 1].add(k)
        self._nbr2[k - self.n1 - 1].add(i)
        self._edge_pos[(i, k)] = len(self._edge_list)
        self._edge_list.append((i, k))

    def _remove(self, i: int, k: int) -> None:
        self._nbr1[i - 1].discard(k)
        self._nbr2[k - self.n1 - 1].discard(i)
        pos = self._edge_pos.pop((i, k))
        last = self._edge_list.pop()
        if last != (i, k):
            self._edge_list[pos] = last
            self._edge_pos[last] = pos

    def copy(self) -> "BipartiteNetwork":
        dup = BipartiteNetwork(self.n1, self.n2)
        dup._nbr1 = [set(s) for s in self._nbr1]
        dup._nbr2 = [set(s) for s in self._nbr2]
        dup._edge_list = list(self._edge_list)
        dup._edge_pos = dict(self._edge_pos)
        return dup

    def biadjacency(self) -> np.ndarray:
        """Dense n1 x n2 0/1 matrix (row i-1, column k-n1-1)."""
        mat = np.zeros((self.n1, self.n2), dtype=np.int64)
        for i, k in self._edge_list:
            mat[i - 1, k - self.n1 - 1] = 1
        return mat

    def check_consistency(self) -> None:
        """Debug-level audit that all internal views agree."""
        deg1 = sum(len(s) for s in self._nbr1)
        deg2 = sum(len(s) for s in self._nbr2)
        if not deg1 == deg2 == len(self._edge_list) == len(self._edge_pos):
            raise AssertionError("edge bookkeeping out of sync")
        for i, k in self._edge_list:
            if k not in self._nbr1[i - 1] or i not in self._nbr2[k - self.n1 - 1]:
                raise AssertionError(f"edge ({i},{k}) missing from a neighbor set")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BipartiteNetwork):
            return NotImplemented
        return (
            self.n1 == other.n1
            and self.n2 == other.n2
            and set(self._edge_list) == set(other._edge_list)
        )

    def __repr__(self) -> str:
        return f"BipartiteNetwork(n1={self.n1}, n2={self.n2}, edges={self.edge_count})"


def from_edge_list(
    n1: int, n2: int, dyads: Iterable[tuple[int, int]]
) -> BipartiteNetwork:
    """Build a network from a dyad list; duplicates collapse silently."""
    net = BipartiteNetwork(n1, n2)
    for i, k in dyads:
        net.check_dyad(i, k)
        if not net.has_edge(i, k):
            net._add(i, k)
    return net


def toggle_edge(net: BipartiteNetwork, i: int, k: int) -> BipartiteNetwork:
    """Toggle dyad (i, k) in place and return the network."""
    net.toggle(i, k)
    return net


def two_paths_between(
    net: BipartiteNetwork, a: int, b: int, excluding: int | None = None
) -> int:
    """Number of two-paths joining same-mode nodes a and b.

    A two-path runs through one node of the opposite mode; `excluding`
    drops one such intermediate node from the count.
    """
    if a == b:
        raise ValueError(f"two-path count needs distinct endpoints, got {a} twice")
    if net.mode_of(a) != net.mode_of(b):
        raise ModeViolationError(
            f"nodes {a} and {b} are in different modes; two-paths connect same-mode nodes"
        )
    na = net.neighbors(a)
    nb = net.neighbors(b)
    if excluding is not None:
        net._check_node(excluding)
        if net.mode_of(excluding) == net.mode_of(a):
            raise ModeViolationError(
                f"excluded node {excluding} must be in the opposite mode of {a}"
            )
    if len(na) > len(nb):
        na, nb = nb, na
    count = 0
    for x in na:
        if x in nb:
            count += 1
    if excluding is not None and excluding in na and excluding in nb:
        count -= 1
    return count


# ---------------------------------------------------------------------------
# nodal attributes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CategoricalColumn:
    """Fixed-level categorical attribute, one code per node of the mode."""

    name: str
    levels: tuple[str, ...]  # sorted lexicographically, fixed at load
    codes: np.ndarray  # int codes, offset-indexed

    def code_for_level(self, level: str) -> int:
        try:
            return self.levels.index(level)
        except ValueError:
            raise KeyError(
                f"unknown level {level!r} for column {self.name!r}; "
                f"levels are {list(self.levels)}"
            ) from None

    def level_of(self, offset: int) -> str:
        return self.levels[int(self.codes[offset])]


@dataclass(frozen=True)
class NumericColumn:
    """Real-valued attribute, offset-indexed."""

    name: str
    values: np.ndarray


class AttributeTable:
    """Named attribute columns for the nodes of one mode.

    Every node of the mode must have a value in every column; loaders
    enforce this, and `add_*` checks lengths.
    """

    def __init__(self, mode: int, size: int):
        if mode not in (1, 2):
            raise ValueError(f"mode must be 1 or 2, got {mode}")
        self.mode = mode
        self.size = size
        self._columns: dict[str, CategoricalColumn | NumericColumn] = {}

    def add_categorical(self, name: str, values: Sequence[str]) -> None:
        if len(values) != self.size:
            raise ValueError(
                f"column {name!r}: {len(values)} values for {self.size} mode-{self.mode} nodes"
            )
        levels = tuple(sorted(set(str(v) for v in values)))
        index = {lev: c for c, lev in enumerate(levels)}
        codes = np.array([index[str(v)] for v in values], dtype=np.int64)
        self._columns[name] = CategoricalColumn(name, levels, codes)

    def add_numeric(self, name: str, values: Sequence[float]) -> None:
        arr = np.asarray(values, dtype=np.float64)
        if arr.shape != (self.size,):
            raise ValueError(
                f"column {name!r}: {arr.shape} values for {self.size} mode-{self.mode} nodes"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"column {name!r}: non-finite values are not allowed")
        self._columns[name] = NumericColumn(name, arr)

    @property
    def names(self) -> list[str]:
        return list(self._columns)

    def column(self, name: str) -> CategoricalColumn | NumericColumn:
        try:
            return self._columns[name]
        except KeyError:
            raise KeyError(
                f"unknown attribute {name!r} on mode {self.mode}; "
                f"available: {self.names}"
            ) from None

    def categorical(self, name: str) -> CategoricalColumn:
        col = self.column(name)
        if not isinstance(col, CategoricalColumn):
            raise ColumnTypeError(f"column {name!r} is numeric, expected categorical")
        return col

    def numeric(self, name: str) -> NumericColumn:
        col = self.column(name)
        if not isinstance(col, NumericColumn):
            raise ColumnTypeError(f"column {name!r} is categorical, expected numeric")
        return col


@dataclass(frozen=True)
class Attributes:
    """Bundle of per-mode attribute tables; either side may be absent."""

    mode1: AttributeTable | None = None
    mode2: AttributeTable | None = None

    def table_for(self, mode: int) -> AttributeTable:
        table = self.mode1 if mode == 1 else self.mode2
        if table is None:
            raise KeyError(f"no attribute table supplied for mode {mode}")
        return table

    @staticmethod
    def empty() -> "Attributes":
        return Attributes()


def matching_edges_at(
    net: BipartiteNetwork,
    attrs: AttributeTable,
    column: str,
    i: int,
    k: int,
) -> int:
    """Count edges at the shared endpoint from nodes matching the focal node.

    With a mode-1 attribute table this is the number of mode-1 nodes j != i
    tied to k whose category equals i's.  With a mode-2 table the roles
    swap: mode-2 nodes k' != k tied to i matching k's category.
    """
    net.check_dyad(i, k)
    col = attrs.categorical(column)
    if attrs.mode == 1:
        ci = col.codes[i - 1]
        return sum(
            1 for j in net.neighbors(k) if j != i and col.codes[j - 1] == ci
        )
    ck = col.codes[k - net.n1 - 1]
    return sum(
        1
        for k2 in net.neighbors(i)
        if k2 != k and col.codes[k2 - net.n1 - 1] == ck
    )


# ---------------------------------------------------------------------------
# one-mode projections
# ---------------------------------------------------------------------------


@dataclass
class WeightedProjection:
    """One-mode projection: pair weights equal two-path multiplicities."""

    mode: int
    node_count: int
    weights: dict[tuple[int, int], int] = field(default_factory=dict)

    def weight(self, a: int, b: int) -> int:
        if a > b:
            a, b = b, a
        return self.weights.get((a, b), 0)


def project(net: BipartiteNetwork, mode: int) -> WeightedProjection:
    """Project onto one mode; pairs without a two-path are omitted."""
    if mode not in (1, 2):
        raise ValueError(f"mode must be 1 or 2, got {mode}")
    weights: dict[tuple[int, int], int] = {}
    if mode == 1:
        centers = range(net.n1 + 1, net.n + 1)
    else:
        centers = range(1, net.n1 + 1)
    for center in centers:
        around = sorted(net.neighbors(center))
        for s, a in enumerate(around):
            for b in around[s + 1 :]:
                key = (a, b)
                weights[key] = weights.get(key, 0) + 1
    count = net.n1 if mode == 1 else net.n2
    return WeightedProjection(mode=mode, node_count=count, weights=weights)
