"""Model terms: full network statistics and exact change statistics.

Every term evaluator computes its statistic by the defining sum and its
change statistic as the exact difference between the edge-present and
edge-absent worlds, so incremental updates in the sampler always agree
with a full recomputation.

The homophily terms support a node-centric exponent (per matching node
pair, the two-path count raised to alpha) and an edge-centric exponent
(per edge, the matching co-edge count raised to beta, summed and halved).
Both exponents live in [0, 1] and 0**0 evaluates to 0, so a matching pair
with no two-path, or an edge with no matching co-edge, contributes nothing.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .graph import Attributes, BipartiteNetwork, CategoricalColumn

TERM_KINDS = (
    "edges",
    "b1cov",
    "b2cov",
    "b1factor",
    "b2factor",
    "b1nodematch",
    "b2nodematch",
    "b2star2",
    "b2degree1",
    "b2sociality",
)

_ATTRIBUTE_KINDS = frozenset(
    {"b1cov", "b2cov", "b1factor", "b2factor", "b1nodematch", "b2nodematch"}
)
_NODEMATCH_KINDS = frozenset({"b1nodematch", "b2nodematch"})


@dataclass(frozen=True)
class ModelTerm:
    """One term of a model formula.

    Nodematch terms carry exactly one of alpha (node-centric) or beta
    (edge-centric); leaving both unset makes a template term whose
    exponent a profile run binds later.
    """

    kind: str
    attribute: str | None = None
    alpha: float | None = None
    beta: float | None = None
    diff: bool = False
    keep_levels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.kind not in TERM_KINDS:
            raise ValueError(f"unknown term kind {self.kind!r}")
        if self.kind in _ATTRIBUTE_KINDS:
            if not self.attribute:
                raise ValueError(f"term {self.kind} requires an attribute name")
        elif self.attribute is not None:
            raise ValueError(f"term {self.kind} takes no attribute")
        if self.kind not in _NODEMATCH_KINDS:
            for name, value in (("alpha", self.alpha), ("beta", self.beta)):
                if value is not None:
                    raise ValueError(f"term {self.kind} takes no {name}")
            if self.diff:
                raise ValueError(f"term {self.kind} takes no diff flag")
            if self.keep_levels is not None:
                raise ValueError(f"term {self.kind} takes no keep levels")
        else:
            if self.alpha is not None and self.beta is not None:
                raise ValueError(
                    f"term {self.kind}({self.attribute!r}): alpha and beta conflict; set one"
                )
            for name, value in (("alpha", self.alpha), ("beta", self.beta)):
                if value is not None and not 0.0 <= value <= 1.0:
                    raise ValueError(f"{name} must lie in [0, 1], got {value}")
            if self.keep_levels is not None:
                object.__setattr__(self, "keep_levels", tuple(sorted(self.keep_levels)))

    @property
    def exponent(self) -> float | None:
        return self.alpha if self.alpha is not None else self.beta

    @property
    def is_unbound_nodematch(self) -> bool:
        return self.kind in _NODEMATCH_KINDS and self.alpha is None and self.beta is None


@dataclass(frozen=True)
class ModelSpec:
    """Ordered term list; the statistic vector follows term order, with
    diff and factor terms expanded into one statistic per level."""

    terms: tuple[ModelTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def unbound_index(self) -> int | None:
        """Index of the single exponent-free nodematch term, if any."""
        hits = [t for t in self.terms if t.is_unbound_nodematch]
        if not hits:
            return None
        if len(hits) > 1:
            raise ValueError("more than one nodematch term without an exponent")
        return self.terms.index(hits[0])

    def bind_exponent(self, which: str, value: float) -> "ModelSpec":
        """Fill in the unbound nodematch exponent (which is 'alpha' or 'beta')."""
        idx = self.unbound_index()
        if idx is None:
            raise ValueError("no nodematch term with an unbound exponent")
        if which not in ("alpha", "beta"):
            raise ValueError(f"exponent kind must be 'alpha' or 'beta', got {which!r}")
        bound = replace(self.terms[idx], **{which: float(value)})
        terms = list(self.terms)
        terms[idx] = bound
        return ModelSpec(tuple(terms))


# ---------------------------------------------------------------------------
# term evaluators
# ---------------------------------------------------------------------------


def _offset(node: int, mode: int, n1: int) -> int:
    return node - 1 if mode == 1 else node - n1 - 1


class _Evaluator:
    """Shared surface: `names`, `width`, `stats`, `delta_into`."""

    offset = 0  # assigned by BoundModel
    names: list[str]
    width: int

    def stats(self, net: BipartiteNetwork) -> np.ndarray:
        raise NotImplementedError

    def delta_into(self, net: BipartiteNetwork, i: int, k: int, out: np.ndarray) -> None:
        raise NotImplementedError


class _Edges(_Evaluator):
    width = 1

    def __init__(self):
        self.names = ["edges"]

    def stats(self, net):
        return np.array([float(net.edge_count)])

    def delta_into(self, net, i, k, out):
        out[self.offset] = 1.0


class _Cov(_Evaluator):
    width = 1

    def __init__(self, term: ModelTerm, n1: int, attrs: Attributes):
        self.mode = 1 if term.kind == "b1cov" else 2
        self.n1 = n1
        self.values = attrs.table_for(self.mode).numeric(term.attribute).values
        self.names = [f"{term.kind}.{term.attribute}"]

    def stats(self, net):
        total = 0.0
        for i, k in net.edges():
            node = i if self.mode == 1 else k
            total += self.values[_offset(node, self.mode, self.n1)]
        return np.array([total])

    def delta_into(self, net, i, k, out):
        node = i if self.mode == 1 else k
        out[self.offset] = self.values[_offset(node, self.mode, self.n1)]


class _Factor(_Evaluator):
    """Per-level edge counts with the first (sorted) level as reference."""

    def __init__(self, term: ModelTerm, n1: int, attrs: Attributes):
        self.mode = 1 if term.kind == "b1factor" else 2
        self.n1 = n1
        col = attrs.table_for(self.mode).categorical(term.attribute)
        if len(col.levels) < 2:
            raise ValueError(
                f"{term.kind}({term.attribute!r}): needs at least two levels, "
                f"got {list(col.levels)}"
            )
        self.codes = col.codes
        kept = list(range(1, len(col.levels)))  # drop first sorted level
        self.slot_of_code = np.full(len(col.levels), -1, dtype=np.int64)
        for slot, code in enumerate(kept):
            self.slot_of_code[code] = slot
        self.width = len(kept)
        self.names = [f"{term.kind}.{term.attribute}.{col.levels[c]}" for c in kept]

    def stats(self, net):
        out = np.zeros(self.width)
        for i, k in net.edges():
            node = i if self.mode == 1 else k
            slot = self.slot_of_code[self.codes[_offset(node, self.mode, self.n1)]]
            if slot >= 0:
                out[slot] += 1.0
        return out

    def delta_into(self, net, i, k, out):
        node = i if self.mode == 1 else k
        slot = self.slot_of_code[self.codes[_offset(node, self.mode, self.n1)]]
        if slot >= 0:
            out[self.offset + slot] = 1.0


class _Nodematch(_Evaluator):
    """Homophily statistic with a node-centric or edge-centric exponent."""

    def __init__(self, term: ModelTerm, n1: int, attrs: Attributes):
        if term.is_unbound_nodematch:
            raise ValueError(
                f"{term.kind}({term.attribute!r}) has no exponent bound; "
                "set alpha or beta before evaluating"
            )
        self.mode = 1 if term.kind == "b1nodematch" else 2
        self.n1 = n1
        self.node_centric = term.alpha is not None
        self.exponent = float(term.exponent)
        col: CategoricalColumn = attrs.table_for(self.mode).categorical(term.attribute)
        self.codes = col.codes

        levels = col.levels
        if term.keep_levels is not None:
            unknown = [v for v in term.keep_levels if v not in levels]
            if unknown:
                raise KeyError(
                    f"{term.kind}({term.attribute!r}): keep levels {unknown} "
                    f"not among {list(levels)}"
                )
            kept_levels = [v for v in levels if v in term.keep_levels]
        else:
            kept_levels = list(levels)
        self.slot_of_code = np.full(len(levels), -1, dtype=np.int64)
        base = f"{term.kind}.{term.attribute}"
        if term.diff:
            for slot, lev in enumerate(kept_levels):
                self.slot_of_code[levels.index(lev)] = slot
            self.width = len(kept_levels)
            self.names = [f"{base}.{lev}" for lev in kept_levels]
        else:
            for lev in kept_levels:
                self.slot_of_code[levels.index(lev)] = 0
            self.width = 1
            self.names = [base]
        self._pow_cache: dict[int, float] = {0: 0.0}
        self._dpow_cache: dict[int, float] = {}

    # exponentiation on small integer bases; 0**0 = 0, and nonpositive
    # bases map to 0 (they only ever appear with a zero cofactor)
    def _pow(self, base: int) -> float:
        cached = self._pow_cache.get(base)
        if cached is None:
            cached = float(base) ** self.exponent if base > 0 else 0.0
            self._pow_cache[base] = cached
        return cached

    def _dpow(self, base: int) -> float:
        # (base+1)**e - base**e, the marginal gain of one more two-path
        cached = self._dpow_cache.get(base)
        if cached is None:
            cached = self._pow(base + 1) - self._pow(base)
            self._dpow_cache[base] = cached
        return cached

    def _centers(self, net: BipartiteNetwork) -> range:
        # nodes of the opposite mode, through which two-paths run
        if self.mode == 1:
            return range(net.n1 + 1, net.n + 1)
        return range(1, net.n1 + 1)

    def stats(self, net):
        out = np.zeros(self.width)
        codes = self.codes
        slot_of = self.slot_of_code
        mode, n1 = self.mode, self.n1
        if self.node_centric:
            pair_paths: dict[tuple[int, int], int] = {}
            for center in self._centers(net):
                members = sorted(net.neighbors(center))
                buckets: dict[int, list[int]] = {}
                for node in members:
                    c = codes[_offset(node, mode, n1)]
                    if slot_of[c] >= 0:
                        buckets.setdefault(int(c), []).append(node)
                for nodes in buckets.values():
                    for x in range(len(nodes)):
                        for y in range(x + 1, len(nodes)):
                            key = (nodes[x], nodes[y])
                            pair_paths[key] = pair_paths.get(key, 0) + 1
            for (a, _b), t in pair_paths.items():
                out[slot_of[codes[_offset(a, mode, n1)]]] += self._pow(t)
            return out
        for center in self._centers(net):
            counts: dict[int, int] = {}
            members = net.neighbors(center)
            for node in members:
                c = int(codes[_offset(node, mode, n1)])
                counts[c] = counts.get(c, 0) + 1
            for node in members:
                c = int(codes[_offset(node, mode, n1)])
                slot = slot_of[c]
                if slot >= 0 and counts[c] > 1:
                    out[slot] += self._pow(counts[c] - 1)
        out *= 0.5
        return out

    def delta_into(self, net, i, k, out):
        focal, shared = (i, k) if self.mode == 1 else (k, i)
        cf = self.codes[_offset(focal, self.mode, self.n1)]
        slot = self.slot_of_code[cf]
        if slot < 0:
            return
        codes = self.codes
        mode, n1 = self.mode, self.n1
        if self.node_centric:
            nf = net.neighbors(focal)
            has_edge = shared in nf
            total = 0.0
            for j in net.neighbors(shared):
                if j == focal or codes[_offset(j, mode, n1)] != cf:
                    continue
                nj = net.neighbors(j)
                small, large = (nf, nj) if len(nf) <= len(nj) else (nj, nf)
                t = 0
                for x in small:
                    if x in large:
                        t += 1
                if has_edge:
                    t -= 1  # two-paths not through the toggled shared node
                total += self._dpow(t)
            out[self.offset + slot] = total
            return
        u = 0
        for j in net.neighbors(shared):
            if j != focal and codes[_offset(j, mode, n1)] == cf:
                u += 1
        out[self.offset + slot] = 0.5 * ((1.0 + u) * self._pow(u) - u * self._pow(u - 1))


class _Star2(_Evaluator):
    """Mode-2 centered two-stars: sum over mode-2 nodes of C(degree, 2)."""

    width = 1

    def __init__(self):
        self.names = ["b2star2"]

    def stats(self, net):
        total = 0.0
        for k in range(net.n1 + 1, net.n + 1):
            d = net.degree(k)
            total += d * (d - 1) / 2.0
        return np.array([total])

    def delta_into(self, net, i, k, out):
        d_other = net.degree(k) - (1 if net.has_edge(i, k) else 0)
        out[self.offset] = float(d_other)


class _Degree1(_Evaluator):
    """Count of mode-2 nodes with degree exactly one."""

    width = 1

    def __init__(self):
        self.names = ["b2degree1"]

    def stats(self, net):
        total = sum(1 for k in range(net.n1 + 1, net.n + 1) if net.degree(k) == 1)
        return np.array([float(total)])

    def delta_into(self, net, i, k, out):
        d_other = net.degree(k) - (1 if net.has_edge(i, k) else 0)
        out[self.offset] = (1.0 if d_other == 0 else 0.0) - (1.0 if d_other == 1 else 0.0)


class _Sociality(_Evaluator):
    """One statistic per mode-2 node: its degree."""

    def __init__(self, n1: int, n2: int):
        self.n1 = n1
        self.width = n2
        self.names = [f"b2sociality.{k}" for k in range(n1 + 1, n1 + n2 + 1)]

    def stats(self, net):
        return np.array(
            [float(net.degree(k)) for k in range(self.n1 + 1, self.n1 + self.width + 1)]
        )

    def delta_into(self, net, i, k, out):
        out[self.offset + (k - self.n1 - 1)] = 1.0


def _build_evaluator(term: ModelTerm, n1: int, n2: int, attrs: Attributes) -> _Evaluator:
    if term.kind == "edges":
        return _Edges()
    if term.kind in ("b1cov", "b2cov"):
        return _Cov(term, n1, attrs)
    if term.kind in ("b1factor", "b2factor"):
        return _Factor(term, n1, attrs)
    if term.kind in ("b1nodematch", "b2nodematch"):
        return _Nodematch(term, n1, attrs)
    if term.kind == "b2star2":
        return _Star2()
    if term.kind == "b2degree1":
        return _Degree1()
    if term.kind == "b2sociality":
        return _Sociality(n1, n2)
    raise ValueError(f"unknown term kind {term.kind!r}")


class BoundModel:
    """A ModelSpec bound to network shape and attribute data.

    Binding expands diff/factor terms into per-level statistics, fixes
    the statistic order and names, and validates every attribute
    reference.  Evaluation is then pure in the network argument.
    """

    def __init__(self, spec: ModelSpec, n1: int, n2: int, attrs: Attributes):
        self.spec = spec
        self.n1 = n1
        self.n2 = n2
        self.evaluators = [_build_evaluator(t, n1, n2, attrs) for t in spec.terms]
        offset = 0
        for ev, term in zip(self.evaluators, spec.terms):
            ev.offset = offset
            ev.term = term
            offset += ev.width
        self.p = offset
        self.names = self._unique_names()

    def _unique_names(self) -> list[str]:
        names: list[str] = []
        owners: list[ModelTerm] = []
        for ev, term in zip(self.evaluators, self.spec.terms):
            names.extend(ev.names)
            owners.extend([term] * ev.width)
        counts = Counter(names)
        if max(counts.values(), default=0) > 1:
            resolved = []
            for name, term in zip(names, owners):
                if counts[name] > 1 and term.kind in _NODEMATCH_KINDS:
                    tag = "alpha" if term.alpha is not None else "beta"
                    name = f"{name}.{tag}{term.exponent:g}"
                resolved.append(name)
            names = resolved
        # still-colliding names (e.g. same exponent, different keep sets)
        # get a positional suffix
        counts = Counter(names)
        if max(counts.values(), default=0) > 1:
            seen: Counter[str] = Counter()
            resolved = []
            for name in names:
                seen[name] += 1
                if counts[name] > 1 and seen[name] > 1:
                    name = f"{name}.{seen[name]}"
                resolved.append(name)
            names = resolved
        if len(set(names)) != len(names):
            dupes = sorted(n for n, c in Counter(names).items() if c > 1)
            raise ValueError(f"duplicate statistic names in model: {dupes}")
        return names

    def _check_net(self, net: BipartiteNetwork) -> None:
        if net.n1 != self.n1 or net.n2 != self.n2:
            raise ValueError(
                f"network is {net.n1}x{net.n2}, model was bound for {self.n1}x{self.n2}"
            )

    def stats(self, net: BipartiteNetwork) -> np.ndarray:
        self._check_net(net)
        out = np.empty(self.p)
        for ev in self.evaluators:
            out[ev.offset : ev.offset + ev.width] = ev.stats(net)
        return out

    def delta_into(self, net: BipartiteNetwork, i: int, k: int, out: np.ndarray) -> None:
        out[:] = 0.0
        for ev in self.evaluators:
            ev.delta_into(net, i, k, out)

    def delta(self, net: BipartiteNetwork, i: int, k: int) -> np.ndarray:
        self._check_net(net)
        net.check_dyad(i, k)
        out = np.zeros(self.p)
        for ev in self.evaluators:
            ev.delta_into(net, i, k, out)
        return out


def bind(spec: ModelSpec, net: BipartiteNetwork, attrs: Attributes) -> BoundModel:
    return BoundModel(spec, net.n1, net.n2, attrs)


def eval_stats(spec: ModelSpec, net: BipartiteNetwork, attrs: Attributes) -> np.ndarray:
    """Vector of sufficient statistics, ordered by spec expansion."""
    return bind(spec, net, attrs).stats(net)


def change_stats(
    spec: ModelSpec, net: BipartiteNetwork, attrs: Attributes, i: int, k: int
) -> np.ndarray:
    """Exact change statistics for toggling dyad (i, k).

    The value is the difference between statistics with the edge present
    and with it absent; it does not depend on the dyad's current state.
    """
    return bind(spec, net, attrs).delta(net, i, k)


def stat_names(spec: ModelSpec, net: BipartiteNetwork, attrs: Attributes) -> list[str]:
    return bind(spec, net, attrs).names


# ---------------------------------------------------------------------------
# shared-partner spectra
# ---------------------------------------------------------------------------


@dataclass
class SharedPartnerSpectrum:
    """Multiplicity histogram for matching pairs (MDSP) or edges (MESP)."""

    kind: str  # "mdsp" or "mesp"
    counts: dict[int, int] = field(default_factory=dict)


def mdsp_spectrum(
    net: BipartiteNetwork, attrs: Attributes, column: str
) -> SharedPartnerSpectrum:
    """Matching mode-1 pairs, bucketed by exact shared-partner count."""
    col = attrs.table_for(1).categorical(column)
    pair_paths: dict[tuple[int, int], int] = {}
    for k in range(net.n1 + 1, net.n + 1):
        members = sorted(net.neighbors(k))
        for x in range(len(members)):
            for y in range(x + 1, len(members)):
                a, b = members[x], members[y]
                if col.codes[a - 1] == col.codes[b - 1]:
                    pair_paths[(a, b)] = pair_paths.get((a, b), 0) + 1
    counts = Counter(pair_paths.values())
    return SharedPartnerSpectrum("mdsp", dict(counts))


def mesp_spectrum(
    net: BipartiteNetwork, attrs: Attributes, column: str
) -> SharedPartnerSpectrum:
    """Edges bucketed by the exact number of matching two-paths containing them."""
    col = attrs.table_for(1).categorical(column)
    counts: Counter[int] = Counter()
    for i, k in net.edges():
        ci = col.codes[i - 1]
        u = sum(1 for j in net.neighbors(k) if j != i and col.codes[j - 1] == ci)
        if u >= 1:
            counts[u] += 1
    return SharedPartnerSpectrum("mesp", dict(counts))


def recompose_from_spectrum(spectrum: SharedPartnerSpectrum, exponent: float) -> float:
    """Rebuild the homophily statistic from a spectrum: sum of i**exponent
    times the bucket count, halved for the edge-centric spectrum."""
    if not 0.0 <= exponent <= 1.0:
        raise ValueError(f"exponent must lie in [0, 1], got {exponent}")
    total = sum(
        (float(i) ** exponent if i > 0 else 0.0) * c for i, c in spectrum.counts.items()
    )
    if spectrum.kind == "mesp":
        total *= 0.5
    return total
