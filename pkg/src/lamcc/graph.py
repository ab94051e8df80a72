"""Immutable undirected simple graphs and open-wedge / triangle enumeration.

A graph is stored in CSR adjacency form with sorted neighbor lists and
contiguous vertex ids 0..n-1. Parsing normalizes arbitrary edge lists
(self-loops dropped, duplicates and reversed copies merged, ids remapped
in first-appearance order) so that downstream algorithms can assume a
clean substrate.

An *open wedge* is a vertex triple (i, j, k) centered at j with edges
(i, j) and (j, k) present and (i, k) absent. Wedges and triangles are
enumerated in a fixed canonical order (by center, then by the sorted end
pair) because several algorithms in this package process wedges
sequentially and their output depends on the order. Each unordered wedge
is counted exactly once.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import IO, Iterable, Iterator, NamedTuple

import numpy as np

from .errors import EdgeListParseError

__all__ = [
    "Graph",
    "Wedge",
    "WedgeIndex",
    "parse_edge_list",
    "parse_matrix_market",
    "load_graph",
    "to_edge_list_text",
    "enumerate_wedges",
    "count_wedges_and_triangles",
    "graph_stats",
]


def pair_key(n: int, u: int, v: int) -> int:
    """Encode an unordered pair as a single sortable integer."""
    if u > v:
        u, v = v, u
    return u * n + v


def decode_pair_key(n: int, key: int) -> tuple[int, int]:
    return key // n, key % n


class Graph:
    """Undirected simple graph in CSR adjacency form.

    Attributes:
        n: vertex count (ids are 0..n-1).
        m: edge count (each undirected edge counted once).
        indptr, indices: CSR arrays; indices[indptr[v]:indptr[v+1]] is the
            sorted neighbor list of v.
        degree: per-vertex neighbor count.

    Instances are immutable; the backing arrays are marked read-only.
    """

    __slots__ = ("n", "m", "indptr", "indices", "degree", "_edge_keys")

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray):
        self.n = int(n)
        self.indptr = indptr
        self.indices = indices
        self.degree = np.diff(indptr)
        self.m = int(indices.shape[0]) // 2
        for arr in (self.indptr, self.indices, self.degree):
            arr.setflags(write=False)
        self._edge_keys = None

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        """Build a graph from (u, v) pairs; drops self-loops and duplicates."""
        seen: set[tuple[int, int]] = set()
        for u, v in edges:
            if u == v:
                continue
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for n={n}")
            if u > v:
                u, v = v, u
            seen.add((u, v))
        if seen:
            arr = np.array(sorted(seen), dtype=np.int64)
            src = np.concatenate([arr[:, 0], arr[:, 1]])
            dst = np.concatenate([arr[:, 1], arr[:, 0]])
        else:
            src = np.zeros(0, dtype=np.int64)
            dst = np.zeros(0, dtype=np.int64)
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(n, indptr, dst)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        pos = int(np.searchsorted(row, v))
        return pos < row.shape[0] and int(row[pos]) == v

    def edges(self) -> Iterator[tuple[int, int]]:
        """Yield each edge once as (u, v) with u < v, in sorted order."""
        for u in range(self.n):
            for v in self.neighbors(u):
                if v > u:
                    yield u, int(v)

    def edge_keys(self) -> np.ndarray:
        """Sorted array of pair_key(n, u, v) over all edges (u < v)."""
        if self._edge_keys is None:
            rowids = np.repeat(np.arange(self.n, dtype=np.int64), self.degree)
            mask = self.indices > rowids
            keys = rowids[mask] * self.n + self.indices[mask].astype(np.int64)
            keys.setflags(write=False)
            self._edge_keys = keys
        return self._edge_keys

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and self.m == other.m
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    def __hash__(self):
        return hash((self.n, self.m, self.indices.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


class Wedge(NamedTuple):
    """Open wedge: edges (ends[0], center) and (center, ends[1]), non-edge ends."""

    center: int
    ends: tuple[int, int]


# ---------------------------------------------------------------------------
# Parsing


def _iter_text_lines(source: str | bytes | IO) -> Iterator[str]:
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        yield from io.StringIO(source)
        return
    for raw in source:
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        yield raw


def parse_edge_list(
    source: str | bytes | IO,
    *,
    comment_prefixes: tuple[str, ...] = ("#", "%"),
    delimiter: str | None = None,
    one_indexed: bool = False,
) -> Graph:
    """Parse a whitespace- or delimiter-separated edge list into a Graph.

    Each non-comment line must hold exactly two integer tokens. The result
    is normalized: self-loops dropped, duplicate and reversed edges merged,
    and vertex ids remapped to contiguous 0..n-1 in order of first
    appearance on a retained edge (so output ids are stable for a fixed
    input file, and serialize/parse round-trips are exact).

    Raises:
        EdgeListParseError: malformed line (with its 1-based number) or
            input containing no edge lines at all.
    """
    remap: dict[int, int] = {}
    edges: list[tuple[int, int]] = []
    saw_data = False
    for lineno, raw in enumerate(_iter_text_lines(source), start=1):
        line = raw.strip()
        if not line or any(line.startswith(p) for p in comment_prefixes):
            continue
        saw_data = True
        tokens = line.split(delimiter) if delimiter else line.split()
        tokens = [t for t in tokens if t]
        if len(tokens) != 2:
            raise EdgeListParseError(
                f"expected two integer tokens, got {len(tokens)}", lineno
            )
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise EdgeListParseError(
                f"non-integer token in {tokens!r}", lineno
            ) from None
        if one_indexed:
            if u < 1 or v < 1:
                raise EdgeListParseError(
                    f"token < 1 in one-indexed input: {line!r}", lineno
                )
            u, v = u - 1, v - 1
        if u == v:
            continue
        for t in (u, v):
            if t not in remap:
                remap[t] = len(remap)
        edges.append((remap[u], remap[v]))
    if not saw_data:
        raise EdgeListParseError("empty input: no edge lines found")
    return Graph.from_edges(len(remap), edges)


def parse_matrix_market(source: str | bytes | IO) -> Graph:
    """Parse a MatrixMarket ``coordinate pattern symmetric`` file.

    Entries are 1-indexed (i, j) coordinates; the result is the same
    normalized Graph the edge-list reader produces, except that the header
    dimension fixes nothing (ids are still remapped by first appearance).
    """
    lines = _iter_text_lines(source)
    try:
        header = next(lines)
    except StopIteration:
        raise EdgeListParseError("empty input: no header line") from None
    fields = header.lower().split()
    if not header.startswith("%%MatrixMarket") or "coordinate" not in fields:
        raise EdgeListParseError("not a MatrixMarket coordinate file", 1)
    if "pattern" not in fields:
        raise EdgeListParseError("only 'pattern' matrices are supported", 1)
    # skip comment lines, then the dimensions line
    lineno = 1
    for raw in lines:
        lineno += 1
        if not raw.strip().startswith("%") and raw.strip():
            break
    else:
        raise EdgeListParseError("missing dimensions line")
    body = "".join(lines)
    if not body.strip():
        raise EdgeListParseError("empty input: no entries found")
    return parse_edge_list(body, comment_prefixes=("%",), one_indexed=True)


def load_graph(path: str | Path, fmt: str = "auto") -> Graph:
    """Load a graph file; ``fmt`` is 'edgelist', 'mtx', or 'auto' (sniff)."""
    path = Path(path)
    data = path.read_bytes()
    if fmt == "auto":
        fmt = "mtx" if data.startswith(b"%%MatrixMarket") else "edgelist"
    if fmt == "mtx":
        return parse_matrix_market(data)
    if fmt == "edgelist":
        return parse_edge_list(data)
    raise EdgeListParseError(f"unknown format {fmt!r}")


def to_edge_list_text(g: Graph) -> str:
    """Serialize to the edge-list format (one 'u v' per line, u < v).

    Lines are ordered so that vertex ids make their first appearance in
    ascending order: one introduction edge per vertex up front, then the
    remaining edges sorted. Re-parsing such text reproduces the identical
    Graph, because the parser assigns ids in first-appearance order.
    Every parser output admits this ordering (vertex k was first seen next
    to an already-seen vertex or to k+1); graphs whose labeling cannot be
    realized that way (possible via from_edges) fall back to plain
    sorted order, which re-parses to an isomorphic relabeling.
    """
    intro: list[tuple[int, int]] = []
    used: set[tuple[int, int]] = set()
    k = 0
    realizable = True
    while k < g.n:
        nbrs = g.neighbors(k)
        smaller = nbrs[nbrs < k]
        if smaller.shape[0]:
            e = (int(smaller[0]), k)
            intro.append(e)
            used.add(e)
            k += 1
        elif g.has_edge(k, k + 1) if k + 1 < g.n else False:
            e = (k, k + 1)
            intro.append(e)
            used.add(e)
            k += 2
        else:
            realizable = False
            break
    if not realizable:
        return "".join(f"{u} {v}\n" for u, v in g.edges())
    rest = (e for e in g.edges() if e not in used)
    return "".join(f"{u} {v}\n" for u, v in intro) + "".join(
        f"{u} {v}\n" for u, v in rest
    )


# ---------------------------------------------------------------------------
# Wedge and triangle enumeration


@dataclass(frozen=True)
class WedgeIndex:
    """All open wedges and triangles of a graph, in canonical order.

    Wedges are sorted by center, then by end pair; triangles are sorted
    triples (i < j < k). The raw arrays are the primary representation;
    the ``wedges`` / ``triangles`` views exist for convenience at small
    scale.
    """

    n: int
    wedge_center: np.ndarray
    wedge_lo: np.ndarray
    wedge_hi: np.ndarray
    tri_i: np.ndarray
    tri_j: np.ndarray
    tri_k: np.ndarray

    @property
    def wedge_count(self) -> int:
        return int(self.wedge_center.shape[0])

    @property
    def triangle_count(self) -> int:
        return int(self.tri_i.shape[0])

    @cached_property
    def wedges(self) -> list[Wedge]:
        return [
            Wedge(int(c), (int(a), int(b)))
            for c, a, b in zip(self.wedge_center, self.wedge_lo, self.wedge_hi)
        ]

    @cached_property
    def triangles(self) -> list[tuple[int, int, int]]:
        return [
            (int(i), int(j), int(k))
            for i, j, k in zip(self.tri_i, self.tri_j, self.tri_k)
        ]

    def wedge_pair_keys(self) -> np.ndarray:
        """(wedge_count, 3) array of pair keys per wedge.

        Columns are (center, lo), (center, hi), (lo, hi): the two edges
        followed by the open end pair, each encoded with pair_key.
        """
        n = self.n
        c = self.wedge_center.astype(np.int64)
        a = self.wedge_lo.astype(np.int64)
        b = self.wedge_hi.astype(np.int64)
        e1 = np.minimum(c, a) * n + np.maximum(c, a)
        e2 = np.minimum(c, b) * n + np.maximum(c, b)
        e3 = a * n + b
        return np.stack([e1, e2, e3], axis=1)


def _neighbor_pair_chunks(g: Graph, chunk_pairs: int = 2_000_000):
    """Yield (center, lo, hi) id arrays covering every sorted neighbor pair.

    Centers are grouped by degree so a single triu template serves a whole
    batch; work per chunk is capped at roughly ``chunk_pairs`` pairs.
    """
    deg = g.degree
    for d in np.unique(deg):
        d = int(d)
        if d < 2:
            continue
        verts = np.flatnonzero(deg == d)
        ii, jj = np.triu_indices(d, 1)
        per = ii.shape[0]
        step = max(1, chunk_pairs // per)
        for s in range(0, verts.shape[0], step):
            vs = verts[s:s + step]
            base = g.indptr[vs]
            lo = g.indices[base[:, None] + ii[None, :]].ravel()
            hi = g.indices[base[:, None] + jj[None, :]].ravel()
            centers = np.repeat(vs, per)
            yield centers, lo, hi


def _classify(g: Graph, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Boolean mask: is (lo, hi) an edge of g (lo < hi assumed)."""
    ek = g.edge_keys()
    if ek.shape[0] == 0:
        return np.zeros(lo.shape[0], dtype=bool)
    keys = lo.astype(np.int64) * g.n + hi.astype(np.int64)
    pos = np.searchsorted(ek, keys)
    out = np.zeros(keys.shape[0], dtype=bool)
    in_range = pos < ek.shape[0]
    out[in_range] = ek[pos[in_range]] == keys[in_range]
    return out


def enumerate_wedges(g: Graph) -> WedgeIndex:
    """Enumerate all open wedges and triangles, each exactly once.

    Runs in O(sum of squared degrees): every sorted neighbor pair of every
    center is classified open/closed with one binary search against the
    edge set. A triangle is seen from its three corners; only the
    occurrence whose center is the smallest vertex is kept.
    """
    w_parts: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
    t_parts: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
    for centers, lo, hi in _neighbor_pair_chunks(g):
        closed = _classify(g, lo, hi)
        open_mask = ~closed
        w_parts.append((centers[open_mask], lo[open_mask], hi[open_mask]))
        tri_mask = closed & (centers < lo)
        t_parts.append((centers[tri_mask], lo[tri_mask], hi[tri_mask]))

    def _gather(parts, empty_dtype=np.int64):
        if parts:
            c = np.concatenate([p[0] for p in parts])
            a = np.concatenate([p[1] for p in parts])
            b = np.concatenate([p[2] for p in parts])
        else:
            c = a = b = np.zeros(0, dtype=empty_dtype)
        order = np.lexsort((b, a, c))
        return c[order], a[order], b[order]

    wc, wa, wb = _gather(w_parts)
    tc, ta, tb = _gather(t_parts)
    return WedgeIndex(g.n, wc, wa, wb, tc, ta, tb)


def count_wedges_and_triangles(g: Graph) -> tuple[int, int]:
    """Counting-only pass: (open wedge count, triangle count).

    Avoids materializing the index; used for statistics on graphs whose
    wedge list would be large.
    """
    wedges = 0
    triangles = 0
    for centers, lo, hi in _neighbor_pair_chunks(g):
        closed = _classify(g, lo, hi)
        wedges += int((~closed).sum())
        triangles += int((closed & (centers < lo)).sum())
    return wedges, triangles


def graph_stats(g: Graph) -> dict[str, int]:
    """Basic counts plus the size of the all-triples constraint family.

    canonical_constraint_count is n(n-1)(n-2)/2, the number of triangle
    inequalities over every vertex triple and rotation, which the
    wedge-restricted formulations avoid.
    """
    w, t = count_wedges_and_triangles(g)
    return {
        "n": g.n,
        "m": g.m,
        "wedge_count": w,
        "triangle_count": t,
        "canonical_constraint_count": g.n * (g.n - 1) * (g.n - 2) // 2,
    }
