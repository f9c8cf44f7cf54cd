"""Text codecs for graphs and rotation systems.

Edge lists are ``u v`` lines; rotation files are ``v: a b c`` lines listing
neighbors in cyclic order. ``#`` starts a comment. Input ids may be any
non-negative integers; they are densified to ``0..n-1`` in ascending order
and the original ids are kept in ``Graph.labels``.
"""

from __future__ import annotations

import hashlib
import io as _io
from typing import IO, Union

import numpy as np

from .errors import GraphFormatError
from .graph import Graph, RotationSystem

Source = Union[str, bytes, IO]

EDGE_LIST = "edge-list"
ROTATION = "rotation-system"


def _lines(source: Source):
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _parse_id(tok: str, lineno: int) -> int:
    try:
        v = int(tok)
    except ValueError:
        raise GraphFormatError(f"expected a non-negative integer, got {tok!r}", line=lineno) from None
    if v < 0:
        raise GraphFormatError(f"negative vertex id {v}", line=lineno)
    return v


def parse_edge_list(source: Source) -> Graph:
    raw_edges = []
    seen = set()
    ids = set()
    for lineno, line in _lines(source):
        toks = line.split()
        if len(toks) != 2:
            raise GraphFormatError(f"expected 'u v', got {line!r}", line=lineno)
        u, v = (_parse_id(t, lineno) for t in toks)
        if u == v:
            raise GraphFormatError(f"self-loop at vertex {u} rejected", line=lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(f"parallel edge {key} rejected", line=lineno)
        seen.add(key)
        ids.update(key)
        raw_edges.append(key)
    labels = sorted(ids)
    index = {lab: i for i, lab in enumerate(labels)}
    return Graph.from_edges(len(labels), [(index[u], index[v]) for u, v in raw_edges], labels=labels)


def parse_rotation_system(source: Source) -> RotationSystem:
    rows: dict[int, list[int]] = {}
    where: dict[int, int] = {}
    for lineno, line in _lines(source):
        if ":" not in line:
            raise GraphFormatError(f"expected 'v: a b c ...', got {line!r}", line=lineno)
        head, tail = line.split(":", 1)
        v = _parse_id(head.strip(), lineno)
        if v in rows:
            raise GraphFormatError(f"vertex {v} listed twice", line=lineno)
        nbrs = [_parse_id(t, lineno) for t in tail.split()]
        if v in nbrs:
            raise GraphFormatError(f"self-loop at vertex {v} rejected", line=lineno)
        if len(set(nbrs)) != len(nbrs):
            raise GraphFormatError(f"parallel edge at vertex {v} rejected", line=lineno)
        rows[v] = nbrs
        where[v] = lineno
    ids = set(rows)
    for v, nbrs in rows.items():
        for u in nbrs:
            if u not in rows or v not in rows[u]:
                raise GraphFormatError(f"asymmetric adjacency: {v}->{u} without {u}->{v}", line=where[v])
    labels = sorted(ids)
    index = {lab: i for i, lab in enumerate(labels)}
    rotations = [[index[u] for u in rows[lab]] for lab in labels]
    return RotationSystem.from_rotations(rotations, labels=labels)


def load_graph(source: Source, format: str = EDGE_LIST):
    """Parse ``source`` as an edge list (-> Graph) or rotation file (-> RotationSystem)."""
    if format in (EDGE_LIST, "edges", "el"):
        return parse_edge_list(source)
    if format in (ROTATION, "rotation", "rot"):
        return parse_rotation_system(source)
    raise ValueError(f"unknown graph format {format!r}")


def read_graph_file(path: str, format: str | None = None):
    """Load from a path; the format defaults by content (any ':' means rotation file)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if format is None:
        text = data.decode("utf-8")
        has_colon = any(":" in line.split("#", 1)[0] for line in text.splitlines())
        format = ROTATION if has_colon else EDGE_LIST
    return load_graph(data, format)


def dumps_edge_list(g: Graph) -> str:
    return g.canonical_text()


def dumps_rotation_system(r: RotationSystem) -> str:
    return r.canonical_text()


def graph_hash(g: Graph) -> str:
    """SHA-256 of the canonical edge list (``n`` header then ``u v`` rows)."""
    h = hashlib.sha256()
    h.update(f"n {g.n}\n".encode())
    buf = _io.StringIO()
    np.savetxt(buf, g.edges, fmt="%d")
    h.update(buf.getvalue().encode())
    return h.hexdigest()
