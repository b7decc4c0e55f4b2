"""Hermitian matrix ingestion and the graph hidden in its sparsity pattern.

A V x V Hermitian matrix H defines an undirected graph on V vertices with an
edge wherever an off-diagonal entry is non-zero.  Each undirected edge gives
two directed edges ``e = (v, w)`` with origin ``o(e) = w`` and terminus
``tau(e) = v``; these D directed edges are the phase space of the classical
dynamics built in :mod:`matrixchaos.markov_map`.

Directed edges are stored in a canonical order, sorted by ``(origin,
terminus)``, and every edge-space matrix in the package uses that order.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    DisconnectedError,
    EmptyGraphError,
    HermiticityError,
    NotBipartiteError,
    ParseError,
)

HERMITICITY_TOL = 1e-12
DEFAULT_ZERO_THRESHOLD = 1e-14


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """Validated Hermitian matrix.

    Use :meth:`from_array` or :func:`load_matrix` rather than the constructor;
    they run the Hermiticity, emptiness and connectivity checks.
    """

    data: np.ndarray
    zero_threshold: float = DEFAULT_ZERO_THRESHOLD

    @classmethod
    def from_array(
        cls,
        a,
        zero_threshold: float = DEFAULT_ZERO_THRESHOLD,
        tol: float = HERMITICITY_TOL,
    ) -> "HermitianMatrix":
        a = np.asarray(a, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ParseError(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ParseError("matrix contains non-finite entries")
        asym = np.max(np.abs(a - a.conj().T))
        if asym > tol:
            raise HermiticityError(f"max |H - H^dagger| = {asym:.3e} exceeds {tol:g}")
        h = 0.5 * (a + a.conj().T)
        np.fill_diagonal(h, h.diagonal().real)
        # sub-threshold off-diagonal entries are not edges, drop them outright
        off = ~np.eye(len(h), dtype=bool)
        h[off & (np.abs(h) <= zero_threshold)] = 0.0
        out = cls(_frozen(h), float(zero_threshold))
        _check_graph(out)
        return out

    @property
    def V(self) -> int:
        return self.data.shape[0]

    @property
    def triplets(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Sparse (row, col, value) representation of the non-zero entries."""
        rows, cols = np.nonzero(self.data)
        return rows, cols, self.data[rows, cols]

    @property
    def diagonal(self) -> np.ndarray:
        return self.data.diagonal().real

    def adjacency(self) -> np.ndarray:
        a = np.abs(self.data) > self.zero_threshold
        np.fill_diagonal(a, False)
        return a

    def to_document(self) -> dict:
        """Matrix document (triplet form) accepted by :func:`load_matrix`."""
        rows, cols, vals = self.triplets
        entries = [
            [int(r), int(c), float(z.real), float(z.imag)]
            for r, c, z in zip(rows, cols, vals)
        ]
        return {"v": self.V, "entries": entries, "zero_threshold": self.zero_threshold}


def _check_graph(H: HermitianMatrix) -> None:
    adj = H.adjacency()
    if not adj.any():
        raise EmptyGraphError("matrix has no non-vanishing off-diagonal entries (D = 0)")
    if H.V > 1:
        n, _ = connected_components(csr_matrix(adj), directed=False)
        if n > 1:
            raise DisconnectedError(f"matrix is block-diagonal: graph has {n} components")


def _parse_document(doc: Mapping[str, Any]) -> tuple[np.ndarray, float]:
    try:
        V = int(doc["v"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError("document needs an integer field 'v'") from exc
    if V <= 0:
        raise ParseError("'v' must be positive")
    thr = float(doc.get("zero_threshold", DEFAULT_ZERO_THRESHOLD))
    a = np.zeros((V, V), dtype=complex)
    if "dense" in doc:
        dense = np.asarray(doc["dense"], dtype=float)
        if dense.shape != (V * V, 2):
            raise ParseError(f"'dense' must hold {V * V} [re, im] pairs")
        return (dense[:, 0] + 1j * dense[:, 1]).reshape(V, V), thr
    if "entries" not in doc:
        raise ParseError("document needs 'entries' or 'dense'")
    seen = set()
    for item in doc["entries"]:
        if len(item) != 4:
            raise ParseError(f"entry {item!r} is not [row, col, re, im]")
        r, c = int(item[0]), int(item[1])
        if not (0 <= r < V and 0 <= c < V):
            raise ParseError(f"entry index ({r}, {c}) out of range for v={V}")
        if (r, c) in seen:
            raise ParseError(f"duplicate entry ({r}, {c})")
        seen.add((r, c))
        a[r, c] = complex(float(item[2]), float(item[3]))
    if doc.get("symmetrize", False):
        for r, c in seen:
            if (c, r) not in seen:
                a[c, r] = np.conj(a[r, c])
    return a, thr


def load_matrix(source) -> HermitianMatrix:
    """Load and validate a matrix document.

    ``source`` may be a mapping, a JSON string, or a path to a JSON file.
    """
    if isinstance(source, Mapping):
        doc = source
    else:
        text = source
        if isinstance(source, os.PathLike) or (
            isinstance(source, str) and not source.lstrip().startswith("{")
        ):
            try:
                with open(source) as fh:
                    text = fh.read()
            except OSError as exc:
                raise ParseError(f"cannot read {source}: {exc}") from exc
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON: {exc}") from exc
        if not isinstance(doc, Mapping):
            raise ParseError("document must be a JSON object")
    a, thr = _parse_document(doc)
    return HermitianMatrix.from_array(a, zero_threshold=thr)


@dataclass(frozen=True, eq=False)
class GraphStructure:
    """Underlying graph of a Hermitian matrix, with directed-edge bookkeeping.

    ``origin[e]`` and ``terminus[e]`` give the endpoints of directed edge
    ``e``; ``reverse[e]`` is the index of the same edge traversed backwards.
    """

    V: int
    adjacency: np.ndarray
    degrees: np.ndarray
    origin: np.ndarray
    terminus: np.ndarray
    reverse: np.ndarray

    @property
    def D(self) -> int:
        return len(self.origin)

    def index(self, terminus: int, origin: int) -> int:
        """Canonical index of the directed edge ``(terminus, origin)``."""
        # edges are sorted by (origin, terminus)
        key = origin * self.V + terminus
        keys = self.origin * self.V + self.terminus
        i = int(np.searchsorted(keys, key))
        if i == len(keys) or keys[i] != key:
            raise KeyError(f"no directed edge ({terminus}, {origin})")
        return i

    def incoming(self, v: int) -> np.ndarray:
        """Edges ending at ``v``, ordered by origin."""
        return np.flatnonzero(self.terminus == v)

    def outgoing(self, v: int) -> np.ndarray:
        """Edges leaving ``v``, ordered by terminus."""
        return np.flatnonzero(self.origin == v)

    def neighbors(self, v: int) -> np.ndarray:
        return np.flatnonzero(self.adjacency[v])

    def successor_mask(self) -> np.ndarray:
        """Boolean D x D matrix, ``M[e', e]`` true when ``o(e') == tau(e)``."""
        return self.origin[:, None] == self.terminus[None, :]


def build_graph(H: HermitianMatrix) -> GraphStructure:
    A = H.adjacency()
    # column-major nonzero gives (origin, terminus) lexicographic order
    origin, terminus = np.nonzero(A.T)
    order = np.lexsort((terminus, origin))
    origin, terminus = origin[order], terminus[order]
    keys = origin * H.V + terminus
    reverse = np.searchsorted(keys, terminus * H.V + origin)
    return GraphStructure(
        V=H.V,
        adjacency=_frozen(A),
        degrees=_frozen(A.sum(axis=1)),
        origin=_frozen(origin),
        terminus=_frozen(terminus),
        reverse=_frozen(reverse),
    )


@dataclass(frozen=True, eq=False)
class PolarEntries:
    """Magnitudes ``h`` and half-phases ``gamma`` with ``H_vw = h exp(2i gamma)``.

    Per-edge arrays follow the canonical edge order; ``h_matrix`` and
    ``gamma_matrix`` hold the same data indexed by ``(v, w)``.
    """

    magnitude: np.ndarray
    half_phase: np.ndarray
    h_matrix: np.ndarray
    gamma_matrix: np.ndarray


def polar_entries(H: HermitianMatrix, g: GraphStructure) -> PolarEntries:
    """Polar decomposition of the off-diagonal entries.

    For ``v < w`` the half-phase of ``H_vw`` lies in ``(-pi/2, pi/2]`` (so a
    negative real entry gets ``pi/2``); the mirrored entry carries the
    opposite half-phase, ``gamma_wv = -gamma_vw``.  Keeping the pair
    antisymmetric is what makes the vertex scattering matrices compose to a
    map whose fixed points are exactly the eigenvectors of H.
    """
    h = np.abs(H.data) * g.adjacency
    upper = np.triu(g.adjacency, 1)
    gam = np.where(upper, np.angle(H.data) / 2.0, 0.0)
    gam = gam - gam.T
    v, w = g.terminus, g.origin
    return PolarEntries(
        magnitude=_frozen(h[v, w]),
        half_phase=_frozen(gam[v, w]),
        h_matrix=_frozen(h),
        gamma_matrix=_frozen(gam),
    )


@dataclass(frozen=True, eq=False)
class GershgorinData:
    """``H = -L + W`` with ``L_vw = Gamma_v delta_vw - H_vw (1 - delta_vw)``."""

    radius: np.ndarray
    laplacian: np.ndarray
    potential: np.ndarray

    @property
    def W(self) -> np.ndarray:
        return np.diag(self.potential)


def gershgorin(H: HermitianMatrix) -> GershgorinData:
    off = H.data.copy()
    np.fill_diagonal(off, 0.0)
    radius = np.abs(off).sum(axis=1)
    L = np.diag(radius).astype(complex) - off
    return GershgorinData(
        radius=_frozen(radius),
        laplacian=_frozen(L),
        potential=_frozen(H.diagonal + radius),
    )


def bipartition(g: GraphStructure) -> np.ndarray:
    """Two-colouring of the vertices (0/1 labels), vertex 0 in part 0.

    Raises NotBipartiteError when the graph has an odd cycle.
    """
    color = np.full(g.V, -1)
    color[0] = 0
    stack = [0]
    while stack:
        v = stack.pop()
        for w in g.neighbors(v):
            if color[w] < 0:
                color[w] = 1 - color[v]
                stack.append(w)
            elif color[w] == color[v]:
                raise NotBipartiteError(f"odd cycle through vertices {v} and {w}")
    return color


def is_bipartite(g: GraphStructure) -> bool:
    try:
        bipartition(g)
    except NotBipartiteError:
        return False
    return True
