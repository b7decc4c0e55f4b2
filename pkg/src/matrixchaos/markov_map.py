"""Classical Poincaré-Markov map ``B(E) = |U(E)|**2`` and its spectrum."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EigensolveFailure
from .quantum_poincare import QuantumMap

STOCHASTIC_TOL = 1e-12
MIXING_TOL = 1e-10
MINUS_ONE_TOL = 1e-8
DENSE_EIG_LIMIT = 2048


@dataclass(frozen=True, eq=False)
class MarkovMap:
    """Bi-stochastic transition matrix; ``matrix[e', e]`` is the probability of e -> e'."""

    energy: complex
    matrix: np.ndarray
    edges: np.ndarray

    @property
    def D(self) -> int:
        return self.matrix.shape[0]

    def stochasticity_error(self) -> float:
        B = self.matrix
        return float(max(np.max(np.abs(B.sum(0) - 1)), np.max(np.abs(B.sum(1) - 1))))


@dataclass(frozen=True, eq=False)
class MarkovSpectrum:
    """Eigenvalues of B with the Frobenius eigenvalue first.

    ``vectors`` holds unit-norm right eigenvectors in the same order (None
    when only the leading part of the spectrum was computed).
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray | None
    gap: float
    mixing: bool
    minus_one_present: bool

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "gap": self.gap,
            "mixing": self.mixing,
            "minus_one_present": self.minus_one_present,
        }


def build_B(U: QuantumMap) -> MarkovMap:
    B = np.abs(U.matrix) ** 2
    return MarkovMap(U.energy, B, U.edges)


def evolve(B: MarkovMap, p0, n: int) -> np.ndarray:
    """Edge distribution after ``n`` steps of ``p <- B p``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    p = np.asarray(p0, dtype=float).copy()
    if p.shape != (B.D,):
        raise ValueError(f"distribution must have length {B.D}")
    if np.any(p < 0) or abs(p.sum() - 1) > STOCHASTIC_TOL:
        raise ValueError("p0 must be a probability vector")
    for _ in range(n):
        p = B.matrix @ p
    return p


def return_probability(B: MarkovMap, e: int, n: int) -> float:
    """``(B**n)[e, e]``: probability of being back on edge ``e`` after n steps."""
    if n < 1:
        raise ValueError("n must be positive")
    start = np.zeros(B.D)
    start[e] = 1.0
    return float(evolve(B, start, n)[e])


def _leading_eigs(B: np.ndarray, k: int = 6, maxiter: int = 10_000) -> np.ndarray:
    from scipy.sparse.linalg import ArpackNoConvergence, eigs

    try:
        vals = eigs(B, k=k, which="LM", maxiter=maxiter, return_eigenvectors=False)
    except ArpackNoConvergence as exc:
        raise EigensolveFailure(f"ARPACK did not converge for D={B.shape[0]}") from exc
    return vals


def spectrum_B(B: MarkovMap, full: bool | None = None) -> MarkovSpectrum:
    """Spectrum, gap and mixing flags of a bi-stochastic matrix.

    Dense eigendecomposition up to D = 2048, otherwise the leading
    eigenvalues only (``vectors`` is then None).
    """
    if full is None:
        full = B.D <= DENSE_EIG_LIMIT
    vecs = None
    try:
        if full:
            vals, vecs = np.linalg.eig(B.matrix)
        else:
            vals = _leading_eigs(B.matrix)
    except np.linalg.LinAlgError as exc:
        raise EigensolveFailure(f"eigendecomposition of B failed: {exc}") from exc
    i1 = int(np.argmin(np.abs(vals - 1.0)))
    order = np.concatenate(([i1], [i for i in np.argsort(-np.abs(vals)) if i != i1]))
    vals = vals[order]
    if vecs is not None:
        vecs = vecs[:, order]
        vecs = vecs / np.linalg.norm(vecs, axis=0)
    rest = np.abs(vals[1:])
    gap = float(max(0.0, 1.0 - rest.max())) if len(rest) else 1.0
    return MarkovSpectrum(
        eigenvalues=vals,
        vectors=vecs,
        gap=gap,
        mixing=gap > MIXING_TOL,
        minus_one_present=bool(np.any(np.abs(vals + 1.0) < MINUS_ONE_TOL)),
    )


def to_csv(B: MarkovMap) -> str:
    """Dense CSV export, one row of B per line."""
    return "".join(",".join(f"{x:.17g}" for x in row) + "\n" for row in B.matrix)
