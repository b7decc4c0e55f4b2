"""Quantum Poincaré map U(E) on directed edges and its secular function.

At every vertex v the incoming edge amplitudes are scattered into the
outgoing ones by a d_v x d_v unitary ``sigma^(v)(E)``.  Gluing the vertex
blocks together with the edge-reversal permutation P gives the D x D unitary
``U(E) = P Sigma(E)``.  Fixed points ``a = U(E) a`` exist exactly when E is
an eigenvalue of H, and

    det(I - U(E)) = 2**(D/2) det(H - E) / prod_v (H_vv - E - i Gamma_v).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import GridTooCoarse, InconsistentAmplitudes, NotBipartiteError
from .hermitian_graph import (
    GraphStructure,
    HermitianMatrix,
    PolarEntries,
    bipartition,
    gershgorin,
    polar_entries,
)

UNITARITY_TOL = 1e-12
ROOT_XTOL = 1e-12
MULTIPLICITY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class VertexScattering:
    vertex: int
    energy: complex
    neighbors: np.ndarray
    matrix: np.ndarray


@dataclass(frozen=True, eq=False)
class QuantumMap:
    """Unitary map on edge amplitudes.

    ``edges`` lists the canonical indices of the edges the map acts on (all
    of them unless the map is a bipartite reduction).  ``reverse`` and
    ``sigma`` hold the factorisation ``U = P Sigma``; both are None for a
    reduced map.
    """

    energy: complex
    matrix: np.ndarray
    edges: np.ndarray
    reverse: Optional[np.ndarray] = None
    sigma: Optional[np.ndarray] = None

    @property
    def D(self) -> int:
        return self.matrix.shape[0]

    @property
    def P(self) -> np.ndarray:
        if self.reverse is None:
            raise ValueError("reduced map carries no P factor")
        P = np.zeros((self.D, self.D))
        P[self.reverse, np.arange(self.D)] = 1.0
        return P

    def unitarity_error(self) -> float:
        U = self.matrix
        return float(np.max(np.abs(U.conj().T @ U - np.eye(self.D))))


@dataclass(frozen=True)
class SecularValue:
    """``zeta = det(I - U(E))`` next to its closed-form counterpart."""

    energy: complex
    zeta: complex
    comparison: complex
    constant: float

    @property
    def relative_error(self) -> float:
        return abs(self.zeta - self.comparison) / max(1.0, abs(self.zeta))


@dataclass(frozen=True)
class SpectrumRoot:
    root: float
    multiplicity: int
    residual: float


def _denominators(H: HermitianMatrix, E) -> np.ndarray:
    return H.diagonal - E - 1j * gershgorin(H).radius


def vertex_sigma(
    H: HermitianMatrix, g: GraphStructure, v: int, E, polar: PolarEntries | None = None
) -> VertexScattering:
    """Scattering matrix at vertex ``v``; rows are outgoing, columns incoming neighbours."""
    polar = polar or polar_entries(H, g)
    nb = g.neighbors(v)
    h = polar.h_matrix[v, nb]
    gam = polar.gamma_matrix
    den = _denominators(H, E)[v]
    # phase gamma_{v w} of the incoming edge, gamma_{w' v} of the outgoing one
    phase = np.exp(1j * (gam[v, nb][None, :] + gam[nb, v][:, None]))
    sigma = 1j * np.eye(len(nb)) - 2.0 * np.sqrt(np.outer(h, h)) / den * phase
    return VertexScattering(v, E, nb, sigma)


def assemble_U(
    H: HermitianMatrix, g: GraphStructure, E, polar: PolarEntries | None = None
) -> QuantumMap:
    """Quantum Poincaré map in canonical edge order.

    ``U[e', e]`` is the amplitude to continue from edge ``e`` into edge
    ``e'``; it vanishes unless ``o(e') == tau(e)``.
    """
    polar = polar or polar_entries(H, g)
    den = _denominators(H, E)
    out_idx, in_idx = np.nonzero(g.successor_mask())
    h, gam = polar.magnitude, polar.half_phase
    vals = -2.0 * np.sqrt(h[out_idx] * h[in_idx]) / den[g.terminus[in_idx]]
    vals = vals * np.exp(1j * (gam[out_idx] + gam[in_idx]))
    vals = vals + 1j * (out_idx == g.reverse[in_idx])
    U = np.zeros((g.D, g.D), dtype=complex)
    U[out_idx, in_idx] = vals
    sigma = U[g.reverse]
    return QuantumMap(E, U, np.arange(g.D), g.reverse, sigma)


def _slogdet_I_minus(U: np.ndarray) -> tuple[complex, float]:
    return np.linalg.slogdet(np.eye(U.shape[0]) - U)


def secular(H: HermitianMatrix, g: GraphStructure, E) -> SecularValue:
    """Evaluate ``det(I - U(E))`` and the closed-form right-hand side.

    The constant is ``2**(D/2)``, applied in log space so large graphs do not
    overflow before the ratio is formed.
    """
    U = assemble_U(H, g, E).matrix
    s, logabs = _slogdet_I_minus(U)
    zeta = s * np.exp(logabs)
    sh, logh = np.linalg.slogdet(H.data - E * np.eye(H.V))
    den = _denominators(H, E)
    log_rhs = 0.5 * g.D * np.log(2.0) + logh - np.sum(np.log(np.abs(den)))
    phase = sh * np.exp(-1j * np.sum(np.angle(den)))
    comparison = phase * np.exp(log_rhs) if sh != 0 else 0.0
    return SecularValue(E, complex(zeta), complex(comparison), 2.0 ** (g.D / 2))


class _SecularScan:
    """Real-valued, phase-corrected secular function on the real axis.

    Multiplying ``det(I - U(E))`` by the unimodular phase of the known
    denominator leaves a real function whose sign flips at every simple
    eigenvalue of H.
    """

    def __init__(self, H: HermitianMatrix, g: GraphStructure):
        self.H, self.g = H, g
        self.polar = polar_entries(H, g)
        self.diag = H.diagonal
        self.radius = gershgorin(H).radius

    def U(self, E: float) -> np.ndarray:
        return assemble_U(self.H, self.g, E, self.polar).matrix

    def evaluate(self, E: float) -> tuple[float, float]:
        s, logabs = _slogdet_I_minus(self.U(E))
        s = s * np.exp(1j * np.sum(np.angle(self.diag - E - 1j * self.radius)))
        return float(np.sign(s.real)) if abs(s) > 0 else 0.0, float(logabs)

    def sigma_min(self, E: float) -> np.ndarray:
        return np.linalg.svd(np.eye(self.g.D) - self.U(E), compute_uv=False)

    def bisect(self, lo: float, hi: float, s_lo: float) -> float:
        while hi - lo > ROOT_XTOL:
            mid = 0.5 * (lo + hi)
            s_mid, _ = self.evaluate(mid)
            if s_mid == 0.0:
                return mid
            if s_mid == s_lo:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


def find_spectrum(
    H: HermitianMatrix,
    g: GraphStructure,
    window: tuple[float, float],
    grid: float,
) -> list[SpectrumRoot]:
    """Real zeros of the secular function inside ``window``.

    The window is scanned with step ``grid``.  Sign changes of the
    phase-corrected determinant are refined by bisection; grid-local minima
    of ``|zeta|`` without a sign change are searched for close root pairs
    and even-multiplicity roots.  Multiplicity is the number of singular
    values of ``I - U`` below 1e-8 at the root.
    """
    lo, hi = map(float, window)
    if not grid > 0:
        raise ValueError("grid step must be positive")
    if hi <= lo:
        return []
    scan = _SecularScan(H, g)
    n = max(2, int(np.ceil((hi - lo) / grid)) + 1)
    Es = np.linspace(lo, hi, n)
    vals = [scan.evaluate(E) for E in Es]
    signs = np.array([v[0] for v in vals])
    logs = np.array([v[1] for v in vals])

    found: list[float] = []
    for k in range(n - 1):
        if signs[k] == 0.0:
            found.append(Es[k])
        elif signs[k + 1] != 0.0 and signs[k] != signs[k + 1]:
            found.append(scan.bisect(Es[k], Es[k + 1], signs[k]))
    if signs[-1] == 0.0:
        found.append(Es[-1])

    for k in range(1, n - 1):
        # a symmetric grid can straddle a root with two equal values
        if not (logs[k] < logs[k - 1] and logs[k] <= logs[k + 1]):
            continue
        if signs[k - 1] != signs[k] or signs[k] != signs[k + 1]:
            continue
        a, b = Es[k - 1], Es[k + 1]
        res = minimize_scalar(
            lambda E: scan.sigma_min(E)[-1], bounds=(a, b), method="bounded",
            options={"xatol": ROOT_XTOL},
        )
        Em = float(res.x)
        s_m, _ = scan.evaluate(Em)
        if s_m != 0.0 and s_m != signs[k]:
            found.append(scan.bisect(a, Em, signs[k]))
            found.append(scan.bisect(Em, b, s_m))
        elif res.fun < MULTIPLICITY_TOL:
            found.append(Em)

    roots = []
    found.sort()
    found = [E for i, E in enumerate(found) if i == 0 or E - found[i - 1] > 10 * ROOT_XTOL]
    for E in found:
        sv = scan.sigma_min(E)
        mult = max(1, int(np.sum(sv < MULTIPLICITY_TOL)))
        roots.append(SpectrumRoot(float(E), mult, float(sv[-1])))
    for r0, r1 in zip(roots, roots[1:]):
        if r1.root - r0.root < 2 * grid:
            warnings.warn(
                f"roots {r0.root:.10g} and {r1.root:.10g} closer than 2*grid; "
                "refine the grid to resolve them",
                GridTooCoarse,
                stacklevel=2,
            )
            break
    return roots


def gershgorin_window(H: HermitianMatrix, pad: float = 1e-6) -> tuple[float, float]:
    """Interval containing every Gershgorin disc of H."""
    r = gershgorin(H).radius
    d = H.diagonal
    return float(np.min(d - r) - pad), float(np.max(d + r) + pad)


def bipartite_reduce(
    U: QuantumMap, g: GraphStructure, parts: np.ndarray | None = None
) -> QuantumMap:
    """Half-size map ``U_u U_d`` on the edges leaving part 0.

    With edges sorted into the two crossing directions the map has the block
    form ``[[0, U_u], [U_d, 0]]``; the product of the off-diagonal blocks has
    the same secular zeros without the -1 eigenvalue that bipartiteness forces
    on ``|U|**2``.
    """
    if parts is None:
        parts = bipartition(g)
    parts = np.asarray(parts)
    if np.any(parts[g.origin] == parts[g.terminus]):
        e = int(np.flatnonzero(parts[g.origin] == parts[g.terminus])[0])
        raise NotBipartiteError(
            f"edge {g.origin[e]}->{g.terminus[e]} joins vertices in the same part"
        )
    up = np.flatnonzero(parts[g.origin] == 0)
    down = np.flatnonzero(parts[g.origin] == 1)
    M = U.matrix
    reduced = M[np.ix_(up, down)] @ M[np.ix_(down, up)]
    return QuantumMap(U.energy, reduced, up)


def fixed_point(U: QuantumMap) -> np.ndarray:
    """Unit vector minimising ``|U a - a|`` (a true fixed point at a spectrum point)."""
    _, _, vh = np.linalg.svd(np.eye(U.D) - U.matrix)
    return vh[-1].conj()


def reconstruct_wavefunction(
    a: np.ndarray,
    H: HermitianMatrix,
    g: GraphStructure,
    E: float,
    tol: float = 1e-8,
) -> np.ndarray:
    """Vertex amplitudes recovered from edge amplitudes.

    Every edge incident to a vertex yields its own estimate of ``phi_v``; the
    estimates must agree to ``tol`` relative to the largest amplitude.
    """
    a = np.asarray(a, dtype=complex)
    if a.shape != (g.D,):
        raise ValueError(f"expected {g.D} edge amplitudes")
    polar = polar_entries(H, g)
    U = assemble_U(H, g, E, polar).matrix
    scale = np.linalg.norm(a)
    if scale == 0:
        raise InconsistentAmplitudes("zero amplitude vector")
    if np.linalg.norm(U @ a - a) > tol * scale:
        raise InconsistentAmplitudes(
            f"|U a - a| = {np.linalg.norm(U @ a - a):.3e}: not a fixed point of U({E})"
        )
    h, gam = polar.magnitude, polar.half_phase
    a_rev = a[g.reverse]
    w45 = np.exp(1j * np.pi / 4)
    # e = (v, w): a_vw = a[e], a_wv = a_rev[e]; estimate of phi at the terminus v
    est = np.exp(1j * gam) / np.sqrt(h) * (a_rev * w45 + a / w45)
    phi = np.zeros(g.V, dtype=complex)
    counts = np.bincount(g.terminus, minlength=g.V)
    np.add.at(phi, g.terminus, est)
    phi /= counts
    spread = np.max(np.abs(est - phi[g.terminus]))
    if spread > tol * np.max(np.abs(phi)):
        raise InconsistentAmplitudes(f"per-edge estimates of phi disagree by {spread:.3e}")
    return phi
