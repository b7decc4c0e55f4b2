"""Example matrix families: regular graphs, a spin-graph Hamiltonian, GβE."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DimensionCap, InfeasibleSpec, ZeroVector
from .hermitian_graph import HermitianMatrix

SPIN_CAP = 12

# couplings of the four-spin example, 1-based spin labels
DEMO_COUPLINGS = {
    (1, 2): 1 / 3,
    (1, 3): np.sqrt(5) / 3,
    (2, 3): np.sqrt(11) / 3,
    (2, 4): 1 / np.sqrt(3),
}


def regular_transmission(d: int, E) -> tuple[np.ndarray, np.ndarray]:
    """Transmission and reflection probabilities at a vertex of a d-regular adjacency graph."""
    E = np.asarray(E, dtype=float)
    p_t = 4.0 / (E**2 + d**2)
    return p_t, 1.0 - (d - 1) * p_t


def _xlogx(p):
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    np.multiply(p, np.log(p, where=p > 0, out=np.zeros_like(p)), out=out, where=p > 0)
    return out


def regular_lyapunov_closed_form(d: int, E):
    """Mean (= local) exponent for H equal to a d-regular adjacency matrix."""
    if d < 2:
        raise ValueError("d must be at least 2")
    p_t, p_r = regular_transmission(d, E)
    lam = -_xlogx(p_r) - (d - 1) * _xlogx(p_t)
    return float(lam) if np.ndim(lam) == 0 else lam


def regular_lyapunov_at_zero(d: int) -> float:
    """Closed form of the d-regular exponent at E = 0."""
    if d < 3:
        raise ValueError("formula needs d >= 3")
    return float(
        2 * (d - 2) ** 2 / d**2 * np.log(d / (d - 2)) + 8 * (d - 1) / d**2 * np.log(d / 2)
    )


def regular_maximum(d: int) -> tuple[float, float]:
    """Energy (positive branch) and value of the maximal exponent."""
    if d <= 4:
        return float(np.sqrt(d * (4 - d))), float(np.log(d))
    return 0.0, regular_lyapunov_at_zero(d)


@dataclass(frozen=True)
class RegularGraphSpec:
    d: int
    V: int
    kind: Literal["complete", "circulant", "random"] = "circulant"
    seed: int = 0
    max_tries: int = 1000


def _circulant(d: int, V: int) -> np.ndarray:
    A = np.zeros((V, V))
    idx = np.arange(V)
    for s in range(1, d // 2 + 1):
        A[idx, (idx + s) % V] = 1
        A[(idx + s) % V, idx] = 1
    if d % 2:
        A[idx, (idx + V // 2) % V] = 1
    return A


def _random_regular(d: int, V: int, rng: np.random.Generator, max_tries: int) -> np.ndarray:
    # Steger-Wormald: pair random stubs, rejecting loops and multi-edges as they arise
    for _ in range(max_tries):
        A = np.zeros((V, V))
        stubs = np.repeat(np.arange(V), d)
        while len(stubs):
            for _ in range(100):
                i, j = rng.choice(len(stubs), 2, replace=False)
                u, w = stubs[i], stubs[j]
                if u != w and not A[u, w]:
                    break
            else:
                break
            A[u, w] = A[w, u] = 1
            stubs = np.delete(stubs, [i, j])
        if len(stubs) == 0 and connected_components(csr_matrix(A), directed=False)[0] == 1:
            return A
    raise InfeasibleSpec(f"no simple connected {d}-regular graph on {V} vertices in {max_tries} tries")


def build_regular(spec: RegularGraphSpec) -> HermitianMatrix:
    """Adjacency matrix of a connected d-regular graph."""
    d, V = spec.d, spec.V
    if d < 2 or d >= V or (d * V) % 2:
        raise InfeasibleSpec(f"no {d}-regular graph on {V} vertices")
    if spec.kind == "complete":
        if d != V - 1:
            raise InfeasibleSpec("complete graph needs d = V - 1")
        A = np.ones((V, V)) - np.eye(V)
    elif spec.kind == "circulant":
        A = _circulant(d, V)
    elif spec.kind == "random":
        A = _random_regular(d, V, np.random.default_rng(spec.seed), spec.max_tries)
    else:
        raise InfeasibleSpec(f"unknown construction {spec.kind!r}")
    return HermitianMatrix.from_array(A)


@dataclass(frozen=True)
class SpinGraphSpec:
    """``couplings`` maps 1-based spin pairs ``(v, w)`` to ``J_vw``."""

    n_spins: int = 4
    couplings: dict = field(default_factory=lambda: dict(DEMO_COUPLINGS))
    alpha: float = 1.0


_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]]),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _site_op(op: str, v: int, n: int) -> np.ndarray:
    # spin 1 is the most significant tensor factor
    out = np.ones((1, 1), dtype=complex)
    for k in range(1, n + 1):
        out = np.kron(out, _PAULI[op] if k == v else np.eye(2))
    return out


def spin_hamiltonian_parts(spec: SpinGraphSpec) -> tuple[np.ndarray, np.ndarray]:
    """Field term ``sum_v sz`` and interaction ``sum J (xx + yy + xz + zx)``."""
    n = spec.n_spins
    if n > SPIN_CAP:
        raise DimensionCap(f"{n} spins exceeds the dense cap of {SPIN_CAP}")
    if n < 2:
        raise InfeasibleSpec("need at least two spins")
    ops = {(o, v): _site_op(o, v, n) for o in "xyz" for v in range(1, n + 1)}
    H0 = sum(ops["z", v] for v in range(1, n + 1))
    HI = np.zeros_like(H0)
    for (v, w), J in spec.couplings.items():
        if not (1 <= v <= n and 1 <= w <= n) or v == w:
            raise InfeasibleSpec(f"bad spin pair ({v}, {w})")
        HI = HI + J * (
            ops["x", v] @ ops["x", w]
            + ops["y", v] @ ops["y", w]
            + ops["x", v] @ ops["z", w]
            + ops["z", v] @ ops["x", w]
        )
    return H0.real, HI.real


def build_spin_hamiltonian(spec: SpinGraphSpec, zero_threshold: float = 1e-14) -> HermitianMatrix:
    """``H = H0/(1+alpha) + alpha HI/(1+alpha)`` in the product sz basis."""
    if not spec.alpha > 0:
        raise InfeasibleSpec("alpha must be positive")
    H0, HI = spin_hamiltonian_parts(spec)
    a = spec.alpha
    return HermitianMatrix.from_array(H0 / (1 + a) + a / (1 + a) * HI, zero_threshold)


def participation_ratio(phi) -> float:
    """``1 / sum |phi_v|**4`` of the normalised vector, between 1 and V."""
    p = np.abs(np.asarray(phi)) ** 2
    s = p.sum()
    if s == 0:
        raise ZeroVector("participation ratio of the zero vector")
    p = p / s
    return float(1.0 / np.sum(p**2))


@dataclass(frozen=True)
class GbetaESpec:
    V: int
    beta: float
    seed: int = 0
    mode: Literal["sample", "mean-field"] = "sample"


def gbe_offdiagonal(beta: float, n, size=None, rng=None):
    """Draws of ``b_n`` with ``b_n**2 ~ Gamma(beta n / 2, 1)``."""
    rng = rng or np.random.default_rng()
    return np.sqrt(rng.gamma(beta * np.asarray(n) / 2.0, 1.0, size=size))


def gbe_mean_offdiagonal(beta: float, n) -> np.ndarray:
    """Large-n mean of ``b_n``: ``sqrt(beta n / 2) (1 - 1/(4 beta n))``."""
    n = np.asarray(n, dtype=float)
    return np.sqrt(beta * n / 2) * (1 - 1 / (4 * beta * n))


def gbe_sample(spec: GbetaESpec) -> HermitianMatrix:
    """Tridiagonal GβE matrix; ``H[n-1, n] = b_n`` for ``n = 1 .. V-1``."""
    if spec.mode != "sample":
        return gbe_mean_field(spec.V, spec.beta)
    if spec.V < 2 or not spec.beta > 0:
        raise InfeasibleSpec("need V >= 2 and beta > 0")
    rng = np.random.default_rng(spec.seed)
    a = rng.standard_normal(spec.V)
    b = gbe_offdiagonal(spec.beta, np.arange(1, spec.V), rng=rng)
    return HermitianMatrix.from_array(np.diag(a) + np.diag(b, 1) + np.diag(b, -1))


def gbe_mean_field(V: int, beta: float) -> HermitianMatrix:
    """Zero-diagonal tridiagonal matrix with couplings ``sqrt(beta n / 2)``."""
    if V < 2 or not beta > 0:
        raise InfeasibleSpec("need V >= 2 and beta > 0")
    b = np.sqrt(beta * np.arange(1, V) / 2.0)
    return HermitianMatrix.from_array(np.diag(b, 1) + np.diag(b, -1))


def effective_potential(n, beta: float, E: float):
    """``W_eff(n) = sqrt(2 / (beta n)) E``."""
    n = np.asarray(n, dtype=float)
    if np.any(n <= 0) or not beta > 0:
        raise ValueError("need n > 0 and beta > 0")
    return np.sqrt(2.0 / (beta * n)) * E


def turning_point(E: float, beta: float) -> float:
    """Classical turning point ``n_t = E**2 / (2 beta)``."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    return E**2 / (2.0 * beta)
