"""Lyapunov exponents of the Poincaré-Markov map.

Three independent routes are provided and cross-checked in the test suite:

* closed-form sums over the entries of B (:func:`mean_lyapunov`,
  :func:`local_lyapunov`, :func:`variance_lyapunov`),
* the thermodynamic formalism, i.e. finite-difference derivatives of the
  leading eigenvalue of ``Q(1 + eps) = B**(1 + eps)`` (:func:`thermo_lyapunov`),
* Monte Carlo sampling of edge trajectories (:func:`mc_lyapunov`).

All exponents are in nats per step and use ``0 log 0 = 0``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import DegenerateSpectrum, EigensolveFailure
from .hermitian_graph import GraphStructure, HermitianMatrix, polar_entries
from .markov_map import DENSE_EIG_LIMIT, MarkovMap, MarkovSpectrum, build_B, spectrum_B
from .quantum_poincare import assemble_U, gershgorin_window

VARIANCE_RTOL = 1e-4
MC_BATCH = 4096
MC_CHUNK = 256


def _log0(B: np.ndarray) -> np.ndarray:
    out = np.zeros_like(B, dtype=float)
    # entries within rounding of 1 are deterministic steps: log taken as exactly 0
    np.log(B, out=out, where=(B > 0) & (np.abs(B - 1.0) > 1e-14))
    return out


def mean_lyapunov(B: MarkovMap) -> float:
    """``-(1/D) sum B log B``."""
    M = B.matrix
    return float(-np.sum(M * _log0(M)) / B.D)


def local_lyapunov(B: MarkovMap, g: GraphStructure) -> tuple[np.ndarray, np.ndarray]:
    """Per-edge and per-vertex local exponents.

    ``Lambda_e`` is the entropy of the one-step distribution leaving edge e;
    ``Lambda_v`` averages it over the edges ending at v.
    """
    M = B.matrix
    per_edge = -np.sum(M * _log0(M), axis=0)
    if B.D != g.D:
        raise ValueError("local exponents need the full (unreduced) map")
    per_vertex = np.bincount(g.terminus, weights=per_edge, minlength=g.V) / g.degrees
    return per_edge, per_vertex


def q_matrix(B: MarkovMap, beta: float) -> np.ndarray:
    """Entrywise power ``B**beta`` with ``0**beta = 0``."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    M = B.matrix
    out = np.zeros_like(M)
    np.power(M, beta, out=out, where=M > 0)
    return out


def _leading_real_eigenvalue(Q: np.ndarray) -> float:
    try:
        if Q.shape[0] <= DENSE_EIG_LIMIT:
            vals = np.linalg.eigvals(Q)
        else:
            from scipy.sparse.linalg import eigs

            vals = eigs(Q, k=2, which="LR", return_eigenvectors=False)
    except Exception as exc:  # LinAlgError, ArpackNoConvergence
        raise EigensolveFailure(f"leading eigenvalue of Q failed: {exc}") from exc
    return float(vals[np.argmax(vals.real)].real)


@dataclass(frozen=True)
class ThermoCurve:
    """``mu(eps)`` on the stencil ``eps = -2h, -h, 0, h, 2h`` and its log-derivatives."""

    eps: np.ndarray
    mu: np.ndarray
    lyapunov: float
    variance: float

    @property
    def mu0(self) -> float:
        return float(self.mu[2])


def thermo_lyapunov(B: MarkovMap, eps_step: float = 1e-3) -> ThermoCurve:
    """Mean and variance from derivatives of the leading eigenvalue of ``Q(1 + eps)``.

    Central differences at steps h and 2h combined by Richardson
    extrapolation, leaving an O(h**4) truncation error.
    """
    if not 0 < eps_step <= 1e-3:
        raise ValueError("eps_step must lie in (0, 1e-3]")
    h = eps_step
    eps = np.array([-2 * h, -h, 0.0, h, 2 * h])
    mu = np.array([_leading_real_eigenvalue(q_matrix(B, 1.0 + e)) for e in eps])
    f = np.log(mu)
    d1_h = (f[3] - f[1]) / (2 * h)
    d1_2h = (f[4] - f[0]) / (4 * h)
    d2_h = (f[3] - 2 * f[2] + f[1]) / h**2
    d2_2h = (f[4] - 2 * f[2] + f[0]) / (4 * h**2)
    lyap = -(4 * d1_h - d1_2h) / 3
    var = (4 * d2_h - d2_2h) / 3
    return ThermoCurve(eps, mu, float(lyap), float(var))


@dataclass(frozen=True)
class VarianceReport:
    """Spectral variance estimates next to the thermodynamic one.

    ``spectral`` evaluates the quoted second-moment formula (unit-norm right
    eigenvectors, uniform bra) minus the squared mean.  ``biorthogonal`` is
    the exact Markov-chain variance, the same spectral sum with each
    ``|<1|G|k>|**2`` replaced by the product of left- and right-projections,
    summed in resolvent form.  ``value`` is the thermodynamic variance when
    available, the authoritative route.
    """

    spectral: float
    biorthogonal: float
    thermo: float | None
    discrepancy: float | None

    @property
    def consistent(self) -> bool:
        return self.discrepancy is None or self.discrepancy <= VARIANCE_RTOL

    @property
    def value(self) -> float:
        return self.thermo if self.thermo is not None else self.biorthogonal


def variance_lyapunov(
    B: MarkovMap,
    spec: MarkovSpectrum | None = None,
    thermo: ThermoCurve | None = None,
) -> VarianceReport:
    if spec is None:
        spec = spectrum_B(B, full=True)
    if spec.vectors is None:
        raise ValueError("variance needs the full eigendecomposition of B")
    nu = spec.eigenvalues
    if np.any(np.abs(1.0 - nu[1:]) < 1e-10):
        raise DegenerateSpectrum("eigenvalue 1 is not simple; B is reducible")
    M = B.matrix
    D = B.D
    L = _log0(M)
    BL = M * L
    lam = -BL.sum() / D
    second = np.sum(M * L**2) / D

    G = BL.T
    bra = np.full(D, 1.0 / np.sqrt(D))
    proj = bra @ G @ spec.vectors[:, 1:]
    spectral = second + 2 * np.sum(np.abs(proj) ** 2 / (1.0 - nu[1:])).real - lam**2

    m = BL.sum(axis=0)  # mean log-probability of the step leaving each edge
    w = BL.sum(axis=1)  # mean log-probability of the step entering each edge
    Pi = np.full((D, D), 1.0 / D)
    Zw = np.linalg.solve(np.eye(D) - M + Pi, w) - Pi @ w
    biorth = second - lam**2 + 2.0 / D * (m @ Zw)

    disc = None
    if thermo is not None:
        disc = abs(spectral - thermo.variance) / max(abs(thermo.variance), 1e-300)
        if thermo.variance == 0 and spectral == 0:
            disc = 0.0
    return VarianceReport(
        float(spectral), float(biorth), None if thermo is None else thermo.variance, disc
    )


@dataclass(frozen=True)
class MonteCarloResult:
    """Sample statistics of ``X = -(1/t) log P(path)``.

    ``variance`` estimates the asymptotic variance from the growth of
    ``Var[log P]`` between t/2 and t steps, which cancels the O(1/t)
    boundary term; ``variance_t`` is the plain finite-t value ``t Var[X]``.
    """

    mean: float
    stderr: float
    variance: float
    variance_stderr: float
    variance_t: float
    t: int
    n_samples: int


def _step_tables(B: np.ndarray):
    D = B.shape[0]
    kmax = int(max(1, (B > 0).sum(axis=0).max()))
    nxt = np.zeros((D, kmax), dtype=np.int64)
    cum = np.full((D, kmax), np.inf)
    logp = np.zeros((D, kmax))
    for e in range(D):
        (succ,) = np.nonzero(B[:, e] > 0)
        p = B[succ, e]
        k = len(succ)
        nxt[e, :k] = succ
        nxt[e, k:] = succ[-1]
        c = np.cumsum(p / p.sum())
        c[-1] = 1.0
        cum[e, :k] = c
        logp[e, :k] = np.log(p)
    return nxt, cum, logp


@numba.njit(nogil=True, cache=True)
def _advance(cur, acc, u, nxt, cum, logp):
    steps, n = u.shape
    k = cum.shape[1]
    for i in range(n):
        e = cur[i]
        s = acc[i]
        for j in range(steps):
            x = u[j, i]
            c = 0
            while c < k - 1 and x >= cum[e, c]:
                c += 1
            s += logp[e, c]
            e = nxt[e, c]
        cur[i] = e
        acc[i] = s


def _mc_batch(tables, t: int, n: int, seed: int, batch: int) -> np.ndarray:
    """Summed log-probabilities after t // 2 and t steps, shape (2, n)."""
    nxt, cum, logp = tables
    D = nxt.shape[0]
    rng = np.random.Generator(np.random.Philox(key=[seed, batch]))
    cur = rng.integers(0, D, size=n)
    acc = np.zeros(n)
    out = np.zeros((2, n))
    half = t // 2
    done = 0
    while done < t:
        stop = half if done < half else t
        chunk = min(MC_CHUNK, stop - done)
        _advance(cur, acc, rng.random((chunk, n)), nxt, cum, logp)
        done += chunk
        if done == half:
            out[0] = acc
    out[1] = acc
    return out


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("MATRIXCHAOS_THREADS", "1")))
    except ValueError:
        return 1


def mc_lyapunov(
    B: MarkovMap,
    t: int,
    n_samples: int,
    seed: int,
    threads: int | None = None,
) -> MonteCarloResult:
    """Monte Carlo estimate of the mean exponent and its variance.

    Trajectories start on uniformly drawn edges and follow B.  Samples are
    split into fixed batches of 4096, batch ``k`` drawing from a Philox
    stream keyed by ``(seed, k)``, so results are bitwise identical for any
    thread count.
    """
    if t < 1 or n_samples < 1:
        raise ValueError("t and n_samples must be positive")
    if not 0 <= seed < 2**64:
        raise ValueError("seed must fit in 64 bits")
    tables = _step_tables(B.matrix)
    sizes = [min(MC_BATCH, n_samples - s) for s in range(0, n_samples, MC_BATCH)]
    threads = threads or default_threads()

    def run(k):
        return _mc_batch(tables, t, sizes[k], seed, k)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(k) for k in range(len(sizes))]
    S = np.concatenate(parts, axis=1)
    n = S.shape[1]
    x = -S[1] / t
    mean = float(x.mean())
    stderr = float(x.std() / np.sqrt(max(n - 1, 1)))
    var_t = float(t * x.var())
    if t >= 2:
        # Var S_t - Var S_h grows by sigma**2 per step once the boundary term has settled
        h = t // 2
        z = (S[1] - S[1].mean()) ** 2 - (S[0] - S[0].mean()) ** 2
        var, var_se = z.mean() / (t - h), z.std() / np.sqrt(n) / (t - h)
    else:
        dev2 = (x - mean) ** 2
        var, var_se = var_t, t * dev2.std() / np.sqrt(n)
    return MonteCarloResult(mean, stderr, float(var), float(var_se), var_t, t, n)


@dataclass(frozen=True)
class Bounds:
    per_edge: np.ndarray
    per_vertex: np.ndarray
    total: float


def lyapunov_bounds(g: GraphStructure) -> Bounds:
    """Upper bounds ``log d_tau(e)``, ``log d_v`` and ``(1/D) sum d_v log d_v``."""
    logd = np.log(g.degrees.astype(float))
    return Bounds(logd[g.terminus], logd, float(np.sum(g.degrees * logd) / g.D))


def large_E_decay(H: HermitianMatrix, g: GraphStructure, E_grid) -> np.ndarray:
    """Rows ``(E, Lambda(E), Lambda(E) E**2 / log|E|)`` for energies outside the spectrum."""
    E_grid = np.asarray(E_grid, dtype=float)
    lo, hi = gershgorin_window(H)
    inside = (E_grid >= lo) & (E_grid <= hi)
    if np.any(inside):
        raise ValueError(
            f"energies {E_grid[inside]} lie inside the Gershgorin window [{lo:g}, {hi:g}]"
        )
    if np.any(np.abs(E_grid) <= 1):
        raise ValueError("log|E| must be positive")
    polar = polar_entries(H, g)
    rows = []
    for E in E_grid:
        lam = mean_lyapunov(build_B(assemble_U(H, g, E, polar)))
        rows.append((E, lam, lam * E**2 / np.log(abs(E))))
    return np.array(rows)


@dataclass
class LyapunovReport:
    energy: float
    lambda_mean: float
    lambda_var_spectral: float
    lambda_var_biorthogonal: float
    lambda_var_thermo: float
    lambda_thermo: float
    per_edge: np.ndarray
    per_vertex: np.ndarray
    bounds: Bounds
    gap: float
    lambda_mc: float | None = None
    mc_stderr: float | None = None
    var_mc: float | None = None
    methods: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "E": self.energy,
            "lambda_mean": self.lambda_mean,
            "lambda_thermo": self.lambda_thermo,
            "lambda_var_spectral": self.lambda_var_spectral,
            "lambda_var_biorthogonal": self.lambda_var_biorthogonal,
            "lambda_var_thermo": self.lambda_var_thermo,
            "lambda_mc": self.lambda_mc,
            "mc_stderr": self.mc_stderr,
            "var_mc": self.var_mc,
            "gap": self.gap,
            "per_edge": self.per_edge.tolist(),
            "per_vertex": self.per_vertex.tolist(),
            "bounds": {
                "per_edge": self.bounds.per_edge.tolist(),
                "per_vertex": self.bounds.per_vertex.tolist(),
                "global": self.bounds.total,
            },
            "methods": self.methods,
        }


def lyapunov_report(
    H: HermitianMatrix,
    g: GraphStructure,
    E: float,
    mc_samples: int = 0,
    mc_steps: int = 1000,
    seed: int = 0,
    threads: int | None = None,
) -> LyapunovReport:
    B = build_B(assemble_U(H, g, E))
    spec = spectrum_B(B, full=True)
    thermo = thermo_lyapunov(B)
    var = variance_lyapunov(B, spec, thermo)
    per_edge, per_vertex = local_lyapunov(B, g)
    rep = LyapunovReport(
        energy=float(E),
        lambda_mean=mean_lyapunov(B),
        lambda_var_spectral=var.spectral,
        lambda_var_biorthogonal=var.biorthogonal,
        lambda_var_thermo=thermo.variance,
        lambda_thermo=thermo.lyapunov,
        per_edge=per_edge,
        per_vertex=per_vertex,
        bounds=lyapunov_bounds(g),
        gap=spec.gap,
        methods={
            "lambda_mean": "closed-form",
            "lambda_thermo": "thermo",
            "lambda_var_spectral": "closed-form",
            "lambda_var_biorthogonal": "closed-form",
            "lambda_var_thermo": "thermo",
            "per_edge": "closed-form",
            "per_vertex": "closed-form",
        },
    )
    if mc_samples > 0:
        mc = mc_lyapunov(B, mc_steps, mc_samples, seed, threads)
        rep.lambda_mc, rep.mc_stderr, rep.var_mc = mc.mean, mc.stderr, mc.variance
        rep.methods.update(lambda_mc="monte-carlo", var_mc="monte-carlo")
    return rep
