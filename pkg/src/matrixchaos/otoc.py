"""Out-of-time-ordered commutators of edge projectors and trajectory sums.

For projectors ``A = |a><a|`` and ``B = |b><b|`` on directed edges the
Frobenius norm of ``[U^t A U^-t, B]`` depends only on ``|(U^t)_{ba}|**2``.
That matrix element is a sum over the connected edge paths from a to b,
which ties the OTOC to the classical trajectory probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EnumerationCap, ZeroAmplitude
from .hermitian_graph import GraphStructure
from .markov_map import MarkovMap
from .quantum_poincare import QuantumMap

T_MAX = 12


@dataclass(frozen=True)
class OtocValue:
    t: int
    a: int
    b: int
    lhs: float
    rhs: float
    transition: float  # |(U^t)_{ba}|**2


def otoc_norm(U: QuantumMap, t: int, a: int, b: int) -> OtocValue:
    """Both sides of the OTOC identity, computed independently.

    ``lhs`` is ``tr(C C^dagger) / D`` for the explicit commutator
    ``C = [U^t A U^t^dagger, B]``; ``rhs`` is ``2/D (p - p**2)`` with
    ``p = |(U^t)_{ba}|**2``.
    """
    if t < 1:
        raise ValueError("t must be positive")
    D = U.D
    Ut = np.linalg.matrix_power(U.matrix, t)
    A = np.zeros((D, D))
    A[a, a] = 1.0
    Bp = np.zeros((D, D))
    Bp[b, b] = 1.0
    At = Ut @ A @ Ut.conj().T
    C = At @ Bp - Bp @ At
    lhs = float(np.trace(C @ C.conj().T).real / D)
    p = float(abs(Ut[b, a]) ** 2)
    return OtocValue(t, a, b, lhs, 2.0 / D * (p - p * p), p)


@dataclass(frozen=True, eq=False)
class TrajectorySet:
    """All connected edge paths ``(e_0 = a, ..., e_t = b)``; ``paths`` has shape (n, t + 1)."""

    a: int
    b: int
    t: int
    paths: np.ndarray

    def __len__(self) -> int:
        return len(self.paths)


def enumerate_trajectories(
    g: GraphStructure,
    a: int,
    b: int,
    t: int,
    support: np.ndarray | None = None,
    t_max: int = T_MAX,
) -> TrajectorySet:
    """Depth-first enumeration of the t-step paths from edge a to edge b.

    ``support[e', e]`` marks allowed steps e -> e'; by default every step
    ``o(e') == tau(e)`` of the graph is allowed.  Branches that cannot reach
    b in the remaining steps are pruned.
    """
    if t < 1:
        raise ValueError("t must be positive")
    if t > t_max:
        raise EnumerationCap(f"t = {t} exceeds the enumeration cap {t_max}")
    M = g.successor_mask() if support is None else np.asarray(support, dtype=bool)
    succ = [np.flatnonzero(M[:, e]) for e in range(g.D)]
    # reach[k][e]: b reachable from e in exactly k steps
    reach = [np.zeros(g.D, dtype=bool)]
    reach[0][b] = True
    Mi = M.astype(np.int64)
    for _ in range(t):
        reach.append((Mi.T @ reach[-1].astype(np.int64)) > 0)

    paths: list[tuple[int, ...]] = []
    stack = [(a,)]
    while stack:
        path = stack.pop()
        left = t + 1 - len(path)
        if left == 0:
            paths.append(path)
            continue
        for e in succ[path[-1]][::-1]:
            if reach[left - 1][e]:
                stack.append(path + (int(e),))
    paths.sort()
    arr = np.array(paths, dtype=np.int64).reshape(len(paths), t + 1)
    return TrajectorySet(a, b, t, arr)


def path_count(g: GraphStructure, a: int, b: int, t: int, support=None) -> int:
    """``(M^t)_{ba}`` for the step indicator M; equals the number of paths."""
    M = g.successor_mask() if support is None else np.asarray(support, dtype=bool)
    return int(np.linalg.matrix_power(M.astype(object), t)[b, a])


def trajectory_sums(U: QuantumMap, B: MarkovMap, S: TrajectorySet) -> tuple[complex, float]:
    """Sum of path amplitudes (equals ``(U^t)_{ba}``) and of path probabilities."""
    if len(S) == 0:
        return 0j, 0.0
    src, dst = S.paths[:, :-1], S.paths[:, 1:]
    amp = np.prod(U.matrix[dst, src], axis=1)
    prob = np.prod(B.matrix[dst, src], axis=1)
    return complex(amp.sum()), float(prob.sum())


@dataclass(frozen=True)
class CoefBound:
    lhs: float
    rhs: float
    n_paths: int
    n_excluded: int


def coef_bound(B: MarkovMap, S: TrajectorySet, U: QuantumMap) -> CoefBound:
    """Both sides of the geometric-mean estimate for ``|log |(U^t)_{ba}|**2|``.

    ``rhs = <sum_i |log B_step|>_paths - log |paths|`` with a uniform average
    over paths.  Paths through a zero-probability step are dropped and
    counted in ``n_excluded``.  Reported for comparison, not asserted.
    """
    if len(S) == 0:
        raise ValueError("empty trajectory set")
    Ut = np.linalg.matrix_power(U.matrix, S.t)
    p = abs(Ut[S.b, S.a]) ** 2
    if p == 0:
        raise ZeroAmplitude(f"(U^{S.t})[{S.b}, {S.a}] vanishes")
    steps = B.matrix[S.paths[:, 1:], S.paths[:, :-1]]
    keep = np.all(steps > 0, axis=1)
    n = int(keep.sum())
    if n == 0:
        raise ZeroAmplitude("every path contains a zero-probability step")
    cost = np.abs(np.log(steps[keep])).sum(axis=1)
    rhs = float(cost.mean() - np.log(n))
    return CoefBound(float(abs(np.log(p))), rhs, n, int(len(S) - n))
