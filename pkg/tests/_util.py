import numpy as np
from scipy.sparse.csgraph import connected_components

from matrixchaos import HermitianMatrix, build_graph

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = []


def record(n, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
    print(ACCEPTANCE_LINES[-1])


def random_hermitian(rng, V, density=None, complex_phases=True, max_tries=200):
    """Connected random Hermitian matrix with random sparsity."""
    if density is None:
        density = rng.uniform(0.2, 0.9)
    for _ in range(max_tries):
        mask = np.triu(rng.random((V, V)) < density, 1)
        if connected_components(mask | mask.T, directed=False)[0] != 1:
            continue
        mag = rng.uniform(0.2, 2.0, (V, V))
        if complex_phases:
            phase = np.exp(1j * rng.uniform(-np.pi, np.pi, (V, V)))
        else:
            phase = rng.choice([-1.0, 1.0], (V, V))
        upper = np.where(mask, mag * phase, 0)
        H = upper + upper.conj().T + np.diag(rng.normal(0, 1, V))
        return HermitianMatrix.from_array(H)
    raise RuntimeError("could not draw a connected graph")


def with_graph(H):
    return H, build_graph(H)


def complete_graph(V):
    return HermitianMatrix.from_array(np.ones((V, V)) - np.eye(V))


def chain(V, b=1.0):
    off = np.full(V - 1, b)
    return HermitianMatrix.from_array(np.diag(off, 1) + np.diag(off, -1))
