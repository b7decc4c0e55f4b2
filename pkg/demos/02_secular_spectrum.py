"""Eigenvalues from the zeros of det(I - U(E)), and eigenvectors from edge amplitudes.

    python demos/02_secular_spectrum.py
"""

# %%
import numpy as np

from matrixchaos import (
    HermitianMatrix,
    assemble_U,
    build_graph,
    find_spectrum,
    fixed_point,
    gershgorin_window,
    reconstruct_wavefunction,
    secular,
)

# %% [markdown]
# A random sparse complex Hermitian matrix on eight vertices.

# %%
rng = np.random.default_rng(1)
V = 8
A = np.triu(rng.random((V, V)) < 0.5, 1) * rng.normal(size=(V, V)) * np.exp(
    1j * rng.uniform(-np.pi, np.pi, (V, V))
)
A[np.arange(V - 1), np.arange(1, V)] += 1.0  # a path keeps the graph connected
H = HermitianMatrix.from_array(A + A.conj().T + np.diag(rng.normal(size=V)))
g = build_graph(H)
print(f"V = {H.V}, directed edges D = {g.D}")

# %% [markdown]
# The secular function equals 2^(D/2) det(H - E) divided by the product of
# the complex vertex denominators, so both sides can be compared anywhere
# in the complex plane.

# %%
for E in (0.3, -1.2 + 0.4j, 2.0):
    sv = secular(H, g, E)
    print(f"E = {E}: det(I - U) = {sv.zeta:.6g}, closed form = {sv.comparison:.6g}")

# %%
lo, hi = gershgorin_window(H)
roots = find_spectrum(H, g, (lo, hi), (hi - lo) / 4000)
ev = np.linalg.eigvalsh(H.data)
for r, e in zip(roots, ev):
    print(f"root {r.root: .12f}  eigvalsh {e: .12f}  multiplicity {r.multiplicity}")

# %% [markdown]
# At an eigenvalue U has a fixed point.  Every edge then gives its own
# estimate of the eigenvector amplitude at its end vertex.

# %%
E0 = roots[2].root
a = fixed_point(assemble_U(H, g, E0))
phi = reconstruct_wavefunction(a, H, g, E0)
overlap = abs(np.vdot(phi, np.linalg.eigh(H.data)[1][:, 2])) / np.linalg.norm(phi)
print(f"overlap of the reconstructed vector with the eigenvector: {overlap:.12f}")
