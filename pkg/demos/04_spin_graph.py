"""Mean against local exponents on the spin graph as the interaction grows.

    python demos/04_spin_graph.py
"""

# %%
import numpy as np

from matrixchaos import assemble_U, build_B, build_graph, local_lyapunov, mean_lyapunov, polar_entries
from matrixchaos.ensembles import SpinGraphSpec, build_spin_hamiltonian, participation_ratio

# %% [markdown]
# Weak interaction (small alpha) leaves most vertices nearly decoupled.  A
# few vertices still scatter strongly, so the local exponents peak while
# the mean stays small.

# %%
for alpha in (0.1, 1.0, 10.0):
    H = build_spin_hamiltonian(SpinGraphSpec(alpha=alpha))
    g = build_graph(H)
    polar = polar_entries(H, g)
    w, vecs = np.linalg.eigh(H.data)
    grid = np.linspace(w[0] - 0.5, w[-1] + 0.5, 400)
    mean = np.empty_like(grid)
    local = np.empty((len(grid), H.V))
    for i, E in enumerate(grid):
        B = build_B(assemble_U(H, g, E, polar))
        mean[i] = mean_lyapunov(B)
        local[i] = local_lyapunov(B, g)[1]
    pr = np.mean([participation_ratio(vecs[:, k]) for k in range(H.V)])
    print(f"alpha = {alpha:5}: max mean {mean.max():.3f}, max local {local.max():.3f}, "
          f"ratio {mean.max() / local.max():.3f}, mean participation ratio {pr:.2f}")
