"""Tridiagonal beta-ensemble: bipartite repair and the classically forbidden region.

    python demos/05_gbe_mean_field.py
"""

# %%
import numpy as np

from matrixchaos import (
    assemble_U,
    bipartite_reduce,
    build_B,
    build_graph,
    local_lyapunov,
    spectrum_B,
)
from matrixchaos.ensembles import (
    GbetaESpec,
    gbe_mean_field,
    gbe_sample,
    turning_point,
)

# %% [markdown]
# A chain is bipartite, so B = |U|^2 always has the eigenvalue -1 and never
# mixes.  The half-size map on edges leaving one part removes it.

# %%
H = gbe_sample(GbetaESpec(50, 2.0, seed=7))
g = build_graph(H)
U = assemble_U(H, g, 1.0)
full = spectrum_B(build_B(U))
red = spectrum_B(build_B(bipartite_reduce(U, g)))
print(f"full B: -1 present {full.minus_one_present}, gap {full.gap:.2e}")
print(f"reduced: -1 present {red.minus_one_present}, gap {red.gap:.3f}")

# %% [markdown]
# Mean-field couplings sqrt(beta n / 2) make the effective potential
# sqrt(2/(beta n)) E, which exceeds the band edge for n < n_t = E^2/(2 beta).
# Compare amplitudes and local exponents on both sides of n_t.

# %%
V, beta = 200, 1.0
H = gbe_mean_field(V, beta)
g = build_graph(H)
w, vecs = np.linalg.eigh(H.data)
n = np.arange(1, V + 1)
print("    E      n_t   |phi|^2 ratio   Lambda_v ratio   (forbidden / allowed)")
for k in np.linspace(V // 2, V - 1, 8).astype(int):
    n_t = turning_point(w[k], beta)
    forb, allow = n < n_t, n > n_t
    if not forb.any() or not allow.any():
        continue
    p = np.abs(vecs[:, k]) ** 2
    lam_v = local_lyapunov(build_B(assemble_U(H, g, w[k])), g)[1]
    print(f"{w[k]:7.3f} {n_t:7.1f}   {p[forb].mean() / p[allow].mean():10.3f}   "
          f"{lam_v[forb].mean() / lam_v[allow].mean():12.3f}")

# %% [markdown]
# Near the band edge the amplitudes are strongly suppressed below n_t.  The
# local exponents fall off towards n = 1 but are maximal near n_t itself, so
# their region averages differ much less.
