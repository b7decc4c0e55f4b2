"""Out-of-time-ordered commutators of edge projectors and their path expansion.

    python demos/06_otoc.py
"""

# %%
import numpy as np

from matrixchaos import (
    assemble_U,
    build_B,
    build_graph,
    coef_bound,
    enumerate_trajectories,
    otoc_norm,
    trajectory_sums,
)
from matrixchaos.ensembles import RegularGraphSpec, build_regular

# %%
H = build_regular(RegularGraphSpec(3, 6, "random", seed=1))
g = build_graph(H)
U = assemble_U(H, g, 0.7)
B = build_B(U)
a, b = 0, g.D - 1

# %% [markdown]
# The commutator norm depends only on p = |(U^t)_{ba}|^2.  The matrix
# element itself is a sum of amplitudes over all edge paths from a to b;
# the classical probabilities of the same paths add up to (B^t)_{ba}.

# %%
print(" t  paths   commutator        2/D (p - p^2)     |sum amp - U^t|   classical")
for t in range(1, 9):
    v = otoc_norm(U, t, a, b)
    S = enumerate_trajectories(g, a, b, t)
    amp, prob = trajectory_sums(U, B, S)
    err = abs(amp - np.linalg.matrix_power(U.matrix, t)[b, a])
    print(f"{t:2d} {len(S):6d}   {v.lhs:.12f}    {v.rhs:.12f}    {err:.1e}          {prob:.6f}")

# %% [markdown]
# A geometric-mean estimate of |log p| from the path statistics, shown for
# comparison.

# %%
for t in (4, 6, 8):
    S = enumerate_trajectories(g, a, b, t)
    cb = coef_bound(B, S, U)
    print(f"t = {t}: |log p| = {cb.lhs:.3f}, path estimate {cb.rhs:.3f} over {cb.n_paths} paths")
