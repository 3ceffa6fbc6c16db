# %% [markdown]
# # Stationary covariances
#
# The forced, undamped chain has a Gaussian invariant law with covariance
# c(m, n) = (2/pi) int_0^inf G_m G_n ds.  Diagonal entries and even
# separations have elementary closed forms; odd separations split: the
# nearest neighbours carry covariance exactly 1/2 while separations
# 3, 5, ... vanish.

# %%
import math

import numpy as np

from harmonic_chain import (build_sampler, cov_diag_closed, cov_even_closed,
                            cov_nu_quad2d, cov_time_domain_matrix,
                            cov_weber_schafheitlin, richardson_limit, sample_stationary)
from harmonic_chain.stats import MomentAccumulator, empirical_cov

# %%
K = 6
td = cov_time_domain_matrix(K, 0.0)
np.set_printoptions(precision=6, suppress=True, linewidth=110)
print(td)

# %% [markdown]
# Closed forms against the time-domain integral.

# %%
print("c(1,1)", td[0, 0], "8/(3 pi)", 8 / (3 * math.pi))
print("c(1,3)", td[0, 2], "8/(15 pi)", cov_even_closed(1, 3))
print("c(2,4)", td[1, 3], "64/(105 pi)", 64 / (105 * math.pi))
print("c(n,n+1)", [round(td[i, i + 1], 12) for i in range(K - 1)])
print("c(1,4), c(2,5)", td[0, 3], td[1, 4], "Weber-Schafheitlin", cov_weber_schafheitlin(1, 4))

# %% [markdown]
# The nearest-neighbour value is forced by energy balance: the forcing
# injects power 1/2 at site 1, and in a statistically steady state the same
# mean flux E a_n a_{n+1} must pass every bond.
#
# The variances decrease to 2/pi, so the invariant law does not live on
# square-summable sequences.

# %%
for n in (1, 10, 100, 1000):
    print(n, cov_diag_closed(n), cov_diag_closed(n) - 2 / math.pi)

# %% [markdown]
# ## Monte Carlo arbitration
# Independent draws from the invariant law confirm c(1,2) = 1/2 and c(1,4) = 0.

# %%
sampler = build_sampler(8, 0.0, seed=1)
acc = MomentAccumulator(8).update(sample_stationary(sampler, 100_000))
for m, n in [(1, 1), (1, 2), (1, 3), (1, 4)]:
    est, se = empirical_cov(acc, m, n)
    print(f"c({m},{n}) = {est:.4f} +- {se:.4f}")

# %% [markdown]
# ## Small damping
# With damping nu the covariance is a double integral over the spectrum.  It
# approaches the undamped value linearly in nu, so Richardson extrapolation
# recovers the limit.

# %%
nus = [0.2, 0.1, 0.05, 0.025]
vals = [cov_nu_quad2d(1, 1, nu) for nu in nus]
print(dict(zip(nus, np.round(vals, 6))))
print("extrapolated", richardson_limit(nus, vals), "target", 8 / (3 * math.pi))
