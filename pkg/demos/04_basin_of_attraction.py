# %% [markdown]
# # Dispersion, fixed points and periodic orbits
#
# Solutions of the unforced chain with finitely supported data disperse, so
# forced solutions forget their initial data and approach the invariant law.
# Bounded non-decaying solutions exist, but they are not square-summable.

# %%
import math

import numpy as np

from harmonic_chain import ChainState, evolve_unforced, fixed_point_residual, periodic_orbit_eval
from harmonic_chain.propagator import fixed_point_patterns
from harmonic_chain.stats import slope_fit

# %% [markdown]
# ## Decay of an impulse in a fixed window
# The amplitude on the first 16 sites decays.  At fixed n the impulse
# response n J_n(2t)/t behaves like t^{-3/2}, faster than the t^{-1/2}
# envelope of a single Bessel function.

# %%
times = np.array([10.0, 20.0, 40.0, 80.0, 160.0])
env = np.array([np.abs(evolve_unforced(ChainState.impulse(16), t).amplitudes).max()
                for t in times])
for t, e in zip(times, env):
    print(f"t={t:6.1f}  max |a_n| = {e:.5f}")
print("log-log slope:", slope_fit(np.log(times), np.log(env))[0])

# %% [markdown]
# ## Fixed points
# Ones on the odd sites solve a_{n-1} - a_{n+1} = 0 with a_0 = 0; ones on
# the even sites fail at n = 1.

# %%
for name, state in fixed_point_patterns(12).items():
    print(name, state.amplitudes[:6], "residual", fixed_point_residual(state))

# %% [markdown]
# ## A periodic orbit
# A single spectral mode z gives a bounded solution with period pi / z.

# %%
z = 0.5
n = np.arange(1, 9)
print(periodic_orbit_eval(z, n, 0.0))
print("return error after one period:",
      np.abs(periodic_orbit_eval(z, n, math.pi / z) - periodic_orbit_eval(z, n, 0.0)).max())
