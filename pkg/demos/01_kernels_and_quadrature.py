# %% [markdown]
# # Kernels from Chebyshev quadrature
#
# The chain's coupling matrix is the Jacobi matrix of the Chebyshev
# polynomials of the second kind.  Every amplitude of the unforced chain is
# an integral over the spectral variable z in [-1, 1] against the weight
# sqrt(1 - z^2), and Gauss-Chebyshev quadrature evaluates those integrals
# exactly for polynomial integrands.

# %%
import math

import numpy as np

from harmonic_chain import (ChainState, cheb_u_norm, evolve_unforced, integrate,
                            kernel_g, kernel_g_closed0, quad_rule)
from harmonic_chain.specfun import bessel_j

# %% [markdown]
# ## Orthonormality
# With M nodes the rule is exact up to degree 2M - 1, so a 16-node rule
# reproduces the Gram matrix of the first eight normalized polynomials.

# %%
rule = quad_rule(16)
gram = np.array([[integrate(lambda z: cheb_u_norm(m, z) * cheb_u_norm(n, z), rule)
                  for n in range(8)] for m in range(8)])
print("max |Gram - I| =", np.abs(gram - np.eye(8)).max())

# %% [markdown]
# ## The kernel G_n
# The response of site n to the forcing at site 1 is G_n(s).  Without damping
# it has the Bessel form sqrt(pi/2) n J_n(2s) / s.

# %%
for n, s in [(1, 0.0), (1, 1.0), (3, 2.5), (10, 20.0)]:
    q, c = kernel_g(n, 0.0, s), kernel_g_closed0(n, s)
    print(f"G_{n}({s:5.1f}) quadrature {q: .15f}  Bessel {c: .15f}")

# %% [markdown]
# Damping only multiplies the kernel by exp(-nu s).

# %%
print(kernel_g(2, 0.3, 4.0), math.exp(-1.2) * kernel_g(2, 0.0, 4.0))

# %% [markdown]
# ## Impulse response
# An impulse at site 1 spreads ballistically: a_n(t) = n J_n(2t) / t.  The
# padded spectral solver keeps the window free of truncation effects.

# %%
t = 5.0
a = evolve_unforced(ChainState.impulse(12), t).amplitudes
exact = np.array([n * bessel_j(n, 2 * t) / t for n in range(1, 13)])
print("max deviation from n J_n(2t)/t:", np.abs(a - exact).max())
print("energy still in the window:", 0.5 * np.sum(a**2), "of 0.5")
