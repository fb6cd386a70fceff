"""
The comb as a mixed quantum state
=================================

Discretize the normalized spectrum into a diagonal single-photon density
matrix, then look at purity, coherence time and photon statistics.
"""

import numpy as np

from combstate import (
    CombParams,
    EnvelopeModel,
    FrequencyGrid,
    MixedCoherentState,
    TensorPowerState,
    coherence_time,
    n_photon_trace_moment,
    normalize,
    photon_number_pmf,
    psd_analytic,
    purity,
    single_photon_state,
)

env = EnvelopeModel(5.0, 2.0)
grid = FrequencyGrid(0.0, 0.01, 1001)

for sigma_ceo in (0.05, 0.1):
    comb = CombParams(0.3, 1.0, sigma_ceo, 0.03, 5.0)
    rho = single_photon_state(normalize(psd_analytic(comb, env, grid)))
    print(f"sigma_ceo={sigma_ceo}: trace={rho.trace():.12f} purity={purity(rho):.5f} "
          f"coherence time={coherence_time(rho, 8192):.4f}")

# %%
# Tensor powers are never built: tr(rho_n^k) = (sum p^k)^n.
print("tr(rho_3^2) =", n_photon_trace_moment(TensorPowerState(rho, 3), 2))

# %%
w, tail = photon_number_pmf(MixedCoherentState(rho, alpha_sq=4.0))
n = np.arange(w.size)
print(f"photon number: mean {np.sum(n * w):.10f}, up to n={w.size - 1}, tail {tail:.1e}")
