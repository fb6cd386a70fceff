"""
Pulse trains, periodograms and the epsilon function
===================================================
"""

import numpy as np
from scipy import signal

from combstate import (
    CombParams,
    EnvelopeModel,
    SignalSpec,
    block_generator,
    epsilon_estimate,
    periodogram,
    sample_params,
    synth_pulse_train,
    truncation_bounds,
    wiener_khintchine_residual,
)

comb = CombParams(0.3, 1.0, 0.05, 0.03, 5.0)
env = EnvelopeModel(5.0, 2.0)
lines = truncation_bounds(comb, env, 1e-8)

# one realization: every line cosine-phased at t = 0
draw = sample_params(comb, block_generator(seed=3, block=0))
g = synth_pulse_train(draw, env, lines, SignalSpec(dt=0.02, count=2**14))
print(f"draw: nu_ceo={draw.nu_ceo:.4f} nu_rep={draw.nu_rep:.4f}, T={g.duration_T}")

# pulses repeat at 1/nu_rep
peaks, _ = signal.find_peaks(np.abs(signal.hilbert(g.values)), distance=int(0.5 / g.dt))
print("mean pulse spacing:", np.diff(g.t[peaks[1:-1]]).mean(), "vs 1/nu_rep =", 1 / draw.nu_rep)

# %%
pg = periodogram(g)
pos = pg.nu > 0
print("strongest positive-frequency bin:", pg.nu[pos][np.argmax(pg.values[pos])])
print("Wiener-Khintchine residual:", wiener_khintchine_residual(g))

# %%
# The finite-T epsilon function is a sinc; off coincidence it dies as 1/T.
for T in (1e2, 1e3, 1e4):
    window = T + np.linspace(0, 1.0, 2001)
    print(f"T={T:>7.0f}  max|eps|={np.abs(epsilon_estimate(1.0, 0.0, window)).max():.3e}"
          f"  1/(pi T)={1 / (np.pi * T):.3e}")
