"""Cut-off resolvent norms decay like 1/k when nothing is trapped.

Sweeps free space and a sound-soft ball and fits the log-log slope.
"""

import numpy as np

from trapped_wave import ScattererSpec, resolvent_norm
from trapped_wave.bounds import fit_envelope

ks = np.arange(2.0, 64.001, 2.0)
for name, spec in (("free", ScattererSpec.free()), ("dirichlet", ScattererSpec.dirichlet(1.0))):
    sweep = [(k, resolvent_norm(spec, k, r_chi=2.0).norm) for k in ks]
    fit = fit_envelope(sweep, min_samples=20)
    print(f"{name:10s} slope {fit.slope:+.3f}  norm(k=2) {sweep[0][1]:.3f}  norm(k=64) {sweep[-1][1]:.4f}")
