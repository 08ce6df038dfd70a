"""A slow penetrable ball (contrast 1/2) traps rays by total internal reflection.

Its resonances approach the real axis super-algebraically fast; at their real
parts the cut-off resolvent spikes over a width comparable to |Im k|.
A quasimode built from the interior mode gives a certified lower bound.
"""

import numpy as np

from trapped_wave import ScattererSpec, find_resonances, resolvent_norm
from trapped_wave.extended import spike_profile
from trapped_wave.quasimodes import certify
from trapped_wave.resonances import check_asymptotics, residual_slope

ball = ScattererSpec.penetrable(radius=1.0, contrast=0.5, alpha=1.0)
cat = find_resonances(ball, 20.0, strip_depth=2.0)
print(f"{len(cat)} resonances below k = 20 ({cat.weighted_count()} with multiplicity)")

# whispering-gallery asymptotics: Re k / c = nu + a_1 (nu/2)^(1/3) + O(1)
rows, _ = check_asymptotics(cat, nus=[l + 0.5 for l in range(5, 21)])
print(f"largest asymptotic residual {max(abs(r.residual) for r in rows):.3f}, "
      f"trend {residual_slope(rows):+.4f}")

near = sorted((e for e in cat if e.k.real > 0), key=lambda e: abs(e.k.imag))[:3]
for e in near:
    print(f"l = {e.ell:2d}  k = {e.k.real:.6f} {e.k.imag:+.2e}i")

e = near[0]
prof = spike_profile(ball, e.k, e.ell, r_chi=2.0)
away = resolvent_norm(ball, e.k.real + 0.3, 2.0).norm
print(f"spike at k = {prof.center[:14]}: peak {prof.peak:.3e}, 0.3 away {away:.3f}, "
      f"FWHM/|Im k| = {prof.fwhm() / abs(prof.k_res.imag):.2f}")

for c in certify(cat, top_n=3):
    print(f"certificate l = {c.ell:2d} k = {c.k:.4f}: lower bound {c.lower_bound:.3e} "
          f"<= direct {c.direct_norm:.3e}")

ks = np.linspace(5, 20, 7)
print("norm between spikes:", " ".join(f"{resolvent_norm(ball, k, 2.0).norm:.2f}" for k in ks))
