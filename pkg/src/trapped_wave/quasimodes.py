"""Quasimode lower-bound certificates for near-real resonances."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from . import extended
from .bounds import quasimode_lower_bound
from .modal import radial_grid, resolvent_norm
from .scatterers import Kind

# below this |Im k| the double-precision modal norm of the resonant mode is
# limited by round-off; the direct norm of that mode is then redone in mpmath
EXTENDED_BELOW = 1e-10


@dataclass
class QuasimodeCertificate:
    k: float
    ell: int
    residual: float
    lower_bound: float
    s_proxy: float  # -log(residual) / log(k)
    im_k: float  # imaginary part of the source resonance
    direct_norm: float | None = None
    residual_analytic: float | None = None
    vacuous: bool = False
    capped: bool = False
    cutoff: tuple = ()

    @property
    def consistent(self):
        """Lower bound does not exceed the direct norm by more than 5%."""
        return self.direct_norm is None or self.lower_bound <= 1.05 * self.direct_norm

    def to_dict(self):
        d = asdict(self)
        d["cutoff"] = list(self.cutoff)
        return d


@dataclass
class CertificateReport:
    certificates: list
    note: str = ""
    r_chi: float = 2.0

    def to_json(self):
        return json.dumps({
            "note": self.note,
            "r_chi": self.r_chi,
            "cutoff": "degree-7 spline, 1 up to the ramp start, 0 from (a + r_chi)/2",
            "certificates": [c.to_dict() for c in self.certificates],
        }, indent=1)

    def __len__(self):
        return len(self.certificates)

    def __iter__(self):
        return iter(self.certificates)

    def __getitem__(self, i):
        return self.certificates[i]


def direct_norm(spec, k, ell, r_chi, im_k=0.0):
    """``||chi R(k) chi||`` at real ``k``, redoing mode ``ell`` in extended precision
    when the resonance is too close to the axis for double precision."""
    est = resolvent_norm(spec, k, r_chi, check_tail=False)
    if abs(im_k) >= EXTENDED_BELOW:
        return est.norm
    grid = radial_grid(spec, k, r_chi)
    dps = max(40, 20 + int(math.ceil(-math.log10(abs(im_k)))) if im_k else 40)
    resonant = extended.mode_norm(spec, k, ell, grid, dps=dps)
    others = max(v for l, v in est.per_mode if l != ell)
    return max(resonant, others)


def certify(catalog, spec=None, top_n=5, r_chi=2.0, im_max=1e-3, check_direct=True):
    """Quasimode certificates for the ``top_n`` catalog entries closest to the axis.

    Entries with ``|Im k| > im_max`` are skipped as vacuous.  Results are sorted
    by lower bound, largest first.
    """
    spec = catalog.spec if spec is None else spec
    if spec.kind is Kind.FREE or not catalog.entries:
        return CertificateReport([], note="no resonances in catalog", r_chi=r_chi)
    entries = sorted((e for e in catalog.entries if e.k.real > 0), key=lambda e: abs(e.k.imag))
    entries = [e for e in entries if abs(e.k.imag) <= im_max][:top_n]
    if not entries:
        return CertificateReport([], note=f"no resonance with |Im k| <= {im_max:g}", r_chi=r_chi)
    out = []
    for e in entries:
        q = quasimode_lower_bound(spec, e, r_chi=r_chi, im_max=im_max)
        dn = direct_norm(spec, q.k, e.ell, r_chi, e.k.imag) if check_direct else None
        s = -math.log(q.residual) / math.log(q.k) if q.residual > 0 else math.inf
        out.append(QuasimodeCertificate(
            k=q.k, ell=e.ell, residual=q.residual, lower_bound=q.lower_bound, s_proxy=s,
            im_k=e.k.imag, direct_norm=dn, residual_analytic=q.residual_analytic,
            vacuous=q.vacuous, capped=q.capped, cutoff=q.cutoff))
    out.sort(key=lambda c: -c.lower_bound)
    return CertificateReport(out, r_chi=r_chi)
