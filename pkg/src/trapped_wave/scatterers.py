"""Radially symmetric scattering configurations."""

from __future__ import annotations

import enum
import json
import warnings
from dataclasses import dataclass

from .errors import ConfigError, NotApplicableError


class Kind(str, enum.Enum):
    FREE = "free"
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    PENETRABLE = "penetrable"


class TrappingClass(str, enum.Enum):
    NONTRAPPING = "nontrapping"
    TRAPPING = "trapping"


_KIND_ALIASES = {
    "free": Kind.FREE,
    "dirichlet": Kind.DIRICHLET,
    "impenetrabledirichlet": Kind.DIRICHLET,
    "neumann": Kind.NEUMANN,
    "impenetrableneumann": Kind.NEUMANN,
    "penetrable": Kind.PENETRABLE,
}


@dataclass(frozen=True)
class ScattererSpec:
    """Ball (3-d) or disc (2-d) scatterer centred at the origin.

    ``contrast`` and ``alpha`` are the interior wave-speed ratio and the
    weight in the flux condition ``du_in/dr = alpha du_out/dr``; both are
    only meaningful for penetrable scatterers.
    """

    dimension: int = 3
    kind: Kind = Kind.FREE
    radius: float | None = None
    contrast: float | None = None
    alpha: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.dimension not in (2, 3):
            raise ConfigError("dimension must be 2 or 3")
        if self.kind is Kind.FREE:
            if any(v is not None for v in (self.radius, self.contrast, self.alpha)):
                raise ConfigError("a free configuration takes no radius/contrast/alpha")
            return
        if self.radius is None or not self.radius > 0:
            raise ConfigError("radius must be positive")
        if self.kind is Kind.PENETRABLE:
            if self.contrast is None or not self.contrast > 0:
                raise ConfigError("contrast must be positive")
            if self.alpha is None or not self.alpha > 0:
                raise ConfigError("alpha must be positive")
        elif self.contrast is not None or self.alpha is not None:
            raise ConfigError("contrast/alpha apply to penetrable scatterers only")

    @classmethod
    def free(cls, dimension=3):
        return cls(dimension=dimension, kind=Kind.FREE)

    @classmethod
    def dirichlet(cls, radius=1.0, dimension=3):
        return cls(dimension=dimension, kind=Kind.DIRICHLET, radius=radius)

    @classmethod
    def neumann(cls, radius=1.0, dimension=3):
        return cls(dimension=dimension, kind=Kind.NEUMANN, radius=radius)

    @classmethod
    def penetrable(cls, radius=1.0, contrast=0.5, alpha=1.0, dimension=3):
        return cls(dimension=dimension, kind=Kind.PENETRABLE, radius=radius,
                   contrast=contrast, alpha=alpha)

    @property
    def reference_radius(self):
        """Radius used for scaling; 1 for free space."""
        return 1.0 if self.radius is None else self.radius

    def to_dict(self):
        d = {"dimension": self.dimension, "kind": self.kind.value}
        if self.radius is not None:
            d["radius"] = self.radius
        if self.contrast is not None:
            d["contrast"] = self.contrast
        if self.alpha is not None:
            d["alpha"] = self.alpha
        return d

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("scatterer must be a JSON object")
        allowed = {"dimension", "kind", "radius", "contrast", "alpha"}
        unknown = set(d) - allowed
        if unknown:
            raise ConfigError(f"unknown scatterer keys: {sorted(unknown)}")
        kind = str(d.get("kind", "free")).lower().replace("_", "").replace("-", "")
        if kind not in _KIND_ALIASES:
            raise ConfigError(f"unknown scatterer kind {d.get('kind')!r}")
        try:
            return cls(
                dimension=int(d.get("dimension", 3)),
                kind=_KIND_ALIASES[kind],
                radius=_opt_float(d.get("radius")),
                contrast=_opt_float(d.get("contrast")),
                alpha=_opt_float(d.get("alpha")),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(d)


def _opt_float(v):
    if v is None:
        return None
    if isinstance(v, bool):
        raise ConfigError("expected a number")
    return float(v)


def normalize(spec):
    """Collapse a penetrable scatterer with c = alpha = 1 to free space."""
    if spec.kind is Kind.PENETRABLE and spec.contrast == 1.0 and spec.alpha == 1.0:
        warnings.warn("penetrable scatterer with c = alpha = 1 is free space", stacklevel=2)
        return ScattererSpec.free(spec.dimension)
    return spec


def classify(spec):
    """Trapping label of a configuration (after normalization).

    A penetrable ball with c < 1 traps rays by total internal reflection;
    everything else handled here is nontrapping.  Free space normalizes to
    ``Kind.FREE`` and is returned as nontrapping; check ``normalize(spec).kind``
    to distinguish it.
    """
    spec = normalize(spec)
    if spec.kind is Kind.PENETRABLE and spec.contrast < 1.0:
        return TrappingClass.TRAPPING
    return TrappingClass.NONTRAPPING


def interior_wavenumber(spec, k):
    """Wavenumber ``k / c`` inside a penetrable scatterer."""
    if spec.kind is not Kind.PENETRABLE:
        raise NotApplicableError("interior wavenumber is defined for penetrable scatterers only")
    return k / spec.contrast


def multiplicity(dimension, ell):
    """Degeneracy of angular mode ``ell``: 2l+1 spherical harmonics, or ±l in 2-d."""
    if dimension == 3:
        return 2 * ell + 1
    return 1 if ell == 0 else 2
