"""The eleven chromatic 1-norms and their asymptotic constants.

Given the domain and codomain norms and the degree-1 relative norm, the
remaining norms follow from the short exact sequences that tie kernel,
image and cokernel to domain, codomain and relative persistence.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass

__all__ = [
    "SixPackNorms",
    "ConstantTable",
    "InconsistencyError",
    "derive_norms",
    "table1_constants",
    "ordering_check",
    "instance_record",
    "NORM_FIELDS",
]

log = logging.getLogger(__name__)

NORM_FIELDS = ("dom0", "dom1", "cod0", "cod1", "rel1", "rel2", "ker0", "ker1", "im0", "im1", "cok1")
SQRT2 = math.sqrt(2.0)
C_LOWER = 0.6289
C_UPPER = 0.7072


class InconsistencyError(ArithmeticError):
    """A derived norm came out negative beyond rounding."""


@dataclass(frozen=True)
class SixPackNorms:
    dom0: float
    dom1: float
    cod0: float
    cod1: float
    rel1: float
    rel2: float
    ker0: float
    ker1: float
    im0: float
    im1: float
    cok1: float
    # identically zero in the plane
    rel0: float = 0.0
    cok0: float = 0.0
    dom2: float = 0.0
    cod2: float = 0.0
    im2: float = 0.0
    ker2: float = 0.0
    cok2: float = 0.0

    def relations(self) -> dict[str, float]:
        """Residuals of the six exact-sequence relations."""
        return {
            "ker0+im0-dom0": self.ker0 + self.im0 - self.dom0,
            "im0+cok0-cod0": self.im0 + self.cok0 - self.cod0,
            "ker1+im1-dom1": self.ker1 + self.im1 - self.dom1,
            "im1+cok1-cod1": self.im1 + self.cok1 - self.cod1,
            "cok1+ker0-rel1": self.cok1 + self.ker0 - self.rel1,
            "cok2+ker1-rel2": self.cok2 + self.ker1 - self.rel2,
        }

    def check(self, tol: float = 1e-9) -> None:
        for name, r in self.relations().items():
            if abs(r) > tol:
                raise InconsistencyError(f"relation {name} off by {r:.3e}")

    def as_dict(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in NORM_FIELDS}


def derive_norms(
    dom0: float,
    dom1: float,
    cod0: float,
    cod1: float,
    rel1: float,
    *,
    eps: float = 1e-9,
    strict: bool = False,
) -> SixPackNorms:
    """Fill in kernel, image, cokernel and degree-2 relative norms.

    The image in degree 0 equals the codomain.  Negative ker0 or ker1 is an
    error.  Negative cok1 or im1 is logged as a warning, or raised when
    ``strict`` is set.
    """
    for name, v in (("dom0", dom0), ("dom1", dom1), ("cod0", cod0), ("cod1", cod1), ("rel1", rel1)):
        if not v >= -eps:
            raise InconsistencyError(f"input {name} = {v} is negative")
    im0 = cod0
    ker0 = dom0 - im0
    cok1 = rel1 - ker0
    im1 = cod1 - cok1
    ker1 = dom1 - im1
    rel2 = ker1
    for name, v in (("ker0", ker0), ("ker1", ker1)):
        if v < -eps:
            raise InconsistencyError(f"derived {name} = {v:.3e} is negative")
    for name, v in (("cok1", cok1), ("im1", im1)):
        if v < -eps:
            if strict:
                raise InconsistencyError(f"derived {name} = {v:.3e} is negative")
            log.warning("derived %s = %.3e is negative", name, v)
    out = SixPackNorms(
        dom0=dom0, dom1=dom1, cod0=cod0, cod1=cod1, rel1=rel1, rel2=rel2,
        ker0=ker0, ker1=ker1, im0=im0, im1=im1, cok1=cok1,
    )
    out.check(max(eps, 1e-12 * max(1.0, abs(dom0), abs(dom1), abs(rel1))))
    return out


@dataclass(frozen=True)
class ConstantTable:
    c_ker0: float
    c_rel1: float
    c_cok1: float
    c_ker1: float
    c_rel2: float
    c_dom0: float
    c_im0: float
    c_cod0: float
    c_dom1: float
    c_im1: float
    c_cod1: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def table1_constants(c: float, cL: float) -> ConstantTable:
    """Asymptotic constants of the expected 1-norms, in units of the square root of n."""
    q = SQRT2 - 1.0
    return ConstantTable(
        c_ker0=0.5 * q * c,
        c_rel1=0.5 * cL,
        c_cok1=0.5 * cL - 0.5 * q * c,
        c_ker1=0.5 * cL - 0.25 * q,
        c_rel2=0.5 * cL - 0.25 * q,
        c_dom0=0.5 * SQRT2 * c,
        c_im0=0.5 * c,
        c_cod0=0.5 * c,
        c_dom1=SQRT2 * (0.5 * c - 0.25),
        c_im1=0.5 * SQRT2 * c - 0.25 - 0.5 * cL,
        c_cod1=0.5 * c - 0.25,
    )


def ordering_check(c: float, tol: float = 1e-4) -> bool:
    """Whether c_cod1 < c_dom1 <= c_ker0 < c_im0 = c_cod0 < c_dom0 holds at c.

    The c_L-free constants are compared.  ``tol`` absorbs the rounding of the
    upper end of the strip, where the middle slot is an equality.
    """
    if not (C_LOWER - 1e-12 <= c <= C_UPPER + 1e-12):
        raise ValueError(f"c = {c} lies outside [{C_LOWER}, {C_UPPER}]")
    t = table1_constants(c, 0.0)
    return (
        t.c_cod1 < t.c_dom1
        and t.c_dom1 <= t.c_ker0 + tol
        and t.c_ker0 < t.c_im0
        and t.c_im0 == t.c_cod0
        and t.c_cod0 < t.c_dom0
    )


def instance_record(norms: SixPackNorms, emst_length: float, lunar_cost: float) -> dict:
    rec = {"emst_length": emst_length, "lunar_cost": lunar_cost}
    rec.update(norms.as_dict())
    return rec


def dumps_record(norms: SixPackNorms, emst_length: float, lunar_cost: float) -> str:
    return json.dumps(instance_record(norms, emst_length, lunar_cost), sort_keys=True)
