"""Analytic self-organization conditions and a priori regime classification."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .core import Params


class ChargeClass(enum.Enum):
    TORNADO = "Tornado"
    CYCLONE = "Cyclone"


class Prediction(enum.Enum):
    STABLE_VORTEX = "StableVortex"
    UNSTABLE = "Unstable"
    SUBCRITICAL = "Subcritical"


@dataclass(frozen=True)
class RegimeReport:
    cc_product: float
    bf_stable: bool
    criterion_value: float
    v_min_sq: float
    velocity_bound_vacuous: bool
    a2_ok: bool
    charge: int
    charge_class: ChargeClass
    twist: str
    predicted: Prediction

    def lines(self):
        return [
            f"c1*c2             {self.cc_product:.6g}",
            f"bf_stable         {self.bf_stable}",
            f"criterion_value   {self.criterion_value:.6g}",
            f"v_min_sq          {self.v_min_sq:.6g}"
            + ("  (vacuous)" if self.velocity_bound_vacuous else ""),
            f"a2_ok             {self.a2_ok}",
            f"charge            {self.charge} ({self.twist})",
            f"charge_class      {self.charge_class.value}",
            f"predicted         {self.predicted.value}",
        ]


def stability_criterion(c1: float, c2: float, l0: float):
    """((c1^2 + 1) k^4 + 2 (1 + c1 c2) k^2 at k = pi/l0, -1 < c1 c2 < 1).

    The second item is the parameter-only condition that keeps the first
    positive for every k; the bounds are strict, so |c1 c2| = 1 is marginal
    and reported as not stable.
    """
    if not l0 > 0:
        raise ValueError("l0 must be positive")
    k = math.pi / l0
    value = (c1 * c1 + 1.0) * k**4 + 2.0 * (1.0 + c1 * c2) * k**2
    return value, -1.0 < c1 * c2 < 1.0


def velocity_bound(q: float, alpha1: float, c2: float) -> float:
    """Right-hand side of v^2 >= 4 q / alpha1 * (1 - 4 c2^2 / 9).

    A value <= 0 (c2^2 >= 9/4) means the bound places no restriction.
    """
    if not alpha1 > 0:
        raise ValueError("alpha1 must be positive")
    if q < 0:
        raise ValueError("q must be >= 0")
    return 4.0 * q / alpha1 * (1.0 - 4.0 * c2 * c2 / 9.0)


def classify(params: Params, m: int, a2: float | None = None) -> RegimeReport:
    """Combine the analytic conditions for a parameter set and charge ``m``.

    ``a2`` is an independently measured sink ratio checked against
    alpha2/alpha1; without it the check holds by definition.
    """
    value, bf_stable = stability_criterion(params.c1, params.c2, params.l0)
    if params.alpha1 > 0 and params.q >= 0:
        v_min_sq = velocity_bound(params.q, params.alpha1, params.c2)
    else:
        v_min_sq = float("nan")
    # alpha2/alpha1 is c2 by construction
    a2_ok = True if a2 is None else a2 * a2 <= params.c2 * params.c2 * (1 + 1e-12)
    m = int(m)
    charge_class = ChargeClass.TORNADO if abs(m) <= 2 else ChargeClass.CYCLONE
    twist = "left" if m < 0 else "right" if m > 0 else "none"
    if params.q <= 0:
        predicted = Prediction.SUBCRITICAL
    elif not bf_stable:
        predicted = Prediction.UNSTABLE
    else:
        predicted = Prediction.STABLE_VORTEX
    return RegimeReport(
        cc_product=params.c1 * params.c2,
        bf_stable=bf_stable,
        criterion_value=value,
        v_min_sq=v_min_sq,
        velocity_bound_vacuous=not v_min_sq > 0,
        a2_ok=bool(a2_ok),
        charge=m,
        charge_class=charge_class,
        twist=twist,
        predicted=predicted,
    )
