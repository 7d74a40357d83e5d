"""Closed-form weak-coupling predictions for single sudden or quasi-static cycles.

These expressions are second-order expansions in the coupling-time products
and serve two purposes: fast screening of parameter regions, and an
independent oracle layer that the simulator is tested against.  Thermal
preparations enter through c_i = coth(beta_i omega_i / 2) >= 1, squeezed ones
through the squeezing parameters r_i.  Validity degrades as
(alpha12 tau_h)^2 grows; nothing here is exact at finite coupling.

Where several printed groupings of the same quantity circulate, this module
keeps them side by side under behavior-describing names and the test suite
records which one tracks the simulator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class WeakCouplingInput:
    """Parameters of a single weak-coupling cycle.

    Thermal runs populate c1, c3; squeezed runs populate r1, r3.  The regime
    assumes the second and third oscillators start identically prepared
    (c2 = c3, or r2 = r3), so only two preparation numbers appear.
    """

    omega1: float
    omega3: float
    alpha12: float
    tau_h: float
    c1: "float | None" = None
    c3: "float | None" = None
    r1: "float | None" = None
    r3: "float | None" = None

    def __post_init__(self) -> None:
        if not 0 < self.omega3 <= self.omega1:
            raise ValueError(f"need 0 < omega3 <= omega1, got {self.omega3}, {self.omega1}")
        if self.alpha12 < 0 or self.tau_h < 0:
            raise ValueError("alpha12 and tau_h must be >= 0")
        for c in (self.c1, self.c3):
            if c is not None and c < 1.0:
                raise ValueError(f"thermal parameters must be >= 1, got {c}")

    @property
    def a(self) -> float:
        """Expansion parameter 2 (alpha12 tau_h)^2."""
        return 2.0 * (self.alpha12 * self.tau_h) ** 2

    def _thermal(self) -> tuple[float, float]:
        if self.c1 is None or self.c3 is None:
            raise ValueError("thermal prediction needs c1 and c3")
        return self.c1, self.c3

    def _squeezed(self) -> tuple[float, float]:
        if self.r1 is None or self.r3 is None:
            raise ValueError("squeezed prediction needs r1 and r3")
        return self.r1, self.r3


def work_one_cycle_thermal(inp: WeakCouplingInput) -> float:
    """Single-cycle work for sudden ramps and thermal preparation.

    Positive means the cycle consumed work.  The sign flips exactly where c1
    crosses extraction_threshold(omega1, omega3, alpha12).
    """
    c1, c3 = inp._thermal()
    w1, w3, al, th = inp.omega1, inp.omega3, inp.alpha12, inp.tau_h
    pref = th**2 * (w1**2 - w3**2) / (4.0 * w1 * w3)
    return pref * (w1 * (al**2 + w1**2 - w3**2) * c3 - al**2 * w3 * c1)


def work_one_cycle_squeezed(inp: WeakCouplingInput) -> float:
    """Single-cycle work for sudden ramps and squeezed-vacuum preparation."""
    r1, r3 = inp._squeezed()
    w1, w3, al, th = inp.omega1, inp.omega3, inp.alpha12, inp.tau_h
    pref = th**2 * (w1**2 - w3**2) / (4.0 * w1 * w3)
    return pref * (w1 * (al**2 + w1**2 - math.exp(4.0 * r3) * w3**2) * math.exp(-2.0 * r3)
                   - al**2 * w3 * math.exp(2.0 * r1))


def extraction_threshold(omega1: float, omega3: float, alpha12: float) -> float:
    """Excitation level X* above which a sudden cycle extracts work.

    X compares against coth(beta1 omega1 / 2) for thermal preparation and
    against exp(2 r1) for squeezed, assuming the other two oscillators start
    in their ground states.  Zero coupling pushes the threshold to infinity.
    """
    if omega3 <= 0 or omega1 <= 0:
        raise ValueError("frequencies must be > 0")
    if alpha12 == 0.0:
        return math.inf
    return (omega1 / omega3) * (1.0 + (omega1**2 - omega3**2) / alpha12**2)


def nu12_sudden_thermal(inp: WeakCouplingInput) -> float:
    """Smallest PT symplectic eigenvalue after a sudden-ramp heating stroke.

    Thermal preparation; entangled iff the value drops below 1/2.  Rejects
    c1 == c3, where the underlying expansion divides by zero and no limit is
    taken on its behalf.
    """
    c1, c3 = inp._thermal()
    if c1 == c3:
        raise ValueError("c1 == c3 is outside this expansion's validity")
    w1, w3, a = inp.omega1, inp.omega3, inp.a
    num = ((1.0 + a) * w1 * w3 * c1**2
           - a * (w1**2 + w3**2) * c1 * c3
           - (1.0 - a) * w1 * w3 * c3**2)
    return c3 * num / (2.0 * w1 * w3 * (c1**2 - c3**2))


def thermal_entanglement_possible(beta1: float, omega1: float, omega3: float) -> bool:
    """Printed low-temperature predicate for sudden-stroke entanglement at T3 = 0.

    coth(beta1 omega1) < (omega1^2 + omega3^2) / (2 omega1 omega3); consistent
    with the sign of nu12_sudden_thermal - 1/2 at c3 = 1.
    """
    return 1.0 / math.tanh(beta1 * omega1) < (omega1**2 + omega3**2) / (2.0 * omega1 * omega3)


def nu12_sudden_squeezed(inp: WeakCouplingInput) -> float:
    """Smallest PT symplectic eigenvalue after a sudden-ramp heating stroke,
    squeezed preparation.  Exact to second order in alpha12 tau_h."""
    r1, r3 = inp._squeezed()
    w1, w3 = inp.omega1, inp.omega3
    phi = abs(w1 - math.exp(2.0 * (r1 + r3)) * w3)
    u = inp.alpha12 * inp.tau_h * math.exp(-(r1 + r3)) * phi / (2.0 * math.sqrt(w1 * w3))
    return 0.5 - u + u * u


def work_qs_thermal(inp: WeakCouplingInput) -> float:
    """Single-cycle work for quasi-static ramps, thermal preparation.

    Strictly negative (work produced) whenever c1 > c3.
    """
    c1, c3 = inp._thermal()
    return -0.5 * inp.alpha12**2 * inp.tau_h**2 * (inp.omega1 - inp.omega3) * (c1 - c3)


def work_qs_squeezed(inp: WeakCouplingInput) -> float:
    """Single-cycle work for quasi-static ramps, squeezed preparation."""
    r1, r3 = inp._squeezed()
    return (-(inp.alpha12**2) * inp.tau_h**2 * (inp.omega1 - inp.omega3) / 4.0
            * (math.exp(2.0 * r1) - math.exp(2.0 * r3))
            * (1.0 - math.exp(-2.0 * (r1 + r3))))


def nu12_qs_thermal(inp: WeakCouplingInput) -> float:
    """Smallest PT symplectic eigenvalue after quasi-static compression and
    heating, thermal preparation.

    The temperature factor is the ratio sinh((b1 - b3)/2) / sinh((b1 + b3)/2)
    with b_i = beta_i omega_i, evaluated here as (c3 - c1) / (c3 + c1); the
    two forms are identical via tanh(b/2) = 1/c, and the latter stays finite
    at zero temperature (c3 = 1).
    """
    c1, c3 = inp._thermal()
    ratio = (c3 - c1) / (c3 + c1)
    return c3 * (0.5 - inp.alpha12**2 * inp.tau_h**2 * ratio)


def nu12_qs_squeezed_special(alpha12: float, tau_h: float, r1: float) -> float:
    """First-order form 1/2 - alpha12 tau_h sinh(r1) for r2 = r3 = 0.

    Below 1/2 for any r1 > 0, so entanglement is guaranteed in this regime.
    The deviation from the exact value is second order; see the quadratic and
    exact companions.
    """
    return 0.5 - alpha12 * tau_h * math.sinh(r1)


def nu12_qs_squeezed_quadratic(alpha12: float, tau_h: float, r1: float) -> float:
    """Second-order form 1/2 - u + u^2 with u = alpha12 tau_h sinh(r1).

    Matches the exact stroke value to third order, the same structure the
    sudden squeezed expansion takes.
    """
    u = alpha12 * tau_h * math.sinh(r1)
    return 0.5 - u + u * u


def nu12_qs_squeezed_exact(alpha12: float, tau_h: float, r1: float) -> float:
    """Exact smallest PT symplectic eigenvalue for the quasi-static squeezed
    heating stroke at r2 = r3 = 0, any coupling strength.

    With g = sin^2(2 alpha12 tau_h) sinh^2(r1), the value is
    (sqrt(1 + g) - sqrt(g)) / 2, independent of every free rotation phase.
    """
    g = math.sin(2.0 * alpha12 * tau_h) ** 2 * math.sinh(r1) ** 2
    return 0.5 * (math.sqrt(1.0 + g) - math.sqrt(g))
