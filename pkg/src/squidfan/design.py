"""Inductance and critical-current sizing for dendritic fan-in circuits.

Signals travel DI -> DC -> DR: each input's dendritic-integration (DI)
loop couples its stored current through a transformer into a shared
dendritic-collection (DC) coil, and the DC coil applies the summed flux
to the dendritic-receiving (DR) SQUID.  Keeping that SQUID monotonic
means the all-inputs-saturated flux must not exceed half a flux
quantum, which pins down one inductance (the DI output coil) as a
function of everything else.  This module solves that constraint for
the collection-loop circuit and for the simpler no-collection variants
(shared junction I_c, single-flux-quantum storage, and per-stage I_c),
plus the associated bookkeeping: SQUID washer sizing, circuit-level
threshold fractions, and cross-talk between sibling inputs.

All stored quantities are SI.  Fluxes cross module boundaries in
flux-quantum units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

from .constants import PHI0, format_inductance
from .errors import ConstraintViolationError, SaturationError

# Inductors below this are flagged as difficult to fabricate (advisory).
MIN_FABRICABLE_INDUCTANCE = 0.1e-12

_CONSTRAINT_RTOL = 1e-9


@dataclass(frozen=True)
class DrLoopSpec:
    """Receiving-SQUID inductances from the beta_l = 1 sizing rule."""

    ic: float        # junction critical current, A
    l_washer: float  # washer inductance Phi0/(2 Ic), H
    l_total: float   # washer plus both junction inductances near threshold, H

    def __post_init__(self) -> None:
        if self.ic <= 0.0:
            raise ValueError(f"critical current must be positive, got {self.ic}")
        if not math.isclose(self.l_washer, PHI0 / (2.0 * self.ic), rel_tol=1e-12):
            raise ValueError("l_washer inconsistent with the beta_l = 1 sizing rule")
        if self.l_total <= self.l_washer:
            raise ValueError("total inductance must exceed the bare washer")


def size_squid(ic: float) -> DrLoopSpec:
    """Washer and total inductance of a receiving SQUID at beta_l = 1.

    The total adds the two junction inductances with one junction taken
    at critical current and the other at zero current, giving
    Phi0/Ic * (3*pi + 2)/(4*pi).
    """
    if ic <= 0.0:
        raise ValueError(f"critical current must be positive, got {ic}")
    return DrLoopSpec(
        ic=ic,
        l_washer=PHI0 / (2.0 * ic),
        l_total=(PHI0 / ic) * (3.0 * math.pi + 2.0) / (4.0 * math.pi),
    )


@dataclass(frozen=True)
class CollectionLoopDesign:
    """Parameters of the collection-loop fan-in circuit for one dendrite.

    ``l_di2`` is the designed quantity (the DI output coil); leave it
    ``None`` and fill it with :func:`design_ldi2_collection`.  The DC
    parasitic is expressed as a fraction of the output coil,
    l_dc2 = alpha * l_dc3.
    """

    ic: float                 # junction critical current, A (shared)
    n: int                    # fan-in count
    l_dc1: float = 10e-12     # per-input collection washer, H
    l_dc3: float = 100e-12    # collection output coil, H
    alpha: float = 0.05       # parasitic ratio l_dc2 / l_dc3
    k1: float = 0.5           # DI -> DC coupling factor
    k2: float = 0.5           # DC -> DR coupling factor
    l_di1: float = 1e-9       # DI storage inductor, H
    l_di2: float | None = None  # DI output coil, H (the designed quantity)
    gamma: float = 1.0        # saturation ratio, i_sat = gamma * ic
    phi_max: float = 0.5      # flux budget, Phi0 units

    def __post_init__(self) -> None:
        if self.ic <= 0.0:
            raise ValueError(f"critical current must be positive, got {self.ic}")
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"fan-in count must be a positive integer, got {self.n}")
        for name in ("l_dc1", "l_dc3", "l_di1"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.l_di2 is not None and self.l_di2 <= 0.0:
            raise ValueError("l_di2 must be positive when set")
        if self.alpha < 0.0:
            raise ValueError(f"parasitic ratio must be non-negative, got {self.alpha}")
        for name in ("k1", "k2"):
            k = getattr(self, name)
            if not 0.0 < k <= 1.0:
                raise ValueError(f"coupling factor {name} must lie in (0, 1], got {k}")
        if self.gamma <= 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not 0.0 < self.phi_max <= 0.5:
            raise ValueError(f"flux budget must lie in (0, 0.5] Phi0, got {self.phi_max}")

    @property
    def i_sat(self) -> float:
        """DI-loop saturation current gamma * ic, A."""
        return self.gamma * self.ic

    @property
    def l_washer(self) -> float:
        """Receiving-SQUID washer inductance, H."""
        return PHI0 / (2.0 * self.ic)

    @property
    def l_dc_tot(self) -> float:
        """Total collection-loop inductance n*l_dc1 + (1 + alpha)*l_dc3, H."""
        return self.n * self.l_dc1 + (1.0 + self.alpha) * self.l_dc3

    @property
    def m_dr_dc(self) -> float:
        """DC -> DR mutual inductance k2 * sqrt(l_dc3 * l_washer), H."""
        return self.k2 * math.sqrt(self.l_dc3 * self.l_washer)

    def m_dc_di(self) -> float:
        """DI -> DC mutual inductance k1 * sqrt(l_di2 * l_dc1), H."""
        if self.l_di2 is None:
            raise ValueError("l_di2 is not set; run design_ldi2_collection first")
        return self.k1 * math.sqrt(self.l_di2 * self.l_dc1)

    def with_designed_coil(self) -> "CollectionLoopDesign":
        """Copy of the design with l_di2 solved from the flux budget."""
        return replace(self, l_di2=design_ldi2_collection(self))


def design_ldi2_collection(design: CollectionLoopDesign) -> float:
    """DI output-coil inductance that saturates exactly at the flux budget.

    Inverts the all-inputs-saturated flux expression so that n inputs at
    i_sat apply precisely phi_max to the receiving SQUID.  Any ``l_di2``
    already present on the design is ignored.
    """
    phi_max_wb = design.phi_max * PHI0
    bracket = (
        math.sqrt(design.l_dc1 / design.l_dc3)
        + math.sqrt(design.l_dc3 / design.l_dc1) * (1.0 + design.alpha) / design.n
    )
    term = phi_max_wb / (design.k1 * design.k2 * design.i_sat) * bracket
    return term * term / design.l_washer


def applied_flux_collection(design: CollectionLoopDesign, di_currents: Sequence[float]) -> float:
    """Flux applied to the receiving SQUID by the given DI currents.

    Args:
        design: circuit with ``l_di2`` set.
        di_currents: one current per input, each in [0, i_sat], A.

    Returns:
        Applied flux in Phi0 units.
    """
    if len(di_currents) != design.n:
        raise ValueError(f"expected {design.n} input currents, got {len(di_currents)}")
    i_max = design.i_sat * (1.0 + 1e-12)
    for i, cur in enumerate(di_currents):
        if cur < 0.0 or cur > i_max:
            raise SaturationError(
                f"input {i} current {cur} A outside [0, {design.i_sat}] A"
            )
    m_dc_di = design.m_dc_di()
    flux_wb = design.m_dr_dc / design.l_dc_tot * m_dc_di * math.fsum(di_currents)
    return flux_wb / PHI0


def verify_collection_design(design: CollectionLoopDesign, rel_tol: float = _CONSTRAINT_RTOL) -> float:
    """Check the all-saturated round trip and return the achieved flux.

    Raises :class:`ConstraintViolationError` when the design's ``l_di2``
    does not reproduce ``phi_max`` within ``rel_tol``.
    """
    achieved = applied_flux_collection(design, [design.i_sat] * design.n)
    if abs(achieved - design.phi_max) > rel_tol * design.phi_max:
        raise ConstraintViolationError(
            f"all-saturated flux {achieved!r} Phi0 misses the budget "
            f"{design.phi_max!r} Phi0; l_di2 does not satisfy the constraint"
        )
    return achieved


def threshold_fraction_circuit(design: CollectionLoopDesign, bias_ratio: float) -> float:
    """Fraction of saturated inputs that drives the receiving SQUID to threshold.

    Computed entirely from circuit quantities: the per-input flux step,
    the total SQUID inductance, and the current headroom ic*(1 - bias).
    For a design satisfying the flux-budget constraint with a half-quantum
    budget this equals the circuit-free activity fraction and is
    independent of n, the coil values, and the couplings.
    """
    if not 0.0 < bias_ratio < 1.0:
        raise ValueError(f"bias_ratio must lie in (0, 1), got {bias_ratio}")
    verify_collection_design(design)
    per_input_wb = design.m_dr_dc / design.l_dc_tot * design.m_dc_di() * design.i_sat
    l_total = size_squid(design.ic).l_total
    p = l_total * design.ic * (1.0 - bias_ratio) / per_input_wb
    return p / design.n


def crosstalk_current(design: CollectionLoopDesign, p_active: int) -> float:
    """Current induced in one quiet DI loop by p saturated siblings, A.

    Linear in the number of active inputs: the shared collection coil
    couples back into every DI loop through its output coil.
    """
    if not 0 <= p_active <= design.n:
        raise ValueError(f"active count must lie in [0, {design.n}], got {p_active}")
    if design.l_di2 is None:
        raise ValueError("l_di2 is not set; run design_ldi2_collection first")
    l_di_tot = design.l_di1 + design.l_di2
    base = (design.k1**2 * design.l_di2 * design.l_dc1
            / (design.l_dc_tot * l_di_tot)) * design.i_sat
    return p_active * base


@dataclass(frozen=True)
class NoCollectionDesign:
    """Fan-in circuit without a collection coil: DI couples into the DR washer.

    The receiving washer is split into n equal segments, one per input
    transformer, so each segment carries l_dr1 = Phi0/(2*n*ic_dr) of the
    beta_l = 1 washer total Phi0/(2*ic_dr).  ``ic_di`` defaults to the
    shared-I_c case ic_di = ic_dr; the DI saturation current is ic_di.
    """

    n: int                    # fan-in count
    k: float                  # transformer coupling factor
    ic_dr: float              # receiving-SQUID junction critical current, A
    ic_di: float | None = None   # input-loop junction critical current, A
    l_dr1: float | None = None   # per-input washer segment, H
    sfq_mode: bool = False    # single-flux-quantum storage loops

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"fan-in count must be a positive integer, got {self.n}")
        if not 0.0 < self.k <= 1.0:
            raise ValueError(f"coupling factor must lie in (0, 1], got {self.k}")
        if self.ic_dr <= 0.0:
            raise ValueError(f"ic_dr must be positive, got {self.ic_dr}")
        if self.ic_di is None:
            object.__setattr__(self, "ic_di", self.ic_dr)
        if self.ic_di <= 0.0:
            raise ValueError(f"ic_di must be positive, got {self.ic_di}")
        if self.l_dr1 is None:
            object.__setattr__(self, "l_dr1", PHI0 / (2.0 * self.n * self.ic_dr))
        if self.l_dr1 <= 0.0:
            raise ValueError(f"l_dr1 must be positive, got {self.l_dr1}")

    @property
    def i_sat(self) -> float:
        """DI-loop saturation current, A (one critical current)."""
        return self.ic_di


def design_no_collection(design: NoCollectionDesign, phi_max: float = 0.5) -> float:
    """DI output-coil inductance for the no-collection circuit, H.

    Solves l_di2 = (1/l_dr1) * (phi_max*Phi0 / (n*k*i_sat))**2 so n
    saturated inputs apply exactly the flux budget.  With the default
    segment rule, a half-quantum budget, and shared critical currents
    this reduces to Phi0/(2*n*k**2*ic).
    """
    if not 0.0 < phi_max <= 0.5:
        raise ValueError(f"flux budget must lie in (0, 0.5] Phi0, got {phi_max}")
    term = phi_max * PHI0 / (design.n * design.k * design.i_sat)
    return term * term / design.l_dr1


def sfq_coupling(n: int) -> float:
    """Coupling factor (2n)**-1/2 reconciling single-flux storage with the budget.

    Substituted back into the shared-I_c no-collection rule it returns
    the single-flux loop inductance Phi0/I_c for every n.
    """
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"fan-in count must be a positive integer, got {n}")
    return (2.0 * n) ** -0.5


def vary_ic_no_collection(
    n: int,
    k: float,
    ic_dr: float,
    sfq_mode: bool = False,
    ic_di: float | None = None,
) -> tuple[float, float]:
    """Designed (l_di2, ic_di) when input and receiving I_c may differ.

    In ``sfq_mode`` the input critical current is set by the single-flux
    rule ic_di = ic_dr/(n*k**2) and the loop inductance by the
    single-flux condition l_di2 = Phi0/ic_di.  Otherwise ``ic_di`` must
    be supplied and the flux budget fixes
    l_di2 = Phi0/(2*n*k**2) * ic_dr/ic_di**2.

    Note the two single-flux prescriptions differ by a factor of two in
    ic_di; see :func:`sfq_ic_consistency` for the quantified discrepancy.
    """
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"fan-in count must be a positive integer, got {n}")
    if not 0.0 < k <= 1.0:
        raise ValueError(f"coupling factor must lie in (0, 1], got {k}")
    if ic_dr <= 0.0:
        raise ValueError(f"ic_dr must be positive, got {ic_dr}")
    if sfq_mode:
        ic_di = ic_dr / (n * k**2)
        return PHI0 / ic_di, ic_di
    if ic_di is None:
        raise ValueError("ic_di is required when sfq_mode is off")
    if ic_di <= 0.0:
        raise ValueError(f"ic_di must be positive, got {ic_di}")
    l_di2 = PHI0 / (2.0 * n * k**2) * ic_dr / ic_di**2
    return l_di2, ic_di


def sfq_ic_consistency(n: int, k: float, ic_dr: float) -> dict:
    """Quantify the factor-2 tension in the single-flux input-I_c rules.

    The single-flux prescription ic_di = ic_dr/(n*k**2) combined with
    the single-flux inductance Phi0/ic_di overshoots the half-quantum
    budget: the achieved all-saturated flux is Phi0/sqrt(2).  Meeting
    the budget exactly would need ic_di = ic_dr/(2*n*k**2) instead.
    Both candidate currents and the achieved flux are reported; the
    toolkit implements the first rule as the operative one.
    """
    l_di2, ic_di_rule = vary_ic_no_collection(n, k, ic_dr, sfq_mode=True)
    ic_di_budget = ic_dr / (2.0 * n * k**2)
    # Flux actually applied with the single-flux rule in place.
    design = NoCollectionDesign(n=n, k=k, ic_dr=ic_dr, ic_di=ic_di_rule, sfq_mode=True)
    achieved = n * k * math.sqrt(l_di2 * design.l_dr1) * design.i_sat / PHI0
    return {
        "n": n,
        "k": k,
        "ic_dr": ic_dr,
        "ic_di_single_flux_rule": ic_di_rule,
        "ic_di_flux_budget_rule": ic_di_budget,
        "ic_di_ratio": ic_di_rule / ic_di_budget,
        "l_di2": l_di2,
        "achieved_flux_phi0": achieved,
        "flux_budget_phi0": 0.5,
        "note": (
            "single-flux input-I_c rule overshoots the half-quantum budget "
            "by a factor sqrt(2); the budget-exact rule halves ic_di"
        ),
    }


def check_feasibility(l_di2: float) -> list[str]:
    """Advisory fabrication warnings for a designed inductance."""
    warnings = []
    if l_di2 < MIN_FABRICABLE_INDUCTANCE:
        warnings.append(
            f"designed coil {format_inductance(l_di2)} is below "
            f"{format_inductance(MIN_FABRICABLE_INDUCTANCE)}: sub-picohenry "
            f"inductors are difficult to fabricate"
        )
    return warnings


# --- JSON design configurations (SI units, explicit tag) -------------------

_COLLECTION_FIELDS = {
    "ic", "n", "l_dc1", "l_dc3", "alpha", "k1", "k2", "l_di1", "l_di2",
    "gamma", "phi_max",
}
_NO_COLLECTION_FIELDS = {"n", "k", "ic_dr", "ic_di", "l_dr1", "sfq_mode"}


def _checked_fields(obj: dict, allowed: set[str]) -> dict:
    if not isinstance(obj, dict):
        raise ValueError("design configuration must be a JSON object")
    if obj.get("units") != "SI":
        raise ValueError('design configuration must carry "units": "SI"')
    fields = {key: value for key, value in obj.items() if key != "units"}
    unknown = set(fields) - allowed
    if unknown:
        raise ValueError(f"unknown design fields: {sorted(unknown)}")
    return fields


def collection_design_from_json(obj: dict) -> CollectionLoopDesign:
    """Build a collection-loop design from its documented JSON object."""
    return CollectionLoopDesign(**_checked_fields(obj, _COLLECTION_FIELDS))


def no_collection_design_from_json(obj: dict) -> NoCollectionDesign:
    """Build a no-collection design from its documented JSON object."""
    return NoCollectionDesign(**_checked_fields(obj, _NO_COLLECTION_FIELDS))


def design_to_json(design: CollectionLoopDesign | NoCollectionDesign) -> dict:
    """Serialize a design back to its SI-tagged JSON object."""
    if isinstance(design, CollectionLoopDesign):
        obj = {name: getattr(design, name) for name in sorted(_COLLECTION_FIELDS)}
    elif isinstance(design, NoCollectionDesign):
        obj = {name: getattr(design, name) for name in sorted(_NO_COLLECTION_FIELDS)}
    else:
        raise TypeError(f"not a design object: {type(design).__name__}")
    obj["units"] = "SI"
    return obj
