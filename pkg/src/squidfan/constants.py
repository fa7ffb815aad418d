"""Physical constants and display helpers shared across the toolkit.

All stored quantities are SI (amperes, henries, webers). Fluxes handed
around between modules are expressed in units of the flux quantum; the
helpers here render SI values in the pH / uA magnitudes that circuit
designers actually read.
"""

# Magnetic flux quantum h/2e in webers (CODATA exact value).
PHI0 = 2.067833848e-15


def to_picohenries(inductance: float) -> float:
    return inductance * 1e12


def to_microamps(current: float) -> float:
    return current * 1e6


def format_inductance(inductance: float) -> str:
    """Render an inductance in picohenries, e.g. ``'3.446 pH'``."""
    return f"{to_picohenries(inductance):.6g} pH"


def format_current(current: float) -> str:
    """Render a current in microamperes, e.g. ``'300 uA'``."""
    return f"{to_microamps(current):.6g} uA"
