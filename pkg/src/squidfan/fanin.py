"""Closed-form fan-in analytics for flux-limited SQUID neurons.

Every dendrite or soma in the tree is a SQUID whose total input flux is
capped at half a flux quantum so its response stays monotonic.  Under
that cap, the fraction of saturated inputs needed to reach threshold at
one node is a function of the bias point alone,

    f(b) = ((3*pi + 2) / (2*pi)) * (1 - b),

with b = I_b/I_c, and a homogeneous tree of depth H needs only f(b)**H
of its synapses active.  This module evaluates those fractions, the
per-synapse flux budget, whole-tree activity accounting, and the
integer tree-geometry bookkeeping (fan-in factor, synapse and dendrite
counts).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import UnreachableThresholdError

# Threshold prefactor (3*pi + 2) / (2*pi).  The 3*pi/4*pi piece is the
# beta_L = 1 washer, the rest the two junction inductances near threshold.
ACTIVITY_PREFACTOR = (3.0 * math.pi + 2.0) / (2.0 * math.pi)

# Bias below which even all-saturated inputs cannot fire a node (f > 1).
UNREACHABLE_BIAS = 1.0 - 1.0 / ACTIVITY_PREFACTOR


def _check_bias(bias_ratio: float) -> float:
    b = float(bias_ratio)
    if not 0.0 <= b <= 1.0:
        raise ValueError(f"bias_ratio must lie in [0, 1], got {bias_ratio}")
    return b


@dataclass(frozen=True)
class TreeTopology:
    """Homogeneous dendritic tree: fan-in factor n, depth h_depth."""

    n: int
    h_depth: int

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"fan-in factor must be a positive integer, got {self.n}")
        if not isinstance(self.h_depth, int) or self.h_depth < 1:
            raise ValueError(f"tree depth must be a positive integer, got {self.h_depth}")

    @property
    def n_synapses(self) -> int:
        """Total leaf count n**h_depth (exact integer arithmetic)."""
        return self.n**self.h_depth

    @property
    def n_nodes(self) -> int:
        """Total node count including soma: sum of n**h for h = 0..H."""
        return sum(self.n**h for h in range(self.h_depth + 1))


@dataclass(frozen=True)
class ActivityResult:
    """Per-node threshold requirement at a given bias and fan-in."""

    fraction_continuous: float  # f(b); may exceed 1 when unreachable
    p_integer: int              # ceil(n * f), minimum integer active inputs
    reachable: bool             # f <= 1

    def __post_init__(self) -> None:
        if self.fraction_continuous < 0.0:
            raise ValueError("activity fraction cannot be negative")


def synapse_flux_quota(tree: TreeTopology) -> float:
    """Flux budget per maximally weighted synapse, in flux-quantum units.

    With n inputs sharing the half-quantum cap each one may couple at
    most 1/(2n).
    """
    return 1.0 / (2.0 * tree.n)


def point_activity_fraction(bias_ratio: float) -> float:
    """Fraction of saturated inputs that drives a single node to threshold.

    Values above 1 mean the node can never fire at this bias, even with
    every input saturated.
    """
    b = _check_bias(bias_ratio)
    return ACTIVITY_PREFACTOR * (1.0 - b)


def tree_activity_fraction(bias_ratio: float, h_depth: int) -> float:
    """Minimum fraction of synapses active to fire a depth-``h_depth`` tree."""
    if not isinstance(h_depth, int) or h_depth < 1:
        raise ValueError(f"tree depth must be a positive integer, got {h_depth}")
    return point_activity_fraction(bias_ratio) ** h_depth


def activity_requirement(bias_ratio: float, n: int) -> ActivityResult:
    """Continuous and integer per-node activity requirement for fan-in n."""
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"fan-in factor must be a positive integer, got {n}")
    f = point_activity_fraction(bias_ratio)
    reachable = f <= 1.0
    p = math.ceil(n * f) if reachable else n + 1
    return ActivityResult(fraction_continuous=f, p_integer=p, reachable=reachable)


def total_unit_fraction(bias_ratio: float, tree: TreeTopology, integer_mode: bool = False) -> float:
    """Fraction of all units (synapses, dendrites, soma) active at threshold.

    Counts the active units level by level: p**h fire at level h out of
    n**h present.  ``integer_mode`` rounds the per-node requirement up to
    the integer count a real circuit needs; it raises
    :class:`UnreachableThresholdError` when the threshold cannot be
    reached at all.
    """
    f = point_activity_fraction(bias_ratio)
    if integer_mode:
        if f > 1.0:
            raise UnreachableThresholdError(
                f"activity fraction {f:.4f} > 1 at bias {bias_ratio}: threshold unreachable"
            )
        p: float = float(math.ceil(tree.n * f))
    else:
        p = tree.n * f
    active = sum(p**h for h in range(tree.h_depth + 1))
    total = sum(tree.n**h for h in range(tree.h_depth + 1))
    return active / total


@dataclass(frozen=True)
class TreeGeometry:
    """Fan-in factor solved from a synapse count and depth.

    ``exact`` marks whether an integer fan-in reproduces ``n_synapses``
    exactly.  For inexact cases ``n`` is the real-valued root and the
    ``nearest_*`` fields report the closest integer tree as a rounding
    diagnostic.
    """

    n_synapses: int
    h_depth: int
    n: float
    exact: bool
    dendrite_count: float
    topology: TreeTopology | None
    nearest_n: int
    nearest_n_synapses: int
    nearest_dendrite_count: int


def _dendrite_count_int(n: int, h_depth: int) -> int:
    # Intermediate dendrites live at levels 1..H-1; soma and synapses excluded.
    return sum(n**h for h in range(1, h_depth))


def tree_geometry(n_synapses: int, h_depth: int) -> TreeGeometry:
    """Solve N = n**H for the fan-in factor and count intermediate dendrites.

    Returns an exact integer solution when one exists; otherwise the
    real-valued root with ``exact=False`` plus the nearest integer tree.
    """
    if not isinstance(n_synapses, int) or n_synapses < 1:
        raise ValueError(f"synapse count must be a positive integer, got {n_synapses}")
    if not isinstance(h_depth, int) or h_depth < 1:
        raise ValueError(f"tree depth must be a positive integer, got {h_depth}")

    root = n_synapses ** (1.0 / h_depth)
    candidate = round(root)
    exact_n = 0
    for m in (candidate - 1, candidate, candidate + 1):
        if m >= 1 and m**h_depth == n_synapses:
            exact_n = m
            break

    if exact_n:
        return TreeGeometry(
            n_synapses=n_synapses,
            h_depth=h_depth,
            n=float(exact_n),
            exact=True,
            dendrite_count=float(_dendrite_count_int(exact_n, h_depth)),
            topology=TreeTopology(n=exact_n, h_depth=h_depth),
            nearest_n=exact_n,
            nearest_n_synapses=n_synapses,
            nearest_dendrite_count=_dendrite_count_int(exact_n, h_depth),
        )

    nearest = max(1, candidate)
    return TreeGeometry(
        n_synapses=n_synapses,
        h_depth=h_depth,
        n=root,
        exact=False,
        dendrite_count=sum(root**h for h in range(1, h_depth)),
        topology=None,
        nearest_n=nearest,
        nearest_n_synapses=nearest**h_depth,
        nearest_dendrite_count=_dendrite_count_int(nearest, h_depth),
    )
