"""Homogeneous dendritic trees: construction, propagation, and verification.

A tree of fan-in n and depth H has the soma at level 0, dendrites at
levels 1..H-1, and synapses (leaves) at level H.  Nodes are numbered
level by level, soma first, so the node table is implicit arithmetic
rather than stored objects.

Two propagation models are provided.  The binary model is the
abstraction behind the analytic fan-in results: a fired unit delivers
its full saturated signal to its parent, anything else delivers
nothing, and a unit fires when its applied flux reaches the analytic
threshold fraction of the half-quantum budget.  The dynamical model
replaces the threshold rule with simulated SQUID rates fed through a
designed collection-loop circuit, to probe where the binary
abstraction bends between thresholds.

The exhaustive minimum-activity search is the brute-force oracle for
the p**H fan-in claim: it enumerates leaf subsets in order of size and
reports the smallest one that fires the soma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable

import numpy as np

from .design import CollectionLoopDesign, applied_flux_collection, verify_collection_design
from .errors import CapacityError, UnreachableThresholdError
from .fanin import TreeTopology, activity_requirement, point_activity_fraction
from .squid import SquidParams, simulate_rfq

MAX_NODES = 2**31          # build_tree capacity guard
MAX_EXHAUSTIVE_LEAVES = 24  # subset enumeration cap


@dataclass(frozen=True)
class DendriticTree:
    """Complete n-ary tree with one uniform bias for every SQUID in it."""

    topology: TreeTopology
    bias_ratio: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.bias_ratio <= 1.0:
            raise ValueError(f"bias_ratio must lie in [0, 1], got {self.bias_ratio}")

    @property
    def n(self) -> int:
        return self.topology.n

    @property
    def h_depth(self) -> int:
        return self.topology.h_depth

    @property
    def n_leaves(self) -> int:
        return self.topology.n_synapses

    @property
    def n_nodes(self) -> int:
        return self.topology.n_nodes

    def level_offset(self, level: int) -> int:
        """Index of the first node at ``level`` (level-major numbering)."""
        if not 0 <= level <= self.h_depth:
            raise ValueError(f"level must lie in [0, {self.h_depth}], got {level}")
        if self.n == 1:
            return level
        return (self.n**level - 1) // (self.n - 1)

    def level_of(self, node: int) -> int:
        if not 0 <= node < self.n_nodes:
            raise ValueError(f"node {node} out of range")
        level = 0
        while self.level_offset(level) + self.n**level <= node:
            level += 1
        return level

    def children(self, node: int) -> range:
        """Node ids of the n children; empty for leaves."""
        level = self.level_of(node)
        if level == self.h_depth:
            return range(0)
        base = self.level_offset(level + 1) + (node - self.level_offset(level)) * self.n
        return range(base, base + self.n)

    def parent(self, node: int) -> int | None:
        level = self.level_of(node)
        if level == 0:
            return None
        return self.level_offset(level - 1) + (node - self.level_offset(level)) // self.n

    def leaf_node(self, leaf_index: int) -> int:
        """Node id of leaf ``leaf_index`` (0-based within level H)."""
        if not 0 <= leaf_index < self.n_leaves:
            raise ValueError(f"leaf index {leaf_index} out of range")
        return self.level_offset(self.h_depth) + leaf_index

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "h_depth": self.h_depth,
            "bias_ratio": self.bias_ratio,
            "n_nodes": self.n_nodes,
            "n_leaves": self.n_leaves,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DendriticTree":
        return build_tree(int(obj["n"]), int(obj["h_depth"]), float(obj["bias_ratio"]))


@dataclass(frozen=True)
class SynapseState:
    """Analog per-leaf storage-loop currents, with optional leak.

    Currents are clamped to the saturation current ``i_sat``; a leaky
    state carries a decay time constant used by :meth:`decayed`.
    """

    currents: np.ndarray       # amperes, one per leaf
    i_sat: float               # saturation current, A
    decay_tau: float | None = None  # leak time constant; None = no leak

    def __post_init__(self) -> None:
        if self.i_sat <= 0.0:
            raise ValueError(f"saturation current must be positive, got {self.i_sat}")
        currents = np.asarray(self.currents, dtype=float)
        object.__setattr__(self, "currents", currents)
        if currents.ndim != 1:
            raise ValueError("currents must be a flat array, one entry per leaf")
        tol = 1e-12 * self.i_sat
        if np.any(currents < -tol) or np.any(currents > self.i_sat + tol):
            raise ValueError(f"currents must lie in [0, {self.i_sat}] A")
        if self.decay_tau is not None and self.decay_tau <= 0.0:
            raise ValueError(f"decay time constant must be positive, got {self.decay_tau}")

    @classmethod
    def from_active_set(cls, active: Iterable[int], n_leaves: int,
                        i_sat: float, decay_tau: float | None = None) -> "SynapseState":
        """Saturated currents on ``active`` leaves, zero elsewhere."""
        currents = np.zeros(n_leaves)
        for leaf in active:
            currents[leaf] = i_sat
        return cls(currents=currents, i_sat=i_sat, decay_tau=decay_tau)

    def decayed(self, dt: float) -> "SynapseState":
        """State after ``dt`` of exponential leak; unchanged when no leak is set."""
        if dt < 0.0:
            raise ValueError(f"dt must be non-negative, got {dt}")
        if self.decay_tau is None:
            return self
        factor = math.exp(-dt / self.decay_tau)
        return SynapseState(self.currents * factor, self.i_sat, self.decay_tau)


@dataclass(frozen=True)
class PropagationResult:
    """Per-node flux and firing state after one propagation pass.

    ``flux`` is in Phi0 units; for leaves it is the saturated-signal
    equivalent phi_max * current/i_sat rather than a received flux.
    ``rates`` is populated by the dynamical model only (zero at leaves).
    """

    flux: np.ndarray
    fired: np.ndarray
    soma_fired: bool
    rates: np.ndarray | None = None

    def to_json(self) -> dict:
        obj = {
            "soma_fired": bool(self.soma_fired),
            "flux_phi0": [float(x) for x in self.flux],
            "fired": [bool(x) for x in self.fired],
        }
        if self.rates is not None:
            obj["r_fq"] = [float(x) for x in self.rates]
        return obj


def build_tree(n: int, h_depth: int, bias_ratio: float) -> DendriticTree:
    """Complete n-ary tree of depth ``h_depth`` with a uniform bias."""
    topology = TreeTopology(n=n, h_depth=h_depth)
    if topology.n_nodes > MAX_NODES:
        raise CapacityError(
            f"tree with {topology.n_nodes} nodes exceeds the {MAX_NODES} node capacity"
        )
    return DendriticTree(topology=topology, bias_ratio=bias_ratio)


def propagate_binary(tree: DendriticTree, active_leaves: set[int] | frozenset[int]) -> PropagationResult:
    """Threshold cascade with saturated all-or-nothing unit outputs.

    A node receives count/(2n) Phi0 from its fired children and fires
    when that reaches the analytic threshold fraction of the
    half-quantum budget, i.e. when count >= n * f(bias); ties fire.
    """
    if not set(active_leaves) <= set(range(tree.n_leaves)):
        raise ValueError("active_leaves contains indices outside the leaf range")
    n = tree.n
    f = point_activity_fraction(tree.bias_ratio)
    count_needed = n * f

    flux = np.zeros(tree.n_nodes)
    fired = np.zeros(tree.n_nodes, dtype=bool)

    leaf0 = tree.level_offset(tree.h_depth)
    level_fired = np.zeros(tree.n_leaves, dtype=bool)
    for leaf in active_leaves:
        level_fired[leaf] = True
    fired[leaf0:] = level_fired
    flux[leaf0:] = np.where(level_fired, 0.5, 0.0)

    for level in range(tree.h_depth - 1, -1, -1):
        counts = level_fired.reshape(-1, n).sum(axis=1)
        level_fired = counts >= count_needed
        start = tree.level_offset(level)
        flux[start:start + n**level] = counts / (2.0 * n)
        fired[start:start + n**level] = level_fired

    return PropagationResult(flux=flux, fired=fired, soma_fired=bool(fired[0]))


def _fires_submask(mask: int, n: int, h_depth: int, count_needed: float) -> bool:
    # Bottom-up cascade over bitmasks; level h holds n**h bits.
    chunk = (1 << n) - 1
    for level in range(h_depth - 1, -1, -1):
        width = n**level
        new_mask = 0
        for i in range(width):
            if ((mask >> (i * n)) & chunk).bit_count() >= count_needed:
                new_mask |= 1 << i
        mask = new_mask
    return mask == 1


def min_active_synapses(tree: DendriticTree, mode: str = "exhaustive") -> tuple[int, frozenset[int]]:
    """Minimum number of active synapses that fires the soma, with a witness.

    ``exhaustive`` enumerates leaf subsets in order of size (then
    lexicographically) and is limited to 24 leaves; ``constructive``
    builds the clustered p**H witness by filling the first p subtrees
    at every level.  Both raise
    :class:`UnreachableThresholdError` when no subset can fire the soma.
    """
    requirement = activity_requirement(tree.bias_ratio, tree.n)
    if mode == "constructive":
        if not requirement.reachable:
            raise UnreachableThresholdError(
                f"activity fraction {requirement.fraction_continuous:.4f} > 1 "
                f"at bias {tree.bias_ratio}: no leaf set fires the soma"
            )
        p = requirement.p_integer

        def collect(node: int, level: int) -> list[int]:
            if level == tree.h_depth:
                return [node - tree.level_offset(tree.h_depth)]
            leaves: list[int] = []
            for child in list(tree.children(node))[:p]:
                leaves.extend(collect(child, level + 1))
            return leaves

        witness = frozenset(collect(0, 0))
        return p**tree.h_depth, witness

    if mode != "exhaustive":
        raise ValueError(f"unknown mode {mode!r}; use 'exhaustive' or 'constructive'")
    if tree.n_leaves > MAX_EXHAUSTIVE_LEAVES:
        raise CapacityError(
            f"{tree.n_leaves} leaves exceed the exhaustive-search cap of "
            f"{MAX_EXHAUSTIVE_LEAVES}; use the constructive mode"
        )

    # The all-leaves set is maximal; if it cannot fire, nothing can.
    if not propagate_binary(tree, set(range(tree.n_leaves))).soma_fired:
        raise UnreachableThresholdError(
            f"no leaf subset fires the soma at bias {tree.bias_ratio}"
        )

    count_needed = tree.n * point_activity_fraction(tree.bias_ratio)
    for size in range(tree.n_leaves + 1):
        for subset in combinations(range(tree.n_leaves), size):
            mask = 0
            for leaf in subset:
                mask |= 1 << leaf
            if _fires_submask(mask, tree.n, tree.h_depth, count_needed):
                return size, frozenset(subset)
    raise UnreachableThresholdError(
        f"no leaf subset fires the soma at bias {tree.bias_ratio}"
    )


@lru_cache(maxsize=16384)
def _cached_rate(bias_ratio: float, ic: float, l_sq: float, beta_c: float, phi: float) -> float:
    params = SquidParams(bias_ratio=bias_ratio, ic=ic, l_sq=l_sq, beta_c=beta_c)
    return simulate_rfq(params, phi)


def propagate_dynamical(
    tree: DendriticTree,
    state: SynapseState,
    squid: SquidParams,
    design: CollectionLoopDesign,
    gain: float | None = None,
) -> PropagationResult:
    """Steady-state propagation through simulated SQUID rates.

    Level by level from the synapses down to the soma, each node's
    applied flux is computed from its children's storage currents via
    the collection circuit, its fluxon rate is simulated, and its own
    storage current is the saturating accumulation min(gain * rate,
    i_sat).  The default gain maps the response-curve maximum exactly
    onto the saturation current.

    The design must satisfy the flux-budget constraint and match the
    tree's fan-in.
    """
    if design.n != tree.n:
        raise ValueError(f"design fan-in {design.n} != tree fan-in {tree.n}")
    verify_collection_design(design)
    if len(state.currents) != tree.n_leaves:
        raise ValueError(f"expected {tree.n_leaves} leaf currents, got {len(state.currents)}")
    if abs(state.i_sat - design.i_sat) > 1e-12 * design.i_sat:
        raise ValueError("synapse saturation current disagrees with the design")

    def node_rate(phi: float) -> float:
        return _cached_rate(squid.bias_ratio, squid.ic, squid.l_sq, squid.beta_c, phi)

    i_sat = design.i_sat
    if gain is None:
        r_max = node_rate(design.phi_max)
        gain = i_sat / r_max if r_max > 0.0 else 0.0
    elif gain < 0.0:
        raise ValueError(f"gain must be non-negative, got {gain}")

    flux = np.zeros(tree.n_nodes)
    fired = np.zeros(tree.n_nodes, dtype=bool)
    rates = np.zeros(tree.n_nodes)

    leaf0 = tree.level_offset(tree.h_depth)
    level_currents = np.asarray(state.currents, dtype=float)
    flux[leaf0:] = design.phi_max * level_currents / i_sat
    fired[leaf0:] = level_currents >= i_sat * (1.0 - 1e-9)

    for level in range(tree.h_depth - 1, -1, -1):
        start = tree.level_offset(level)
        width = tree.n**level
        next_currents = np.zeros(width)
        for i in range(width):
            children = level_currents[i * tree.n:(i + 1) * tree.n]
            phi = applied_flux_collection(design, children.tolist())
            rate = node_rate(phi)
            node = start + i
            flux[node] = phi
            rates[node] = rate
            fired[node] = rate > 0.0
            next_currents[i] = min(gain * rate, i_sat)
        level_currents = next_currents

    return PropagationResult(flux=flux, fired=fired, soma_fired=bool(fired[0]), rates=rates)
