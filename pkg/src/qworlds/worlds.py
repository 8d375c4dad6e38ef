"""Branch bookkeeping: decompose an evolving state into pointer-basis worlds.

A world is one term of the state's decomposition in a configuration basis
chosen by the observer (optionally coarse-grained), carrying a measure --
the squared magnitude of its coefficient.  Tracking a circuit produces a
time-indexed tree of such branches, with parent/child edges defined by
amplitude flow through each step.  Several parents feeding one child is an
interference (merge) event and is recorded as such.

The decomposition is pure bookkeeping: the full state evolves through
exactly the same operator applications whether or not it is decomposed, so
the choice of basis can never influence the dynamics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .circuit import Circuit
from .statevec import Configuration, State, SubsystemLayout

# A world whose measure falls below this does not exist, numerically.
MEASURE_PRUNE = 1e-14
CONSERVATION_TOL = 1e-12


class MeasureLeakError(ValueError):
    """Children's measures do not add up to their parent's."""


@dataclass(frozen=True)
class WorldBasisSpec:
    """Which subsystems label a world, and how symbols may be grouped.

    ``pointer_subsystems`` of None means all of them.  ``coarse_graining``
    maps a subsystem to symbol -> group-label pairs; unmapped symbols are
    their own group, so the grouping always partitions each alphabet.
    """

    pointer_subsystems: tuple[str, ...] | None = None
    coarse_graining: tuple = ()  # ((subsystem, ((symbol, group), ...)), ...)

    @classmethod
    def of(
        cls,
        pointer_subsystems: Sequence[str] | None = None,
        coarse_graining: Mapping[str, Mapping[str, str]] | None = None,
    ) -> "WorldBasisSpec":
        pointers = None if pointer_subsystems is None else tuple(pointer_subsystems)
        grains = tuple(
            (name, tuple(sorted(groups.items())))
            for name, groups in sorted((coarse_graining or {}).items())
        )
        return cls(pointers, grains)

    def pointer_indices(self, layout: SubsystemLayout) -> list[int]:
        names = self.pointer_subsystems or layout.names
        return [layout.index(n) for n in names]

    def label(self, layout: SubsystemLayout, config: Configuration) -> tuple:
        grains = {name: dict(groups) for name, groups in self.coarse_graining}
        names = self.pointer_subsystems or layout.names
        out = []
        for name in names:
            symbol = config[layout.index(name)]
            out.append(grains.get(name, {}).get(symbol, symbol))
        return tuple(out)


@dataclass(frozen=True)
class Branch:
    """One world: a label, its coefficient, and its exact sub-state.

    ``amplitude * component`` reproduces this branch's part of the full
    state vector term by term.
    """

    label: tuple
    amplitude: complex
    component: State

    @property
    def measure(self) -> float:
        return abs(self.amplitude) ** 2


def decompose(state: State, spec: WorldBasisSpec | None = None) -> list[Branch]:
    """Split a state into branches, one per occupied (coarse) label.

    The branch coefficient is the sub-vector norm carrying the phase of
    the sub-vector's largest entry, so for a plain configuration basis it
    is exactly the stored amplitude.  Branches below the measure-zero
    threshold do not exist and are dropped.
    """
    spec = spec or WorldBasisSpec()
    buckets: dict[tuple, dict[Configuration, complex]] = {}
    for config in sorted(state.amplitudes):
        label = spec.label(state.layout, config)
        buckets.setdefault(label, {})[config] = state.amplitudes[config]

    branches = []
    for label in sorted(buckets):
        sub = buckets[label]
        measure = sum(abs(a) ** 2 for a in sub.values())
        if measure < MEASURE_PRUNE:
            continue
        if len(sub) == 1:
            # plain pointer branch: keep the stored amplitude bit-exactly
            ((config, amplitude),) = sub.items()
            component = State(state.layout, {config: 1.0 + 0j})
        else:
            largest = max(sorted(sub), key=lambda c: abs(sub[c]))
            phase = sub[largest] / abs(sub[largest])
            amplitude = math.sqrt(measure) * phase
            component = State(state.layout, {c: a / amplitude for c, a in sub.items()})
        branches.append(Branch(label, amplitude, component))
    return branches


def reconstruct(branches: Sequence[Branch], layout: SubsystemLayout) -> State:
    """Sum amplitude * component over branches (inverse of decompose)."""
    acc: dict[Configuration, complex] = {}
    for branch in branches:
        for config, a in branch.component.amplitudes.items():
            acc[config] = acc.get(config, 0j) + branch.amplitude * a
    return State(layout, acc)


def measure_of_existence(branch: Branch) -> float:
    return branch.measure


def split_probabilities(parent: Branch, children: Sequence[Branch]) -> list[float]:
    """Ignorance probabilities mu_i / mu at a split event."""
    total = sum(c.measure for c in children)
    if abs(total - parent.measure) > CONSERVATION_TOL:
        raise MeasureLeakError(
            f"children sum to {total}, parent has {parent.measure}"
        )
    return [c.measure / parent.measure for c in children]


@dataclass(frozen=True)
class WorldEdge:
    parent: int
    child: int
    flow: complex      # parent amplitude times the transition amplitude
    probability: float  # flow measure over parent measure


@dataclass(frozen=True)
class History:
    """Root-to-leaf chain of labels: the story one branch experienced."""

    labels: tuple


@dataclass
class WorldTree:
    layout: SubsystemLayout
    spec: WorldBasisSpec
    states: list[State] = field(default_factory=list)
    levels: list[list[Branch]] = field(default_factory=list)
    edges: list[list[WorldEdge]] = field(default_factory=list)  # edges[k]: k-1 -> k
    step_names: list[str] = field(default_factory=list)
    merge_steps: list[int] = field(default_factory=list)

    @property
    def n_steps(self) -> int:
        return len(self.levels)

    @property
    def final_state(self) -> State:
        return self.states[-1]

    def leaves(self, step: int = -1) -> list[Branch]:
        return self.levels[step]

    def measure_total(self, step: int) -> float:
        return sum(b.measure for b in self.levels[step])

    def edges_into(self, step: int, child: int) -> list[WorldEdge]:
        return [e for e in self.edges[step] if e.child == child]

    def histories(self, step: int = -1) -> list[History]:
        """Every root-to-leaf label path; merges multiply the paths."""
        step = step % self.n_steps
        paths: list[list[tuple]] = [[b.label] for b in self.levels[0]]
        anchors = list(range(len(self.levels[0])))
        for k in range(1, step + 1):
            new_paths, new_anchors = [], []
            for path, node in zip(paths, anchors):
                for e in self.edges[k]:
                    if e.parent == node:
                        new_paths.append(path + [self.levels[k][e.child].label])
                        new_anchors.append(e.child)
            paths, anchors = new_paths, new_anchors
        return [History(tuple(p)) for p in paths]


def count_worlds(tree: WorldTree, step: int) -> int:
    """Number of live branches at a time step (zero-measure ones pruned)."""
    return sum(1 for b in tree.levels[step] if b.measure > MEASURE_PRUNE)


def track(circuit: Circuit, initial: State, spec: WorldBasisSpec | None = None) -> WorldTree:
    """Evolve the full state step by step and decompose after each step.

    Edges link a parent to every child its evolved component sends
    amplitude into; the edge probability is the flowed measure over the
    parent's.  At a genuine split those probabilities sum to one per
    parent; where flows of several parents meet (or cancel) the step is
    recorded as an interference event.
    """
    spec = spec or WorldBasisSpec()
    tree = WorldTree(circuit.layout, spec)
    tree.states.append(initial)
    tree.levels.append(decompose(initial, spec))
    tree.edges.append([])
    tree.step_names.append("initial")

    state = initial
    for step_index, component in enumerate(circuit.steps, start=1):
        state = component.apply(state)
        children = decompose(state, spec)
        child_pos = {b.label: i for i, b in enumerate(children)}

        edges: list[WorldEdge] = []
        interference = False
        for p_idx, parent in enumerate(tree.levels[-1]):
            evolved = component.apply(parent.component)
            for piece in decompose(evolved, spec):
                c_idx = child_pos.get(piece.label)
                if c_idx is None:
                    interference = True  # flow cancelled against another parent
                    continue
                edges.append(
                    WorldEdge(
                        parent=p_idx,
                        child=c_idx,
                        flow=parent.amplitude * piece.amplitude,
                        probability=piece.measure,
                    )
                )
        seen_children = [e.child for e in edges]
        if len(seen_children) != len(set(seen_children)):
            interference = True

        tree.states.append(state)
        tree.levels.append(children)
        tree.edges.append(edges)
        tree.step_names.append(component.name)
        if interference:
            tree.merge_steps.append(step_index)
    return tree
