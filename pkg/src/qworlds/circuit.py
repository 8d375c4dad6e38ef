"""Unitary component library and circuit composition for interferometer setups.

Beam splitters, mirrors, path markers, detector and observer couplings,
environment bits, and absorber screens are all sparse unitaries acting on
one or a few named subsystems, with identity implied on every
configuration the action map does not mention.  Measurement-like devices
are entangling unitaries onto pointer registers, never projections, so
every circuit stays exactly invertible; projection belongs to the collapse
engine alone.

Conventions baked into the factories:

* the 50/50 splitter sends |down> to (|up> - |down>)/sqrt(2), i.e. the
  reflected lower branch picks up the minus sign, and mirrors swap
  up/down with no extra phase -- with these choices the splitter, mirror,
  splitter chain maps |up> back to |up> exactly;
* conditional couplings are completed to unitaries as involutions (the
  triggered image swaps back), which keeps every component self-checking
  and makes circuit inversion total.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

from .statevec import Configuration, LayoutError, State, SubsystemLayout, prune

UNITARY_TOL = 1e-12


class ComponentError(ValueError):
    """A component is malformed (bad targets, bad coefficients)."""


class NonUnitaryError(ComponentError):
    """The action map does not close to a unitary on its support."""


def _fmt(z: complex) -> str:
    z = complex(z)
    if z.imag == 0:
        return f"{z.real:.6g}"
    return f"{z.real:.6g}{z.imag:+.6g}j"


@dataclass(frozen=True)
class Component:
    """A sparse unitary on the product alphabet of its target subsystems.

    ``action`` maps an input local configuration (a tuple of symbols, one
    per target) to its output superposition.  Local configurations absent
    from the map are left untouched.  Unitarity of the explicit block is
    checked densely at construction.
    """

    name: str
    kind: str
    targets: tuple[str, ...]
    action: tuple  # ((in_config, ((out_config, amplitude), ...)), ...)

    def __post_init__(self):
        if not self.targets:
            raise ComponentError("component needs at least one target")
        matrix, _ = self.matrix()
        n = matrix.shape[0]
        if not np.allclose(matrix.conj().T @ matrix, np.eye(n), atol=UNITARY_TOL):
            raise NonUnitaryError(f"{self.name}: action is not unitary on its support")

    @classmethod
    def of(
        cls,
        name: str,
        kind: str,
        targets: Iterable[str],
        action: Mapping[tuple, Iterable[tuple[tuple, complex]]],
    ) -> "Component":
        packed = tuple(
            (tuple(key), tuple((tuple(out), complex(a)) for out, a in outs))
            for key, outs in action.items()
        )
        return cls(name, kind, tuple(targets), packed)

    def action_map(self) -> dict:
        return {key: outs for key, outs in self.action}

    def support(self) -> list[tuple]:
        configs = set()
        for key, outs in self.action:
            configs.add(key)
            configs.update(out for out, _ in outs)
        return sorted(configs)

    def matrix(self):
        """Dense matrix on the support block, implicit identity elsewhere.

        The support must be closed under the action: if an output config
        never appears as an input, its implicit-identity column would
        collide with the explicit one and the unitarity check fails.
        """
        support = self.support()
        pos = {c: i for i, c in enumerate(support)}
        mat = np.zeros((len(support), len(support)), dtype=complex)
        explicit = set()
        for key, outs in self.action:
            explicit.add(key)
            for out, a in outs:
                mat[pos[out], pos[key]] += a
        for c in support:
            if c not in explicit:
                mat[pos[c], pos[c]] = 1.0  # orphan output: will fail the check
        return mat, support

    def dagger(self) -> "Component":
        """Conjugate transpose, as another sparse component."""
        transposed: dict[tuple, list[tuple[tuple, complex]]] = {}
        for key, outs in self.action:
            for out, a in outs:
                transposed.setdefault(out, []).append((key, a.conjugate()))
        name = self.name[:-1] if self.name.endswith("'") else self.name + "'"
        return Component.of(name, self.kind, self.targets, transposed)

    def apply(self, state: State) -> State:
        indices = [state.layout.index(t) for t in self.targets]
        action = self.action_map()
        out: dict[Configuration, complex] = {}
        for config, amp in state.amplitudes.items():
            local = tuple(config[i] for i in indices)
            mapped = action.get(local)
            if mapped is None:
                out[config] = out.get(config, 0j) + amp
                continue
            for local_out, a in mapped:
                new = list(config)
                for i, symbol in zip(indices, local_out):
                    new[i] = symbol
                key = tuple(new)
                out[key] = out.get(key, 0j) + amp * a
        return State(state.layout, prune(out))


@dataclass(frozen=True)
class Circuit:
    """An ordered sequence of components bound to one layout."""

    layout: SubsystemLayout
    steps: tuple[Component, ...]

    def __post_init__(self):
        for step in self.steps:
            for i, target in enumerate(step.targets):
                alphabet = self.layout.alphabet(target)  # raises if absent
                for key, outs in step.action:
                    symbols = [key[i]] + [out[i] for out, _ in outs]
                    for s in symbols:
                        if s not in alphabet:
                            raise LayoutError(
                                f"{step.name}: symbol {s!r} not in {target!r}"
                            )

    def __len__(self) -> int:
        return len(self.steps)

    def evolve(self, state: State) -> Iterator[State]:
        """Yield the state after each step, in order."""
        if state.layout != self.layout:
            raise LayoutError("state layout does not match circuit layout")
        for step in self.steps:
            state = step.apply(state)
            yield state


def apply(circuit: Circuit, state: State) -> State:
    """Run the whole circuit; unitary steps preserve the norm."""
    for state in circuit.evolve(state):
        pass
    return state


def inverse(circuit: Circuit) -> Circuit:
    """Reversed order, each step conjugate-transposed: exact undo."""
    return Circuit(circuit.layout, tuple(s.dagger() for s in reversed(circuit.steps)))


# ---------------------------------------------------------------------------
# component factories

def beam_splitter(
    alpha: complex,
    beta: complex,
    subsystem: str = "neutron",
    up: str = "up",
    down: str = "down",
) -> Component:
    """Two-mode splitter: up -> alpha up + beta down.

    The down column is completed as (conj(beta), -conj(alpha)) so the
    balanced case reproduces the phase convention described in the module
    docstring.
    """
    alpha, beta = complex(alpha), complex(beta)
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > UNITARY_TOL:
        raise ComponentError("splitter coefficients must satisfy |a|^2+|b|^2 = 1")
    action = {
        (up,): [((up,), alpha), ((down,), beta)],
        (down,): [((up,), beta.conjugate()), ((down,), -alpha.conjugate())],
    }
    name = f"splitter[{_fmt(alpha)},{_fmt(beta)}]"
    return Component.of(name, "splitter", (subsystem,), action)


def mirror(subsystem: str = "neutron", up: str = "up", down: str = "down") -> Component:
    """Phase-free swap of the two travel directions (both mirrors at once)."""
    action = {(up,): [((down,), 1.0)], (down,): [((up,), 1.0)]}
    return Component.of("mirror", "mirror", (subsystem,), action)


def mode_swap(
    a: str,
    b: str,
    subsystem: str = "neutron",
    kind: str = "custom",
    name: str | None = None,
) -> Component:
    """Unit-amplitude swap of two mode symbols."""
    action = {(a,): [((b,), 1.0)], (b,): [((a,), 1.0)]}
    return Component.of(name or f"swap[{a},{b}]", kind, (subsystem,), action)


def spin_marker(
    mode: str = "neutron",
    spin: str = "spin",
    up: str = "up",
    down: str = "down",
    up_mark: str = "M1",
    down_mark: str = "M2",
    blank: str = "none",
) -> Component:
    """Write which-path memory into the spin register.

    up correlates with ``up_mark`` and down with ``down_mark``.  After the
    mirrors have exchanged the travel directions the correlation is
    inverted, so the eraser (second magnet) is the marker built with the
    marks swapped.
    """
    action = {
        (up, blank): [((up, up_mark), 1.0)],
        (up, up_mark): [((up, blank), 1.0)],
        (down, blank): [((down, down_mark), 1.0)],
        (down, down_mark): [((down, blank), 1.0)],
    }
    name = f"marker[{up}->{up_mark},{down}->{down_mark}]"
    return Component.of(name, "marker", (mode, spin), action)


def detector_coupling(
    detector: str,
    trigger_mode: str,
    mode: str = "neutron",
    ready: str = "r",
    triggered: str = "in",
    captured: str | None = None,
) -> Component:
    """Capture the particle: (trigger, ready) <-> (in-detector, triggered).

    A particle arriving in any other mode, or a detector that has already
    fired, is left alone.
    """
    captured = captured if captured is not None else f"in{detector}"
    action = {
        (trigger_mode, ready): [((captured, triggered), 1.0)],
        (captured, triggered): [((trigger_mode, ready), 1.0)],
    }
    return Component.of(f"detector[{detector}]", "detector", (mode, detector), action)


def observer_coupling(
    observer: str = "observer",
    detectors: tuple[str, str] = ("D1", "D2"),
    ready: str = "r",
    triggered: str = "in",
) -> Component:
    """Copy the detector pair's pointer pattern into the observer memory."""
    d1, d2 = detectors
    saw1, saw2 = f"saw{d1}", f"saw{d2}"
    action = {
        (triggered, ready, ready): [((triggered, ready, saw1), 1.0)],
        (triggered, ready, saw1): [((triggered, ready, ready), 1.0)],
        (ready, triggered, ready): [((ready, triggered, saw2), 1.0)],
        (ready, triggered, saw2): [((ready, triggered, ready), 1.0)],
    }
    return Component.of("observer", "observer", (d1, d2, observer), action)


def environment_coupling(
    env_index: int,
    target: str,
    triggered: str = "in",
    env_prefix: str = "env",
) -> Component:
    """Controlled flip of one fresh environment bit off the target register.

    Each fresh bit applied to a superposition that is off-diagonal in the
    target basis kills another factor of the coherence; states diagonal in
    the target basis just pick up a product factor.
    """
    env = f"{env_prefix}{env_index}"
    action = {
        (triggered, "0"): [((triggered, "1"), 1.0)],
        (triggered, "1"): [((triggered, "0"), 1.0)],
    }
    return Component.of(f"env[{env_index}->{target}]", "environment", (target, env), action)


def absorber(
    path_mode: str,
    subsystem: str = "neutron",
    sink: str = "absorbed",
) -> Component:
    """Absorption screen: move one travel mode into a sink symbol.

    Realized as a swap with the (unoccupied) sink so the component stays
    unitary and the circuit stays invertible.
    """
    return mode_swap(path_mode, sink, subsystem, "absorber", f"absorber[{path_mode}]")
