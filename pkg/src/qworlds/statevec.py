"""Sparse product-basis quantum states over named finite subsystems.

A scenario's Hilbert space is a tensor product of small labeled registers:
a particle mode, detector pointers, an observer memory, environment bits.
States are sparse maps from configuration tuples (one symbol per register)
to complex amplitudes, so adding environment registers is cheap until they
actually become entangled -- the work scales with the number of occupied
configurations, not with the full tensor-product dimension.

Everything here is an immutable value; all operations are pure functions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

# Amplitudes below this magnitude are floating-point dust and get dropped;
# every tolerance asserted downstream is >= 1e-12, two orders above.
PRUNE_THRESHOLD = 1e-14
NORM_TOL = 1e-12

# A configuration is a tuple of symbols, one per subsystem in layout order.
Configuration = tuple


class LayoutError(ValueError):
    """A subsystem, symbol, or configuration does not fit the layout."""


class DegenerateStateError(ValueError):
    """The requested state has zero norm and cannot be normalized."""


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered named subsystems, each with a small finite symbol alphabet."""

    subsystems: tuple[tuple[str, tuple[str, ...]], ...]

    def __post_init__(self):
        names = [name for name, _ in self.subsystems]
        if len(set(names)) != len(names):
            raise LayoutError(f"duplicate subsystem names: {names}")
        for name, alphabet in self.subsystems:
            if len(alphabet) < 2:
                raise LayoutError(f"subsystem {name!r} needs at least 2 symbols")
            if len(set(alphabet)) != len(alphabet):
                raise LayoutError(f"subsystem {name!r} repeats a symbol")

    @classmethod
    def of(cls, spec: Sequence[tuple[str, Iterable[str]]]) -> "SubsystemLayout":
        return cls(tuple((name, tuple(alphabet)) for name, alphabet in spec))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.subsystems)

    def index(self, name: str) -> int:
        for i, (n, _) in enumerate(self.subsystems):
            if n == name:
                return i
        raise LayoutError(f"no subsystem named {name!r}")

    def alphabet(self, name: str) -> tuple[str, ...]:
        return self.subsystems[self.index(name)][1]

    def __len__(self) -> int:
        return len(self.subsystems)

    def validate(self, config: Configuration) -> Configuration:
        config = tuple(config)
        if len(config) != len(self.subsystems):
            raise LayoutError(f"configuration {config} has wrong arity")
        for symbol, (name, alphabet) in zip(config, self.subsystems):
            if symbol not in alphabet:
                raise LayoutError(f"symbol {symbol!r} not in alphabet of {name!r}")
        return config

    def configuration(self, assignment: Mapping[str, str]) -> Configuration:
        """Build a configuration from a {subsystem: symbol} mapping."""
        extra = set(assignment) - set(self.names)
        if extra:
            raise LayoutError(f"unknown subsystems {sorted(extra)}")
        missing = set(self.names) - set(assignment)
        if missing:
            raise LayoutError(f"missing symbols for {sorted(missing)}")
        return self.validate(tuple(assignment[name] for name in self.names))

    def sub_layout(self, keep: Sequence[str]) -> "SubsystemLayout":
        indices = sorted(self.index(name) for name in keep)
        return SubsystemLayout(tuple(self.subsystems[i] for i in indices))


@dataclass(frozen=True)
class State:
    """Normalized sparse state: configuration tuple -> complex amplitude."""

    layout: SubsystemLayout
    amplitudes: dict

    def amplitude(self, config: Configuration) -> complex:
        return self.amplitudes.get(tuple(config), 0j)

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def configurations(self) -> list[Configuration]:
        return sorted(self.amplitudes)

    def marginal(self, subsystem: str) -> dict[str, float]:
        """Probability of each symbol of one subsystem (Born weights)."""
        i = self.layout.index(subsystem)
        out: dict[str, float] = {s: 0.0 for s in self.layout.alphabet(subsystem)}
        for config, amp in self.amplitudes.items():
            out[config[i]] += abs(amp) ** 2
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, State):
            return NotImplemented
        return self.layout == other.layout and self.amplitudes == other.amplitudes


def prune(amplitudes: dict, threshold: float = PRUNE_THRESHOLD) -> dict:
    """Drop float dust below the amplitude threshold."""
    return {c: a for c, a in amplitudes.items() if abs(a) >= threshold}


def make_state(
    layout: SubsystemLayout,
    terms: Iterable[tuple[Configuration, complex]],
) -> State:
    """Build a normalized state; duplicate configurations are summed first."""
    acc: dict[Configuration, complex] = {}
    for config, amp in terms:
        config = layout.validate(config)
        acc[config] = acc.get(config, 0j) + complex(amp)
    if not acc:
        raise DegenerateStateError("no terms given")
    norm = math.sqrt(sum(abs(a) ** 2 for a in acc.values()))
    if norm < PRUNE_THRESHOLD:
        raise DegenerateStateError("terms sum to the zero vector")
    normalized = {c: acc[c] / norm for c in sorted(acc)}
    return State(layout, prune(normalized))


def basis_state(layout: SubsystemLayout, assignment: Mapping[str, str]) -> State:
    return make_state(layout, [(layout.configuration(assignment), 1.0)])


def inner_product(a: State, b: State) -> complex:
    """<a|b> with conjugation on the first argument."""
    if a.layout != b.layout:
        raise LayoutError("inner product between different layouts")
    small, large = (a, b) if len(a.amplitudes) <= len(b.amplitudes) else (b, a)
    total = 0j
    for config in sorted(small.amplitudes):
        if config in large.amplitudes:
            total += a.amplitudes[config].conjugate() * b.amplitudes[config]
    return total


@dataclass(frozen=True)
class DensityMatrix:
    """Sparse Hermitian operator: (row config, col config) -> complex."""

    layout: SubsystemLayout
    entries: dict

    def trace(self) -> float:
        return sum(v.real for (r, c), v in self.entries.items() if r == c)

    def purity(self) -> float:
        # tr(rho^2) = sum |rho_ab|^2 for Hermitian rho
        return sum(abs(v) ** 2 for v in self.entries.values())

    def support(self) -> list[Configuration]:
        configs = set()
        for r, c in self.entries:
            configs.add(r)
            configs.add(c)
        return sorted(configs)

    def dense(self, support: Sequence[Configuration] | None = None):
        configs = list(support) if support is not None else self.support()
        pos = {c: i for i, c in enumerate(configs)}
        mat = np.zeros((len(configs), len(configs)), dtype=complex)
        for (r, c), v in self.entries.items():
            mat[pos[r], pos[c]] = v
        return mat, configs

    def validate(self, check_psd: bool = False, tol: float = NORM_TOL) -> None:
        if abs(self.trace() - 1.0) > tol:
            raise ValueError(f"trace {self.trace()} != 1")
        for (r, c), v in self.entries.items():
            if abs(v - self.entries.get((c, r), 0j).conjugate()) > tol:
                raise ValueError(f"not Hermitian at {(r, c)}")
        if check_psd:
            mat, _ = self.dense()
            if np.linalg.eigvalsh(mat).min() < -1e-9:
                raise ValueError("not positive semidefinite")


def partial_trace(state: State, keep: Iterable[str]) -> DensityMatrix:
    """Reduced density matrix over the kept subsystems.

    Configurations are grouped by their traced-out part; each group
    contributes an outer product of its kept-part amplitudes.
    """
    keep = list(keep)
    if not keep:
        raise LayoutError("must keep at least one subsystem")
    keep_idx = sorted(state.layout.index(name) for name in keep)
    drop_idx = [i for i in range(len(state.layout)) if i not in keep_idx]

    groups: dict[tuple, list[tuple[Configuration, complex]]] = {}
    for config in sorted(state.amplitudes):
        env = tuple(config[i] for i in drop_idx)
        kept = tuple(config[i] for i in keep_idx)
        groups.setdefault(env, []).append((kept, state.amplitudes[config]))

    entries: dict[tuple, complex] = {}
    for env in sorted(groups):
        for row, a_row in groups[env]:
            for col, a_col in groups[env]:
                key = (row, col)
                entries[key] = entries.get(key, 0j) + a_row * a_col.conjugate()
    return DensityMatrix(state.layout.sub_layout(keep), prune(entries))


def projector(state: State) -> DensityMatrix:
    """|psi><psi| over the full layout."""
    return partial_trace(state, state.layout.names)


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Half the sum of absolute eigenvalues of (a - b), in [0, 1].

    The difference is diagonalized densely on the joint support, which in
    every scenario here is a few dozen dimensions at most.
    """
    if a.layout != b.layout:
        raise LayoutError("trace distance between different layouts")
    support = sorted(set(a.support()) | set(b.support()))
    if not support:
        return 0.0
    mat_a, _ = a.dense(support)
    mat_b, _ = b.dense(support)
    eigenvalues = np.linalg.eigvalsh(mat_a - mat_b)
    return 0.5 * float(np.abs(eigenvalues).sum())
