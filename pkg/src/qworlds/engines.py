"""Interpretation engines and the experiments that tell them apart.

Two engines act on the same circuits.  The branching engine is pure
bookkeeping over the unitary evolution: outcome weights are exactly the
branch measures.  The collapse engine adds the textbook extra rule: at a
configurable stage of the measurement chain (after the detectors fire, or
only once the observer looks) the state is projected onto one pointer
branch, sampled with Born weight, and evolution continues from there.

The experiments built on top:

* the undo experiment runs a measurement chain followed by its exact
  inverse.  Unitary-only evolution returns the particle to its source
  with certainty; a collapse at any stage leaves only one branch to run
  backwards through the splitter, and the return probability drops to
  |alpha|^4 + |beta|^4 (one half at a balanced splitter);
* the steering analysis quantifies how much an adversary who controls the
  sibling branch (attenuation and phase, recombined at a balanced
  splitter) can move a detection probability, as a function of the target
  branch's measure mu;
* the record-stability experiment couples fresh environment bits to the
  detector registers and compares how distinguishable two records remain:
  nonlocal +/- superposition records decohere to indistinguishability
  after a single bit, while the local pointer records survive any number.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import circuit as qc
from .statevec import State, SubsystemLayout, basis_state, make_state, partial_trace, trace_distance
from .worlds import Branch, decompose

RNG_NAME = "numpy-pcg64/seedsequence-spawn"

MODE_SYMBOLS = ("up", "down", "inD1", "inD2", "escaped", "absorbed", "source")
COLLAPSE_STAGES = ("detector", "observer")


class EngineError(ValueError):
    pass


class StageError(EngineError):
    """The configured collapse stage has no component in the circuit."""


@dataclass(frozen=True)
class EngineMode:
    kind: str  # "mwi" | "collapse"
    collapse_stage: str | None = None

    def __post_init__(self):
        if self.kind not in ("mwi", "collapse"):
            raise EngineError(f"unknown engine kind {self.kind!r}")
        if self.kind == "collapse":
            if self.collapse_stage not in COLLAPSE_STAGES:
                raise EngineError(f"collapse stage must be one of {COLLAPSE_STAGES}")
        elif self.collapse_stage is not None:
            raise EngineError("collapse_stage only applies to the collapse engine")


MWI = EngineMode("mwi")


def collapse_mode(stage: str = "detector") -> EngineMode:
    return EngineMode("collapse", stage)


@dataclass(frozen=True)
class TrialResult:
    outcome: tuple
    seed: int
    mode: EngineMode


@dataclass(frozen=True)
class FrequencyReport:
    outcomes: tuple            # sorted outcome labels
    counts: tuple              # per-outcome counts (empty when exact)
    frequencies: tuple
    measures: tuple            # branch measures of the unitary evolution
    z_scores: tuple            # None entries where the measure is 0 or 1
    trials: int
    zero_variance: bool        # True for the exact branching engine
    seed: int
    rng: str = RNG_NAME


@dataclass(frozen=True)
class SteeringAnalysis:
    mu: float
    p_min: float
    p_max: float
    argmin_amplitude: complex
    argmax_amplitude: complex
    grid_points: int
    grid_p_min: float
    grid_p_max: float


# ---------------------------------------------------------------------------
# layouts and reference chains

def standard_layout(
    observer: bool = False,
    spin: bool = False,
    env_bits: int = 0,
) -> SubsystemLayout:
    """The scenario register set: particle mode, two detectors, extras."""
    subsystems = [
        ("neutron", MODE_SYMBOLS),
        ("D1", ("r", "in")),
        ("D2", ("r", "in")),
    ]
    if observer:
        subsystems.append(("observer", ("r", "sawD1", "sawD2")))
    if spin:
        subsystems.append(("spin", ("none", "M1", "M2")))
    for k in range(env_bits):
        subsystems.append((f"env{k}", ("0", "1")))
    return SubsystemLayout.of(subsystems)


def splitter_chain(
    alpha: complex,
    beta: complex,
    observer: bool = True,
    from_source: bool = False,
) -> tuple[qc.Circuit, State]:
    """One splitter feeding two detectors, optionally watched by an observer.

    With ``from_source`` the particle starts in the source mode and a swap
    launches it toward the splitter, so inverting the chain parks it back
    at the source.
    """
    layout = standard_layout(observer=observer)
    steps = []
    start = {"neutron": "up", "D1": "r", "D2": "r"}
    if from_source:
        steps.append(qc.mode_swap("source", "up", kind="source", name="launch"))
        start["neutron"] = "source"
    if observer:
        start["observer"] = "r"
    steps.append(qc.beam_splitter(alpha, beta))
    steps.append(qc.detector_coupling("D1", "up"))
    steps.append(qc.detector_coupling("D2", "down"))
    if observer:
        steps.append(qc.observer_coupling())
    return qc.Circuit(layout, tuple(steps)), basis_state(layout, start)


# ---------------------------------------------------------------------------
# collapse engine

def _stage_index(circuit: qc.Circuit, stage: str) -> int:
    """Index of the last forward component of the stage's kind."""
    idx = -1
    for i, step in enumerate(circuit.steps):
        if step.kind == stage:
            idx = i
    if idx < 0:
        raise StageError(f"circuit has no {stage!r} component")
    return idx


def _sample_branch(branches: list[Branch], rng: np.random.Generator) -> Branch:
    u = rng.random()
    acc = 0.0
    for branch in branches:
        acc += branch.measure
        if u < acc:
            return branch
    return branches[-1]


def _run_with_collapse(
    circuit: qc.Circuit,
    initial: State,
    stage_idx: int,
    rng: np.random.Generator,
) -> tuple[State, Branch]:
    """Project onto a sampled pointer branch after the stage, then continue."""
    state = initial
    for step in circuit.steps[: stage_idx + 1]:
        state = step.apply(state)
    chosen = _sample_branch(decompose(state), rng)
    state = chosen.component  # projection + renormalization, exactly
    for step in circuit.steps[stage_idx + 1:]:
        state = step.apply(state)
    return state, chosen


def run_collapse(
    circuit: qc.Circuit,
    initial: State,
    mode: EngineMode,
    seed: int,
) -> TrialResult:
    """One seeded collapse trial; the outcome is a final pointer label."""
    if mode.kind != "collapse":
        raise EngineError("run_collapse needs a collapse-engine mode")
    stage_idx = _stage_index(circuit, mode.collapse_stage)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    final, _ = _run_with_collapse(circuit, initial, stage_idx, rng)
    outcome = _sample_branch(decompose(final), rng).label
    return TrialResult(outcome, seed, mode)


def collapse_outcome_distribution(
    circuit: qc.Circuit,
    initial: State,
    stage: str,
) -> dict[tuple, float]:
    """Exact outcome law of the collapse engine, by branch enumeration."""
    stage_idx = _stage_index(circuit, stage)
    state = initial
    for step in circuit.steps[: stage_idx + 1]:
        state = step.apply(state)
    out: dict[tuple, float] = {}
    for branch in decompose(state):
        cont = branch.component
        for step in circuit.steps[stage_idx + 1:]:
            cont = step.apply(cont)
        for leaf in decompose(cont):
            out[leaf.label] = out.get(leaf.label, 0.0) + branch.measure * leaf.measure
    return dict(sorted(out.items()))


def frequencies(
    circuit: qc.Circuit,
    initial: State,
    mode: EngineMode,
    trials: int,
    seed: int = 0,
) -> FrequencyReport:
    """Outcome statistics: exact measures for MWI, sampled for collapse."""
    final = qc.apply(circuit, initial)
    measures = {b.label: b.measure for b in decompose(final)}

    if mode.kind == "mwi":
        outcomes = tuple(sorted(measures))
        freqs = tuple(measures[o] for o in outcomes)
        return FrequencyReport(
            outcomes=outcomes,
            counts=(),
            frequencies=freqs,
            measures=freqs,
            z_scores=tuple(None for _ in outcomes),
            trials=0,
            zero_variance=True,
            seed=seed,
        )

    if trials < 1:
        raise EngineError("trials must be >= 1")
    stage_idx = _stage_index(circuit, mode.collapse_stage)
    counts: dict[tuple, int] = {}
    for child_seq in np.random.SeedSequence(seed).spawn(trials):
        rng = np.random.Generator(np.random.PCG64(child_seq))
        state, _ = _run_with_collapse(circuit, initial, stage_idx, rng)
        label = _sample_branch(decompose(state), rng).label
        counts[label] = counts.get(label, 0) + 1

    outcomes = tuple(sorted(set(measures) | set(counts)))
    freqs = tuple(counts.get(o, 0) / trials for o in outcomes)
    theory = tuple(measures.get(o, 0.0) for o in outcomes)
    z_scores = []
    for f, m in zip(freqs, theory):
        if 0.0 < m < 1.0:
            z_scores.append((f - m) / math.sqrt(m * (1.0 - m) / trials))
        else:
            z_scores.append(None)
    return FrequencyReport(
        outcomes=outcomes,
        counts=tuple(counts.get(o, 0) for o in outcomes),
        frequencies=freqs,
        measures=theory,
        z_scores=tuple(z_scores),
        trials=trials,
        zero_variance=False,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# the undo experiment

def _undo_branch_returns(alpha, beta, stage) -> list[tuple[float, float]]:
    """(branch measure, exact return probability) per collapse branch."""
    chain, initial = splitter_chain(alpha, beta, observer=True, from_source=True)
    undo = qc.inverse(chain)
    stage_idx = _stage_index(chain, stage)
    state = initial
    for step in chain.steps[: stage_idx + 1]:
        state = step.apply(state)
    out = []
    for branch in decompose(state):
        cont = branch.component
        for step in chain.steps[stage_idx + 1:]:
            cont = step.apply(cont)
        reversed_state = qc.apply(undo, cont)
        out.append((branch.measure, reversed_state.marginal("neutron")["source"]))
    return out


def undo_return_exact(alpha: complex, beta: complex, stage: str = "detector") -> float:
    """Collapse-engine return probability by exhaustive branch enumeration."""
    return sum(mu * p for mu, p in _undo_branch_returns(alpha, beta, stage))


def undo_experiment(
    alpha: complex,
    beta: complex,
    mode: EngineMode,
    trials: int = 10_000,
    seed: int = 0,
) -> float:
    """Measure, then exactly un-measure; return P(particle back at source).

    The branching engine computes the reversed state directly.  The
    collapse engine samples a branch at the configured stage per trial,
    runs the inverse chain on the projected state, and reads out a source
    detector; the empirical return frequency is reported.
    """
    if mode.kind == "mwi":
        chain, initial = splitter_chain(alpha, beta, observer=True, from_source=True)
        state = qc.apply(chain, initial)
        state = qc.apply(qc.inverse(chain), state)
        return state.marginal("neutron")["source"]

    branch_returns = _undo_branch_returns(alpha, beta, mode.collapse_stage)
    hits = 0
    for child_seq in np.random.SeedSequence(seed).spawn(trials):
        rng = np.random.Generator(np.random.PCG64(child_seq))
        u, acc = rng.random(), 0.0
        p_return = branch_returns[-1][1]
        for mu, p in branch_returns:
            acc += mu
            if u < acc:
                p_return = p
                break
        if rng.random() < p_return:
            hits += 1
    return hits / trials


# ---------------------------------------------------------------------------
# steering by measure of existence

def steering_range(mu: float, grid: int = 10_000) -> SteeringAnalysis:
    """Reachable detection probabilities against an adversary branch.

    The target branch sqrt(mu)|up> meets an adversary-controlled branch
    c|down> (|c| <= sqrt(1-mu), free phase, attenuation allowed) at a
    balanced splitter, so P(D2) = |sqrt(mu) - c|^2 / 2.  The closed-form
    extremes are cross-checked by a grid search over (|c|, phase).
    """
    if not 0.0 < mu <= 1.0:
        raise EngineError("mu must lie in (0, 1]")
    if grid < 100:
        raise EngineError("grid must be >= 100")
    root_mu = math.sqrt(mu)
    c_max = math.sqrt(1.0 - mu)
    attainable_min = min(root_mu, c_max)
    p_min = max(0.0, (root_mu - c_max)) ** 2 / 2.0
    p_max = (root_mu + c_max) ** 2 / 2.0

    n = int(math.isqrt(grid))
    r = np.linspace(0.0, c_max, n)
    phi = np.linspace(0.0, math.pi, n)
    p = (mu + r[:, None] ** 2 - 2.0 * root_mu * r[:, None] * np.cos(phi)[None, :]) / 2.0
    return SteeringAnalysis(
        mu=mu,
        p_min=p_min,
        p_max=p_max,
        argmin_amplitude=complex(attainable_min, 0.0),
        argmax_amplitude=complex(-c_max, 0.0),
        grid_points=n * n,
        grid_p_min=float(p.min()),
        grid_p_max=float(p.max()),
    )


def bet_decision(mu: float, offered_odds: float, naive_probability: float) -> str:
    """Accept or reject a bet against a branch-steering adversary.

    The bettor wins unless the outcome with Born weight
    ``naive_probability`` occurs; the adversary may inject amplitude up to
    sqrt(1-mu) into the splitter's other port, raising the losing-outcome
    probability to at most (sqrt(mu p0) + sqrt((1-mu)(1-p0)))^2 (which at
    p0 = 1/2 is exactly the steering-range maximum).  Worst-case expected
    value of zero or less means reject.
    """
    if not 0.0 < mu <= 1.0:
        raise EngineError("mu must lie in (0, 1]")
    if not 0.0 <= naive_probability <= 1.0:
        raise EngineError("naive_probability must lie in [0, 1]")
    if offered_odds <= 0.0:
        raise EngineError("offered_odds must be positive")
    p0 = naive_probability
    p_lose_worst = (math.sqrt(mu * p0) + math.sqrt((1.0 - mu) * (1.0 - p0))) ** 2
    expected = (1.0 - p_lose_worst) * offered_odds - p_lose_worst
    return "reject" if expected <= 0.0 else "accept"


def worst_case_losing_probability(mu: float, naive_probability: float) -> float:
    p0 = naive_probability
    return (math.sqrt(mu * p0) + math.sqrt((1.0 - mu) * (1.0 - p0))) ** 2


# ---------------------------------------------------------------------------
# environment-induced stability of records

def _record_states(record_basis: str, env_bits: int) -> tuple[State, State, SubsystemLayout]:
    layout = standard_layout(env_bits=env_bits)
    zeros = tuple("0" for _ in range(env_bits))
    d1_fired = ("inD1", "in", "r") + zeros
    d2_fired = ("inD2", "r", "in") + zeros
    if record_basis == "nonlocal":
        a = make_state(layout, [(d1_fired, 1.0), (d2_fired, 1.0)])
        b = make_state(layout, [(d1_fired, 1.0), (d2_fired, -1.0)])
    elif record_basis == "local":
        a = make_state(layout, [(d1_fired, 1.0)])
        b = make_state(layout, [(d2_fired, 1.0)])
    else:
        raise EngineError("record_basis must be 'nonlocal' or 'local'")
    return a, b, layout


def decoherence_stability(record_basis: str, env_bits: int) -> float:
    """Distinguishability of two records after environment monitoring.

    Couples ``env_bits`` fresh bits to the detector registers (alternating
    between the two) and returns the trace distance between the reduced
    states of the particle + detectors -- the best achievable probability
    margin for telling the two records apart.
    """
    if env_bits < 0:
        raise EngineError("env_bits must be >= 0")
    state_a, state_b, layout = _record_states(record_basis, env_bits)
    steps = tuple(
        qc.environment_coupling(k, "D1" if k % 2 == 0 else "D2")
        for k in range(env_bits)
    )
    monitor = qc.Circuit(layout, steps)
    keep = ("neutron", "D1", "D2")
    rho_a = partial_trace(qc.apply(monitor, state_a), keep)
    rho_b = partial_trace(qc.apply(monitor, state_b), keep)
    return trace_distance(rho_a, rho_b)
