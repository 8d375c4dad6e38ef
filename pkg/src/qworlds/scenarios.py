"""Scenario registry: every experiment as a named, parameterized run.

Each scenario builds its circuit (or pilot state), runs the requested
engine, and returns a nested record for the report writer.  The registry
is closed on purpose: the experiment catalog is finite, and anything new
belongs in the library layer, not here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import bohm
from . import circuit as qc
from . import engines
from .engines import EngineMode, MWI, collapse_mode, splitter_chain, standard_layout
from .statevec import State, basis_state
from .worlds import WorldTree, count_worlds, track

ROOT_HALF = 2.0 ** -0.5


class ScenarioError(ValueError):
    """Invalid or conflicting scenario parameters."""


class UnknownScenarioError(KeyError):
    pass


class IntegratorError(RuntimeError):
    """A trajectory integration aborted in a persistent node region."""


@dataclass(frozen=True)
class ScenarioSpec:
    """Fully resolved parameters for one run; seed is always explicit."""

    scenario: str
    mode: str | None = None
    collapse_stage: str | None = None
    alpha: complex | None = None
    beta: complex | None = None
    mu: float | None = None
    trials: int | None = None
    env_bits: int | None = None
    marker: bool | None = None
    dt: float | None = None
    t_max: float | None = None
    x_init: float | None = None
    grid: int | None = None
    seed: int = 0
    out: str | None = None
    csv_dir: str | None = None

    def engine_mode(self) -> EngineMode | None:
        if self.mode is None:
            return None
        if self.mode == "mwi":
            return MWI
        return collapse_mode(self.collapse_stage or "detector")

    def as_record(self) -> dict:
        rec: dict = {"scenario": self.scenario, "seed": self.seed}
        for key in ("mode", "collapse_stage", "alpha", "beta", "mu", "trials",
                    "env_bits", "marker", "dt", "t_max", "x_init", "grid",
                    "out", "csv_dir"):
            value = getattr(self, key)
            if value is not None:
                rec[key] = value
        return rec


# ---------------------------------------------------------------------------
# circuit builders

def fig2_circuit() -> tuple[qc.Circuit, State]:
    """Splitter whose up-output escapes; down feeds a mirror and a splitter."""
    layout = standard_layout()
    steps = (
        qc.beam_splitter(ROOT_HALF, ROOT_HALF),
        qc.mode_swap("up", "escaped", kind="escape", name="escape[up]"),
        qc.mirror(),
        qc.beam_splitter(ROOT_HALF, ROOT_HALF),
        qc.detector_coupling("D1", "up"),
        qc.detector_coupling("D2", "down"),
    )
    return qc.Circuit(layout, steps), basis_state(layout, {"neutron": "up", "D1": "r", "D2": "r"})


def fig3_circuit(alpha: complex = ROOT_HALF, beta: complex = ROOT_HALF) -> tuple[qc.Circuit, State]:
    """Full interferometer: splitter, both mirrors, recombining splitter."""
    layout = standard_layout()
    steps = (
        qc.beam_splitter(alpha, beta),
        qc.mirror(),
        qc.beam_splitter(alpha, beta),
        qc.detector_coupling("D1", "up"),
        qc.detector_coupling("D2", "down"),
    )
    return qc.Circuit(layout, steps), basis_state(layout, {"neutron": "up", "D1": "r", "D2": "r"})


def fig4_circuit(absorb_arm: str | None = None) -> tuple[qc.Circuit, State]:
    """Interferometer with the recombiner removed; optional absorber screen.

    The M1 arm is the up mode right after the splitter, the M2 arm the
    down mode; after the mirrors M2 feeds D1 and M1 feeds D2.
    """
    layout = standard_layout()
    steps: list = [qc.beam_splitter(ROOT_HALF, ROOT_HALF)]
    if absorb_arm == "m1":
        steps.append(qc.absorber("up"))
    elif absorb_arm == "m2":
        steps.append(qc.absorber("down"))
    elif absorb_arm is not None:
        raise ScenarioError("absorb_arm must be 'm1' or 'm2'")
    steps.append(qc.mirror())
    steps.append(qc.detector_coupling("D1", "up"))
    steps.append(qc.detector_coupling("D2", "down"))
    return qc.Circuit(layout, tuple(steps)), basis_state(layout, {"neutron": "up", "D1": "r", "D2": "r"})


def spin_memory_circuit(erased: bool) -> tuple[qc.Circuit, State]:
    """Which-path memory written at the first magnet, optionally erased.

    After the mirrors the correlation is mode-swapped, so the second
    magnet that erases it is the marker with the mark assignment swapped.
    """
    layout = standard_layout(spin=True)
    steps: list = [
        qc.beam_splitter(ROOT_HALF, ROOT_HALF),
        qc.spin_marker(),
        qc.mirror(),
    ]
    if erased:
        steps.append(qc.spin_marker(up_mark="M2", down_mark="M1"))
    steps.append(qc.beam_splitter(ROOT_HALF, ROOT_HALF))
    steps.append(qc.detector_coupling("D1", "up"))
    steps.append(qc.detector_coupling("D2", "down"))
    initial = basis_state(layout, {"neutron": "up", "D1": "r", "D2": "r", "spin": "none"})
    return qc.Circuit(layout, tuple(steps)), initial


# ---------------------------------------------------------------------------
# shared record helpers

def _label_str(label: tuple) -> str:
    return ",".join(str(s) for s in label)


def tree_record(tree: WorldTree) -> dict:
    rec: dict = {"steps": tree.n_steps}
    for k in range(tree.n_steps):
        step: dict = {
            "component": tree.step_names[k],
            "worlds": count_worlds(tree, k),
            "measure_total": tree.measure_total(k),
        }
        for branch in tree.levels[k]:
            step[f"branch[{_label_str(branch.label)}]"] = branch.measure
        if k > 0:
            for i, edge in enumerate(tree.edges[k]):
                step[f"edge_{i}"] = (
                    f"{_label_str(tree.levels[k - 1][edge.parent].label)}"
                    f" -> {_label_str(tree.levels[k][edge.child].label)}"
                    f" p={edge.probability!r}"
                )
        rec[f"step_{k:02d}"] = step
    rec["merge_steps"] = list(tree.merge_steps)
    return rec


def frequency_record(report: engines.FrequencyReport) -> dict:
    rec: dict = {
        "trials": report.trials,
        "zero_variance": report.zero_variance,
        "rng": report.rng,
    }
    for i, outcome in enumerate(report.outcomes):
        entry: dict = {
            "frequency": report.frequencies[i],
            "measure": report.measures[i],
        }
        if not report.zero_variance:
            entry["count"] = report.counts[i]
            entry["z"] = report.z_scores[i]
        rec[f"outcome[{_label_str(outcome)}]"] = entry
    return rec


def _engine_run(spec: ScenarioSpec, circuit: qc.Circuit, initial: State) -> dict:
    """Detector marginals, world tree, and (collapse) sampling statistics."""
    final = qc.apply(circuit, initial)
    marginals = final.marginal("neutron")
    results: dict = {"probabilities": {
        symbol: p for symbol, p in sorted(marginals.items()) if p > 0 or symbol.startswith("inD")
    }}
    mode = spec.engine_mode() or MWI
    results["frequencies"] = frequency_record(
        engines.frequencies(circuit, initial, mode, spec.trials or 0, spec.seed)
    )
    results["worlds"] = tree_record(track(circuit, initial))
    return results


# ---------------------------------------------------------------------------
# scenario runners (each returns the nested results record)

def run_fig1(spec: ScenarioSpec) -> dict:
    chain, initial = splitter_chain(spec.alpha, spec.beta, observer=True)
    return _engine_run(spec, chain, initial)


def run_fig2(spec: ScenarioSpec) -> dict:
    circuit, initial = fig2_circuit()
    results = _engine_run(spec, circuit, initial)
    final = qc.apply(circuit, initial)
    marg = final.marginal("neutron")
    results["probabilities"] = {
        "escape": marg["escaped"], "D1": marg["inD1"], "D2": marg["inD2"],
    }
    return results


def run_fig3(spec: ScenarioSpec) -> dict:
    circuit, initial = fig3_circuit(spec.alpha, spec.beta)
    results = _engine_run(spec, circuit, initial)
    final = qc.apply(circuit, initial)
    amp_d2 = 0.0
    for config, amplitude in final.amplitudes.items():
        if config[circuit.layout.index("neutron")] == "inD2":
            amp_d2 += abs(amplitude)
    results["amplitude_at_D2"] = amp_d2
    results["probabilities"] = {
        "D1": final.marginal("neutron")["inD1"],
        "D2": final.marginal("neutron")["inD2"],
    }
    return results


def run_fig4_open(spec: ScenarioSpec) -> dict:
    circuit, initial = fig4_circuit(None)
    results = _engine_run(spec, circuit, initial)
    final = qc.apply(circuit, initial)
    results["probabilities"] = {
        "D1": final.marginal("neutron")["inD1"],
        "D2": final.marginal("neutron")["inD2"],
    }
    return results


def run_fig4_absorber(spec: ScenarioSpec) -> dict:
    out: dict = {}
    for arm, surviving in (("m1", "inD1"), ("m2", "inD2")):
        circuit, initial = fig4_circuit(arm)
        record = _engine_run(spec, circuit, initial)
        final = qc.apply(circuit, initial)
        marg = final.marginal("neutron")
        record["probabilities"] = {
            "D1": marg["inD1"], "D2": marg["inD2"], "absorbed": marg["absorbed"],
            "surviving_detector": "D1" if surviving == "inD1" else "D2",
            "surviving_rate": marg[surviving],
        }
        out[f"absorb_{arm}"] = record
    return out


def run_spin_memory(spec: ScenarioSpec) -> dict:
    out: dict = {}
    for key, erased in (("marker_kept", False), ("marker_erased", True)):
        circuit, initial = spin_memory_circuit(erased)
        record = _engine_run(spec, circuit, initial)
        final = qc.apply(circuit, initial)
        record["probabilities"] = {
            "D1": final.marginal("neutron")["inD1"],
            "D2": final.marginal("neutron")["inD2"],
        }
        out[key] = record
    return out


def run_undo(spec: ScenarioSpec) -> dict:
    mode = spec.engine_mode() or MWI
    results: dict = {}
    chain, initial = splitter_chain(spec.alpha, spec.beta, observer=True, from_source=True)
    full = qc.Circuit(chain.layout, chain.steps + qc.inverse(chain).steps)
    results["worlds"] = tree_record(track(full, initial))
    a2 = abs(spec.alpha) ** 2
    b2 = abs(spec.beta) ** 2
    results["collapse_prediction"] = a2 * a2 + b2 * b2
    results["mwi_prediction"] = 1.0
    if mode.kind == "mwi":
        results["return_probability"] = engines.undo_experiment(spec.alpha, spec.beta, MWI)
    else:
        stage = mode.collapse_stage
        exact = engines.undo_return_exact(spec.alpha, spec.beta, stage)
        empirical = engines.undo_experiment(spec.alpha, spec.beta, mode, spec.trials, spec.seed)
        sigma = math.sqrt(max(exact * (1.0 - exact), 1e-300) / spec.trials)
        results["return_probability"] = empirical
        results["exact_enumeration"] = exact
        results["z"] = (empirical - exact) / sigma if 0.0 < exact < 1.0 else None
    return results


def run_steering(spec: ScenarioSpec) -> dict:
    analysis = engines.steering_range(spec.mu, spec.grid)
    return {
        "p_min": analysis.p_min,
        "p_max": analysis.p_max,
        "argmin_amplitude": analysis.argmin_amplitude,
        "argmax_amplitude": analysis.argmax_amplitude,
        "grid_points": analysis.grid_points,
        "grid_p_min": analysis.grid_p_min,
        "grid_p_max": analysis.grid_p_max,
    }


def run_bet(spec: ScenarioSpec) -> dict:
    offered_odds, naive = 1.0, 0.1
    worst = engines.worst_case_losing_probability(spec.mu, naive)
    return {
        "offered_odds": offered_odds,
        "naive_probability": naive,
        "worst_case_losing_probability": worst,
        "worst_case_expected_value": (1.0 - worst) * offered_odds - worst,
        "decision": engines.bet_decision(spec.mu, offered_odds, naive),
    }


def run_decoherence(spec: ScenarioSpec) -> dict:
    k = spec.env_bits
    return {
        "env_bits": k,
        "nonlocal_distance_no_env": engines.decoherence_stability("nonlocal", 0),
        "nonlocal_distance": engines.decoherence_stability("nonlocal", k),
        "local_distance": engines.decoherence_stability("local", k),
    }


def _run_crossing(spec: ScenarioSpec, with_marker: bool) -> dict:
    try:
        report = bohm.crossing_scenario(
            with_marker, x_init=spec.x_init, t_max=spec.t_max, dt=spec.dt,
        )
    except bohm.NodeRegionError as exc:
        raise IntegratorError(str(exc)) from exc
    if report.trajectory.aborted:
        raise IntegratorError("trajectory aborted in a persistent node region")
    rec = {
        "backend": report.trajectory.metadata["backend"],
        "bohm_arm_sequence": report.bohm_arm_sequence,
        "naive_arm_sequence": report.naive_arm_sequence,
        "recorded_arm_sequence": report.recorded_arm_sequence,
        "reversed_at_crossing": report.reversed_at_crossing,
        "x_final": report.x_final,
        "v_final": report.v_final,
        "final_packet_origin": report.final_packet_origin,
        "final_packet_marker": report.final_packet_marker,
        "samples": int(report.trajectory.t.shape[0]),
    }
    return {"record": rec, "trajectory": report.trajectory}


def run_bohm_crossing(spec: ScenarioSpec) -> dict:
    return _run_crossing(spec, bool(spec.marker))


def run_bohm_bubble(spec: ScenarioSpec) -> dict:
    return _run_crossing(spec, True)


# ---------------------------------------------------------------------------
# registry

@dataclass(frozen=True)
class ScenarioDef:
    runner: callable
    parameters: frozenset
    description: str
    bohm: bool = False


_ENGINE_PARAMS = frozenset({"mode", "collapse_stage", "trials"})

REGISTRY: dict[str, ScenarioDef] = {
    "fig1_splitter": ScenarioDef(
        run_fig1, _ENGINE_PARAMS | {"alpha", "beta"},
        "one splitter, two detectors, one observer"),
    "fig2_arrangements": ScenarioDef(
        run_fig2, _ENGINE_PARAMS,
        "splitter + mirror chains: half escape, rest split over D1/D2"),
    "fig3_interferometer": ScenarioDef(
        run_fig3, _ENGINE_PARAMS | {"alpha", "beta"},
        "closed interferometer: everything reaches D1"),
    "fig4_open": ScenarioDef(
        run_fig4_open, _ENGINE_PARAMS,
        "recombiner removed: balanced D1/D2 detections"),
    "fig4_absorber": ScenarioDef(
        run_fig4_absorber, _ENGINE_PARAMS,
        "absorber screen on either arm; surviving rate unchanged"),
    "spin_memory": ScenarioDef(
        run_spin_memory, _ENGINE_PARAMS,
        "which-path spin memory kept vs erased"),
    "undo": ScenarioDef(
        run_undo, _ENGINE_PARAMS | {"alpha", "beta"},
        "measure then exactly un-measure; return probability discriminates engines"),
    "steering": ScenarioDef(
        run_steering, frozenset({"mu"}),
        "reachable detection probabilities vs measure of existence"),
    "bet": ScenarioDef(
        run_bet, frozenset({"mu"}),
        "accept/reject a 1:1 bet against a branch-steering adversary"),
    "decoherence": ScenarioDef(
        run_decoherence, frozenset({"env_bits"}),
        "record distinguishability after environment monitoring"),
    "bohm_crossing": ScenarioDef(
        run_bohm_crossing, frozenset({"marker", "dt", "t_max", "x_init"}),
        "pilot-wave trajectory through the open interferometer", bohm=True),
    "bohm_bubble": ScenarioDef(
        run_bohm_bubble, frozenset({"marker", "dt", "t_max", "x_init"}),
        "same crossing with slow which-path bubbles recorded", bohm=True),
}

DEFAULTS = {
    "mode": "mwi",
    "collapse_stage": None,
    "alpha": complex(ROOT_HALF),
    "beta": complex(ROOT_HALF),
    "mu": 0.5,
    "trials": 10_000,
    "env_bits": 20,
    "marker": False,
    "dt": 1e-3,
    "t_max": 20.0,
    "x_init": -10.0,
    "grid": 10_000,
}


def resolve(scenario: str, given: dict) -> ScenarioSpec:
    """Fill defaults and validate a raw parameter mapping into a spec."""
    if scenario not in REGISTRY:
        raise UnknownScenarioError(scenario)
    definition = REGISTRY[scenario]
    allowed = definition.parameters | {"seed", "out", "csv_dir"}
    extra = {k for k, v in given.items() if v is not None and k not in allowed}
    if extra:
        raise ScenarioError(
            f"parameters {sorted(extra)} do not apply to scenario {scenario!r}"
        )

    values: dict = {"scenario": scenario, "seed": int(given.get("seed") or 0)}
    values["out"] = given.get("out")
    values["csv_dir"] = given.get("csv_dir")
    for key in definition.parameters:
        value = given.get(key)
        values[key] = DEFAULTS[key] if value is None else value

    if "mode" in values and values["mode"] is not None:
        if values["mode"] not in ("mwi", "collapse"):
            raise ScenarioError(f"mode must be mwi or collapse, got {values['mode']!r}")
        if values["mode"] == "collapse":
            stage = values.get("collapse_stage") or "detector"
            if stage not in ("detector", "observer"):
                raise ScenarioError("collapse-stage must be detector or observer")
            values["collapse_stage"] = stage
        elif values.get("collapse_stage") is not None:
            raise ScenarioError("collapse-stage conflicts with mode = mwi")
    if "trials" in values and values["trials"] is not None:
        values["trials"] = int(values["trials"])
        if values["trials"] < 1:
            raise ScenarioError("trials must be >= 1")
    if values["seed"] < 0:
        raise ScenarioError("seed must be >= 0")
    if "mu" in values:
        values["mu"] = float(values["mu"])
        if not 0.0 < values["mu"] <= 1.0:
            raise ScenarioError("mu must lie in (0, 1]")
    if "env_bits" in values:
        values["env_bits"] = int(values["env_bits"])
        if values["env_bits"] < 0:
            raise ScenarioError("env-bits must be >= 0")
    if "dt" in values:
        values["dt"] = float(values["dt"])
        if values["dt"] <= 0.0:
            raise ScenarioError("dt must be positive")
    if "t_max" in values:
        values["t_max"] = float(values["t_max"])
        if values["t_max"] <= 0.0:
            raise ScenarioError("t-max must be positive")
    if "x_init" in values:
        values["x_init"] = float(values["x_init"])
        if values["x_init"] == 0.0:
            raise ScenarioError("x-init must be nonzero")
    if "alpha" in values:
        alpha, beta = complex(values["alpha"]), complex(values["beta"])
        norm = math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
        if norm < 1e-12:
            raise ScenarioError("alpha and beta cannot both vanish")
        values["alpha"], values["beta"] = alpha / norm, beta / norm
    if "marker" in values and values["marker"] is not None:
        values["marker"] = bool(values["marker"])
    if scenario == "steering":
        values["grid"] = DEFAULTS["grid"]
    if scenario == "bohm_bubble":
        if given.get("marker") is False:
            raise ScenarioError("bohm_bubble always records the marker")
        values["marker"] = True

    return ScenarioSpec(**values)
