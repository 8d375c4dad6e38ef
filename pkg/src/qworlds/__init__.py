"""qworlds: interferometer thought experiments, three engines, one state.

Exact sparse state algebra and invertible measurement circuits, branch
bookkeeping with measures of existence, Born-rule collapse sampling with a
configurable stage, and a pilot-wave trajectory engine over analytic
Gaussian packets.
"""
__version__ = "0.1.0"

from .statevec import (
    DegenerateStateError,
    DensityMatrix,
    LayoutError,
    State,
    SubsystemLayout,
    basis_state,
    inner_product,
    make_state,
    partial_trace,
    trace_distance,
)
from .circuit import (
    Circuit,
    Component,
    ComponentError,
    NonUnitaryError,
    absorber,
    apply,
    beam_splitter,
    detector_coupling,
    environment_coupling,
    inverse,
    mirror,
    mode_swap,
    observer_coupling,
    spin_marker,
)
from .worlds import (
    Branch,
    History,
    MeasureLeakError,
    WorldBasisSpec,
    WorldTree,
    count_worlds,
    decompose,
    measure_of_existence,
    reconstruct,
    split_probabilities,
    track,
)
from .engines import (
    MWI,
    EngineMode,
    FrequencyReport,
    SteeringAnalysis,
    TrialResult,
    bet_decision,
    collapse_mode,
    decoherence_stability,
    frequencies,
    run_collapse,
    splitter_chain,
    standard_layout,
    steering_range,
    undo_experiment,
    undo_return_exact,
)
from .scenarios import REGISTRY, ScenarioSpec, resolve
from .cli import parse_config, run_scenario
