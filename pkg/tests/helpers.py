import numpy as np

from qworlds.statevec import make_state

ROOT_HALF = 2.0 ** -0.5


def random_state(layout, rng, occupancy=3):
    """Random normalized sparse state over a few configurations."""
    alphabets = [alphabet for _, alphabet in layout.subsystems]
    configs = set()
    while len(configs) < occupancy:
        configs.add(tuple(alphabet[rng.integers(len(alphabet))] for alphabet in alphabets))
    terms = [
        (config, complex(rng.normal(), rng.normal()))
        for config in sorted(configs)
    ]
    return make_state(layout, terms)


def random_splitter_coefficients(rng):
    z = rng.normal(size=4)
    alpha, beta = complex(z[0], z[1]), complex(z[2], z[3])
    norm = (abs(alpha) ** 2 + abs(beta) ** 2) ** 0.5
    return alpha / norm, beta / norm


def random_circuit(layout, rng, max_steps=10):
    """Random mix of factory components over the full scenario layout."""
    import qworlds.circuit as qc

    factories = [
        lambda: qc.beam_splitter(*random_splitter_coefficients(rng)),
        qc.mirror,
        qc.spin_marker,
        lambda: qc.detector_coupling("D1", "up"),
        lambda: qc.detector_coupling("D2", "down"),
        qc.observer_coupling,
        lambda: qc.environment_coupling(int(rng.integers(2)), "D1"),
        lambda: qc.absorber("up"),
        lambda: qc.mode_swap("source", "up"),
    ]
    n = int(rng.integers(1, max_steps + 1))
    steps = tuple(factories[rng.integers(len(factories))]() for _ in range(n))
    return qc.Circuit(layout, steps)


def final_cdf(state, t, x_lo, x_hi, n=24001):
    """Quadrature CDF of the exact |psi|^2 (cross terms included)."""
    import qworlds.bohm as bohm

    xs = np.linspace(x_lo, x_hi, n)
    rho = bohm.density(state, xs, t)
    steps = 0.5 * (rho[1:] + rho[:-1]) * np.diff(xs)
    cdf = np.concatenate([[0.0], np.cumsum(steps)])
    total = float(cdf[-1])
    return xs, cdf / total, total


def ks_statistic(samples, xs, cdf):
    """One-sample Kolmogorov-Smirnov distance against a gridded CDF."""
    s = np.sort(np.asarray(samples, dtype=float))
    values = np.interp(s, xs, cdf)
    n = len(s)
    i = np.arange(1, n + 1)
    return float(np.max(np.maximum(np.abs(i / n - values), np.abs((i - 1) / n - values))))


GOLDEN_SCENARIOS = (
    "fig1_splitter",
    "fig2_arrangements",
    "fig3_interferometer",
    "fig4_open",
    "fig4_absorber",
    "spin_memory",
    "undo",
    "steering",
    "bet",
    "decoherence",
    "bohm_crossing",
    "bohm_bubble",
)


def golden_report_text(scenario):
    """Default-parameter report text for one scenario (seed 0)."""
    from qworlds.cli import parse_config, run_scenario

    spec = parse_config(scenario, {})
    return run_scenario(spec).render()
