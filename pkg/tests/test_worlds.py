"""Branch decomposition, measures of existence, and world-tree tracking."""

import pytest

import qworlds.circuit as qc
from qworlds.engines import splitter_chain, standard_layout
from qworlds.scenarios import fig3_circuit
from qworlds.statevec import basis_state, make_state
from qworlds.worlds import (
    MeasureLeakError,
    WorldBasisSpec,
    count_worlds,
    decompose,
    measure_of_existence,
    reconstruct,
    split_probabilities,
    track,
)
from helpers import ROOT_HALF, random_circuit, random_state


@pytest.fixture
def layout():
    return standard_layout()


def mode_superposition(layout, terms):
    rest = {name: layout.alphabet(name)[0] for name in layout.names if name != "neutron"}
    return make_state(layout, [
        (layout.configuration({"neutron": symbol, **rest}), amplitude)
        for symbol, amplitude in terms
    ])


class TestDecompose:
    def test_balanced_superposition_gives_two_half_worlds(self, layout):
        state = mode_superposition(layout, [("up", 1.0), ("down", 1.0)])
        branches = decompose(state)
        assert len(branches) == 2
        for branch in branches:
            assert branch.measure == pytest.approx(0.5, abs=1e-14)

    def test_product_basis_state_is_one_world(self, layout):
        state = basis_state(layout, {"neutron": "up", "D1": "r", "D2": "r"})
        (branch,) = decompose(state)
        assert branch.measure == pytest.approx(1.0, abs=1e-14)

    def test_nonlocal_rewriting_changes_nothing(self, layout):
        # the same state assembled from two nonlocal +/-i combinations still
        # decomposes into the two local-mode worlds
        f = 8.0 ** -0.5
        state = mode_superposition(layout, [
            ("up", f * (1 + 1j)), ("down", f * (1 - 1j)),
            ("up", f * (1 - 1j)), ("down", f * (1 + 1j)),
        ])
        branches = decompose(state)
        labels = {branch.label[layout.index("neutron")] for branch in branches}
        assert labels == {"up", "down"}
        for branch in branches:
            assert branch.measure == pytest.approx(0.5, abs=1e-14)

    def test_reconstruction_is_exact(self, layout, rng):
        for _ in range(10):
            state = random_state(layout, rng, occupancy=5)
            assert reconstruct(decompose(state), layout) == state

    def test_coarse_graining_sums_measures(self, layout):
        state = mode_superposition(layout, [("up", 1.0), ("down", 1.0), ("escaped", 1.0)])
        fine = {b.label: b.measure for b in decompose(state)}
        spec = WorldBasisSpec.of(
            coarse_graining={"neutron": {"up": "inside", "down": "inside"}}
        )
        coarse = {b.label: b.measure for b in decompose(state, spec)}
        inside = [k for k in coarse if k[0] == "inside"]
        assert len(inside) == 1
        fine_sum = sum(m for label, m in fine.items() if label[0] in ("up", "down"))
        assert coarse[inside[0]] == pytest.approx(fine_sum, abs=1e-15)

    def test_coarse_reconstruction_still_exact(self, layout):
        state = mode_superposition(layout, [("up", 1.0), ("down", 1.0j), ("escaped", -1.0)])
        spec = WorldBasisSpec.of(
            coarse_graining={"neutron": {"up": "inside", "down": "inside"}}
        )
        assert reconstruct(decompose(state, spec), layout) == state


class TestMeasures:
    def test_balanced_branch(self, layout):
        state = mode_superposition(layout, [("up", 1.0), ("down", 1.0)])
        branch = decompose(state)[0]
        assert measure_of_existence(branch) == pytest.approx(0.5, abs=1e-14)

    def test_full_measure(self, layout):
        state = mode_superposition(layout, [("up", 1.0)])
        assert measure_of_existence(decompose(state)[0]) == 1.0

    def test_ten_percent_branch(self, layout):
        state = mode_superposition(layout, [("up", 0.1 ** 0.5), ("down", 0.9 ** 0.5)])
        branches = {b.label[0]: b for b in decompose(state)}
        assert measure_of_existence(branches["up"]) == pytest.approx(0.1, abs=1e-14)


class TestSplitProbabilities:
    def test_one_to_nine_bet(self, layout):
        state = mode_superposition(layout, [("up", 0.1 ** 0.5), ("down", 0.9 ** 0.5)])
        parent = decompose(mode_superposition(layout, [("up", 1.0)]))[0]
        children = decompose(state)
        probs = dict(zip((b.label[0] for b in children), split_probabilities(parent, children)))
        assert probs["up"] == pytest.approx(0.1, abs=1e-12)
        assert probs["down"] == pytest.approx(0.9, abs=1e-12)
        assert sum(probs.values()) == pytest.approx(1.0, abs=1e-12)

    def test_single_child(self, layout):
        parent = decompose(mode_superposition(layout, [("up", 1.0)]))[0]
        assert split_probabilities(parent, [parent]) == [1.0]

    def test_second_level_split_matches_full_state(self, layout):
        # splitting one half-measure world in two quarters: edge probabilities
        # from the tree equal child/parent measure ratios of the full state
        circuit = qc.Circuit(layout, (
            qc.beam_splitter(ROOT_HALF, ROOT_HALF),
            qc.detector_coupling("D1", "up"),
            qc.beam_splitter(ROOT_HALF, ROOT_HALF),
        ))
        initial = basis_state(layout, {"neutron": "up", "D1": "r", "D2": "r"})
        tree = track(circuit, initial)
        parents = tree.levels[2]
        down_parent = next(i for i, b in enumerate(parents) if b.label[0] == "down")
        edges = [e for e in tree.edges[3] if e.parent == down_parent]
        assert sorted(e.probability for e in edges) == pytest.approx([0.5, 0.5], abs=1e-12)
        for edge in edges:
            child = tree.levels[3][edge.child]
            assert child.measure / parents[down_parent].measure == pytest.approx(
                edge.probability, abs=1e-12
            )

    def test_measure_leak_detected(self, layout):
        parent = decompose(mode_superposition(layout, [("up", 1.0)]))[0]
        half = decompose(mode_superposition(layout, [("up", 1.0), ("down", 1.0)]))[0]
        with pytest.raises(MeasureLeakError):
            split_probabilities(parent, [half])


class TestTrack:
    def test_single_split_tree(self):
        chain, initial = splitter_chain(ROOT_HALF, ROOT_HALF, observer=True)
        tree = track(chain, initial)
        assert [count_worlds(tree, k) for k in range(tree.n_steps)] == [1, 2, 2, 2, 2]
        assert tree.merge_steps == []

    def test_interferometer_recombines(self):
        circuit, initial = fig3_circuit()
        tree = track(circuit, initial)
        assert [count_worlds(tree, k) for k in range(tree.n_steps)] == [1, 2, 2, 1, 1, 1]
        assert 3 in tree.merge_steps  # the recombining splitter interferes

    def test_identity_circuit_single_chain(self, layout, rng):
        circuit = qc.Circuit(layout, (qc.mirror(), qc.mirror()))
        initial = basis_state(layout, {"neutron": "up", "D1": "r", "D2": "r"})
        tree = track(circuit, initial)
        assert all(count_worlds(tree, k) == 1 for k in range(tree.n_steps))
        assert all(len(h.labels) == tree.n_steps for h in tree.histories())

    def test_observer_split_keeps_two_worlds(self):
        chain, initial = splitter_chain(ROOT_HALF, ROOT_HALF, observer=True)
        tree = track(chain, initial)
        leaves = tree.leaves()
        observers = {b.label[chain.layout.index("observer")] for b in leaves}
        assert observers == {"sawD1", "sawD2"}
        assert count_worlds(tree, tree.n_steps - 1) == 2

    def test_measure_conservation_every_step(self, rng):
        layout = standard_layout(observer=True, spin=True, env_bits=2)
        for _ in range(15):
            circuit = random_circuit(layout, rng)
            initial = random_state(layout, rng, occupancy=3)
            tree = track(circuit, initial)
            for k in range(tree.n_steps):
                assert abs(tree.measure_total(k) - 1.0) < 1e-12

    def test_histories_connect_via_edges(self):
        chain, initial = splitter_chain(ROOT_HALF, ROOT_HALF, observer=True)
        tree = track(chain, initial)
        stories = tree.histories()
        assert len(stories) == 2
        for story in stories:
            assert len(story.labels) == tree.n_steps
            assert story.labels[0][0] == "up"

    def test_split_probabilities_sum_to_one_at_pure_splits(self, rng):
        layout = standard_layout(observer=True, spin=True, env_bits=2)
        for _ in range(10):
            circuit = random_circuit(layout, rng, max_steps=6)
            initial = random_state(layout, rng, occupancy=2)
            tree = track(circuit, initial)
            for k in range(1, tree.n_steps):
                if k in tree.merge_steps:
                    continue
                for p_idx, parent in enumerate(tree.levels[k - 1]):
                    total = sum(e.probability for e in tree.edges[k] if e.parent == p_idx)
                    assert total == pytest.approx(1.0, abs=1e-12)


class TestBasisInvariance:
    def test_tracking_never_touches_the_dynamics(self, rng):
        layout = standard_layout(observer=True, spin=True, env_bits=2)
        for _ in range(10):
            circuit = random_circuit(layout, rng)
            initial = random_state(layout, rng, occupancy=3)
            direct = qc.apply(circuit, initial)
            tracked = track(circuit, initial).final_state
            assert tracked == direct  # bit-identical amplitudes

    def test_coarse_spec_changes_nothing_either(self, rng):
        layout = standard_layout()
        circuit, initial = fig3_circuit()
        spec = WorldBasisSpec.of(
            pointer_subsystems=("neutron",),
            coarse_graining={"neutron": {"inD1": "detected", "inD2": "detected"}},
        )
        assert track(circuit, initial, spec).final_state == qc.apply(circuit, initial)
