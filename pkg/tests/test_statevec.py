"""Sparse state algebra: construction, inner products, reductions, distances."""

import pytest

from qworlds.statevec import (
    DegenerateStateError,
    LayoutError,
    SubsystemLayout,
    basis_state,
    inner_product,
    make_state,
    partial_trace,
    projector,
    trace_distance,
)
from helpers import ROOT_HALF, random_state


def test_layout_rejects_duplicates_and_tiny_alphabets():
    with pytest.raises(LayoutError):
        SubsystemLayout.of([("a", ("x", "y")), ("a", ("x", "y"))])
    with pytest.raises(LayoutError):
        SubsystemLayout.of([("a", ("x",))])
    with pytest.raises(LayoutError):
        SubsystemLayout.of([("a", ("x", "x"))])


class TestMakeState:
    def test_single_ket(self, mode_layout):
        state = make_state(mode_layout, [(("up",), 1.0)])
        assert state.amplitude(("up",)) == 1.0

    def test_balanced_superposition(self, mode_layout):
        state = make_state(mode_layout, [(("up",), 1.0), (("down",), 1.0)])
        assert state.amplitude(("up",)) == pytest.approx(ROOT_HALF, abs=1e-15)
        assert state.amplitude(("down",)) == pytest.approx(ROOT_HALF, abs=1e-15)

    def test_three_four_five_normalization(self, mode_layout):
        state = make_state(mode_layout, [(("up",), 3.0), (("down",), 4.0)])
        assert state.amplitude(("up",)) == pytest.approx(0.6, abs=1e-15)
        assert state.amplitude(("down",)) == pytest.approx(0.8, abs=1e-15)

    def test_duplicates_summed_before_normalizing(self, mode_layout):
        state = make_state(mode_layout, [(("up",), 1.0), (("up",), 1.0), (("down",), 2.0)])
        assert state.amplitude(("up",)) == pytest.approx(ROOT_HALF, abs=1e-15)

    def test_zero_sum_is_degenerate(self, mode_layout):
        with pytest.raises(DegenerateStateError):
            make_state(mode_layout, [(("up",), 1.0), (("up",), -1.0)])

    def test_invalid_symbol_is_layout_error(self, mode_layout):
        with pytest.raises(LayoutError):
            make_state(mode_layout, [(("sideways",), 1.0)])


class TestInnerProduct:
    def test_normalization(self, mode_layout):
        up = make_state(mode_layout, [(("up",), 1.0)])
        assert inner_product(up, up) == pytest.approx(1.0, abs=1e-15)

    def test_orthogonality(self, mode_layout):
        up = make_state(mode_layout, [(("up",), 1.0)])
        down = make_state(mode_layout, [(("down",), 1.0)])
        assert inner_product(up, down) == 0

    def test_splitter_outputs_orthogonal(self, mode_layout):
        plus = make_state(mode_layout, [(("up",), 1.0), (("down",), 1.0)])
        minus = make_state(mode_layout, [(("up",), 1.0), (("down",), -1.0)])
        assert abs(inner_product(plus, minus)) < 1e-15

    def test_layout_mismatch(self, mode_layout):
        other = SubsystemLayout.of([("spin", ("none", "M1", "M2"))])
        with pytest.raises(LayoutError):
            inner_product(
                make_state(mode_layout, [(("up",), 1.0)]),
                make_state(other, [(("none",), 1.0)]),
            )

    def test_self_product_is_norm_squared(self, mode_layout, rng):
        for _ in range(20):
            state = random_state(mode_layout, rng)
            value = inner_product(state, state)
            assert abs(value.imag) < 1e-12
            assert value.real == pytest.approx(state.norm() ** 2, abs=1e-12)


@pytest.fixture
def pair_layout():
    return SubsystemLayout.of([
        ("neutron", ("up", "down", "inD1", "inD2", "escaped", "absorbed", "source")),
        ("D1", ("r", "in")),
        ("D2", ("r", "in")),
    ])


class TestPartialTrace:
    def test_product_state_reduces_to_pure_projector(self, pair_layout):
        state = basis_state(pair_layout, {"neutron": "up", "D1": "r", "D2": "r"})
        rho = partial_trace(state, ["neutron"])
        assert rho.entries == {(("up",), ("up",)): 1.0}
        assert rho.purity() == pytest.approx(1.0, abs=1e-12)

    def test_superposed_but_unentangled_state_stays_pure(self, pair_layout):
        state = make_state(pair_layout, [
            (("up", "r", "r"), 1.0), (("down", "r", "r"), 1.0j),
        ])
        rho = partial_trace(state, ["neutron"])
        assert rho.purity() == pytest.approx(1.0, abs=1e-12)

    def test_measured_pair_reduces_to_balanced_mixture(self, pair_layout):
        state = make_state(pair_layout, [
            (("inD1", "in", "r"), 1.0),
            (("inD2", "r", "in"), 1.0),
        ])
        rho = partial_trace(state, ["neutron"])
        assert set(rho.entries) == {(("inD1",), ("inD1",)), (("inD2",), ("inD2",))}
        for value in rho.entries.values():
            assert value == pytest.approx(0.5, abs=1e-15)
        rho.validate(check_psd=True)

    def test_keep_all_is_projector(self, pair_layout, rng):
        state = random_state(pair_layout, rng)
        rho = partial_trace(state, pair_layout.names)
        expected = projector(state)
        assert set(rho.entries) == set(expected.entries)
        assert rho.trace() == pytest.approx(1.0, abs=1e-12)

    def test_empty_keep_rejected(self, pair_layout):
        state = basis_state(pair_layout, {"neutron": "up", "D1": "r", "D2": "r"})
        with pytest.raises(LayoutError):
            partial_trace(state, [])


class TestTraceDistance:
    def test_identical_states(self, pair_layout, rng):
        state = random_state(pair_layout, rng)
        rho = partial_trace(state, ["neutron"])
        assert trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-14)

    def test_orthogonal_pure_records(self, pair_layout):
        a = basis_state(pair_layout, {"neutron": "inD1", "D1": "in", "D2": "r"})
        b = basis_state(pair_layout, {"neutron": "inD2", "D1": "r", "D2": "in"})
        d = trace_distance(projector(a), projector(b))
        assert d == pytest.approx(1.0, abs=1e-12)

    def test_relabeled_identical_mixture(self, pair_layout):
        # same mixture assembled in a different configuration order
        forward = make_state(pair_layout, [
            (("inD1", "in", "r"), 1.0), (("inD2", "r", "in"), 1.0),
        ])
        backward = make_state(pair_layout, [
            (("inD2", "r", "in"), 1.0), (("inD1", "in", "r"), 1.0),
        ])
        d = trace_distance(
            partial_trace(forward, ["neutron"]),
            partial_trace(backward, ["neutron"]),
        )
        assert d == pytest.approx(0.0, abs=1e-14)

    def test_triangle_inequality_on_random_mixtures(self, rng):
        layout = SubsystemLayout.of([
            ("a", ("0", "1")), ("b", ("0", "1", "2", "3")), ("env", ("0", "1")),
        ])
        rhos = [
            partial_trace(random_state(layout, rng, occupancy=6), ["a", "b"])
            for _ in range(12)
        ]
        for _ in range(40):
            i, j, k = rng.integers(len(rhos), size=3)
            d_ik = trace_distance(rhos[i], rhos[k])
            d_ij = trace_distance(rhos[i], rhos[j])
            d_jk = trace_distance(rhos[j], rhos[k])
            assert d_ik <= d_ij + d_jk + 1e-9

    def test_bounds_and_symmetry(self, pair_layout, rng):
        x = partial_trace(random_state(pair_layout, rng), ["neutron"])
        y = partial_trace(random_state(pair_layout, rng), ["neutron"])
        d = trace_distance(x, y)
        assert 0.0 <= d <= 1.0 + 1e-12
        assert d == pytest.approx(trace_distance(y, x), abs=1e-14)
