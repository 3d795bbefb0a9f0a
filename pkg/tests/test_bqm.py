import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from annealdp.bqm import (
    CapacityError,
    IsingModel,
    ParseError,
    QuboModel,
    block_energies,
    brute_force,
    energy_of_bits,
    graph_of,
    ising_energy,
    ising_to_qubo,
    qubo_energy,
    qubo_to_ising,
    random_ising,
    read_model,
    write_model,
)

# Two-spin instance used throughout: h0=0.5, h1=-0.3, J01=-0.8.
TWO_SPIN = IsingModel(2, {0: 0.5, 1: -0.3}, {(0, 1): -0.8})

# Frozen by hand: e.g. (-1,-1) -> -0.5 + 0.3 - 0.8 = -1.0.
TWO_SPIN_ENERGIES = {
    (-1, -1): -1.0,
    (-1, 1): 0.0,
    (1, -1): 1.6,
    (1, 1): -0.6,
}


class TestEnergies:
    def test_two_spin_table(self):
        # Exact at printed (one-decimal) precision; 1 ulp of drift from
        # accumulation order is acceptable underneath.
        for state, expected in TWO_SPIN_ENERGIES.items():
            e = ising_energy(TWO_SPIN, state)
            assert round(e, 9) == expected
            assert e == pytest.approx(expected, abs=1e-12)

    def test_qubo_energy_by_hand(self):
        # x0 - x1 - 2 x0 x1: minimum -2 at (1,1)
        m = QuboModel(2, {(0, 0): 1.0, (1, 1): -1.0, (0, 1): -2.0})
        assert qubo_energy(m, (0, 0)) == 0.0
        assert qubo_energy(m, (1, 0)) == 1.0
        assert qubo_energy(m, (0, 1)) == -1.0
        assert qubo_energy(m, (1, 1)) == -2.0

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            ising_energy(TWO_SPIN, (0, 1))
        with pytest.raises(ValueError):
            qubo_energy(QuboModel(2, {(0, 1): 1.0}), (-1, 1))
        with pytest.raises(ValueError):
            ising_energy(TWO_SPIN, (1,))

    def test_duplicate_keys_accumulate(self):
        m = QuboModel(2, {(0, 1): 1.0, (1, 0): 2.0})
        assert m.q == {(0, 1): 3.0}
        mi = IsingModel(2, {}, {(1, 0): 0.5, (0, 1): 0.25})
        assert mi.couplings == {(0, 1): 0.75}

    def test_index_validation(self):
        with pytest.raises(ValueError):
            IsingModel(2, {2: 1.0})
        with pytest.raises(ValueError):
            IsingModel(2, {}, {(0, 0): 1.0})
        with pytest.raises(ValueError):
            QuboModel(1, {(0, 1): 1.0})


class TestConversions:
    def test_two_spin_roundtrip_energies(self):
        qubo, offset = ising_to_qubo(TWO_SPIN)
        for s, expected in TWO_SPIN_ENERGIES.items():
            x = [(v + 1) // 2 for v in s]
            assert qubo_energy(qubo, x) + offset == pytest.approx(expected, abs=1e-12)

    def test_qubo_to_ising_exhaustive(self):
        m = QuboModel(3, {(0, 0): 1.5, (1, 1): -2.0, (0, 1): 3.0, (1, 2): -0.5})
        ising, offset = qubo_to_ising(m)
        for x in itertools.product((0, 1), repeat=3):
            s = [2 * v - 1 for v in x]
            assert ising_energy(ising, s) + offset == pytest.approx(qubo_energy(m, x), abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=2**31 - 1))
    def test_roundtrip_property(self, n, seed):
        rng = np.random.default_rng(seed)
        ising = random_ising(n, rng)
        qubo, off1 = ising_to_qubo(ising)
        back, off2 = qubo_to_ising(qubo)
        for s in itertools.product((-1, 1), repeat=n):
            e = ising_energy(ising, s)
            x = [(v + 1) // 2 for v in s]
            assert qubo_energy(qubo, x) + off1 == pytest.approx(e, abs=1e-9)
            assert ising_energy(back, s) + off2 + off1 == pytest.approx(e, abs=1e-9)


class TestBruteForce:
    def test_two_spin_ground(self):
        res = brute_force(TWO_SPIN)
        assert res.min_energy == -1.0
        assert res.argmin_states == ((-1, -1),)

    def test_qubo_ground_native_domain(self):
        m = QuboModel(2, {(0, 0): 1.0, (1, 1): -1.0, (0, 1): -2.0})
        res = brute_force(m)
        assert res.min_energy == -2.0
        assert res.argmin_states == ((1, 1),)

    def test_degenerate_minima_all_reported(self):
        # No terms at all: every state ties at zero.
        res = brute_force(QuboModel(2))
        assert res.min_energy == 0.0
        assert res.argmin_states == ((0, 0), (1, 0), (0, 1), (1, 1))

    def test_spectrum_matches_scalar_energies(self):
        rng = np.random.default_rng(7)
        ising = random_ising(5, rng)
        res = brute_force(ising, keep_spectrum=True)
        assert res.spectrum is not None
        assert len(res.spectrum) == 32
        for state, energy in res.spectrum:
            assert energy == ising_energy(ising, state)

    def test_blocking_is_bit_for_bit(self, monkeypatch):
        # Force tiny blocks and compare against a single-block run.
        import annealdp.bqm as bqm_mod

        rng = np.random.default_rng(19)
        ising = random_ising(8, rng)
        whole = brute_force(ising, keep_spectrum=True)
        monkeypatch.setattr(bqm_mod, "_BLOCK_BITS", 3)
        split = brute_force(ising, keep_spectrum=True)
        assert whole == split

    def test_vector_scalar_agreement_exact(self):
        rng = np.random.default_rng(23)
        ising = random_ising(6, rng)
        energies = block_energies(ising, 0, 64)
        for k in range(64):
            bits = [(k >> i) & 1 for i in range(6)]
            assert energies[k] == energy_of_bits(ising, bits)

    def test_capacity_guard(self):
        with pytest.raises(CapacityError):
            brute_force(QuboModel(27))
        with pytest.raises(CapacityError):
            brute_force(QuboModel(5), max_vars=4)

    def test_zero_variables(self):
        res = brute_force(QuboModel(0))
        assert res.min_energy == 0.0
        assert res.argmin_states == ((),)


class TestGraph:
    def test_edges_and_connectivity(self):
        m = IsingModel(
            4,
            {0: 1.0},
            {(0, 1): 1.0, (0, 3): -1.0, (1, 2): 0.5, (1, 3): 0.2},
        )
        g = graph_of(m)
        assert g.vertices == (0, 1, 2, 3)
        assert g.edges == ((0, 1), (0, 3), (1, 2), (1, 3))
        assert g.degree(1) == 3
        assert g.is_connected()

    def test_zero_weight_edges_dropped(self):
        m = QuboModel(3, {(0, 1): 0.0, (1, 2): 1.0})
        g = graph_of(m)
        assert g.edges == ((1, 2),)
        assert not g.is_connected()


class TestSerialization:
    def test_roundtrip_ising(self, tmp_path):
        path = tmp_path / "model.txt"
        write_model(TWO_SPIN, str(path))
        back = read_model(str(path))
        assert isinstance(back, IsingModel)
        assert back == TWO_SPIN

    def test_roundtrip_qubo_preserves_floats(self, tmp_path):
        m = QuboModel(3, {(0, 0): 1 / 3, (0, 2): -math.pi, (1, 1): 1e-17})
        path = tmp_path / "model.txt"
        write_model(m, str(path))
        back = read_model(str(path))
        assert back == m

    def test_comments_and_blank_lines(self, tmp_path):
        path = tmp_path / "model.txt"
        path.write_text("# a comment\n\nqubo n=2\n0 0 1.0  # trailing\n0 1 -2.0\n")
        m = read_model(str(path))
        assert m == QuboModel(2, {(0, 0): 1.0, (0, 1): -2.0})

    def test_parse_errors_carry_line_numbers(self, tmp_path):
        path = tmp_path / "model.txt"
        path.write_text("qubo n=2\n0 nope 1.0\n")
        with pytest.raises(ParseError) as exc:
            read_model(str(path))
        assert exc.value.lineno == 2
        path.write_text("spins n=2\n")
        with pytest.raises(ParseError):
            read_model(str(path))
        path.write_text("# nothing here\n")
        with pytest.raises(ParseError):
            read_model(str(path))


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=7), st.integers(min_value=0, max_value=2**31 - 1))
def test_brute_force_matches_scan(n, seed):
    rng = np.random.default_rng(seed)
    ising = random_ising(n, rng)
    res = brute_force(ising)
    best = min(ising_energy(ising, s) for s in itertools.product((-1, 1), repeat=n))
    assert res.min_energy == best
    for s in res.argmin_states:
        assert ising_energy(ising, s) == best
