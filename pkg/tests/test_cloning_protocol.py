import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polariton_clone import cloning_protocol as cp
from polariton_clone import fock_oracle as fo
from polariton_clone.errors import InvalidArgumentError, UnsupportedConfigurationError
from polariton_clone.polariton_model import HopfieldPair, hopfield

SQ2 = math.sqrt(2.0)
# frozen from the Fock oracle: fidelity of the symmetric ensemble at phi = pi/4
F_SYMMETRIC_PI4 = 8.0 / 11.0
# frozen: best symmetric-ensemble fidelity, reached at phi = 0 (V = 1.5, 2)
F_SYMMETRIC_BEST = 2.0 / math.sqrt(7.5)

ensembles = st.builds(
    cp.SpinEnsemble.from_populations,
    st.integers(0, 10_000),
    st.floats(0.0, 1.0),
    st.floats(-math.pi, math.pi),
)


def _stats(c):
    return (c.meanQ, c.meanP, c.varQ, c.varP)


def test_ensemble_validation():
    with pytest.raises(InvalidArgumentError):
        cp.SpinEnsemble(-1)
    with pytest.raises(InvalidArgumentError):
        cp.SpinEnsemble(4, 0.8, 0.8)
    with pytest.raises(InvalidArgumentError):
        cp.SpinEnsemble.from_populations(4, 1.5)
    e = cp.SpinEnsemble.from_populations(8, 0.25, 0.7)
    assert e.alpha2 == pytest.approx(0.25) and e.phi_rel == pytest.approx(0.7)
    assert e.commutator == pytest.approx(-0.5)
    assert cp.SpinEnsemble.from_populations(0, 0.3).commutator == 1.0


def test_spin_moment_examples():
    assert cp.spin_mode_moments(cp.SpinEnsemble(50, 1.0, 0.0)) == (0, 0, 1, 1, 0)
    m = cp.spin_mode_moments(cp.SpinEnsemble.from_populations(8, 0.5, 0.0))
    assert m.meanQ == pytest.approx(2 * SQ2, abs=1e-12)
    assert (m.meanP, m.varQ, m.varP) == (pytest.approx(0.0, abs=1e-15), pytest.approx(0.0, abs=1e-15), 1.0)
    m = cp.spin_mode_moments(cp.SpinEnsemble.from_populations(8, 0.5, math.pi / 4))
    assert (m.varQ, m.varP) == (pytest.approx(0.5, abs=1e-12), pytest.approx(0.5, abs=1e-12))


def test_spin_moment_conventions():
    e = cp.SpinEnsemble.from_populations(12, 0.3, 0.9)
    formula = cp.spin_mode_moments(e)
    op = cp.spin_mode_moments(e, "operator")
    assert op.meanQ == formula.meanQ and op.meanP == -formula.meanP and op.covQP == -formula.covQP
    assert (op.varQ, op.varP) == (formula.varQ, formula.varP)
    with pytest.raises(InvalidArgumentError):
        cp.spin_mode_moments(e, "other")


def test_operator_convention_matches_schwinger_operator():
    N = 9
    e = cp.SpinEnsemble.from_populations(N, 0.35, 1.2)
    space = fo.FockSpace((N + 1, N + 1))
    state = fo.coherent_spin_state(space, N, e.alpha, e.beta)
    got = fo.operator_quadrature_moments(state, fo.hp_excitation_ops(space, 0, 1, N)["phi"])
    assert np.allclose(got, cp.spin_mode_moments(e, "operator"), atol=1e-12)


def test_covqp_clamp_flagged():
    # inconsistent weights push covQP past the bound, so it is clamped
    out = cp._spin_moment_arrays(np.array([4.0]), np.array([1.2]), np.array([0.3]), np.array([0.7]), "formula")
    cov, clamp = out[4][0], out[5][0]
    assert clamp
    assert cov == 0.0


@given(ensembles)
def test_spin_moments_saturate_bound(e):
    m, clamped = cp._spin_moments(e, "formula")
    assert not clamped
    det = m.varQ * m.varP - m.covQP ** 2
    assert det == pytest.approx(e.commutator ** 2, abs=1e-9)


def test_run_cloning_examples():
    r = cp.run_cloning(1.0)
    for c in r.clones:
        assert _stats(c) == pytest.approx((2, 0, 2, 2), abs=1e-12)
        assert c.fidelity == pytest.approx(2 / 3, abs=1e-12)
        assert c.flags == ()
    r = cp.run_cloning(0.0, ensemble=cp.SpinEnsemble.from_populations(8, 0.5, 0.0))
    assert r.bright.meanQ == pytest.approx(-2.0, abs=1e-12)
    assert r.dark.meanQ == pytest.approx(2.0, abs=1e-12)
    r = cp.run_cloning(1.0, ensemble=cp.SpinEnsemble.from_populations(8, 0.5, math.pi / 4))
    for c in r.clones:
        assert (c.varQ, c.varP) == (pytest.approx(1.75, abs=1e-12), pytest.approx(1.75, abs=1e-12))
        assert c.fidelity == pytest.approx(F_SYMMETRIC_PI4, abs=1e-12)
    assert cp.FLAG_QUOTED in r.flags and "0.8" in r.notes[0]


def test_run_cloning_rejects_bad_input():
    with pytest.raises(InvalidArgumentError):
        cp.run_cloning(1.0, V_in=0.5)
    with pytest.raises(InvalidArgumentError):
        cp.run_cloning(1.0, gain=0.9)


def test_literal_sign_swaps_shift_direction():
    e = cp.SpinEnsemble.from_populations(8, 0.5, 0.0)
    pos = cp.run_cloning(0.0, ensemble=e)
    lit = cp.run_cloning(0.0, ensemble=e, literal_sign=True)
    assert lit.bright.meanQ == pytest.approx(-pos.bright.meanQ, abs=1e-12)
    assert lit.nu == -pos.nu


def test_fidelity_examples():
    assert cp.fidelity(2, 2) == pytest.approx(2 / 3, abs=1e-15)
    assert cp.fidelity(1, 1) == 1.0
    assert cp.fidelity(1.75, 1.75) == pytest.approx(F_SYMMETRIC_PI4, abs=1e-15)
    with pytest.raises(InvalidArgumentError):
        cp.fidelity(-0.1, 1.0)


def test_fidelity_clipped_and_flagged():
    F, flags = cp._clone_fidelity(0.5, 0.5, 1.0)
    assert F == 1.0 and cp.FLAG_CLIPPED in flags
    F, flags = cp._clone_fidelity(2.0, 2.0, 1.2)
    assert cp.FLAG_GAIN in flags


def test_best_symmetric_fidelity():
    phis = np.linspace(0, 2 * math.pi, 721)
    Fs = [cp.run_cloning(1.0, ensemble=cp.SpinEnsemble.from_populations(8, 0.5, p)).fidelity for p in phis]
    assert max(Fs) == pytest.approx(F_SYMMETRIC_BEST, abs=1e-12)
    assert max(Fs) < 0.8


@given(st.complex_numbers(max_magnitude=5.0))
def test_mean_preservation(gamma):
    r = cp.run_cloning(gamma)
    for c in r.clones:
        assert c.meanQ == pytest.approx(2 * gamma.real, abs=1e-12 * max(1, abs(gamma)))
        assert c.meanP == pytest.approx(2 * gamma.imag, abs=1e-12 * max(1, abs(gamma)))


@pytest.mark.parametrize("V_in", [1.0, 1.5, 3.0])
def test_added_unit_noise(V_in):
    r = cp.run_cloning(0.3 + 0.1j, V_in=V_in)
    for c in r.clones:
        assert c.varQ - V_in == pytest.approx(1.0, abs=1e-12)
        assert c.varP - V_in == pytest.approx(1.0, abs=1e-12)


@given(ensembles, st.complex_numbers(max_magnitude=3.0), st.floats(1.0, 4.0))
def test_shift_symmetry_and_equal_clones(e, gamma, V_in):
    r = cp.run_cloning(gamma, V_in, e)
    base = (2 * gamma.real, 2 * gamma.imag)
    shift_b = (r.bright.meanQ - base[0], r.bright.meanP - base[1])
    shift_d = (r.dark.meanQ - base[0], r.dark.meanP - base[1])
    scale = max(1.0, math.sqrt(e.N), abs(gamma))
    assert shift_b[0] == pytest.approx(-shift_d[0], abs=1e-12 * scale)
    assert shift_b[1] == pytest.approx(-shift_d[1], abs=1e-12 * scale)
    assert r.bright.varQ == pytest.approx(r.dark.varQ, abs=1e-12 * V_in)
    assert r.bright.varP == pytest.approx(r.dark.varP, abs=1e-12 * V_in)
    assert r.fidelity <= 1.0
    assert r.state.satisfies_uncertainty()


@given(ensembles, st.floats(-50, 50), st.floats(1.0, 4.0))
def test_fidelity_bounded(e, delta, gain):
    r = cp.run_cloning(0.5, 1.0, e, gain, hopfield(delta, 1.0))
    assert all(0 < c.fidelity <= 1.0 for c in r.clones)


def test_report_serialisation():
    d = cp.run_cloning(0.5 - 0.5j).to_dict()
    assert set(d) == {"parameters", "clones", "fidelity", "flags", "notes", "state"}
    assert d["parameters"]["gamma_im"] == -0.5
    assert set(d["clones"]["dark"]) >= {"meanQ", "meanP", "varQ", "varP", "gain_signal", "fidelity", "flags"}


# --- readout ----------------------------------------------------------------


@given(ensembles, st.complex_numbers(max_magnitude=2.0), st.floats(0.2, 5.0), st.floats(0.2, 5.0))
def test_readout_round_trip(e, gamma, g, hbar):
    r = cp.run_cloning(gamma, ensemble=e)
    t = 0.5 * math.pi * hbar / g
    res = cp.readout(t, r, 0.0, g, hbar)
    dark = _stats(r.dark)
    scale = max(1.0, math.sqrt(e.N), abs(gamma))
    assert np.allclose(res.optical, dark, atol=1e-12 * scale, rtol=0)
    assert res.optical_covQP == pytest.approx(r.dark.covQP, abs=1e-12 * scale)


def test_readout_examples():
    r = cp.run_cloning(1.0, ensemble=cp.SpinEnsemble.from_populations(8, 0.5, 0.4))
    res = cp.readout(0.0, r)
    assert res.optical == (0.0, 0.0, 1.0, 1.0)
    assert res.matter == pytest.approx(_stats(r.dark), abs=1e-15)
    for t in np.linspace(0, 10, 1000):
        s = cp.readout_schedule(t, 0.7)
        assert abs(s.mu_t ** 2 + s.nu_t ** 2 - 1.0) <= 1e-12
    with pytest.raises(UnsupportedConfigurationError):
        cp.readout(1.0, r, delta=0.5)
    with pytest.raises(InvalidArgumentError):
        cp.readout_schedule(1.0, 0.0)


# --- asymmetric cloning ----------------------------------------------------------


def test_asymmetric_examples():
    sym = cp.run_cloning(0.6)
    asym = cp.asymmetric_clone(0.0, 1.0, 0.6)
    for a, b in zip(asym.clones, sym.clones):
        assert _stats(a) == pytest.approx(_stats(b), abs=1e-12)
    far = cp.asymmetric_clone(1e8, 1.0)
    assert far.bright.signal_gain == pytest.approx(0.0, abs=1e-6)
    assert far.dark.signal_gain == pytest.approx(SQ2, abs=1e-12)
    r = cp.asymmetric_clone(3.0, 1.0)
    assert all(cp.FLAG_GAIN in c.flags for c in r.clones)


@given(st.floats(-1e3, 1e3), st.floats(0.1, 10.0), st.floats(1.0, 5.0))
def test_asymmetric_gains_sum_to_gain(delta, g, gain):
    r = cp.run_cloning(1.0, gain=gain, hopfield_pair=hopfield(delta, g))
    h = hopfield(delta, g)
    assert r.bright.signal_gain == pytest.approx(math.sqrt(gain) * h.mu, abs=1e-12)
    assert r.dark.signal_gain == pytest.approx(math.sqrt(gain) * h.nu, abs=1e-12)
    assert r.bright.signal_gain ** 2 + r.dark.signal_gain ** 2 == pytest.approx(gain, abs=1e-12 * gain)


# --- sweep --------------------------------------------------------------------------------


def _assert_row_matches(row, report, name):
    c = report.bright if name == "bright" else report.dark
    got = dict(zip(cp.SweepTable.HEADER, row))
    for key, want in (("meanQ", c.meanQ), ("meanP", c.meanP), ("varQ", c.varQ), ("varP", c.varP),
                      ("gain_signal", c.signal_gain), ("fidelity", c.fidelity)):
        assert got[key] == pytest.approx(want, abs=1e-12 * max(1.0, abs(want)))
    assert got["clone"] == name


def test_single_point_sweep_matches_direct_call():
    grid = {"delta": [0.7], "alpha2": [0.3], "phi": [1.1], "N": [25], "gain": [2.5], "V_in": [1.4]}
    table = cp.sweep(grid, gamma=0.4 + 0.2j, g=1.3)
    assert len(table) == 2
    e = cp.SpinEnsemble.from_populations(25, 0.3, 1.1)
    r = cp.run_cloning(0.4 + 0.2j, 1.4, e, 2.5, hopfield(0.7, 1.3))
    rows = list(table.rows())
    _assert_row_matches(rows[0], r, "bright")
    _assert_row_matches(rows[1], r, "dark")


@given(
    st.lists(st.floats(-5, 5), min_size=1, max_size=2),
    st.lists(st.floats(0, 1), min_size=1, max_size=2),
    st.lists(st.floats(-4, 4), min_size=1, max_size=2),
    st.lists(st.integers(0, 100), min_size=1, max_size=2),
    st.sampled_from(["formula", "operator"]),
    st.booleans(),
)
def test_sweep_agrees_with_run_cloning(deltas, alpha2s, phis, Ns, convention, literal):
    grid = {"delta": deltas, "alpha2": alpha2s, "phi": phis, "N": Ns}
    table = cp.sweep(grid, gamma=0.8, g=1.0, convention=convention, literal_sign=literal)
    rows = list(table.rows())
    i = 0
    for d in deltas:
        for a in alpha2s:
            for p in phis:
                for n in Ns:
                    r = cp.run_cloning(0.8, 1.0, cp.SpinEnsemble.from_populations(n, a, p), 2.0,
                                       hopfield(d, 1.0), literal_sign=literal, convention=convention)
                    _assert_row_matches(rows[i], r, "bright")
                    _assert_row_matches(rows[i + 1], r, "dark")
                    i += 2


def test_phi_sweep_variance_sum():
    table = cp.sweep({"phi": list(np.linspace(0, 2 * math.pi, 37)), "alpha2": [0.5], "N": [10]})
    total = np.array(table.column("varQ")) + np.array(table.column("varP"))
    assert np.allclose(total, 3.5, atol=1e-12)


def test_N_axis_moves_means_only():
    table = cp.sweep({"N": [1, 10, 100], "alpha2": [0.4], "phi": [0.6]})
    for clone in ("bright", "dark"):
        idx = [i for i, c in enumerate(table.column("clone")) if c == clone]
        vq = {table.column("varQ")[i] for i in idx}
        mq = {table.column("meanQ")[i] for i in idx}
        assert len(vq) == 1 and len(mq) == 3


def test_sweep_order_and_errors():
    table = cp.sweep({"gain": [1.0, 2.0], "delta": [0.0, 1.0]})
    assert table.column("delta")[::2] == [0.0, 0.0, 1.0, 1.0]
    assert table.column("gain")[::2] == [1.0, 2.0, 1.0, 2.0]
    assert table.column("clone")[:2] == ["bright", "dark"]
    with pytest.raises(InvalidArgumentError):
        cp.sweep({"phi": list(range(11))}, cap=10)
    with pytest.raises(InvalidArgumentError):
        cp.sweep({"bogus": [1.0]})
    with pytest.raises(InvalidArgumentError):
        cp.sweep({"phi": []})
    for bad in ({"alpha2": [1.5]}, {"N": [2.5]}, {"gain": [0.5]}, {"V_in": [0.1]}):
        with pytest.raises(InvalidArgumentError):
            cp.sweep(bad)


def test_sweep_deterministic():
    grid = {"phi": [0.0, 1.0], "alpha2": [0.2, 0.7], "N": [3]}
    assert list(cp.sweep(grid).rows()) == list(cp.sweep(grid).rows())
