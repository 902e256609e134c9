import math

import numpy as np
import pytest

from memslab import ensemble, measures, qcore
from memslab.checks import random_x_states
from memslab.families import FamilyId, make_state, rho_g, rho_m
from memslab.qcore import I2, PSI_PLUS, SZ

from conftest import random_density, random_unitary

PSI = qcore.projector(PSI_PLUS)
MIXED = np.eye(4, dtype=complex) / 4
W08 = make_state(FamilyId.WERNER, 0.8)


@pytest.mark.parametrize("rho, expected", [(PSI, 0.0), (MIXED, 1.0), (W08, 0.36)])
def test_linear_entropy(rho, expected):
    assert measures.linear_entropy(rho) == pytest.approx(expected, abs=1e-14)


def test_as_x_state_werner():
    v = measures.as_x_state(make_state(FamilyId.WERNER, 0.5))
    assert v.rho14 == 0 and v.rho23 == pytest.approx(0.25)


def test_as_x_state_mjwk():
    v = measures.as_x_state(make_state(FamilyId.MJWK, 0.5))
    assert v.rho14 == pytest.approx(0.25) and v.rho23 == 0


def test_as_x_state_rejects_rotated_bell_state():
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    psi = np.kron(h, I2) @ PSI_PLUS
    with pytest.raises(ValueError, match="not an X state"):
        measures.as_x_state(qcore.projector(psi))


@pytest.mark.parametrize("rho, expected", [
    (W08, 0.7),
    (make_state(FamilyId.MJWK, 0.5), 0.5),
    (rho_g(), 0.0),
])
def test_concurrence_x(rho, expected):
    assert measures.concurrence_x(measures.as_x_state(rho)) == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize("rho, expected", [(PSI, 1.0), (W08, 0.7), (MIXED, 0.0)])
def test_concurrence_general(rho, expected):
    assert measures.concurrence_general(rho) == pytest.approx(expected, abs=1e-13)


@pytest.mark.parametrize("rho, expected", [
    (make_state(FamilyId.WERNER, 0.5), True),
    (make_state(FamilyId.WERNER, 0.2), False),
    (make_state(FamilyId.RHO2, 0.5), True),
])
def test_is_entangled(rho, expected):
    assert measures.is_entangled(rho) is expected


@pytest.mark.parametrize("rho, expected", [
    (MIXED, np.zeros((3, 3))),
    (PSI, np.diag([1.0, 1.0, -1.0])),
    (W08, np.diag([0.8, 0.8, -0.8])),
])
def test_correlation_matrix(rho, expected):
    assert np.allclose(measures.correlation_matrix(rho), expected, atol=1e-15)


def test_correlation_matrix_flags_imaginary_residue():
    bad = MIXED.copy()
    bad[0, 3] = 0.1  # not Hermitian: traces pick up an imaginary part
    with pytest.raises(measures.ConsistencyError):
        measures.correlation_matrix(bad)


@pytest.mark.parametrize("t, expected", [
    (np.zeros((3, 3)), 0.0),
    (np.diag([1.0, 1.0, -1.0]), 3.0),
    (measures.correlation_matrix(W08), 2.4),
])
def test_n_value(t, expected):
    assert measures.n_value(t) == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize("rho, expected", [(MIXED, 0.5), (W08, 0.9), (rho_m(), 7 / 9)])
def test_opt_fidelity(rho, expected):
    assert measures.opt_fidelity(rho) == pytest.approx(expected, abs=1e-14)


def test_opt_fidelity_not_clamped():
    # MJWK below p = 1/3 sits under the classical 2/3
    assert measures.opt_fidelity(make_state(FamilyId.MJWK, 0.2)) == pytest.approx((5 + 0.6) / 9, abs=1e-14)


@pytest.mark.parametrize("rho, expected", [
    (make_state(FamilyId.WERNER, 1 / math.sqrt(2)), 2.0),
    (make_state(FamilyId.WERNER, 1.0), 2 * math.sqrt(2)),
    (rho_m(), 4 * math.sqrt(2) / 3),
])
def test_bell_x(rho, expected):
    assert measures.bell_x(measures.as_x_state(rho)) == pytest.approx(expected, abs=1e-13)


@pytest.mark.parametrize("rho, expected", [(MIXED, 0.0), (PSI, 2 * math.sqrt(2))])
def test_bell_generic(rho, expected):
    assert measures.bell_generic(rho) == pytest.approx(expected, abs=1e-13)


@pytest.mark.parametrize("spec, expected", [
    ((1, 0, 0, 0), 1.0),
    ((0.85, 0.05, 0.05, 0.05), 0.7),
    ((0.25, 0.25, 0.25, 0.25), -0.5),
])
def test_c_star(spec, expected):
    assert measures.c_star(spec) == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize("rho, expected", [
    (make_state(FamilyId.WERNER, 0.5), True),
    (make_state(FamilyId.RHO2, 0.5), False),
    (make_state(FamilyId.RHO2, 0.8), True),
])
def test_is_mems(rho, expected):
    assert measures.is_mems(rho) is expected


def test_measure_bundle_matches_stack():
    rhos = np.array([make_state(FamilyId.RHO3, p) for p in (0.2, 0.6, 0.9)])
    stack = measures.measure_stack(rhos)
    for i, rho in enumerate(rhos):
        m = measures.measure(rho)
        for key in ("s_l", "c", "c_star", "f", "b"):
            assert getattr(m, key) == pytest.approx(stack[key][i], abs=1e-14)


def test_x_formulas_agree_with_generic_routes():
    states = random_x_states(1000, seed=3)
    views = [measures.as_x_state(s) for s in states]
    c_x = np.array([measures.concurrence_x(v) for v in views])
    b_x = np.array([measures.bell_x(v) for v in views])
    assert np.max(np.abs(c_x - measures.concurrence_general(states))) <= 1e-9
    assert np.max(np.abs(b_x - measures.bell_generic(states))) <= 1e-9


def test_ppt_agrees_with_concurrence_on_random_states(rng):
    states = random_density(rng, n=600, rank=4)
    states = np.concatenate([states, random_density(rng, n=600, rank=2)])
    c = measures.concurrence_general(states)
    for rho, ci in zip(states, c):
        assert measures.is_entangled(rho) == (ci > 1e-9)


def test_wootters_matches_textbook_route(rng):
    sysy = np.kron(qcore.SY, qcore.SY)
    for rho in random_density(rng, n=100, rank=3):
        mu = np.sort(np.linalg.eigvals(rho @ sysy @ rho.conj() @ sysy).real)[::-1]
        s = np.sqrt(np.maximum(mu, 0))
        assert measures.concurrence_general(rho) == pytest.approx(max(0, s[0] - s[1:].sum()), abs=1e-7)


def test_local_unitary_invariance_on_ih_states(rng):
    gen = np.random.default_rng(99)
    for i in range(100):
        lam = ensemble.sample_spectrum(4, gen)
        rho = ensemble.build_ih_state(lam)
        u = np.kron(random_unitary(rng), random_unitary(rng))
        rotated = u @ rho @ u.conj().T
        a, b = measures.measure(rho), measures.measure(rotated)
        for key in ("s_l", "c", "c_star", "f", "b"):
            assert getattr(a, key) == pytest.approx(getattr(b, key), abs=1e-10)


def test_swap_and_sz_conjugation_invariance():
    swap = np.eye(4)[[0, 2, 1, 3]]
    zz = np.kron(SZ, SZ)
    for fid in (FamilyId.WERNER, FamilyId.MJWK, FamilyId.RHO1, FamilyId.RHO2, FamilyId.RHO3):
        for p in np.linspace(0, 1, 11):
            rho = make_state(fid, p)
            base = measures.measure(rho)
            for op in (swap, zz):
                other = measures.measure(op @ rho @ op.conj().T)
                for key in ("s_l", "c", "f", "b"):
                    assert getattr(base, key) == pytest.approx(getattr(other, key), abs=1e-10)


def test_fidelity_floor_and_unit_value():
    for fid in (FamilyId.WERNER, FamilyId.MJWK, FamilyId.RHO1, FamilyId.RHO2, FamilyId.RHO3):
        for p in np.linspace(0, 1, 21):
            f = measures.opt_fidelity(make_state(fid, p))
            assert f >= 0.5 - 1e-12
            maximally_entangled_pure = p == 1.0 and fid in (FamilyId.WERNER, FamilyId.MJWK, FamilyId.RHO1)
            assert (abs(f - 1.0) <= 1e-12) == maximally_entangled_pure
    assert measures.opt_fidelity(PSI) == pytest.approx(1.0, abs=1e-14)


def test_tsirelson_on_random_states(rng):
    states = random_density(rng, n=2000, rank=2)
    assert np.max(measures.bell_generic(states)) <= 2 * math.sqrt(2) + 1e-9
