import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from su2pulse.model import (
    BlockParams,
    ModelParams,
    SignSet,
    bell_basis,
    block_hamiltonian,
    block_params,
    build_full_hamiltonian,
    effective_to_model,
    extract_blocks,
    sign_factors,
    verify_block_equivalence,
)
from su2pulse.su2 import unitarity_defect

coef = st.floats(-5, 5)
model_params = st.builds(
    lambda h, j1, j2, j3, b1, b2: ModelParams(h, (j1, j2, j3), b1, b2),
    st.sampled_from([1, 2, 3]), coef, coef, coef, coef, coef,
)


def random_model(rng, h):
    J1, J2, J3, B1, B2 = rng.uniform(-5, 5, size=5)
    return ModelParams(h, (J1, J2, J3), B1, B2)


@pytest.mark.parametrize(
    "h, k, expected",
    [
        (1, 1, SignSet(s0=-1, s1=-1, s2=-1, p=1, q=1)),
        (2, 1, SignSet(s0=1, s1=1, s2=-1, p=1, q=2)),
        (3, 2, SignSet(s0=1, s1=1, s2=1, p=2, q=1)),
        # remaining cases evaluated by hand from the closed formulas
        (1, 2, SignSet(s0=1, s1=1, s2=-1, p=1, q=1)),
        (2, 2, SignSet(s0=-1, s1=-1, s2=1, p=1, q=2)),
        (3, 1, SignSet(s0=-1, s1=1, s2=-1, p=2, q=1)),
    ],
)
def test_sign_factors_table(h, k, expected):
    assert sign_factors(h, k) == expected


@pytest.mark.parametrize("h, k", [(0, 1), (4, 1), (1, 0), (1, 3)])
def test_sign_factors_domain(h, k):
    with pytest.raises(ValueError):
        sign_factors(h, k)


def test_full_hamiltonian_examples():
    assert np.all(build_full_hamiltonian(ModelParams(3, (0, 0, 0))) == 0)
    H = build_full_hamiltonian(ModelParams(3, (0, 0, 1)))
    np.testing.assert_array_equal(H, np.diag([1, -1, -1, 1]))


@given(model_params)
@settings(max_examples=200, deadline=None)
def test_full_hamiltonian_hermitian(m):
    H = build_full_hamiltonian(m)
    assert np.linalg.norm(H - H.conj().T) <= 1e-14


@pytest.mark.parametrize("h", [1, 2, 3])
def test_bell_basis_unitary(h):
    V = bell_basis(h)
    assert unitarity_defect(V) <= 1e-14


@pytest.mark.parametrize("h", [1, 2, 3])
def test_block_diagonal_brute_force(h, rng):
    worst_leak = worst_dev = 0.0
    for _ in range(1000):
        m = random_model(rng, h)
        rep = verify_block_equivalence(m, tol=1e-10)
        worst_leak = max(worst_leak, rep.max_leakage)
        worst_dev = max(worst_dev, rep.max_deviation)
    assert worst_leak <= 1e-12
    assert worst_dev <= 1e-10


def test_zero_params_exact():
    rep = verify_block_equivalence(ModelParams(2, (0, 0, 0)))
    assert rep.max_deviation == 0.0 and rep.max_leakage == 0.0 and rep.passed


def test_zero_fields_blocks_diagonal(rng):
    for h in (1, 2, 3):
        J = tuple(rng.uniform(-5, 5, 3))
        b1, b2, _ = extract_blocks(ModelParams(h, J))
        for blk in (b1, b2):
            assert abs(blk[0, 1]) < 1e-15 and abs(blk[1, 0]) < 1e-15
        for k in (1, 2):
            assert block_params(ModelParams(h, J), k).field_scale == 0.0


def test_equal_fields_split_between_blocks():
    # h=3, J=0, B1=B2=b: one block carries the field sum 2b, the other nothing
    b = 1.7
    m = ModelParams(3, (0, 0, 0), b, b)
    blk1, blk2, leak = extract_blocks(m)
    coupling = sorted([abs(blk1[0, 1]), abs(blk2[0, 1])])
    assert coupling[0] == pytest.approx(0.0, abs=1e-15)
    assert coupling[1] == pytest.approx(2 * b, abs=1e-14)
    scales = sorted(abs(block_params(m, k).field_scale) for k in (1, 2))
    assert scales == pytest.approx([0.0, 2 * b])


def test_corrupted_sign_table_fails(rng):
    def flipped(h, k):
        s = sign_factors(h, k)
        return SignSet(s.s0, -s.s1, s.s2, s.p, s.q)

    m = random_model(rng, 1)
    assert verify_block_equivalence(m).passed
    assert not verify_block_equivalence(m, sign_table=flipped).passed


@given(model_params)
@settings(max_examples=150, deadline=None)
def test_spectrum_is_union_of_block_spectra(m):
    full = np.linalg.eigvalsh(build_full_hamiltonian(m))
    blocks = np.concatenate([np.linalg.eigvalsh(block_hamiltonian(block_params(m, k))) for k in (1, 2)])
    np.testing.assert_allclose(np.sort(full), np.sort(blocks), atol=1e-10)


def test_block_params_fields():
    m = ModelParams(3, (1.0, 2.0, 3.0), 0.5, 0.25)
    bp = block_params(m, 1)
    assert bp.J0 == 3.0 and bp.q == 1 and bp.k == 1
    assert bp.signs == sign_factors(3, 1)
    # k=1 for h=3 has s0 = -1: J_{3,-} = J1 - J2, B_{3,+} = B1 + B2
    assert bp.Jeff == pytest.approx(-(1.0 - 2.0))
    assert bp.field_scale == pytest.approx(-(-1) * 0.75)


@pytest.mark.parametrize("h, k", list(itertools.product((1, 2, 3), (1, 2))))
def test_effective_to_model_inverts(h, k):
    m = effective_to_model(h, k, Jeff=1.25, field_scale=-2.5, J0=0.3)
    bp = block_params(m, k)
    assert bp.Jeff == pytest.approx(1.25)
    assert bp.field_scale == pytest.approx(-2.5)
    assert bp.J0 == pytest.approx(0.3)


def test_block_params_validation():
    with pytest.raises(ValueError):
        BlockParams(0.0, 1.0, 1.0, q=3)
    with pytest.raises(ValueError):
        ModelParams(4, (0, 0, 0))
    with pytest.raises(ValueError):
        ModelParams(1, (0, 0, float("nan")))
