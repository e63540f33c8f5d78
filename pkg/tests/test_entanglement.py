import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.linalg import block_diag

from cvdist.channels import make_separable_channel, random_locc_spec
from cvdist.entanglement import (
    BipartiteSplit,
    log_negativity,
    partial_transpose_cov,
    ppt_separable,
)
from cvdist.errors import InvalidSplit, NotPhysical
from cvdist.states import GaussianState, random_state, tensor, tmsv, vacuum
from cvdist.symplectic import random_symplectic, symplectic_eigenvalues

SPLIT01 = BipartiteSplit((0,), (1,))


def test_split_validation():
    with pytest.raises(InvalidSplit):
        BipartiteSplit((), (1,))
    with pytest.raises(InvalidSplit):
        BipartiteSplit((0, 1), (1,))
    with pytest.raises(InvalidSplit):
        partial_transpose_cov(np.eye(4), BipartiteSplit((0,), (2,)))


def test_partial_transpose_flips_z_block():
    pt = partial_transpose_cov(tmsv(0.5).cov, SPLIT01)
    sh = np.sinh(1.0)
    assert_allclose(pt[:2, 2:], sh * np.eye(2), atol=1e-12)


def test_partial_transpose_involution(rng):
    cov = random_state(3, rng, nu_spread=1.0).cov
    split = BipartiteSplit((0, 2), (1,))
    assert_allclose(partial_transpose_cov(partial_transpose_cov(cov, split), split), cov)


def test_partial_transpose_of_product_state_is_physical(rng):
    cov = tensor(random_state(1, rng), random_state(1, rng)).cov
    pt = partial_transpose_cov(cov, SPLIT01)
    assert symplectic_eigenvalues(pt)[-1] >= 1.0 - 1e-9


def test_log_negativity_tmsv_half():
    report = log_negativity(tmsv(0.5), SPLIT01)
    assert abs(report.log_negativity - 1.0) <= 1e-10
    assert abs(report.min_pt_symplectic_eigenvalue - np.exp(-1.0)) <= 1e-10
    assert not report.ppt
    assert report.ppt_conclusive


@pytest.mark.parametrize("r", [0.1 * k for k in range(1, 11)])
def test_log_negativity_tmsv_sweep(r):
    report = log_negativity(tmsv(r), SPLIT01)
    assert abs(report.log_negativity - 2.0 * r) <= 1e-10
    assert abs(report.min_pt_symplectic_eigenvalue - np.exp(-2.0 * r)) <= 1e-10


def test_log_negativity_vacuum_zero():
    assert log_negativity(vacuum(2), SPLIT01).log_negativity == 0.0


def test_log_negativity_monotone_in_r():
    values = [log_negativity(tmsv(r), SPLIT01).log_negativity
              for r in np.linspace(0.05, 1.2, 12)]
    assert np.all(np.diff(values) > 0)


def test_log_negativity_invariant_under_local_symplectics(rng):
    base = tmsv(0.6)
    e0 = log_negativity(base, SPLIT01).log_negativity
    for _ in range(25):
        s = block_diag(random_symplectic(1, rng, 0.5), random_symplectic(1, rng, 0.5))
        rotated = GaussianState(mean=s @ base.mean, cov=s @ base.cov @ s.T)
        assert abs(log_negativity(rotated, SPLIT01).log_negativity - e0) <= 1e-8


def test_log_negativity_ignores_mean():
    displaced = tmsv(0.5).with_mean([1.0, -2.0, 0.3, 4.0])
    assert log_negativity(displaced, SPLIT01) == log_negativity(tmsv(0.5), SPLIT01)


def test_log_negativity_rejects_unphysical():
    bad = GaussianState(mean=np.zeros(2), cov=0.5 * np.eye(2))
    with pytest.raises(NotPhysical):
        log_negativity(bad, BipartiteSplit((0,), (1,)))


def test_ppt_separable_cases(rng):
    assert not ppt_separable(tmsv(0.3), SPLIT01)
    product = tensor(random_state(1, rng), random_state(1, rng))
    assert ppt_separable(product, SPLIT01)


def test_separable_choi_states_are_ppt(rng):
    for _ in range(100):
        spec = random_locc_spec(rng)
        ch = make_separable_channel(spec)
        split = BipartiteSplit(spec.alice_modes, spec.bob_modes)
        assert ppt_separable(ch.choi_state, split)


def test_ppt_conclusive_flag_depends_on_split(rng):
    state = random_state(3, rng, nu_spread=0.5)
    report = log_negativity(state, BipartiteSplit((0, 1), (2,)))
    assert not report.ppt_conclusive
    payload = report.to_dict()
    assert set(payload) == {"log_negativity", "nu_tilde_min", "ppt", "ppt_conclusive"}
