import numpy as np
import pytest

from qcool.errors import ConservationError
from qcool.hilbert import (BlockedOperator, Oscillator, Qudit, SpaceSpec,
                           annihilation, block_decompose, excitation_levels,
                           excitation_number, partial_trace, qudit_transition)


def test_space_dims_and_indexing():
    sp = SpaceSpec((Oscillator(4), Qudit(3)))
    assert sp.dims == (4, 3)
    assert sp.dim == 12
    assert sp.index((2, 1)) == 2 * 3 + 1
    assert sp.multi(7) == (2, 1)
    for flat in range(sp.dim):
        assert sp.index(sp.multi(flat)) == flat
    ket = sp.basis_ket((1, 2))
    assert ket[sp.index((1, 2))] == 1.0 and np.sum(np.abs(ket)) == 1.0


def test_annihilation_matrix_elements():
    sp = SpaceSpec((Oscillator(5),))
    a = annihilation(sp, 0)
    n_op = a.conj().T @ a
    assert np.allclose(np.diag(n_op), np.arange(5))
    assert abs(a[2, 3] - np.sqrt(3)) < 1e-12


def test_annihilation_rejects_qudit():
    sp = SpaceSpec((Oscillator(4), Qudit(3)))
    with pytest.raises(TypeError):
        annihilation(sp, 1)


def test_qudit_transition_and_range():
    sp = SpaceSpec((Qudit(3),))
    t = qudit_transition(sp, 0, 0, 2)
    assert t[2, 0] == 1.0 and np.count_nonzero(t) == 1
    with pytest.raises(IndexError):
        qudit_transition(sp, 0, 0, 3)


def test_excitation_levels_row_major():
    sp = SpaceSpec((Oscillator(3), Qudit(2)))
    lev = excitation_levels(sp)
    expect = [n + q for n in range(3) for q in range(2)]
    assert lev.tolist() == expect
    assert np.allclose(np.diag(excitation_number(sp)), lev)


def test_block_decompose_roundtrip():
    sp = SpaceSpec((Oscillator(4), Qudit(2)))
    lev = excitation_levels(sp)
    rng = np.random.default_rng(3)
    h = rng.normal(size=(sp.dim, sp.dim)) + 1j * rng.normal(size=(sp.dim, sp.dim))
    h = h + h.conj().T
    h[lev[:, None] != lev[None, :]] = 0.0
    blocked = block_decompose(sp, h)
    assert isinstance(blocked, BlockedOperator)
    assert np.max(np.abs(blocked.reassemble() - h)) < 1e-12
    sizes = {e: len(b.indices) for e, b in blocked.blocks.items()}
    assert sizes[0] == 1 and sum(sizes.values()) == sp.dim


def test_block_decompose_flags_violation():
    sp = SpaceSpec((Oscillator(3), Qudit(2)))
    bad = np.zeros((6, 6))
    bad[0, 5] = bad[5, 0] = 0.5  # couples E=0 to E=3
    with pytest.raises(ConservationError) as err:
        block_decompose(sp, bad)
    assert err.value.max_offblock == pytest.approx(0.5)


def test_partial_trace_product_state():
    rng = np.random.default_rng(5)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rho_a = a @ a.conj().T
    rho_a /= np.trace(rho_a)
    b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho_b = b @ b.conj().T
    rho_b /= np.trace(rho_b)
    sp = SpaceSpec((Qudit(3), Oscillator(4)))
    joint = np.kron(rho_a, rho_b)
    assert np.max(np.abs(partial_trace(sp, joint, keep=[0]) - rho_a)) < 1e-12
    assert np.max(np.abs(partial_trace(sp, joint, keep=[1]) - rho_b)) < 1e-12
