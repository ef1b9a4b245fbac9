"""Tests for representations, character tables, and isotropy types.

Oracles: closed-form character tables of small groups (cyclic groups by
roots of unity, the symmetric group on three letters by its classical
table) and fixed-point counts of permutation actions.
"""

import numpy as np
import pytest

from fop.errors import NumericalError, ValidationError
from fop.groups import make_group, subgroup_from_members, subgroups
from fop.reps import (
    CharacterTable,
    IsotropyType,
    UnitaryRep,
    character_table,
    direct_sum,
    fixed_subspace,
    isomorphisms,
    isotropy_group,
    isotypic_basis,
    make_rep,
    moving_subspace,
    multiplicities,
    restrict_rep,
    stabilize_type,
    subrep,
    types_equal,
)

S3_SPEC = {"kind": "perm", "degree": 3, "generators": [[1, 0, 2], [1, 2, 0]]}


def test_cyclic_weight_rep():
    g = make_group({"kind": "cyclic", "n": 4})
    rep = make_rep(g, {"kind": "weights", "weights": [1]})
    chi = rep.character()
    assert np.allclose(chi, [1, 1j, -1, -1j])
    assert np.allclose(rep.matrices[3], [[-1j]])


def test_product_weight_rep():
    g = make_group({"kind": "product", "orders": [2, 2]})
    rep = make_rep(g, {"kind": "weights", "weights": [(1, 0), (0, 1)]})
    # Element 1 is the generator of the second factor, element 2 of the first.
    assert np.allclose(rep.matrices[1], np.diag([1, -1]))
    assert np.allclose(rep.matrices[2], np.diag([-1, 1]))
    assert np.allclose(rep.matrices[3], np.diag([-1, -1]))


def test_weight_rep_rejects_bad_weights():
    g = make_group({"kind": "cyclic", "n": 3})
    with pytest.raises(ValidationError):
        make_rep(g, {"kind": "weights", "weights": [1.5]})
    with pytest.raises(ValidationError):
        make_rep(g, {"kind": "weights", "weights": [(1, 2)]})
    with pytest.raises(ValidationError):
        make_rep(g, {"kind": "weights", "weights": []})
    s3 = make_group(S3_SPEC)
    with pytest.raises(ValidationError):
        make_rep(s3, {"kind": "weights", "weights": [1]})


def test_permutation_rep_characters_count_fixed_points():
    g = make_group(S3_SPEC)
    rep = make_rep(g, {"kind": "permutation"})
    chi = rep.character()
    assert np.allclose(chi.imag, 0)
    assert sorted(np.round(chi.real).astype(int)) == [0, 0, 1, 1, 1, 3]
    assert chi[0] == 3


def test_matrices_kind_unitarizes():
    g = make_group({"kind": "cyclic", "n": 2})
    # Order-2 matrix that is not unitary.
    rep = make_rep(g, {"kind": "matrices", "generators": [[[0, 2], [0.5, 0]]]})
    m = rep.matrices[1]
    assert np.allclose(m.conj().T @ m, np.eye(2), atol=1e-10)
    assert abs(np.trace(m)) < 1e-10  # traces survive the change of basis


def test_matrices_kind_rejects_non_homomorphism():
    g = make_group({"kind": "cyclic", "n": 3})
    with pytest.raises(ValidationError):
        make_rep(g, {"kind": "matrices", "generators": [[[-1]]]})


def test_trivial_and_zero_dim_reps():
    g = make_group({"kind": "cyclic", "n": 3})
    rep = make_rep(g, {"kind": "trivial", "dim": 2})
    assert rep.dim == 2
    assert np.allclose(rep.character(), 2)
    zero = make_rep(g, {"kind": "trivial", "dim": 0})
    assert zero.dim == 0
    assert fixed_subspace(zero).shape == (0, 0)
    assert isotropy_group(zero, np.zeros(0)).order == 3


def test_character_table_s3_matches_classical():
    ct = character_table(make_group(S3_SPEC))
    assert ct.dims == (1, 1, 2)
    arr = ct.array
    assert np.allclose(arr[0], 1)
    # Sign character: 1 on even permutations, -1 on odd.
    assert sorted(np.round(arr[1].real).astype(int)) == [-1, -1, -1, 1, 1, 1]
    # Two-dimensional character: 2 once, 0 thrice, -1 twice.
    assert sorted(np.round(arr[2].real).astype(int)) == [-1, -1, 0, 0, 0, 2]
    assert np.allclose(arr.imag, 0, atol=1e-8)


def test_character_table_c4_roots_of_unity():
    g = make_group({"kind": "cyclic", "n": 4})
    ct = character_table(g)
    assert ct.dims == (1, 1, 1, 1)
    got = {tuple(np.round(r, 6)) for r in ct.array}
    want = {
        tuple(np.round(np.exp(2j * np.pi * k * np.arange(4) / 4), 6)) for k in range(4)
    }
    assert got == want
    assert np.allclose(ct.array[0], 1)


@pytest.mark.parametrize(
    "spec",
    [
        {"kind": "cyclic", "n": 6},
        {"kind": "product", "orders": [2, 4]},
        S3_SPEC,
    ],
)
def test_character_table_orthonormal(spec):
    g = make_group(spec)
    ct = character_table(g)
    assert sum(d * d for d in ct.dims) == g.order
    gram = ct.array @ ct.array.conj().T / g.order
    assert np.max(np.abs(gram - np.eye(len(ct)))) < 1e-8


def test_multiplicities_of_permutation_rep():
    g = make_group(S3_SPEC)
    rep = make_rep(g, {"kind": "permutation"})
    # Permutation action on three letters = trivial + the 2-dim irreducible.
    assert multiplicities(rep) == (1, 0, 1)
    with pytest.raises(NumericalError):
        ct = character_table(g)
        ct.multiplicities(np.ones(6) * 0.5)


def test_fixed_subspace_of_permutation_rep():
    g = make_group(S3_SPEC)
    rep = make_rep(g, {"kind": "permutation"})
    q = fixed_subspace(rep)
    assert q.shape == (3, 1)
    v = q[:, 0]
    assert np.max(np.abs(v - v.mean())) < 1e-10
    m = moving_subspace(rep)
    assert m.shape == (3, 2)
    assert np.max(np.abs(np.concatenate([q, m], axis=1).conj().T @ np.concatenate([q, m], axis=1) - np.eye(3))) < 1e-10


def test_fixed_subspace_of_weight_rep():
    g = make_group({"kind": "cyclic", "n": 4})
    rep = make_rep(g, {"kind": "weights", "weights": [0, 2]})
    q = fixed_subspace(rep)
    assert q.shape == (2, 1)
    assert abs(abs(q[0, 0]) - 1) < 1e-10  # fixed line is the weight-0 axis


def test_isotropy_groups_in_permutation_rep():
    g = make_group(S3_SPEC)
    rep = make_rep(g, {"kind": "permutation"})
    assert isotropy_group(rep, [1, 2, 3]).order == 1
    assert isotropy_group(rep, [5, 5, 5]).order == 6
    two = isotropy_group(rep, [1, 1, 0])
    assert two.order == 2
    # Stabilizers of points on the same orbit are conjugate.
    moved = rep.matrices[3] @ np.array([1, 1, 0], dtype=complex)
    assert isotropy_group(rep, moved).class_id == two.class_id


def test_isotropy_ambiguity_is_an_error():
    g = make_group({"kind": "cyclic", "n": 2})
    rep = make_rep(g, {"kind": "weights", "weights": [1]})
    # The nontrivial element moves this point by 4e-7, inside the
    # ambiguity band just above the 1e-7 decision radius.
    with pytest.raises(NumericalError):
        isotropy_group(rep, [2e-7])


def test_restrict_rep_to_subgroup():
    g = make_group({"kind": "cyclic", "n": 4})
    rep = make_rep(g, {"kind": "weights", "weights": [1]})
    sub = subgroup_from_members(g, [0, 2])
    res = restrict_rep(rep, sub)
    assert res.group.order == 2
    assert np.allclose(res.character(), [1, -1])


def test_direct_sum_and_subrep_round_trip():
    g = make_group({"kind": "cyclic", "n": 4})
    a = make_rep(g, {"kind": "weights", "weights": [0]})
    b = make_rep(g, {"kind": "weights", "weights": [1]})
    s = direct_sum(a, b)
    assert s.dim == 2
    back = subrep(s, np.array([[0.0], [1.0]]))
    assert np.allclose(back.character(), b.character())
    with pytest.raises(ValidationError):
        subrep(s, np.array([[1.0], [1.0]]))  # not orthonormal
    rot = np.array([[1.0], [1.0]]) / np.sqrt(2)
    with pytest.raises(ValidationError):
        subrep(s, rot)  # orthonormal but not invariant


def test_isotypic_basis_shapes_and_projections():
    g = make_group(S3_SPEC)
    rep = make_rep(g, {"kind": "permutation"})
    comps = isotypic_basis(rep)
    assert [q.shape[1] for q in comps] == [1, 0, 2]
    for q in comps:
        if q.shape[1]:
            sm = q.conj().T[None] @ rep.matrices @ q[None]
            assert np.max(np.abs(rep.matrices @ q[None] - q[None] @ sm)) < 1e-8


def test_isomorphism_search():
    c4 = make_group({"kind": "cyclic", "n": 4})
    klein = make_group({"kind": "product", "orders": [2, 2]})
    assert list(isomorphisms(c4, klein)) == []
    c2a = make_group({"kind": "cyclic", "n": 2})
    c2b, _ = subgroup_from_members(c4, [0, 2]).as_group()
    phis = list(isomorphisms(c2a, c2b))
    assert phis == [(0, 1)]
    # An automorphism group: the Klein group has 6 (permutations of the
    # three involutions).
    assert len(list(isomorphisms(klein, klein))) == 6


def test_types_equal_across_parents():
    c4 = make_group({"kind": "cyclic", "n": 4})
    klein = make_group({"kind": "product", "orders": [2, 2]})
    h1, _ = subgroup_from_members(c4, [0, 2]).as_group()
    h2, _ = subgroup_from_members(klein, [0, 1]).as_group()
    t1 = IsotropyType(h1, 0, v_mults=(0, 2), w_mults=(0, 1))
    t2 = IsotropyType(h2, 0, v_mults=(0, 1), w_mults=(0, 0))
    s1, s2 = stabilize_type(t1), stabilize_type(t2)
    assert s1.diff == (0, 1)
    assert types_equal(s1, s2)
    t3 = IsotropyType(h2, 0, v_mults=(1, 0), w_mults=(0, 0))
    assert not types_equal(s1, stabilize_type(t3))


def test_types_equal_uses_automorphisms():
    # In the Klein group the three nontrivial irreducibles are permuted
    # by automorphisms, so any single-irreducible labels match.
    klein = make_group({"kind": "product", "orders": [2, 2]})
    t1 = IsotropyType(klein, 0, v_mults=(0, 1, 0, 0), w_mults=(0, 0, 0, 0))
    t2 = IsotropyType(klein, 0, v_mults=(0, 0, 0, 1), w_mults=(0, 0, 0, 0))
    assert types_equal(stabilize_type(t1), stabilize_type(t2))
    t3 = IsotropyType(klein, 0, v_mults=(1, 0, 0, 0), w_mults=(0, 0, 0, 0))
    assert not types_equal(stabilize_type(t1), stabilize_type(t3))


def test_types_differ_for_nonisomorphic_groups():
    c4 = make_group({"kind": "cyclic", "n": 4})
    klein = make_group({"kind": "product", "orders": [2, 2]})
    t1 = IsotropyType(c4, 0, (0, 0, 0, 1), (0, 0, 0, 0))
    t2 = IsotropyType(klein, 0, (0, 0, 0, 1), (0, 0, 0, 0))
    assert not types_equal(stabilize_type(t1), stabilize_type(t2))


def test_rep_constructor_validates():
    g = make_group({"kind": "cyclic", "n": 2})
    bad = np.stack([np.eye(2), 2 * np.eye(2)])
    with pytest.raises(ValidationError):
        UnitaryRep(g, bad)
    swapped = np.stack([np.array([[0, 1], [1, 0]]), np.eye(2)])
    with pytest.raises(ValidationError):
        UnitaryRep(g, swapped)
