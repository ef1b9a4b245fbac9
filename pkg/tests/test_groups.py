"""Group construction, subgroup enumeration, conjugation."""

import itertools

import pytest

from fop.errors import ValidationError
from fop.groups import (
    FiniteGroup,
    conjugate_subgroup,
    make_group,
    subgroup_from_members,
    subgroups,
)

S3_SPEC = {"kind": "perm", "degree": 3, "generators": [[1, 0, 2], [1, 2, 0]]}


def brute_force_subgroup_sets(table):
    """Oracle: closure test over all subsets of divisor sizes."""
    n = len(table)
    divisors = [d for d in range(1, n + 1) if n % d == 0]
    out = set()
    for size in divisors:
        for cand in itertools.combinations(range(n), size):
            s = set(cand)
            if 0 not in s:
                continue
            if all(table[a][b] in s for a in s for b in s):
                out.add(tuple(sorted(s)))
    return sorted(out, key=lambda t: (len(t), t))


def test_cyclic_enumeration_is_powers_of_generator():
    g = make_group({"kind": "cyclic", "n": 5})
    assert g.order == 5
    assert g.table[0] == (0, 1, 2, 3, 4)
    # element i is the generator to the i-th power
    assert g.table[2][3] == 0
    assert g.inv(1) == 4


def test_product_group_table():
    g = make_group({"kind": "product", "orders": [2, 2]})
    assert g.order == 4
    # every non-identity element has order 2
    assert all(g.table[i][i] == 0 for i in range(4))
    assert g.label == "C2xC2"


def test_perm_group_s3():
    g = make_group(S3_SPEC)
    assert g.order == 6
    assert g.perms[0] == (0, 1, 2)
    orders = sorted(g.element_order(i) for i in range(6))
    assert orders == [1, 2, 2, 2, 3, 3]
    sizes = sorted(len(c) for c in g.element_classes)
    assert sizes == [1, 2, 3]


def test_make_group_deterministic():
    a = make_group(S3_SPEC)
    b = make_group(S3_SPEC)
    assert a.table == b.table
    assert a.perms == b.perms


def test_generator_words_multiply_out():
    g = make_group(S3_SPEC)
    for i in range(g.order):
        acc = 0
        for j in g.gen_words[i]:
            acc = g.mul(acc, g.generators[j])
        assert acc == i


@pytest.mark.parametrize(
    "spec,count",
    [
        ({"kind": "cyclic", "n": 6}, 4),
        ({"kind": "cyclic", "n": 4}, 3),
        ({"kind": "product", "orders": [2, 2]}, 5),
        (S3_SPEC, 6),
    ],
)
def test_subgroup_counts(spec, count):
    g = make_group(spec)
    subs = subgroups(g)
    assert len(subs) == count
    assert [s.members for s in subs] == [tuple(t) for t in brute_force_subgroup_sets(g.table)]


def test_subgroups_sorted_and_first_trivial():
    g = make_group(S3_SPEC)
    subs = subgroups(g)
    assert subs[0].members == (0,)
    assert subs[-1].members == tuple(range(6))
    orders = [s.order for s in subs]
    assert orders == sorted(orders)


def test_s3_conjugacy_classes_of_subgroups():
    g = make_group(S3_SPEC)
    subs = subgroups(g)
    n_classes = len({s.class_id for s in subs})
    assert n_classes == 4
    order2 = [s for s in subs if s.order == 2]
    assert len(order2) == 3
    assert len({s.class_id for s in order2}) == 1


def test_conjugate_subgroup_preserves_class():
    g = make_group(S3_SPEC)
    subs = subgroups(g)
    h = [s for s in subs if s.order == 2][0]
    images = {conjugate_subgroup(g, h, x).members for x in range(g.order)}
    assert len(images) == 3
    for members in images:
        assert subgroup_from_members(g, members).class_id == h.class_id


def test_abelian_group_all_subgroups_normal():
    g = make_group({"kind": "cyclic", "n": 6})
    subs = subgroups(g)
    assert len({s.class_id for s in subs}) == len(subs)


def test_subgroup_as_group_is_a_group():
    g = make_group(S3_SPEC)
    h = [s for s in subgroups(g) if s.order == 3][0]
    hg, to_local = h.as_group()
    assert hg.order == 3
    assert to_local[0] == 0
    for a in h.members:
        for b in h.members:
            assert hg.table[to_local[a]][to_local[b]] == to_local[g.table[a][b]]


def test_bad_specs_rejected():
    with pytest.raises(ValidationError):
        make_group({"kind": "cyclic", "n": 65})
    with pytest.raises(ValidationError):
        make_group({"kind": "perm", "degree": 3, "generators": [[0, 0, 1]]})
    with pytest.raises(ValidationError):
        make_group({"kind": "nope"})
    with pytest.raises(ValidationError):
        # the full symmetric group on 5 letters has order 120 > 64
        make_group(
            {"kind": "perm", "degree": 5, "generators": [[1, 0, 2, 3, 4], [1, 2, 3, 4, 0]]}
        )


def test_order_cap_via_product():
    with pytest.raises(ValidationError):
        make_group({"kind": "product", "orders": [8, 9]})
