"""Finite groups as explicit multiplication tables.

Elements are integers 0..order-1 with 0 the identity.  The enumeration
order is deterministic: cyclic groups list powers of the generator,
products enumerate exponent tuples with the first factor most significant,
and permutation groups use breadth-first closure of the generator list.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ValidationError
from .tolerances import MAX_GROUP_ORDER, MAX_PERM_DEGREE


@dataclass(frozen=True)
class FiniteGroup:
    """A finite group given by its full multiplication table.

    table[g][h] is the product g*h.  ``generators`` are element indices
    and ``gen_words`` expresses every element as a left-to-right product
    of generators, which is what matrix representations are built from.
    """

    table: tuple[tuple[int, ...], ...]
    label: str
    kind: str
    factor_orders: tuple[int, ...] | None
    generators: tuple[int, ...]
    gen_words: tuple[tuple[int, ...], ...]
    perms: tuple[tuple[int, ...], ...] | None = None

    @property
    def order(self) -> int:
        return len(self.table)

    def mul(self, g: int, h: int) -> int:
        return self.table[g][h]

    @property
    def inverse(self) -> tuple[int, ...]:
        return _inverse_table(self.table)

    def inv(self, g: int) -> int:
        return self.inverse[g]

    def conjugate(self, g: int, h: int) -> int:
        """g * h * g^-1."""
        return self.table[self.table[g][h]][self.inv(g)]

    def element_order(self, g: int) -> int:
        k, x = 1, g
        while x != 0:
            x = self.table[x][g]
            k += 1
        return k

    @property
    def element_classes(self) -> tuple[tuple[int, ...], ...]:
        """Conjugacy classes of elements, each sorted, ordered by minimum."""
        return _element_classes(self.table)

    def __repr__(self) -> str:  # pragma: no cover
        return f"FiniteGroup({self.label}, order={self.order})"


@lru_cache(maxsize=None)
def _inverse_table(table: tuple[tuple[int, ...], ...]) -> tuple[int, ...]:
    n = len(table)
    inv = [0] * n
    for g in range(n):
        for h in range(n):
            if table[g][h] == 0:
                inv[g] = h
                break
        else:
            raise ValidationError(f"element {g} has no inverse")
    return tuple(inv)


@lru_cache(maxsize=None)
def _element_classes(table: tuple[tuple[int, ...], ...]) -> tuple[tuple[int, ...], ...]:
    n = len(table)
    inv = _inverse_table(table)
    seen = [False] * n
    classes = []
    for g in range(n):
        if seen[g]:
            continue
        orbit = sorted({table[table[a][g]][inv[a]] for a in range(n)})
        for x in orbit:
            seen[x] = True
        classes.append(tuple(orbit))
    return tuple(classes)


def _check_table(table) -> None:
    n = len(table)
    arr = np.asarray(table, dtype=np.int64)
    if arr.shape != (n, n):
        raise ValidationError("multiplication table is not square")
    if arr.min() < 0 or arr.max() >= n:
        raise ValidationError("table entry out of range")
    if not (np.array_equal(arr[0], np.arange(n)) and np.array_equal(arr[:, 0], np.arange(n))):
        raise ValidationError("element 0 is not a two-sided identity")
    for g in range(n):
        if len(set(arr[g])) != n or len(set(arr[:, g])) != n:
            raise ValidationError(f"row or column {g} is not a permutation")
    # associativity: (g*h)*k == g*(h*k) for all triples
    if not np.array_equal(arr[arr], arr[:, arr]):
        raise ValidationError("table is not associative")


def _compose(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
    """(p*q)(i) = p(q(i)): apply q first."""
    return tuple(p[q[i]] for i in range(len(p)))


def make_group(spec: dict) -> FiniteGroup:
    """Build a group from a spec dict.

    Kinds: {"kind": "cyclic", "n": 4}, {"kind": "product", "orders": [2, 2]},
    {"kind": "perm", "degree": 3, "generators": [[1, 0, 2], [1, 2, 0]]}
    with 0-indexed permutation images.
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValidationError("group spec must be a dict with a 'kind' key")
    kind = spec["kind"]

    if kind == "cyclic":
        n = spec.get("n")
        if not isinstance(n, int) or n < 1 or n > MAX_GROUP_ORDER:
            raise ValidationError(f"cyclic order must be an int in 1..{MAX_GROUP_ORDER}")
        table = tuple(tuple((i + j) % n for j in range(n)) for i in range(n))
        gens = (1,) if n > 1 else ()
        words = tuple(tuple([0] * i) for i in range(n))
        group = FiniteGroup(table, f"C{n}", "cyclic", (n,), gens, words)

    elif kind == "product":
        orders = spec.get("orders")
        if (
            not isinstance(orders, (list, tuple))
            or not orders
            or not all(isinstance(m, int) and m >= 1 for m in orders)
        ):
            raise ValidationError("product orders must be a nonempty list of positive ints")
        orders = tuple(orders)
        n = int(np.prod(orders))
        if n > MAX_GROUP_ORDER:
            raise ValidationError(f"group order {n} exceeds cap {MAX_GROUP_ORDER}")
        tuples = list(itertools.product(*[range(m) for m in orders]))
        index = {t: i for i, t in enumerate(tuples)}
        table = tuple(
            tuple(index[tuple((a + b) % m for a, b, m in zip(s, t, orders))] for t in tuples)
            for s in tuples
        )
        gens, words_by_elt = [], {}
        for j in range(len(orders)):
            unit = tuple(1 if k == j else 0 for k in range(len(orders)))
            gens.append(index[unit])
        for t in tuples:
            word = []
            for j, a in enumerate(t):
                word.extend([j] * a)
            words_by_elt[index[t]] = tuple(word)
        label = "x".join(f"C{m}" for m in orders)
        group = FiniteGroup(
            table, label, "product", orders, tuple(gens),
            tuple(words_by_elt[i] for i in range(n)),
        )

    elif kind == "perm":
        degree = spec.get("degree")
        raw_gens = spec.get("generators")
        if not isinstance(degree, int) or degree < 1 or degree > MAX_PERM_DEGREE:
            raise ValidationError(f"perm degree must be an int in 1..{MAX_PERM_DEGREE}")
        if not isinstance(raw_gens, (list, tuple)) or not raw_gens:
            raise ValidationError("perm spec needs a nonempty generator list")
        gen_perms = []
        for p in raw_gens:
            t = tuple(p)
            if sorted(t) != list(range(degree)):
                raise ValidationError(f"{p} is not a permutation of 0..{degree - 1}")
            gen_perms.append(t)
        identity = tuple(range(degree))
        elements = [identity]
        words = [()]
        index = {identity: 0}
        queue = [0]
        while queue:
            i = queue.pop(0)
            for j, p in enumerate(gen_perms):
                q = _compose(elements[i], p)
                if q not in index:
                    if len(elements) >= MAX_GROUP_ORDER:
                        raise ValidationError(f"group order exceeds cap {MAX_GROUP_ORDER}")
                    index[q] = len(elements)
                    elements.append(q)
                    words.append(words[i] + (j,))
                    queue.append(index[q])
        n = len(elements)
        if n > MAX_GROUP_ORDER:
            raise ValidationError(f"group order {n} exceeds cap {MAX_GROUP_ORDER}")
        table = tuple(
            tuple(index[_compose(elements[i], elements[j])] for j in range(n)) for i in range(n)
        )
        gens = tuple(index[p] for p in gen_perms)
        group = FiniteGroup(
            table, f"perm{degree}[{n}]", "perm", None, gens, tuple(words),
            perms=tuple(elements),
        )

    else:
        raise ValidationError(f"unknown group kind {kind!r}")

    _check_table(group.table)
    return group


@dataclass(frozen=True)
class Subgroup:
    """A subgroup as a sorted member tuple, tagged with its conjugacy class."""

    group: FiniteGroup
    members: tuple[int, ...]
    class_id: int

    @property
    def order(self) -> int:
        return len(self.members)

    def __contains__(self, g: int) -> bool:
        return g in set(self.members)

    def as_group(self, label: str | None = None) -> tuple[FiniteGroup, dict[int, int]]:
        """Relabel the subgroup as a standalone group.

        Returns the group together with the map from parent element index
        to subgroup element index.  Members are sorted, so the parent
        identity 0 maps to 0.
        """
        to_local = {m: i for i, m in enumerate(self.members)}
        table = tuple(
            tuple(to_local[self.group.table[a][b]] for b in self.members) for a in self.members
        )
        if label is None:
            label = f"{self.group.label}.sub{''.join(map(str, self.members))}"
        sub = _subgroup_as_group(table, label)
        return sub, to_local

    def __repr__(self) -> str:  # pragma: no cover
        return f"Subgroup({self.group.label}, members={self.members}, class={self.class_id})"


@lru_cache(maxsize=None)
def _subgroup_as_group(table: tuple[tuple[int, ...], ...], label: str) -> FiniteGroup:
    n = len(table)
    # Greedy generating sequence: smallest element outside the running closure.
    gens: list[int] = []
    closure = {0}
    while len(closure) < n:
        g = min(set(range(n)) - closure)
        gens.append(g)
        closure = _closure_set(table, closure | {g})
    # Words by BFS over right multiplication by generators.
    words: dict[int, tuple[int, ...]] = {0: ()}
    queue = [0]
    while queue:
        x = queue.pop(0)
        for j, g in enumerate(gens):
            y = table[x][g]
            if y not in words:
                words[y] = words[x] + (j,)
                queue.append(y)
    group = FiniteGroup(
        table, label, "table", None, tuple(gens), tuple(words[i] for i in range(n))
    )
    _check_table(group.table)
    return group


def _closure_set(table, seed: set[int]) -> set[int]:
    closure = set(seed) | {0}
    frontier = list(closure)
    while frontier:
        new = []
        for x in frontier:
            for y in list(closure):
                for z in (table[x][y], table[y][x]):
                    if z not in closure:
                        closure.add(z)
                        new.append(z)
        frontier = new
    return closure


@lru_cache(maxsize=None)
def _all_subgroup_sets(table: tuple[tuple[int, ...], ...]) -> tuple[tuple[int, ...], ...]:
    n = len(table)
    found: set[frozenset[int]] = {frozenset([0])}
    # Seed with cyclic subgroups, then saturate by adjoining single elements.
    for g in range(1, n):
        found.add(frozenset(_closure_set(table, {g})))
    grew = True
    while grew:
        grew = False
        for base in sorted(found, key=lambda s: (len(s), sorted(s))):
            if len(base) == n:
                continue
            for g in range(1, n):
                if g in base:
                    continue
                new = frozenset(_closure_set(table, set(base) | {g}))
                if new not in found:
                    found.add(new)
                    grew = True
    return tuple(sorted((tuple(sorted(s)) for s in found), key=lambda t: (len(t), t)))


def subgroups(group: FiniteGroup) -> tuple[Subgroup, ...]:
    """All subgroups, sorted by (order, member tuple), tagged by conjugacy class.

    Class ids are assigned in sorted order of each class's smallest member
    tuple, so they are deterministic.
    """
    sets = _all_subgroup_sets(group.table)
    inv = group.inverse
    member_to_pos = {members: i for i, members in enumerate(sets)}
    class_of = [-1] * len(sets)
    next_id = 0
    for i, members in enumerate(sets):
        if class_of[i] >= 0:
            continue
        for g in range(group.order):
            conj = tuple(sorted(group.table[group.table[g][m]][inv[g]] for m in members))
            class_of[member_to_pos[conj]] = next_id
        next_id += 1
    return tuple(
        Subgroup(group, members, class_of[i]) for i, members in enumerate(sets)
    )


def conjugate_subgroup(group: FiniteGroup, sub: Subgroup, g: int) -> Subgroup:
    """The subgroup g*H*g^-1, carrying the same conjugacy class id."""
    if sub.group is not group and sub.group.table != group.table:
        raise ValidationError("subgroup does not belong to this group")
    inv = group.inverse
    members = tuple(sorted(group.table[group.table[g][m]][inv[g]] for m in sub.members))
    return Subgroup(group, members, sub.class_id)


def subgroup_from_members(group: FiniteGroup, members) -> Subgroup:
    """Look up the subgroup with the given member set (must be closed)."""
    target = tuple(sorted(set(members)))
    for sub in subgroups(group):
        if sub.members == target:
            return sub
    raise ValidationError(f"{target} is not a subgroup")
