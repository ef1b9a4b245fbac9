"""Unitary representations of finite groups and their isotypic structure.

Downstream modules read group actions exclusively through this module:
fixed subspaces cut out strata, isotypic multiplicities label them, and
the label algebra (types, stabilization, abstract matching) decides
which strata aggregate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NumericalError, ValidationError
from .groups import FiniteGroup, Subgroup, subgroup_from_members
from .tolerances import (
    EQUIV_TOL,
    INT_TOL,
    MAX_ISO_SEARCH_ORDER,
    MAX_REP_DIM,
    REP_SEED,
    STAB_RADIUS_REL,
    STRUCT_TOL,
)

__all__ = [
    "UnitaryRep",
    "make_rep",
    "direct_sum",
    "subrep",
    "fixed_subspace",
    "moving_subspace",
    "isotropy_group",
    "CharacterTable",
    "character_table",
    "restrict_rep",
    "multiplicities",
    "isotypic_basis",
    "IsotropyType",
    "StabilizedIsotropyType",
    "stabilize_type",
    "types_equal",
]


class UnitaryRep:
    """A unitary representation, stored as one matrix per group element.

    Zero-dimensional representations are legal (matrices of shape
    (|G|, 0, 0)); several constructions produce them for trivial moving
    parts and everything here must cope.
    """

    def __init__(self, group: FiniteGroup, matrices, label: str = "V"):
        mats = np.asarray(matrices, dtype=np.complex128)
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise ValidationError("matrices must have shape (|G|, d, d)")
        if mats.shape[0] != group.order:
            raise ValidationError(
                f"got {mats.shape[0]} matrices for a group of order {group.order}"
            )
        self.group = group
        self.matrices = mats
        self.label = label
        self._check()

    def _check(self) -> None:
        n, d = self.group.order, self.dim
        if d == 0:
            return
        eye = np.eye(d)
        if np.max(np.abs(self.matrices[0] - eye)) > STRUCT_TOL:
            raise ValidationError("matrix at the identity element is not the identity")
        gram = self.matrices.conj().transpose(0, 2, 1) @ self.matrices
        if np.max(np.abs(gram - eye)) > STRUCT_TOL:
            raise ValidationError("matrices are not unitary")
        table = np.asarray(self.group.table)
        prod = self.matrices[:, None] @ self.matrices[None, :]
        if np.max(np.abs(prod - self.matrices[table])) > STRUCT_TOL:
            raise ValidationError("matrices do not multiply like the group")

    @property
    def dim(self) -> int:
        return int(self.matrices.shape[1])

    def character(self) -> np.ndarray:
        if self.dim == 0:
            return np.zeros(self.group.order, dtype=np.complex128)
        return np.einsum("gii->g", self.matrices)

    def act(self, g: int, v: np.ndarray) -> np.ndarray:
        return self.matrices[g] @ np.asarray(v, dtype=np.complex128)

    def __repr__(self) -> str:
        return f"UnitaryRep({self.label!r}, dim={self.dim}, order={self.group.order})"


def _factor_digits(g: int, orders) -> tuple[int, ...]:
    # First factor most significant, matching the product group tables.
    digits = []
    rest = g
    for radix in reversed(orders):
        rest, d = divmod(rest, radix)
        digits.append(d)
    return tuple(reversed(digits))


def make_rep(group: FiniteGroup, spec: dict) -> UnitaryRep:
    """Build a representation from a declarative spec.

    Kinds: ``trivial`` (identity action, ``dim`` coordinates),
    ``weights`` (diagonal action of a cyclic or product group; one
    integer per coordinate, or one tuple per coordinate with an entry
    per factor), ``permutation`` (coordinate shuffle of a permutation
    group), ``matrices`` (one matrix per group generator; made unitary
    by averaging if needed).
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValidationError("rep spec must be a dict with a 'kind' key")
    kind = spec["kind"]
    label = spec.get("label", "V")
    if kind == "trivial":
        dim = spec.get("dim", 1)
        if not isinstance(dim, int) or dim < 0 or dim > MAX_REP_DIM:
            raise ValidationError(f"trivial rep dim must be in 0..{MAX_REP_DIM}")
        mats = np.broadcast_to(np.eye(dim), (group.order, dim, dim)).copy()
        return UnitaryRep(group, mats, label)
    if kind == "weights":
        if group.kind == "cyclic":
            orders = (group.order,)
        elif group.kind == "product":
            orders = group.factor_orders
        else:
            raise ValidationError("weight reps need a cyclic or product group")
        raw = spec.get("weights")
        if raw is None or len(raw) == 0:
            raise ValidationError("weights must be a nonempty list")
        if len(raw) > MAX_REP_DIM:
            raise ValidationError(f"rep dimension exceeds cap {MAX_REP_DIM}")
        weights = []
        for w in raw:
            if isinstance(w, int):
                w = (w,)
            elif not isinstance(w, (tuple, list)):
                raise ValidationError(f"weight {w!r} is not an integer or tuple")
            w = tuple(w)
            if len(w) != len(orders) or not all(isinstance(k, int) for k in w):
                raise ValidationError(
                    f"each weight needs one integer per cyclic factor, got {w!r}"
                )
            weights.append(w)
        dim = len(weights)
        mats = np.zeros((group.order, dim, dim), dtype=np.complex128)
        for g in range(group.order):
            digits = _factor_digits(g, orders)
            for j, w in enumerate(weights):
                ang = sum(k * dg / o for k, dg, o in zip(w, digits, orders))
                mats[g, j, j] = np.exp(2j * np.pi * ang)
        return UnitaryRep(group, mats, label)
    if kind == "permutation":
        if group.perms is None:
            raise ValidationError("permutation reps need a permutation group")
        deg = len(group.perms[0])
        if deg > MAX_REP_DIM:
            raise ValidationError(f"rep dimension exceeds cap {MAX_REP_DIM}")
        mats = np.zeros((group.order, deg, deg), dtype=np.complex128)
        for g, perm in enumerate(group.perms):
            for i, pi in enumerate(perm):
                mats[g, pi, i] = 1.0
        return UnitaryRep(group, mats, label)
    if kind == "matrices":
        gens = spec.get("generators")
        if gens is None or len(gens) != len(group.generators):
            raise ValidationError(
                f"need one matrix per group generator ({len(group.generators)})"
            )
        gens = [np.asarray(m, dtype=np.complex128) for m in gens]
        dim = gens[0].shape[0] if gens else 1
        if any(m.shape != (dim, dim) for m in gens):
            raise ValidationError("generator matrices must be square and same size")
        if dim > MAX_REP_DIM:
            raise ValidationError(f"rep dimension exceeds cap {MAX_REP_DIM}")
        mats = np.zeros((group.order, dim, dim), dtype=np.complex128)
        for e in range(group.order):
            m = np.eye(dim, dtype=np.complex128)
            for idx in group.gen_words[e]:
                m = m @ gens[idx]
            mats[e] = m
        # Average to an invariant inner product, then change basis so the
        # matrices become unitary in the standard one.
        avg = np.mean(mats.conj().transpose(0, 2, 1) @ mats, axis=0)
        lo = np.linalg.cholesky(avg)
        lh = lo.conj().T
        lh_inv = np.linalg.inv(lh)
        mats = lh[None] @ mats @ lh_inv[None]
        return UnitaryRep(group, mats, label)
    raise ValidationError(f"unknown rep kind {kind!r}")


def direct_sum(*reps: UnitaryRep, label: str | None = None) -> UnitaryRep:
    if not reps:
        raise ValidationError("direct_sum of nothing")
    group = reps[0].group
    for r in reps[1:]:
        if r.group.table != group.table:
            raise ValidationError("direct_sum needs reps of the same group")
    dim = sum(r.dim for r in reps)
    mats = np.zeros((group.order, dim, dim), dtype=np.complex128)
    at = 0
    for r in reps:
        mats[:, at : at + r.dim, at : at + r.dim] = r.matrices
        at += r.dim
    return UnitaryRep(group, mats, label or "+".join(r.label for r in reps))


def subrep(rep: UnitaryRep, basis: np.ndarray, label: str | None = None) -> UnitaryRep:
    """Representation on an invariant subspace, in the coordinates of an
    orthonormal column basis."""
    q = np.asarray(basis, dtype=np.complex128)
    if q.ndim != 2 or q.shape[0] != rep.dim:
        raise ValidationError(f"basis must be ({rep.dim}, k)")
    k = q.shape[1]
    if k and np.max(np.abs(q.conj().T @ q - np.eye(k))) > STRUCT_TOL:
        raise ValidationError("basis columns are not orthonormal")
    small = q.conj().T[None] @ rep.matrices @ q[None]
    if k:
        back = rep.matrices @ q[None]
        if np.max(np.abs(back - q[None] @ small)) > EQUIV_TOL:
            raise ValidationError("basis does not span an invariant subspace")
    return UnitaryRep(rep.group, small, label or rep.label + "|sub")


def fixed_subspace(rep: UnitaryRep) -> np.ndarray:
    """Orthonormal columns spanning the subspace fixed by every element."""
    if rep.dim == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    proj = rep.matrices.mean(axis=0)
    evals, vecs = np.linalg.eigh((proj + proj.conj().T) / 2)
    cols = vecs[:, evals > 0.5]
    if cols.shape[1]:
        moved = rep.matrices @ cols[None] - cols[None]
        if np.max(np.abs(moved)) > EQUIV_TOL:
            raise NumericalError("fixed-subspace basis fails the fixedness check")
    return cols


def moving_subspace(rep: UnitaryRep) -> np.ndarray:
    """Orthonormal columns spanning the invariant complement of the fixed
    subspace."""
    if rep.dim == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    proj = rep.matrices.mean(axis=0)
    evals, vecs = np.linalg.eigh((proj + proj.conj().T) / 2)
    return vecs[:, evals <= 0.5]


def isotropy_group(rep: UnitaryRep, v) -> Subgroup:
    """The subgroup fixing the point v, decided at a fixed relative radius.

    Points within the ambiguity band (moved by more than the radius but
    by less than ten times it) make the answer unreliable; that is
    reported as a numerical error rather than guessed.
    """
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    if v.shape[0] != rep.dim:
        raise ValidationError(f"point has dim {v.shape[0]}, rep has dim {rep.dim}")
    if rep.dim == 0:
        return subgroup_from_members(rep.group, range(rep.group.order))
    radius = STAB_RADIUS_REL * max(1.0, float(np.max(np.abs(v))))
    moved = np.max(np.abs(rep.matrices @ v - v[None]), axis=1)
    near = (moved > radius) & (moved <= 10 * radius)
    if near.any():
        raise NumericalError(
            f"isotropy of {v} is ambiguous: elements {np.nonzero(near)[0].tolist()} "
            f"move it by within ten times the decision radius {radius:.3e}"
        )
    members = [int(g) for g in np.nonzero(moved <= radius)[0]]
    try:
        return subgroup_from_members(rep.group, members)
    except ValidationError as exc:
        raise NumericalError(f"fixing elements of {v} do not close up: {exc}") from exc


@dataclass(frozen=True)
class CharacterTable:
    """Irreducible characters of a finite group, trivial row first, the
    rest sorted by (dimension, rounded values)."""

    group: FiniteGroup
    rows: tuple[tuple[complex, ...], ...]
    dims: tuple[int, ...]

    @property
    def array(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.complex128)

    def __len__(self) -> int:
        return len(self.rows)

    def multiplicities(self, rep_or_character) -> tuple[int, ...]:
        """How often each irreducible appears, by character inner product."""
        if isinstance(rep_or_character, UnitaryRep):
            if rep_or_character.group.table != self.group.table:
                raise ValidationError("rep belongs to a different group")
            chi = rep_or_character.character()
        else:
            chi = np.asarray(rep_or_character, dtype=np.complex128)
            if chi.shape != (self.group.order,):
                raise ValidationError("character has the wrong length")
        raw = self.array.conj() @ chi / self.group.order
        out = []
        for i, m in enumerate(raw):
            r = round(m.real)
            if abs(m - r) > INT_TOL or r < 0:
                raise NumericalError(
                    f"multiplicity of irreducible {i} is {m}, not a nonnegative integer"
                )
            out.append(int(r))
        return tuple(out)


def _regular_matrices(table) -> np.ndarray:
    n = len(table)
    mats = np.zeros((n, n, n), dtype=np.complex128)
    for g in range(n):
        for k in range(n):
            mats[g, table[g][k], k] = 1.0
    return mats


_EIG_GAP = 1e-6


@lru_cache(maxsize=None)
def _character_rows(table: tuple[tuple[int, ...], ...]):
    """Irreducible characters via a random commutant element of the
    regular representation: its eigenspaces are irreducible subreps, one
    per eigenvalue, repeated dim-many times per isotypic block."""
    n = len(table)
    reg = _regular_matrices(table)
    rng = np.random.Generator(np.random.Philox(key=REP_SEED))
    last_err = "no attempt"
    for _ in range(5):
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        herm = (a + a.conj().T) / 2
        comm = np.mean(reg @ herm[None] @ reg.transpose(0, 2, 1), axis=0)
        evals, vecs = np.linalg.eigh((comm + comm.conj().T) / 2)
        clusters: list[list[int]] = [[0]]
        for i in range(1, n):
            if evals[i] - evals[i - 1] > _EIG_GAP:
                clusters.append([])
            clusters[-1].append(i)
        seen: dict[tuple, tuple[int, tuple[complex, ...]]] = {}
        ok = True
        for idx in clusters:
            q = vecs[:, idx]
            chi = np.einsum("ji,gjk,ki->g", q.conj(), reg, q)
            key = tuple(
                (round(float(c.real), 6), round(float(c.imag), 6)) for c in chi
            )
            seen.setdefault(key, (len(idx), tuple(complex(c) for c in chi)))
        dims = [d for d, _ in seen.values()]
        if sum(d * d for d in dims) != n:
            last_err = f"dimension check failed: {sorted(dims)}"
            continue
        chars = np.array([c for _, c in seen.values()], dtype=np.complex128)
        gram = chars @ chars.conj().T / n
        if np.max(np.abs(gram - np.eye(len(chars)))) > EQUIV_TOL:
            last_err = "characters are not orthonormal"
            continue
        for d, c in seen.values():
            if abs(c[0] - d) > EQUIV_TOL:
                ok = False
                last_err = "character at identity disagrees with eigenspace size"
                break
        if not ok:
            continue
        rows = [tuple(c) for _, c in seen.values()]
        trivial = [r for r in rows if max(abs(c - 1) for c in r) < 1e-6]
        if len(trivial) != 1:
            last_err = "trivial character not found exactly once"
            continue
        rest = [r for r in rows if r is not trivial[0]]
        rest.sort(
            key=lambda r: (
                round(r[0].real),
                tuple((round(c.real, 6), round(c.imag, 6)) for c in r),
            )
        )
        ordered = [trivial[0]] + rest
        dims_out = tuple(int(round(r[0].real)) for r in ordered)
        return tuple(ordered), dims_out
    raise NumericalError(f"character table did not stabilize: {last_err}")


def character_table(group: FiniteGroup) -> CharacterTable:
    rows, dims = _character_rows(group.table)
    return CharacterTable(group, rows, dims)


def restrict_rep(rep: UnitaryRep, sub: Subgroup) -> UnitaryRep:
    """The same matrices, reindexed by the subgroup's own element labels."""
    if sub.group.table != rep.group.table:
        raise ValidationError("subgroup belongs to a different group")
    local, _ = sub.as_group()
    mats = rep.matrices[list(sub.members)]
    return UnitaryRep(local, mats, rep.label + "|H")


def multiplicities(rep: UnitaryRep) -> tuple[int, ...]:
    return character_table(rep.group).multiplicities(rep)


def isotypic_basis(rep: UnitaryRep) -> list[np.ndarray]:
    """Orthonormal bases of the isotypic components, one per irreducible
    (possibly with zero columns), in character-table order."""
    ct = character_table(rep.group)
    mults = ct.multiplicities(rep)
    n = rep.group.order
    out = []
    for i, row in enumerate(ct.rows):
        want = ct.dims[i] * mults[i]
        if rep.dim == 0 or want == 0:
            out.append(np.zeros((rep.dim, 0), dtype=np.complex128))
            continue
        coeff = np.conj(row)
        proj = (
            ct.dims[i]
            / n
            * np.einsum("g,gjk->jk", np.asarray(coeff), rep.matrices)
        )
        evals, vecs = np.linalg.eigh((proj + proj.conj().T) / 2)
        cols = vecs[:, evals > 0.5]
        if cols.shape[1] != want:
            raise NumericalError(
                f"isotypic component {i} has rank {cols.shape[1]}, expected {want}"
            )
        out.append(cols)
    return out


@dataclass(frozen=True)
class IsotropyType:
    """Stabilizer of a stratum plus how it moves the non-fixed directions
    of source and target, as multiplicity vectors over its irreducibles."""

    local_group: FiniteGroup
    subgroup_class: int
    v_mults: tuple[int, ...]
    w_mults: tuple[int, ...]


@dataclass(frozen=True)
class StabilizedIsotropyType:
    """What survives stabilization: the stabilizer and the virtual
    difference of moving multiplicities."""

    local_group: FiniteGroup
    diff: tuple[int, ...]


def stabilize_type(t: IsotropyType) -> StabilizedIsotropyType:
    if len(t.v_mults) != len(t.w_mults):
        raise ValidationError("multiplicity vectors have different lengths")
    diff = tuple(a - b for a, b in zip(t.v_mults, t.w_mults))
    return StabilizedIsotropyType(t.local_group, diff)


def _generating_sequence(table) -> list[int]:
    n = len(table)
    gens: list[int] = []
    closure = {0}
    while len(closure) < n:
        nxt = min(g for g in range(n) if g not in closure)
        gens.append(nxt)
        frontier = [nxt]
        closure.add(nxt)
        while frontier:
            new = []
            for x in frontier:
                for y in list(closure):
                    for z in (table[x][y], table[y][x]):
                        if z not in closure:
                            closure.add(z)
                            new.append(z)
            frontier = new
    return gens


def _element_words(table, gens) -> list[tuple[int, ...]]:
    n = len(table)
    words: dict[int, tuple[int, ...]] = {0: ()}
    frontier = [0]
    while frontier:
        new = []
        for x in frontier:
            for i, g in enumerate(gens):
                y = table[x][g]
                if y not in words:
                    words[y] = words[x] + (i,)
                    new.append(y)
        frontier = new
    if len(words) != n:
        raise NumericalError("generating sequence does not generate")
    return [words[e] for e in range(n)]


def _element_orders(table) -> list[int]:
    n = len(table)
    orders = []
    for g in range(n):
        k, x = 1, g
        while x != 0:
            x = table[x][g]
            k += 1
        orders.append(k)
    return orders


def isomorphisms(g1: FiniteGroup, g2: FiniteGroup):
    """Yield every isomorphism g1 -> g2 as a tuple of images.

    Brute force over generator images with element-order pruning; only
    meant for the small stabilizers this package works with.
    """
    t1, t2 = g1.table, g2.table
    n = len(t1)
    if len(t2) != n:
        return
    if n > MAX_ISO_SEARCH_ORDER:
        raise ValidationError(
            f"isomorphism search capped at order {MAX_ISO_SEARCH_ORDER}, got {n}"
        )
    ord1, ord2 = _element_orders(t1), _element_orders(t2)
    if sorted(ord1) != sorted(ord2):
        return
    gens = _generating_sequence(t1)
    words = _element_words(t1, gens)
    pools = [[h for h in range(n) if ord2[h] == ord1[g]] for g in gens]
    for images in itertools.product(*pools):
        phi = []
        for e in range(n):
            x = 0
            for i in words[e]:
                x = t2[x][images[i]]
            phi.append(x)
        if len(set(phi)) != n:
            continue
        if all(
            phi[t1[a][b]] == t2[phi[a]][phi[b]] for a in range(n) for b in range(n)
        ):
            yield tuple(phi)


def _induced_row_map(ct1: CharacterTable, ct2: CharacterTable, phi) -> list[int] | None:
    """For an isomorphism phi: G1 -> G2, the permutation sending each row
    of ct2 to the row of ct1 it pulls back to, or None if any row fails
    to match."""
    a1 = ct1.array
    a2 = ct2.array
    pulled = a2[:, list(phi)]
    out = []
    for row in pulled:
        hits = np.nonzero(np.max(np.abs(a1 - row[None, :]), axis=1) < 1e-6)[0]
        if len(hits) != 1:
            return None
        out.append(int(hits[0]))
    return out


def types_equal(a: StabilizedIsotropyType, b: StabilizedIsotropyType) -> bool:
    """Whether two stabilized types match under some identification of
    their stabilizers."""
    if a.local_group.order != b.local_group.order:
        return False
    ct_a = character_table(a.local_group)
    ct_b = character_table(b.local_group)
    if len(ct_a) != len(ct_b) or ct_a.dims != ct_b.dims:
        return False
    if sorted(a.diff) != sorted(b.diff):
        return False
    for phi in isomorphisms(a.local_group, b.local_group):
        rowmap = _induced_row_map(ct_a, ct_b, phi)
        if rowmap is None:
            continue
        if all(a.diff[rowmap[j]] == b.diff[j] for j in range(len(ct_b))):
            return True
    return False
