"""Polynomial maps between representations and their equivariant algebra.

A PolyMap is a dense coefficient array over a graded-lex monomial basis.
On top of that sit the pieces the counting pipeline needs: dimension
counts for equivariant map spaces (by character averaging, used as the
cross-check for every basis built here), explicit equivariant bases (by
group averaging), orbit interpolation, module generators over the
invariant ring, degree reduction that preserves evaluation at a marked
point, and the two directions of the change-of-groups construction.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from .errors import NumericalError, ValidationError
from .groups import Subgroup
from .reps import (
    UnitaryRep,
    fixed_subspace,
    isotropy_group,
    make_rep,
    moving_subspace,
    restrict_rep,
    subrep,
)
from .tolerances import (
    EQUIV_TOL,
    EXACT_TOL,
    INT_TOL,
    INTERP_TOL,
    MAX_BASIS_DEGREE,
    MAX_BASIS_VARS,
    PIVOT_TOL,
    PROJ_SEP,
    REP_SEED,
    SPAN_TOL,
)

__all__ = [
    "monomials",
    "PolyMap",
    "equivariant_dimension",
    "poly_dimension",
    "equivariant_basis",
    "invariant_scalar_basis",
    "check_equivariance",
    "lagrange_selector",
    "interpolate",
    "module_generators",
    "degree_reduce",
    "restrict_theta",
    "extend_theta",
]


@lru_cache(maxsize=None)
def monomials(nvars: int, degree: int) -> tuple[tuple[int, ...], ...]:
    """Exponent tuples of total degree <= degree, graded lex: by total
    degree first, then lexicographically on the tuple."""
    if nvars < 0 or degree < 0:
        raise ValidationError("nvars and degree must be nonnegative")
    out = []
    for d in range(degree + 1):
        level = [
            e
            for e in itertools.product(range(d + 1), repeat=nvars)
            if sum(e) == d
        ]
        level.sort()
        out.extend(level)
    if nvars == 0:
        out = [()]
    return tuple(out)


@lru_cache(maxsize=None)
def _monomial_index(nvars: int, degree: int) -> dict[tuple[int, ...], int]:
    return {e: i for i, e in enumerate(monomials(nvars, degree))}


def _dict_mul(a: dict, b: dict) -> dict:
    out: dict[tuple[int, ...], complex] = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            key = tuple(x + y for x, y in zip(ea, eb))
            out[key] = out.get(key, 0.0 + 0.0j) + ca * cb
    return out


def _dict_pow(base: dict, p: int, nvars: int) -> dict:
    out = {(0,) * nvars: 1.0 + 0.0j}
    for _ in range(p):
        out = _dict_mul(out, base)
    return out


class PolyMap:
    """A polynomial map C^nvars -> C^dimw of total degree <= degree.

    Coefficients live in a (len(monomials), dimw) complex array; the row
    order is the graded-lex order of ``monomials(nvars, degree)``.
    """

    def __init__(self, nvars: int, degree: int, coeffs, label: str = "P"):
        if nvars < 0 or degree < 0:
            raise ValidationError("nvars and degree must be nonnegative")
        want = len(monomials(nvars, degree))
        c = np.asarray(coeffs, dtype=np.complex128)
        if c.ndim != 2 or c.shape[0] != want:
            raise ValidationError(
                f"coefficients must be ({want}, dimw) for nvars={nvars}, degree={degree}"
            )
        self.nvars = nvars
        self.degree = degree
        self.coeffs = c
        self.label = label

    @classmethod
    def zero(cls, nvars: int, degree: int, dimw: int) -> "PolyMap":
        return cls(nvars, degree, np.zeros((len(monomials(nvars, degree)), dimw)))

    @classmethod
    def from_terms(cls, nvars: int, degree: int, dimw: int, terms) -> "PolyMap":
        """terms: iterable of (exponent_tuple, target_coordinate, coefficient)."""
        idx = _monomial_index(nvars, degree)
        c = np.zeros((len(monomials(nvars, degree)), dimw), dtype=np.complex128)
        for exps, j, coef in terms:
            key = tuple(int(e) for e in exps)
            if key not in idx:
                raise ValidationError(f"monomial {key} exceeds degree {degree}")
            if not 0 <= j < dimw:
                raise ValidationError(f"target coordinate {j} out of range")
            c[idx[key], j] += complex(coef)
        return cls(nvars, degree, c)

    @property
    def dimw(self) -> int:
        return int(self.coeffs.shape[1])

    @property
    def exponents(self) -> tuple[tuple[int, ...], ...]:
        return monomials(self.nvars, self.degree)

    def actual_degree(self) -> int:
        degs = [sum(e) for e in self.exponents]
        nz = np.nonzero(np.max(np.abs(self.coeffs), axis=1))[0]
        return max((degs[i] for i in nz), default=0)

    def coeff_norm(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def evaluate(self, x) -> np.ndarray:
        """Evaluate at one point (nvars,) or a batch (m, nvars)."""
        x = np.asarray(x, dtype=np.complex128)
        single = x.ndim == 1
        pts = x[None, :] if single else x
        if pts.shape[1] != self.nvars:
            raise ValidationError(f"points must have {self.nvars} coordinates")
        vals = self._monomial_values(pts) @ self.coeffs
        return vals[0] if single else vals

    def _monomial_values(self, pts: np.ndarray) -> np.ndarray:
        m = pts.shape[0]
        exps = np.array(self.exponents, dtype=np.int64).reshape(len(self.exponents), self.nvars)
        pw = np.ones((m, self.nvars, self.degree + 1), dtype=np.complex128)
        for p in range(1, self.degree + 1):
            pw[:, :, p] = pw[:, :, p - 1] * pts
        vals = np.ones((m, exps.shape[0]), dtype=np.complex128)
        for j in range(self.nvars):
            vals = vals * pw[:, j, exps[:, j]]
        return vals

    def jacobian(self, x) -> np.ndarray:
        """Complex Jacobian (dimw, nvars) at a point."""
        x = np.asarray(x, dtype=np.complex128).reshape(-1)
        jac = np.zeros((self.dimw, self.nvars), dtype=np.complex128)
        exps = np.array(self.exponents, dtype=np.int64).reshape(len(self.exponents), self.nvars)
        pw = np.ones((self.nvars, self.degree + 1), dtype=np.complex128)
        for p in range(1, self.degree + 1):
            pw[:, p] = pw[:, p - 1] * x
        for j in range(self.nvars):
            e = exps[:, j]
            mask = e > 0
            if not mask.any():
                continue
            term = e[mask].astype(np.complex128) * pw[j, e[mask] - 1]
            for k in range(self.nvars):
                if k == j:
                    continue
                term = term * pw[k, exps[mask, k]]
            jac[:, j] = term @ self.coeffs[mask]
        return jac

    def homogeneous_part(self, k: int) -> "PolyMap":
        keep = np.array([sum(e) == k for e in self.exponents])
        c = np.where(keep[:, None], self.coeffs, 0)
        return PolyMap(self.nvars, self.degree, c, self.label)

    def with_degree(self, degree: int) -> "PolyMap":
        """Same map over a different degree cap; refuses to drop terms."""
        if degree == self.degree:
            return self
        idx = _monomial_index(self.nvars, degree)
        c = np.zeros((len(monomials(self.nvars, degree)), self.dimw), dtype=np.complex128)
        for i, e in enumerate(self.exponents):
            if not np.any(self.coeffs[i]):
                continue
            if e not in idx:
                raise ValidationError(
                    f"term {e} does not fit under degree {degree}"
                )
            c[idx[e]] = self.coeffs[i]
        return PolyMap(self.nvars, degree, c, self.label)

    def __add__(self, other: "PolyMap") -> "PolyMap":
        a, b = _align(self, other)
        return PolyMap(a.nvars, a.degree, a.coeffs + b.coeffs, self.label)

    def __sub__(self, other: "PolyMap") -> "PolyMap":
        a, b = _align(self, other)
        return PolyMap(a.nvars, a.degree, a.coeffs - b.coeffs, self.label)

    def __mul__(self, scalar) -> "PolyMap":
        return PolyMap(self.nvars, self.degree, self.coeffs * complex(scalar), self.label)

    __rmul__ = __mul__

    def post_compose(self, mat) -> "PolyMap":
        """B . P for a (k, dimw) matrix B."""
        b = np.asarray(mat, dtype=np.complex128)
        if b.ndim != 2 or b.shape[1] != self.dimw:
            raise ValidationError(f"matrix must be (k, {self.dimw})")
        return PolyMap(self.nvars, self.degree, self.coeffs @ b.T, self.label)

    def substitute_affine(self, const, lin) -> "PolyMap":
        """P(const + lin @ u) as a map of the new variables u.

        ``const`` is a (nvars,) vector, ``lin`` a (nvars, m) matrix; the
        result has m variables and the same degree cap.
        """
        const = np.asarray(const, dtype=np.complex128).reshape(-1)
        lin = np.asarray(lin, dtype=np.complex128)
        if lin.ndim != 2 or lin.shape[0] != self.nvars or const.shape[0] != self.nvars:
            raise ValidationError("need const (nvars,) and lin (nvars, m)")
        m = lin.shape[1]
        zero_m = (0,) * m
        var_dicts = []
        for j in range(self.nvars):
            d: dict[tuple[int, ...], complex] = {}
            if const[j] != 0:
                d[zero_m] = complex(const[j])
            for k in range(m):
                if lin[j, k] != 0:
                    key = tuple(1 if i == k else 0 for i in range(m))
                    d[key] = d.get(key, 0.0 + 0.0j) + complex(lin[j, k])
            var_dicts.append(d)
        pow_cache: list[dict[int, dict]] = [dict() for _ in range(self.nvars)]

        def vpow(j: int, p: int) -> dict:
            if p not in pow_cache[j]:
                pow_cache[j][p] = _dict_pow(var_dicts[j], p, m)
            return pow_cache[j][p]

        idx = _monomial_index(m, self.degree)
        out = np.zeros((len(monomials(m, self.degree)), self.dimw), dtype=np.complex128)
        for i, e in enumerate(self.exponents):
            row = self.coeffs[i]
            if not np.any(row):
                continue
            term = {zero_m: 1.0 + 0.0j}
            for j, p in enumerate(e):
                if p:
                    term = _dict_mul(term, vpow(j, p))
            for key, c in term.items():
                if c != 0:
                    out[idx[key]] += c * row
        return PolyMap(m, self.degree, out, self.label)

    def substitute_linear(self, lin) -> "PolyMap":
        lin = np.asarray(lin, dtype=np.complex128)
        return self.substitute_affine(np.zeros(lin.shape[0]), lin)

    def scalar_product(self, other: "PolyMap") -> "PolyMap":
        """Product with a scalar-valued PolyMap (dimw == 1); degrees add."""
        if other.dimw != 1:
            raise ValidationError("scalar_product needs a scalar-valued map")
        if other.nvars != self.nvars:
            raise ValidationError("variable counts differ")
        deg = self.degree + other.degree
        idx = _monomial_index(self.nvars, deg)
        out = np.zeros((len(monomials(self.nvars, deg)), self.dimw), dtype=np.complex128)
        for i, ei in enumerate(other.exponents):
            s = other.coeffs[i, 0]
            if s == 0:
                continue
            for k, ek in enumerate(self.exponents):
                row = self.coeffs[k]
                if not np.any(row):
                    continue
                key = tuple(a + b for a, b in zip(ei, ek))
                out[idx[key]] += s * row
        return PolyMap(self.nvars, deg, out, self.label)

    def to_terms(self, j: int) -> list[tuple[tuple[int, ...], complex]]:
        """Sparse terms of target coordinate j, for the path solver."""
        out = []
        for i, e in enumerate(self.exponents):
            c = self.coeffs[i, j]
            if c != 0:
                out.append((e, complex(c)))
        return out

    def allclose(self, other: "PolyMap", tol: float = EXACT_TOL) -> bool:
        a, b = _align(self, other)
        return bool(np.max(np.abs(a.coeffs - b.coeffs)) <= tol) if a.coeffs.size else True

    def __repr__(self) -> str:
        return (
            f"PolyMap({self.label!r}, nvars={self.nvars}, degree={self.degree}, "
            f"dimw={self.dimw})"
        )


def _align(a: PolyMap, b: PolyMap) -> tuple[PolyMap, PolyMap]:
    if a.nvars != b.nvars or a.dimw != b.dimw:
        raise ValidationError("maps have different shapes")
    deg = max(a.degree, b.degree)
    return a.with_degree(deg), b.with_degree(deg)


def equivariant_dimension(rep_v: UnitaryRep, rep_w: UnitaryRep, degree: int) -> int:
    """Dimension of the space of equivariant homogeneous maps of the
    given degree, by character averaging.

    Serves as the independent count every explicitly constructed basis is
    checked against.
    """
    if rep_v.group.table != rep_w.group.table:
        raise ValidationError("source and target reps have different groups")
    n = rep_v.group.order
    total = 0.0 + 0.0j
    chi_w = rep_w.character()
    for g in range(n):
        if rep_v.dim:
            lam = np.conj(np.linalg.eigvals(rep_v.matrices[g]))
        else:
            lam = np.zeros(0, dtype=np.complex128)
        # Complete homogeneous sums via the power-sum recurrence.
        h = np.zeros(degree + 1, dtype=np.complex128)
        h[0] = 1.0
        p = [np.sum(lam**j) for j in range(degree + 1)]
        for k in range(1, degree + 1):
            h[k] = sum(h[k - j] * p[j] for j in range(1, k + 1)) / k
        total += h[degree] * chi_w[g]
    val = total / n
    r = round(val.real)
    if abs(val - r) > INT_TOL or r < 0:
        raise NumericalError(f"equivariant dimension came out as {val}, not an integer")
    return int(r)


def poly_dimension(rep_v: UnitaryRep, rep_w: UnitaryRep, degree: int) -> int:
    """Dimension of the space of equivariant maps of total degree <= degree."""
    return sum(equivariant_dimension(rep_v, rep_w, k) for k in range(degree + 1))


def _substitution_columns(rep_v: UnitaryRep, g: int, degree: int) -> dict:
    """For group element g, the expansion of each monomial composed with
    the action matrix, as {monomial_index: dict of new terms}."""
    mats = rep_v.matrices[g]
    nv = rep_v.dim
    lin = [
        {
            tuple(1 if i == k else 0 for i in range(nv)): complex(mats[j, k])
            for k in range(nv)
            if mats[j, k] != 0
        }
        for j in range(nv)
    ]
    pow_cache: list[dict[int, dict]] = [dict() for _ in range(nv)]

    def vpow(j, p):
        if p not in pow_cache[j]:
            pow_cache[j][p] = _dict_pow(lin[j], p, nv)
        return pow_cache[j][p]

    cols = {}
    for i, e in enumerate(monomials(nv, degree)):
        term = {(0,) * nv: 1.0 + 0.0j}
        for j, p in enumerate(e):
            if p:
                term = _dict_mul(term, vpow(j, p))
        cols[i] = term
    return cols


def equivariant_basis(
    rep_v: UnitaryRep, rep_w: UnitaryRep, degree: int, homogeneous: bool = False
) -> list[PolyMap]:
    """Orthonormal basis of the equivariant maps of total degree <= degree
    (or exactly degree if homogeneous), built by group averaging.

    The count per degree must equal the character-average dimension;
    anything else is reported as a numerical failure.
    """
    if rep_v.group.table != rep_w.group.table:
        raise ValidationError("source and target reps have different groups")
    if rep_v.dim > MAX_BASIS_VARS:
        raise ValidationError(f"source dimension exceeds cap {MAX_BASIS_VARS}")
    if degree > MAX_BASIS_DEGREE:
        raise ValidationError(f"degree exceeds cap {MAX_BASIS_DEGREE}")
    n = rep_v.group.order
    nv, nw = rep_v.dim, rep_w.dim
    idx = _monomial_index(nv, degree)
    total_rows = len(monomials(nv, degree))
    out: list[PolyMap] = []
    degrees = [degree] if homogeneous else list(range(degree + 1))
    if nw == 0:
        degrees = []
    subs = [_substitution_columns(rep_v, g, degree) for g in range(n)] if degrees else []
    inv_w = [rep_w.matrices[rep_v.group.inverse[g]] for g in range(n)]
    for k in degrees:
        want = equivariant_dimension(rep_v, rep_w, k)
        rows_k = [i for i, e in enumerate(monomials(nv, degree)) if sum(e) == k]
        cands = []
        for i in rows_k:
            for w in range(nw):
                c = np.zeros((total_rows, nw), dtype=np.complex128)
                for g in range(n):
                    wvec = inv_w[g][:, w]
                    for key, val in subs[g][i].items():
                        c[idx[key]] += val * wvec
                cands.append(c / n)
        got = _rank_reduce(cands)
        if len(got) != want:
            raise NumericalError(
                f"degree {k}: built {len(got)} equivariant maps, character count says {want}"
            )
        out.extend(
            PolyMap(nv, degree, c, f"{rep_v.label}->{rep_w.label}.deg{k}.{j}")
            for j, c in enumerate(got)
        )
    for p in out:
        check_equivariance(rep_v, rep_w, p)
    return out


def _rank_reduce(cands: list[np.ndarray]) -> list[np.ndarray]:
    """Pivoted Gram-Schmidt over flattened coefficient arrays."""
    if not cands:
        return []
    shape = cands[0].shape
    vecs = [c.reshape(-1) for c in cands]
    basis: list[np.ndarray] = []
    remaining = list(vecs)
    while True:
        norms = [float(np.linalg.norm(v)) for v in remaining]
        if not norms:
            break
        piv = int(np.argmax(norms))
        if norms[piv] <= PIVOT_TOL:
            break
        b = remaining.pop(piv) / norms[piv]
        basis.append(b)
        remaining = [v - (b.conj() @ v) * b for v in remaining]
    return [b.reshape(shape) for b in basis]


def check_equivariance(
    rep_v: UnitaryRep, rep_w: UnitaryRep, p: PolyMap, samples: int = 4
) -> None:
    """Sampled check that p(g x) == g p(x); raises on failure."""
    rng = np.random.Generator(np.random.Philox(key=REP_SEED + 1))
    scale = max(1.0, p.coeff_norm())
    for _ in range(samples):
        x = rng.normal(size=rep_v.dim) + 1j * rng.normal(size=rep_v.dim)
        g = int(rng.integers(rep_v.group.order))
        lhs = p.evaluate(rep_v.matrices[g] @ x)
        rhs = rep_w.matrices[g] @ p.evaluate(x)
        if lhs.size and np.max(np.abs(lhs - rhs)) > EQUIV_TOL * scale:
            raise NumericalError(
                f"map {p.label} is not equivariant at sample {x} under element {g}"
            )


def invariant_scalar_basis(rep_v: UnitaryRep, degree: int, homogeneous: bool = False):
    """Basis of invariant scalar polynomials, as scalar-valued PolyMaps."""
    triv = make_rep(rep_v.group, {"kind": "trivial", "dim": 1, "label": "C"})
    return equivariant_basis(rep_v, triv, degree, homogeneous=homogeneous)


def lagrange_selector(rep_v: UnitaryRep, v) -> PolyMap:
    """Scalar polynomial equal to 1 at v and 0 at the other orbit points,
    invariant under the stabilizer of v.

    Built on a random one-dimensional projection that separates the orbit;
    the projection is retried (deterministically) if two orbit points
    project within the separation tolerance.
    """
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    if v.shape[0] != rep_v.dim:
        raise ValidationError("point has the wrong dimension")
    stab = isotropy_group(rep_v, v)
    orbit = []
    seen: list[np.ndarray] = []
    radius = PROJ_SEP * max(1.0, float(np.max(np.abs(v))) if v.size else 1.0)
    for g in range(rep_v.group.order):
        x = rep_v.matrices[g] @ v
        if not any(np.max(np.abs(x - y)) <= radius for y in seen):
            seen.append(x)
    orbit = seen
    if len(orbit) * stab.order != rep_v.group.order:
        raise NumericalError(
            f"orbit size {len(orbit)} times stabilizer order {stab.order} "
            f"misses the group order {rep_v.group.order}"
        )
    rng = np.random.Generator(np.random.Philox(key=REP_SEED + 2))
    pts = np.stack(orbit)
    proj = None
    for _ in range(10):
        r = rng.normal(size=rep_v.dim) + 1j * rng.normal(size=rep_v.dim)
        vals = pts @ r
        sep = min(
            (abs(vals[i] - vals[j]) for i in range(len(vals)) for j in range(i)),
            default=1.0,
        )
        if sep > PROJ_SEP * max(1.0, float(np.max(np.abs(vals)))):
            proj = r
            break
    if proj is None:
        raise NumericalError("no projection separated the orbit after 10 draws")
    # Orbit index 0 is v itself (the identity element is listed first).
    vals = pts @ proj
    p0 = complex(vals[0])
    sel = PolyMap.from_terms(rep_v.dim, 0, 1, [((0,) * rep_v.dim, 0, 1.0)])
    lin_row = [
        ((tuple(1 if i == k else 0 for i in range(rep_v.dim))), 0, complex(proj[k]))
        for k in range(rep_v.dim)
    ]
    for val in vals[1:]:
        factor = PolyMap.from_terms(
            rep_v.dim,
            1,
            1,
            lin_row + [((0,) * rep_v.dim, 0, -complex(val))],
        )
        sel = factor.scalar_product(sel) * (1.0 / (p0 - val))
    # Average over the stabilizer so the selector is invariant under it.
    acc = PolyMap.zero(rep_v.dim, sel.degree, 1)
    for h in stab.members:
        acc = acc + sel.substitute_linear(rep_v.matrices[h])
    sel = acc * (1.0 / stab.order)
    got = sel.evaluate(pts).reshape(-1)
    want = np.zeros(len(vals))
    want[0] = 1.0
    if np.max(np.abs(got - want)) > INTERP_TOL * max(1.0, sel.coeff_norm()):
        raise NumericalError("selector values drifted off 0/1 on the orbit")
    return sel


def interpolate(rep_v: UnitaryRep, rep_w: UnitaryRep, v, w) -> PolyMap:
    """The equivariant map sending v to w (w must be fixed by the
    stabilizer of v), of degree below the orbit size."""
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    w = np.asarray(w, dtype=np.complex128).reshape(-1)
    if w.shape[0] != rep_w.dim:
        raise ValidationError("target vector has the wrong dimension")
    stab = isotropy_group(rep_v, v)
    wscale = max(1.0, float(np.max(np.abs(w))) if w.size else 1.0)
    for h in stab.members:
        if np.max(np.abs(rep_w.matrices[h] @ w - w)) > INTERP_TOL * wscale:
            raise ValidationError(
                "target vector is not fixed by the stabilizer of the point; "
                "no equivariant map can reach it"
            )
    sel = lagrange_selector(rep_v, v)
    n = rep_v.group.order
    acc = PolyMap.zero(rep_v.dim, sel.degree, rep_w.dim)
    for g in range(n):
        sel_g = sel.substitute_linear(rep_v.matrices[g])
        wg = rep_w.matrices[rep_v.group.inverse[g]] @ w
        acc = acc + sel_g.post_compose(wg.reshape(-1, 1))
    p = acc * (1.0 / stab.order)
    got = p.evaluate(v)
    if np.max(np.abs(got - w)) > INTERP_TOL * wscale * max(1.0, p.coeff_norm()):
        raise NumericalError(f"interpolation missed: wanted {w}, got {got}")
    return p


def module_generators(
    rep_v: UnitaryRep, rep_w: UnitaryRep, search_bound: int | None = None
):
    """Greedy generators of the equivariant maps as a module over the
    invariant scalars, scanning degree by degree.

    Returns (generators, last_new_degree, search_bound).  Degrees are
    scanned through search_bound (default: the group order); a generator
    appearing at the bound itself means the scan saw no trailing stretch
    of fully covered degrees, so callers should treat the list as
    unconfirmed and raise the bound.
    """
    if search_bound is None:
        search_bound = min(rep_v.group.order, MAX_BASIS_DEGREE)
    if search_bound > MAX_BASIS_DEGREE:
        raise ValidationError(f"search bound exceeds degree cap {MAX_BASIS_DEGREE}")
    gens: list[PolyMap] = []
    last_new = -1
    inv_by_deg: dict[int, list[PolyMap]] = {}
    for k in range(1, search_bound + 1):
        inv_by_deg[k] = invariant_scalar_basis(rep_v, k, homogeneous=True)
    for k in range(search_bound + 1):
        space = equivariant_basis(rep_v, rep_w, k, homogeneous=True)
        if not space:
            continue
        covered: list[PolyMap] = []
        for g in gens:
            gdeg = g.actual_degree()
            j = k - gdeg
            if j == 0:
                covered.append(g.with_degree(k))
            elif j > 0:
                for inv in inv_by_deg[j]:
                    covered.append(inv.scalar_product(g).with_degree(k))
        new = _complement(space, covered)
        if new:
            last_new = k
            gens.extend(new)
    return gens, last_new, search_bound


def _complement(space: list[PolyMap], covered: list[PolyMap]) -> list[PolyMap]:
    """Basis elements of `space` not spanned by `covered`, orthonormalized."""
    if not covered:
        return list(space)
    a = np.stack([c.coeffs.reshape(-1) for c in covered], axis=1)
    out = []
    for p in space:
        y = p.coeffs.reshape(-1)
        sol, *_ = np.linalg.lstsq(a, y, rcond=None)
        res = float(np.max(np.abs(a @ sol - y)))
        if res > SPAN_TOL * max(1.0, float(np.max(np.abs(y)))):
            out.append(p)
            a = np.concatenate([a, y.reshape(-1, 1)], axis=1)
    return out


def degree_reduce(
    rep_v: UnitaryRep,
    rep_w: UnitaryRep,
    v,
    p: PolyMap,
    target_degree: int,
) -> PolyMap:
    """Lower the degree of an equivariant map to the target, preserving
    the value at the marked point.

    Each top homogeneous layer is expressed over the module generators
    with invariant coefficients; freezing those coefficients at the
    marked point drops the layer's degree without touching the value
    there.  Linear in the input map.
    """
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    cur = p
    guard = 0
    while cur.actual_degree() > target_degree:
        guard += 1
        if guard > 64:
            raise NumericalError("degree reduction did not terminate")
        dtop = cur.actual_degree()
        top = cur.homogeneous_part(dtop)
        rest = cur - top
        gens, _, _ = module_generators(rep_v, rep_w, search_bound=min(dtop, MAX_BASIS_DEGREE))
        cands: list[tuple[PolyMap, PolyMap]] = []
        for g in gens:
            gdeg = g.actual_degree()
            j = dtop - gdeg
            if j <= 0:
                continue
            for inv in invariant_scalar_basis(rep_v, j, homogeneous=True):
                cands.append((inv, g))
        if not cands:
            raise NumericalError(
                f"no invariant-times-generator products at degree {dtop}; "
                "the top layer cannot be reduced"
            )
        a = np.stack(
            [
                inv.scalar_product(g).with_degree(cur.degree).coeffs.reshape(-1)
                for inv, g in cands
            ],
            axis=1,
        )
        y = top.coeffs.reshape(-1)
        sol, *_ = np.linalg.lstsq(a, y, rcond=None)
        res = float(np.max(np.abs(a @ sol - y)))
        if res > SPAN_TOL * max(1.0, float(np.max(np.abs(y)))):
            raise NumericalError(
                f"top layer of degree {dtop} is not an invariant combination "
                f"of lower generators (residual {res:.3e})"
            )
        repl = PolyMap.zero(cur.nvars, cur.degree, cur.dimw)
        for c, (inv, g) in zip(sol, cands):
            if c == 0:
                continue
            inv_at_v = complex(inv.evaluate(v)[0])
            repl = repl + g.with_degree(cur.degree) * (c * inv_at_v)
        cur = rest + repl
    out = cur.with_degree(max(target_degree, cur.actual_degree()))
    val_in = p.evaluate(v)
    val_out = out.evaluate(v)
    scale = max(1.0, p.coeff_norm(), float(np.max(np.abs(val_in))) if val_in.size else 0.0)
    if val_in.size and np.max(np.abs(val_in - val_out)) > EXACT_TOL * scale * 100:
        raise NumericalError(
            f"degree reduction moved the marked value from {val_in} to {val_out}"
        )
    return out


def restrict_theta(
    rep_v: UnitaryRep,
    rep_w: UnitaryRep,
    sub: Subgroup,
    v,
    p: PolyMap,
):
    """Change of groups, restriction direction.

    At a point v fixed by the subgroup, re-centers the map there and
    keeps only the moving source directions: the result is a polynomial
    map on those directions, equivariant for the subgroup.  Returns
    (local map, moving rep of the source, restricted target rep, moving
    basis).
    """
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    res_v = restrict_rep(rep_v, sub)
    res_w = restrict_rep(rep_w, sub)
    if v.size:
        moved = res_v.matrices @ v - v[None]
        if np.max(np.abs(moved)) > EQUIV_TOL * max(1.0, float(np.max(np.abs(v)))):
            raise ValidationError("base point is not fixed by the subgroup")
    basis = moving_subspace(res_v)
    local = p.substitute_affine(v, basis)
    v_check = subrep(res_v, basis, label=rep_v.label + "~")
    return local, v_check, res_w, basis


def extend_theta(
    rep_v: UnitaryRep,
    rep_w: UnitaryRep,
    sub: Subgroup,
    v,
    q: PolyMap,
    basis,
    target_degree: int | None = None,
) -> PolyMap:
    """Change of groups, extension direction.

    Takes a subgroup-equivariant map q on the moving directions at v and
    produces a globally equivariant map agreeing with q's value at v
    (that is, at the origin of the moving chart).  The raw average has
    inflated degree; it is brought back down by degree reduction, which
    keeps the value at v.
    """
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    basis = np.asarray(basis, dtype=np.complex128)
    sel = lagrange_selector(rep_v, v)
    stab = isotropy_group(rep_v, v)
    if set(stab.members) != set(sub.members):
        raise ValidationError(
            "extension base point must have exactly the given subgroup as stabilizer"
        )
    # q composed with the orthogonal projection onto the moving chart.
    q_amb = q.substitute_affine(-(basis.conj().T @ v), basis.conj().T)
    n = rep_v.group.order
    acc: PolyMap | None = None
    for g in range(n):
        mg = rep_v.matrices[g]
        # (selector . q) composed with the action of g, rotated back in
        # the target; summing over the group makes the result equivariant.
        moved = q_amb.substitute_linear(mg).scalar_product(sel.substitute_linear(mg))
        rot = moved.post_compose(rep_w.matrices[rep_v.group.inverse[g]])
        acc = rot if acc is None else acc + rot
    out = acc * (1.0 / sub.order)
    if target_degree is not None:
        out = degree_reduce(rep_v, rep_w, v, out, target_degree)
    return out
