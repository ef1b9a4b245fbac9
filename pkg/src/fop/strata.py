"""Isotropy strata of a representation and transversality certificates.

A stratum collects the points whose stabilizer is exactly one conjugacy
class of subgroups.  For each stratum this module reports the fixed and
moving dimensions, whether the stratum is nonempty, how big the space of
equivariant sections looks over it, the expected dimension of a generic
zero set inside it, and a pointwise certificate that a given zero of a
given section is nondegenerate in the stratified sense: invertible along
the fixed directions, full Schur-block rank across the moving ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .equipoly import PolyMap, equivariant_basis, poly_dimension
from .errors import NumericalError, ValidationError
from .groups import Subgroup, subgroups
from .reps import (
    UnitaryRep,
    character_table,
    fixed_subspace,
    isotropy_group,
    isotypic_basis,
    moving_subspace,
    restrict_rep,
    subrep,
)
from .tolerances import CERT_TAU, EQUIV_TOL, REP_SEED, SPAN_TOL

__all__ = [
    "Stratum",
    "action_strata",
    "stratum_for",
    "expected_zero_dimension",
    "SectionSpaceInfo",
    "section_space_info",
    "NormalMargin",
    "Certificate",
    "transversality_certificate",
]


@dataclass(frozen=True, eq=False)
class Stratum:
    """One conjugacy class of stabilizers acting on the source."""

    sub: Subgroup
    class_id: int
    class_size: int
    fixed_dim: int
    moving_dim: int
    nonempty: bool
    fixed_basis: np.ndarray  # (dim V, fixed_dim), orthonormal columns

    def __repr__(self) -> str:  # pragma: no cover
        return (
            f"Stratum(H={self.sub.members}, fixed={self.fixed_dim}, "
            f"moving={self.moving_dim}, nonempty={self.nonempty})"
        )


def _fixed_dims(rep: UnitaryRep) -> dict[tuple[int, ...], np.ndarray]:
    """Fixed-space basis per subgroup, keyed by member tuple."""
    out = {}
    for sub in subgroups(rep.group):
        out[sub.members] = fixed_subspace(restrict_rep(rep, sub))
    return out


def action_strata(rep: UnitaryRep) -> tuple[Stratum, ...]:
    """One stratum per conjugacy class of subgroups, listed by class id.

    A stratum is empty exactly when some strictly larger subgroup fixes a
    space of the same dimension: then no point has that exact stabilizer.
    """
    subs = subgroups(rep.group)
    bases = _fixed_dims(rep)
    class_sizes: dict[int, int] = {}
    for s in subs:
        class_sizes[s.class_id] = class_sizes.get(s.class_id, 0) + 1
    out = []
    seen = set()
    for s in subs:
        if s.class_id in seen:
            continue
        seen.add(s.class_id)
        basis = bases[s.members]
        fdim = basis.shape[1]
        nonempty = True
        mine = set(s.members)
        for t in subs:
            if mine < set(t.members) and bases[t.members].shape[1] == fdim:
                nonempty = False
                break
        out.append(
            Stratum(
                sub=s,
                class_id=s.class_id,
                class_size=class_sizes[s.class_id],
                fixed_dim=fdim,
                moving_dim=rep.dim - fdim,
                nonempty=nonempty,
                fixed_basis=basis,
            )
        )
    return tuple(out)


def stratum_for(rep: UnitaryRep, sub: Subgroup) -> Stratum:
    """The stratum record whose class contains the given subgroup."""
    for st in action_strata(rep):
        if st.class_id == sub.class_id:
            return st
    raise ValidationError("subgroup does not belong to this group")


def expected_zero_dimension(rep_v: UnitaryRep, rep_w: UnitaryRep, sub: Subgroup) -> int:
    """Real dimension of the zero set a generic section cuts out inside
    the stratum of the given stabilizer: twice the difference of the
    fixed complex dimensions.  Negative means generically no zeros."""
    fv = fixed_subspace(restrict_rep(rep_v, sub)).shape[1]
    fw = fixed_subspace(restrict_rep(rep_w, sub)).shape[1]
    return 2 * (fv - fw)


@dataclass(frozen=True, eq=False)
class SectionSpaceInfo:
    """How the space of equivariant sections sits over one stratum."""

    sub: Subgroup
    degree: int
    nonempty: bool
    fixed_dim_source: int
    fixed_dim_target: int
    section_dim: int
    total_dim: int  # complex dim of {(point, section) : section vanishes there}
    zero_dim: int  # real dim of a generic section's zero set in the stratum
    surjective: bool | None  # evaluation onto the fixed target, at samples
    min_singular: float | None


def section_space_info(
    rep_v: UnitaryRep,
    rep_w: UnitaryRep,
    sub: Subgroup,
    degree: int,
    samples: int = 20,
) -> SectionSpaceInfo:
    """Dimension bookkeeping over one stratum, plus a sampled check that
    evaluation of the section space hits every fixed target value."""
    st = stratum_for(rep_v, sub)
    qv = st.fixed_basis
    qw = fixed_subspace(restrict_rep(rep_w, sub))
    fv, fw = qv.shape[1], qw.shape[1]
    sdim = poly_dimension(rep_v, rep_w, degree)
    info = dict(
        sub=st.sub,
        degree=degree,
        nonempty=st.nonempty,
        fixed_dim_source=fv,
        fixed_dim_target=fw,
        section_dim=sdim,
        total_dim=fv + sdim - fw,
        zero_dim=2 * (fv - fw),
        surjective=None,
        min_singular=None,
    )
    if not st.nonempty:
        return SectionSpaceInfo(**info)
    if fw == 0:
        info["surjective"] = True
        return SectionSpaceInfo(**info)
    basis = equivariant_basis(rep_v, rep_w, degree)
    rng = np.random.Generator(np.random.Philox(key=REP_SEED + 3))
    worst = np.inf
    for _ in range(samples):
        v = _sample_stratum_point(rep_v, st, rng)
        ev = np.stack([qw.conj().T @ b.evaluate(v) for b in basis])
        s = np.linalg.svd(ev, compute_uv=False)
        scale = max(1.0, float(np.max(np.abs(v))) ** degree)
        sigma = (s[fw - 1] if len(s) >= fw else 0.0) / scale
        worst = min(worst, float(sigma))
    info["surjective"] = bool(worst >= SPAN_TOL)
    info["min_singular"] = worst
    return SectionSpaceInfo(**info)


def _sample_stratum_point(
    rep: UnitaryRep, st: Stratum, rng: np.random.Generator
) -> np.ndarray:
    """A random point whose stabilizer is exactly the stratum's subgroup."""
    if st.fixed_dim == 0:
        v = np.zeros(rep.dim, dtype=np.complex128)
        if isotropy_group(rep, v).members == st.sub.members:
            return v
        raise NumericalError("origin does not realize the expected stabilizer")
    for _ in range(5):
        u = rng.normal(size=st.fixed_dim) + 1j * rng.normal(size=st.fixed_dim)
        v = st.fixed_basis @ u
        if isotropy_group(rep, v).members == st.sub.members:
            return v
    raise NumericalError(
        f"no sampled point of the stratum {st.sub.members} had exact stabilizer"
    )


@dataclass(frozen=True)
class NormalMargin:
    """Schur-block margin for one nontrivial irreducible of the stabilizer."""

    irrep_index: int
    irrep_dim: int
    mult_source: int
    mult_target: int
    margin: float | None  # None when the block is vacuous


@dataclass(frozen=True, eq=False)
class Certificate:
    """Pointwise nondegeneracy certificate for a zero of a section."""

    sub: Subgroup
    point: np.ndarray
    residual: float
    ring_margin: float | None
    normal_margins: tuple[NormalMargin, ...]
    scale: float
    threshold: float
    passed: bool
    sign: int  # complex strata always contribute positively


def transversality_certificate(
    rep_v: UnitaryRep,
    rep_w: UnitaryRep,
    sub: Subgroup,
    section: PolyMap,
    v,
) -> Certificate:
    """Certify that a zero of an equivariant section is nondegenerate
    within its stratum.

    The derivative at the zero splits under the stabilizer: the block
    along the fixed directions must have full rank (ring margin), and for
    every nontrivial irreducible of the stabilizer the block between the
    matching isotypic pieces of the moving directions must have the rank
    Schur's lemma allows (normal margins).  Margins are smallest relevant
    singular values, compared against a threshold scaled to the section's
    size; vacuous blocks report None and do not veto.
    """
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    if v.shape[0] != rep_v.dim or section.nvars != rep_v.dim or section.dimw != rep_w.dim:
        raise ValidationError("section and point do not match the representations")
    vnorm = float(np.max(np.abs(v))) if v.size else 0.0
    scale = max(1.0, section.coeff_norm(), vnorm ** section.degree)
    threshold = CERT_TAU * scale
    res_v = restrict_rep(rep_v, sub)
    res_w = restrict_rep(rep_w, sub)
    if v.size:
        moved = res_v.matrices @ v - v[None]
        if np.max(np.abs(moved)) > EQUIV_TOL * max(1.0, vnorm):
            raise ValidationError("point is not fixed by the subgroup")
    value = section.evaluate(v)
    residual = float(np.max(np.abs(value))) if value.size else 0.0
    if residual > threshold:
        raise ValidationError(
            f"point is not a zero of the section (residual {residual:.3e})"
        )
    jac = section.jacobian(v)

    qv_fix = fixed_subspace(res_v)
    qw_fix = fixed_subspace(res_w)
    ring = None
    if qv_fix.shape[1] and qw_fix.shape[1]:
        block = qw_fix.conj().T @ jac @ qv_fix
        s = np.linalg.svd(block, compute_uv=False)
        ring = float(s[min(block.shape) - 1])

    margins: list[NormalMargin] = []
    qv_mov = moving_subspace(res_v)
    qw_mov = moving_subspace(res_w)
    if qv_mov.shape[1] or qw_mov.shape[1]:
        ct = character_table(res_v.group)
        iso_v = (
            isotypic_basis(subrep(res_v, qv_mov))
            if qv_mov.shape[1]
            else [np.zeros((0, 0))] * len(ct.rows)
        )
        iso_w = (
            isotypic_basis(subrep(res_w, qw_mov))
            if qw_mov.shape[1]
            else [np.zeros((0, 0))] * len(ct.rows)
        )
        # Index 0 is the trivial irreducible; it cannot appear in a
        # moving part, so only the rest carry margins.
        for i in range(1, len(ct.rows)):
            d = ct.dims[i]
            a = iso_v[i].shape[1] // d
            b = iso_w[i].shape[1] // d
            if a == 0 or b == 0:
                if a or b:
                    margins.append(NormalMargin(i, d, a, b, None))
                continue
            amb_v = qv_mov @ iso_v[i]
            amb_w = qw_mov @ iso_w[i]
            block = amb_w.conj().T @ jac @ amb_v
            s = np.linalg.svd(block, compute_uv=False)
            need = d * min(a, b)
            margins.append(NormalMargin(i, d, a, b, float(s[need - 1])))

    checked = [m for m in ([ring] + [nm.margin for nm in margins]) if m is not None]
    passed = all(m >= threshold for m in checked)
    return Certificate(
        sub=sub,
        point=v,
        residual=residual,
        ring_margin=ring,
        normal_margins=tuple(margins),
        scale=scale,
        threshold=threshold,
        passed=passed,
        sign=1,
    )
