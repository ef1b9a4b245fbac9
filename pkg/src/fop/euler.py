"""Integer zero-orbit counts for equivariant polynomial sections.

The pipeline: fix a finite group with a source and target representation
and a degree bound (a chart problem), take an equivariant polynomial
section, and count its zero orbits stratum by stratum.  Each nonempty
stratum is solved on its fixed subspace with the path tracker, solutions
are filtered down to the points whose stabilizer is exactly the
stratum's subgroup, grouped into group orbits, and certified
nondegenerate.  Degenerate sections are nudged by a random equivariant
perturbation and re-counted.  Every zero orbit carries sign +1 (the
strata are complex), so the per-stratum count is just the orbit count,
and the weighted total must reproduce the plain solver's count of
distinct zeros of the full system.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .equipoly import PolyMap, equivariant_basis, monomials
from .errors import NumericalError, ValidationError
from .groups import FiniteGroup, Subgroup, subgroups
from .psolve import PolySystem, solve_system
from .reps import (
    IsotropyType,
    UnitaryRep,
    character_table,
    fixed_subspace,
    isotropy_group,
    moving_subspace,
    multiplicities,
    restrict_rep,
    stabilize_type,
    subrep,
    types_equal,
)
from .strata import Stratum, action_strata, transversality_certificate
from .tolerances import (
    DEDUP_RADIUS,
    EQUIV_TOL,
    MAX_SOLVE_VARS,
    PERTURB_MAG,
    REP_SEED,
    SOLVE_SEED,
    SOLVE_TOL,
    STRUCT_TOL,
)

__all__ = [
    "ChartProblem",
    "make_problem",
    "SectionDatum",
    "make_section",
    "section_from_basis",
    "equivariance_defect",
    "perturb",
    "ZeroOrbit",
    "StratumCount",
    "EulerReport",
    "enumerate_zero_orbits",
    "euler_counts",
    "aggregate_stabilized",
    "AggregateCount",
    "validate_properness",
    "PropernessRecord",
    "dimension_audit",
    "AdjacencyRecord",
    "invariance_check",
    "InvarianceReport",
    "degree_stability_check",
]

# Coefficients below this fraction of the largest one are rotation noise
# from the fixed-space change of basis, not content; they are dropped
# before a restricted map is handed to the path tracker, where a noise
# term would otherwise inflate the equation degree.
_COEFF_CLIP = 1e-12

_MAX_PERTURB_TRIES = 5


@dataclass(frozen=True, eq=False)
class ChartProblem:
    """A group with source and target representations and a degree bound."""

    group: FiniteGroup
    rep_v: UnitaryRep
    rep_w: UnitaryRep
    degree: int

    def __repr__(self) -> str:  # pragma: no cover
        return (
            f"ChartProblem({self.group.label}, V dim {self.rep_v.dim}, "
            f"W dim {self.rep_w.dim}, degree {self.degree})"
        )


def make_problem(
    group: FiniteGroup,
    rep_v: UnitaryRep,
    rep_w: UnitaryRep,
    degree: int,
    allow_low_degree: bool = False,
) -> ChartProblem:
    """Validate and bundle a counting problem.

    Every nonempty stratum must have nonpositive expected zero dimension,
    otherwise generic zero sets inside it are positive-dimensional and no
    finite count exists.  A degree below the group order cannot express
    every orbit interpolation, so it draws a warning unless explicitly
    allowed.
    """
    if rep_v.group.table != group.table or rep_w.group.table != group.table:
        raise ValidationError("representations must belong to the given group")
    if degree < 1:
        raise ValidationError("degree must be at least 1")
    for st in action_strata(rep_v):
        if not st.nonempty:
            continue
        fw = _fixed_basis(rep_w, st.sub).shape[1]
        if st.fixed_dim > fw:
            raise ValidationError(
                f"stratum {st.sub.members} has expected zero dimension "
                f"{2 * (st.fixed_dim - fw)} > 0; the count is not finite"
            )
        if st.fixed_dim > MAX_SOLVE_VARS:
            raise ValidationError(
                f"stratum {st.sub.members} needs {st.fixed_dim} variables, "
                f"solver cap is {MAX_SOLVE_VARS}"
            )
    kernel = [
        g
        for g in range(1, group.order)
        if rep_v.dim
        and np.max(np.abs(rep_v.matrices[g] - np.eye(rep_v.dim))) <= STRUCT_TOL
    ]
    if kernel:
        warnings.warn(
            f"source action is not effective (elements {kernel} act trivially); "
            "stabilizers will all contain them",
            stacklevel=2,
        )
    if degree < group.order and not allow_low_degree:
        warnings.warn(
            f"degree {degree} is below the group order {group.order}; "
            "the section space may be too small to separate orbits",
            stacklevel=2,
        )
    return ChartProblem(group, rep_v, rep_w, degree)


@dataclass(frozen=True, eq=False)
class SectionDatum:
    """An equivariant polynomial section tied to its problem."""

    problem: ChartProblem
    poly: PolyMap
    perturbed: bool = False
    perturb_seed: int | None = None
    magnitude: float | None = None


def equivariance_defect(problem: ChartProblem, p: PolyMap) -> float:
    """Largest coefficient of p(g x) - g p(x) over all group elements."""
    worst = 0.0
    for g in range(problem.group.order):
        lhs = p.substitute_linear(problem.rep_v.matrices[g])
        rhs = p.post_compose(problem.rep_w.matrices[g])
        worst = max(worst, float(np.max(np.abs(lhs.coeffs - rhs.coeffs))))
    return worst


def make_section(problem: ChartProblem, terms) -> SectionDatum:
    """Build a section from (exponent_tuple, coordinate, coefficient)
    terms and verify equivariance at the coefficient level."""
    p = PolyMap.from_terms(
        problem.rep_v.dim, problem.degree, problem.rep_w.dim, terms
    )
    defect = equivariance_defect(problem, p)
    if defect > EQUIV_TOL * max(1.0, p.coeff_norm()):
        raise ValidationError(
            f"section is not equivariant (coefficient defect {defect:.3e})"
        )
    return SectionDatum(problem, p)


def section_from_basis(problem: ChartProblem, coeffs) -> SectionDatum:
    """A section as an explicit combination of the equivariant basis."""
    basis = equivariant_basis(problem.rep_v, problem.rep_w, problem.degree)
    coeffs = np.asarray(coeffs, dtype=np.complex128).reshape(-1)
    if coeffs.shape[0] != len(basis):
        raise ValidationError(
            f"need {len(basis)} coefficients, got {coeffs.shape[0]}"
        )
    p = PolyMap.zero(problem.rep_v.dim, problem.degree, problem.rep_w.dim)
    for c, b in zip(coeffs, basis):
        p = p + b * c
    return SectionDatum(problem, p)


def perturb(
    section: SectionDatum,
    seed: int,
    magnitude: float = PERTURB_MAG,
) -> SectionDatum:
    """Add a random equivariant section of relative size ``magnitude``.

    The draw is deterministic in the seed.  Checking that the result is
    actually nondegenerate is the caller's job; the counting loop retries
    with fresh seeds when it is not.
    """
    problem = section.problem
    basis = equivariant_basis(problem.rep_v, problem.rep_w, problem.degree)
    if not basis:
        raise ValidationError("the equivariant section space is zero; nothing to add")
    rng = np.random.Generator(np.random.Philox(key=seed))
    scale = magnitude * max(1.0, section.poly.coeff_norm())
    eps = scale * (
        rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
    ) / np.sqrt(2.0)
    p = section.poly
    for c, b in zip(eps, basis):
        p = p + b * c
    return SectionDatum(problem, p, perturbed=True, perturb_seed=seed, magnitude=magnitude)


def _fixed_basis(rep: UnitaryRep, sub: Subgroup) -> np.ndarray:
    return fixed_subspace(restrict_rep(rep, sub))


def _clip(p: PolyMap) -> PolyMap:
    cut = _COEFF_CLIP * max(1.0, p.coeff_norm())
    c = np.where(np.abs(p.coeffs) > cut, p.coeffs, 0)
    return PolyMap(p.nvars, p.degree, c, p.label)


def _lex_key(v: np.ndarray):
    return tuple(
        (round(float(z.real), 9) + 0.0, round(float(z.imag), 9) + 0.0) for z in v
    )


def _orbit_points(rep: UnitaryRep, v: np.ndarray) -> list[np.ndarray]:
    """Distinct points of the group orbit of v."""
    radius = DEDUP_RADIUS * max(1.0, float(np.max(np.abs(v))) if v.size else 0.0)
    out: list[np.ndarray] = []
    for g in range(rep.group.order):
        x = rep.matrices[g] @ v
        if not any(np.max(np.abs(x - y)) <= radius for y in out):
            out.append(x)
    return out


@dataclass(frozen=True, eq=False)
class ZeroOrbit:
    """One group orbit of zeros, certified at its representative."""

    representative: np.ndarray
    points: tuple[np.ndarray, ...]
    stabilizer: Subgroup
    certificate: object  # strata.Certificate

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def sign(self) -> int:
        return self.certificate.sign


@dataclass(frozen=True, eq=False)
class StratumCount:
    """Count over one stratum: chi is the number of zero orbits there."""

    class_id: int
    members: tuple[int, ...]
    zero_dim: int  # expected real dimension of the zero set, 2*(fv - fw)
    chi: int
    orbits: tuple[ZeroOrbit, ...]


def _restricted_map(section_poly: PolyMap, qv: np.ndarray, qw: np.ndarray) -> PolyMap:
    return _clip(section_poly.substitute_linear(qv).post_compose(qw.conj().T))


def _equation_shape(rp: PolyMap, j: int) -> str:
    """'zero', 'constant', or 'general' for one coordinate of a map."""
    terms = rp.to_terms(j)
    if not terms:
        return "zero"
    if all(sum(e) == 0 for e, _ in terms):
        return "constant"
    return "general"


def enumerate_zero_orbits(
    problem: ChartProblem,
    section: SectionDatum,
    solver_seed: int = SOLVE_SEED,
    threads: int = 1,
):
    """Zero orbits per nonempty stratum, with degeneracy findings.

    Returns (counts, degeneracies): one StratumCount per nonempty
    stratum, and a list of human-readable degeneracy descriptions (failed
    certificates, multiple zeros, zeros on negative-dimension strata).
    An empty degeneracy list means the section is certified strongly
    transversal at every found zero.
    """
    rep_v, rep_w = problem.rep_v, problem.rep_w
    counts: list[StratumCount] = []
    degeneracies: list[str] = []
    for st in action_strata(rep_v):
        if not st.nonempty:
            continue
        qv = st.fixed_basis
        qw = _fixed_basis(rep_w, st.sub)
        fv, fw = qv.shape[1], qw.shape[1]
        n_gamma = 2 * (fv - fw)
        raw_points: list[np.ndarray] = []
        if fv == 0:
            # the stratum is the origin alone (its stabilizer is the
            # whole group whenever this stratum is nonempty)
            value = section.poly.evaluate(np.zeros(rep_v.dim))
            resid = float(np.max(np.abs(value))) if value.size else 0.0
            vscale = max(1.0, section.poly.coeff_norm())
            if fw == 0 or resid <= SOLVE_TOL * vscale:
                if fw > 0:
                    degeneracies.append(
                        f"stratum {st.sub.members}: the origin vanishes on an "
                        f"overdetermined stratum (expected dimension {n_gamma})"
                    )
                raw_points.append(np.zeros(fv, dtype=np.complex128))
        else:
            rp = _restricted_map(section.poly, qv, qw)
            shapes = [_equation_shape(rp, j) for j in range(fw)]
            if any(s == "zero" for s in shapes):
                degeneracies.append(
                    f"stratum {st.sub.members}: an equation vanishes identically "
                    "on the fixed subspace"
                )
            elif any(s == "constant" for s in shapes):
                pass  # some coordinate never vanishes: no zeros here
            else:
                neqs = min(fv, fw)
                system = PolySystem(
                    fv, [rp.to_terms(j) for j in range(neqs)]
                )
                sol = solve_system(system, seed=solver_seed, threads=threads)
                extra = range(neqs, fw)
                for i in range(len(sol)):
                    u = sol.points[i]
                    ok = all(
                        abs(
                            complex(
                                np.sum(
                                    [
                                        c * np.prod(u**np.array(e))
                                        for e, c in rp.to_terms(j)
                                    ]
                                )
                            )
                        )
                        <= SOLVE_TOL
                        * max(1.0, rp.coeff_norm())
                        * max(1.0, float(np.max(np.abs(u)))) ** rp.degree
                        for j in extra
                    )
                    if not ok:
                        continue
                    if sol.multiplicities[i] != 1:
                        # clusters belonging to smaller strata are
                        # resolved there; flag only if this one stays
                        v_amb = qv @ u
                        if isotropy_group(rep_v, v_amb).members == st.sub.members:
                            degeneracies.append(
                                f"stratum {st.sub.members}: zero at {v_amb} has "
                                f"multiplicity {int(sol.multiplicities[i])}"
                            )
                        continue
                    raw_points.append(u)

        orbits: list[list[np.ndarray]] = []
        for u in raw_points:
            v_amb = qv @ u if fv else np.zeros(rep_v.dim, dtype=np.complex128)
            stab = isotropy_group(rep_v, v_amb)
            if stab.members != st.sub.members:
                continue  # exact stabilizer is larger; counted in its own stratum
            if n_gamma < 0:
                degeneracies.append(
                    f"stratum {st.sub.members}: found a zero on a stratum of "
                    f"expected dimension {n_gamma}"
                )
                continue
            pts = _orbit_points(rep_v, v_amb)
            if len(pts) * st.sub.order != problem.group.order:
                degeneracies.append(
                    f"stratum {st.sub.members}: orbit of {v_amb} has "
                    f"{len(pts)} points, expected "
                    f"{problem.group.order // st.sub.order}"
                )
                continue
            radius = DEDUP_RADIUS * max(
                1.0, float(np.max(np.abs(v_amb))) if v_amb.size else 0.0
            )
            for known in orbits:
                if any(np.max(np.abs(known[0] - x)) <= radius for x in pts):
                    break
            else:
                orbits.append(pts)

        zero_orbits: list[ZeroOrbit] = []
        for pts in orbits:
            rep_pt = min(pts, key=_lex_key)
            stab = isotropy_group(rep_v, rep_pt)
            try:
                cert = transversality_certificate(
                    rep_v, rep_w, stab, section.poly, rep_pt
                )
            except ValidationError as exc:
                degeneracies.append(
                    f"stratum {st.sub.members}: certificate rejected zero "
                    f"{rep_pt}: {exc}"
                )
                continue
            if not cert.passed:
                degeneracies.append(
                    f"stratum {st.sub.members}: certificate failed at {rep_pt} "
                    f"(threshold {cert.threshold:.3e})"
                )
            zero_orbits.append(
                ZeroOrbit(
                    representative=rep_pt,
                    points=tuple(pts),
                    stabilizer=stab,
                    certificate=cert,
                )
            )
        counts.append(
            StratumCount(
                class_id=st.class_id,
                members=st.sub.members,
                zero_dim=n_gamma,
                chi=len(zero_orbits),
                orbits=tuple(zero_orbits),
            )
        )
    return counts, degeneracies


@dataclass(frozen=True)
class AggregateCount:
    """Total over strata sharing a stabilized isotropy type."""

    class_ids: tuple[int, ...]
    chi_total: int
    local_order: int
    diff: tuple[int, ...]


def _isotropy_type(problem: ChartProblem, sub: Subgroup) -> IsotropyType:
    local, _ = sub.as_group()
    res_v = restrict_rep(problem.rep_v, sub)
    res_w = restrict_rep(problem.rep_w, sub)
    mv = moving_subspace(res_v)
    mw = moving_subspace(res_w)
    v_mults = (
        multiplicities(subrep(res_v, mv)) if mv.shape[1] else None
    )
    w_mults = (
        multiplicities(subrep(res_w, mw)) if mw.shape[1] else None
    )
    nrows = len(character_table(local).rows)
    if v_mults is None:
        v_mults = (0,) * nrows
    if w_mults is None:
        w_mults = (0,) * nrows
    return IsotropyType(local, sub.class_id, v_mults, w_mults)


def aggregate_stabilized(
    problem: ChartProblem, counts: list[StratumCount]
) -> tuple[AggregateCount, ...]:
    """Group per-stratum counts by stabilized isotropy type.

    Two strata aggregate when their stabilizers are isomorphic by an
    isomorphism matching the virtual difference of the moving
    multiplicities, which is what survives adding a common representation
    to source and target.
    """
    subs_by_class = {}
    for sub in subgroups(problem.group):
        subs_by_class.setdefault(sub.class_id, sub)
    stab_types = {}
    for c in counts:
        t = _isotropy_type(problem, subs_by_class[c.class_id])
        stab_types[c.class_id] = stabilize_type(t)
    groups: list[list[StratumCount]] = []
    for c in counts:
        for grp in groups:
            if types_equal(stab_types[grp[0].class_id], stab_types[c.class_id]):
                grp.append(c)
                break
        else:
            groups.append([c])
    out = []
    for grp in groups:
        key = stab_types[grp[0].class_id]
        out.append(
            AggregateCount(
                class_ids=tuple(c.class_id for c in grp),
                chi_total=sum(c.chi for c in grp),
                local_order=key.local_group.order,
                diff=key.diff,
            )
        )
    return tuple(out)


@dataclass(frozen=True, eq=False)
class EulerReport:
    """Everything the counting pipeline concluded about one section."""

    problem: ChartProblem
    section: SectionDatum
    strata: tuple[StratumCount, ...]
    aggregates: tuple[AggregateCount, ...]
    total_weighted: int
    oracle_distinct: int | None
    consistent: bool | None
    attempts: int

    def count_table(self) -> tuple[tuple[int, tuple[int, ...], int], ...]:
        return tuple((c.class_id, c.members, c.chi) for c in self.strata)

    def chi(self, members) -> int:
        key = tuple(sorted(members))
        for c in self.strata:
            if c.members == key:
                return c.chi
        raise ValidationError(f"no nonempty stratum with stabilizer {key}")

    @property
    def all_signs_positive(self) -> bool:
        return all(o.sign == 1 for c in self.strata for o in c.orbits)


def _full_system_count(
    problem: ChartProblem, section: SectionDatum, solver_seed: int, threads: int = 1
):
    """Distinct zeros of the unrestricted system, as an independent check."""
    if problem.rep_v.dim != problem.rep_w.dim:
        return None
    if not 1 <= problem.rep_v.dim <= MAX_SOLVE_VARS:
        return None
    p = _clip(section.poly)
    try:
        system = PolySystem(
            p.nvars, [p.to_terms(j) for j in range(p.dimw)]
        )
    except ValidationError:
        return None
    sol = solve_system(system, seed=solver_seed, threads=threads)
    return len(sol)


def euler_counts(
    problem: ChartProblem,
    section: SectionDatum,
    auto_perturb: bool = True,
    always_perturb: bool = False,
    perturb_seed: int = REP_SEED,
    magnitude: float = PERTURB_MAG,
    solver_seed: int = SOLVE_SEED,
    threads: int = 1,
) -> EulerReport:
    """Count zero orbits per stratum, perturbing away degeneracy.

    The given section is tried as-is (unless always_perturb); if any
    zero fails its certificate or a stratum shows a degenerate zero set,
    a random equivariant perturbation is added and the count rerun, up
    to five draws.  The weighted total of the final counts is compared
    against the plain solver's distinct-zero count of the full system.
    """
    attempts = 0
    current = section
    last_degeneracies: list[str] = []
    for trial in range(_MAX_PERTURB_TRIES + 1):
        if trial > 0 or always_perturb:
            if not auto_perturb and not always_perturb:
                break
            attempts += 1
            current = perturb(section, seed=perturb_seed + trial, magnitude=magnitude)
        counts, degeneracies = enumerate_zero_orbits(
            problem, current, solver_seed=solver_seed, threads=threads
        )
        last_degeneracies = degeneracies
        if not degeneracies:
            total = sum(
                c.chi * (problem.group.order // len(c.members)) for c in counts
            )
            oracle = _full_system_count(problem, current, solver_seed, threads)
            return EulerReport(
                problem=problem,
                section=current,
                strata=tuple(counts),
                aggregates=aggregate_stabilized(problem, counts),
                total_weighted=total,
                oracle_distinct=oracle,
                consistent=None if oracle is None else (oracle == total),
                attempts=attempts,
            )
        if not auto_perturb:
            break
    raise NumericalError(
        "persistent degeneracy after "
        f"{attempts} perturbation draws: {'; '.join(last_degeneracies[:3])}"
    )


@dataclass(frozen=True)
class PropernessRecord:
    """Escape-to-infinity check for the zeros on one stratum."""

    class_id: int
    members: tuple[int, ...]
    proper: bool
    witnesses: int


def validate_properness(
    problem: ChartProblem,
    section: SectionDatum,
    solver_seed: int = SOLVE_SEED,
    threads: int = 1,
) -> tuple[PropernessRecord, ...]:
    """Check no stratum's zero set escapes to infinity.

    On each nonempty stratum with variables present, the top-degree
    homogeneous parts of all restricted equations must share no zero on
    a random affine slice of the directions at infinity: the first
    equations plus the slice make a square system, whose solutions are
    filtered through the remaining top forms.
    """
    rep_v, rep_w = problem.rep_v, problem.rep_w
    rng = np.random.Generator(np.random.Philox(key=REP_SEED + 4))
    out = []
    for st in action_strata(rep_v):
        if not st.nonempty or st.fixed_dim == 0:
            continue
        qw = _fixed_basis(rep_w, st.sub)
        fv, fw = st.fixed_dim, qw.shape[1]
        if fw == 0:
            continue
        rp = _restricted_map(section.poly, st.fixed_basis, qw)
        tops = []
        for j in range(fw):
            terms = rp.to_terms(j)
            if not terms:
                tops.append([])
                continue
            d = max(sum(e) for e, _ in terms)
            tops.append([(e, c) for e, c in terms if sum(e) == d])
        r = rng.normal(size=fv) + 1j * rng.normal(size=fv)
        slice_eq = [
            (tuple(1 if i == k else 0 for i in range(fv)), complex(r[k]))
            for k in range(fv)
        ] + [((0,) * fv, -1.0 + 0.0j)]
        head = tops[: fv - 1]
        tail = tops[fv - 1 :]
        witnesses = 0
        if all(head_j for head_j in head):
            system = PolySystem(fv, head + [slice_eq])
            sol = solve_system(system, seed=solver_seed, threads=threads)
            for i in range(len(sol)):
                x = sol.points[i]
                xs = max(1.0, float(np.max(np.abs(x))))
                hit = all(
                    abs(
                        complex(np.sum([c * np.prod(x**np.array(e)) for e, c in eq]))
                    )
                    <= SOLVE_TOL * max(1.0, rp.coeff_norm()) * xs**rp.degree
                    for eq in tail
                    if eq
                )
                if hit and tail:
                    witnesses += 1
        else:
            # a vanishing top form leaves a free direction at infinity
            witnesses = -1
        out.append(
            PropernessRecord(
                class_id=st.class_id,
                members=st.sub.members,
                proper=witnesses == 0,
                witnesses=witnesses,
            )
        )
    return tuple(out)


@dataclass(frozen=True)
class AdjacencyRecord:
    """Expected-dimension comparison across one stratum adjacency."""

    small_class: int
    big_class: int
    small_dim: int
    big_dim: int
    ok: bool


def dimension_audit(problem: ChartProblem) -> tuple[tuple[AdjacencyRecord, ...], bool]:
    """Check boundary strata never gain expected dimension.

    Zeros limiting onto a bigger-stabilizer stratum land in a space whose
    generic zero set must not be larger than the one they left; each
    adjacent nonempty pair is checked.  No adjacent pairs means the audit
    passes vacuously (an isolated stratum has empty boundary).
    """
    strata = [st for st in action_strata(problem.rep_v) if st.nonempty]
    dims = {}
    for st in strata:
        fw = _fixed_basis(problem.rep_w, st.sub).shape[1]
        dims[st.class_id] = 2 * (st.fixed_dim - fw)
    by_class: dict[int, list[Subgroup]] = {}
    for sub in subgroups(problem.group):
        by_class.setdefault(sub.class_id, []).append(sub)
    records = []
    for a in strata:
        for b in strata:
            if a.class_id == b.class_id:
                continue
            big = set(b.sub.members)
            adjacent = any(
                set(u.members) < big for u in by_class[a.class_id]
            )
            if not adjacent:
                continue
            records.append(
                AdjacencyRecord(
                    small_class=a.class_id,
                    big_class=b.class_id,
                    small_dim=dims[a.class_id],
                    big_dim=dims[b.class_id],
                    ok=dims[b.class_id] <= dims[a.class_id],
                )
            )
    return tuple(records), all(r.ok for r in records)


@dataclass(frozen=True, eq=False)
class InvarianceReport:
    """Counts across perturbation seeds and along a section homotopy."""

    tables: tuple
    invariant: bool
    homotopy_checked: int
    homotopy_failures: int
    max_match_distance: float


def _mid_section(a: SectionDatum, b: SectionDatum, t: float) -> SectionDatum:
    p = a.poly * (1.0 - t) + b.poly * t
    return SectionDatum(a.problem, p, perturbed=True)


def _table_of(report: EulerReport):
    return tuple((c.class_id, c.chi) for c in report.strata)


def _match_distance(ra: EulerReport, rb: EulerReport) -> float:
    """Greedy nearest matching of orbit representatives, per stratum."""
    worst = 0.0
    for ca, cb in zip(ra.strata, rb.strata):
        reps_b = [o.representative for o in cb.orbits]
        for oa in ca.orbits:
            if not reps_b:
                return np.inf
            dists = [
                float(np.max(np.abs(oa.representative - rb_)))
                for rb_ in reps_b
            ]
            j = int(np.argmin(dists))
            worst = max(worst, dists[j])
            reps_b.pop(j)
    return worst


def invariance_check(
    problem: ChartProblem,
    section: SectionDatum,
    seeds=tuple(range(10)),
    magnitude: float = PERTURB_MAG,
    solver_seed: int = SOLVE_SEED,
    max_refine: int = 4,
) -> InvarianceReport:
    """Counts must not depend on the perturbation draw.

    Each seed perturbs the section independently and the count tables
    must agree.  Between consecutive perturbed sections a straight-line
    homotopy is sampled; a sample that lands on a degenerate section is
    refined away up to max_refine times before being skipped.
    """
    reports = []
    for s in seeds:
        reports.append(
            euler_counts(
                problem,
                section,
                always_perturb=True,
                perturb_seed=REP_SEED + 1000 * (s + 1),
                magnitude=magnitude,
                solver_seed=solver_seed,
            )
        )
    tables = [_table_of(r) for r in reports]
    invariant = all(t == tables[0] for t in tables)
    checked = failures = 0
    worst = 0.0
    for ra, rb in zip(reports, reports[1:]):
        worst = max(worst, _match_distance(ra, rb))
        stack = [(0.0, 1.0, 0)]
        while stack:
            lo, hi, depth = stack.pop()
            t = 0.5 * (lo + hi)
            mid = _mid_section(ra.section, rb.section, t)
            counts, degeneracies = enumerate_zero_orbits(
                problem, mid, solver_seed=solver_seed
            )
            checked += 1
            if degeneracies:
                if depth < max_refine:
                    stack.append((lo, t, depth + 1))
                    stack.append((t, hi, depth + 1))
                else:
                    failures += 1
                continue
            if tuple((c.class_id, c.chi) for c in counts) != tables[0]:
                invariant = False
    return InvarianceReport(
        tables=tuple(tables),
        invariant=invariant,
        homotopy_checked=checked,
        homotopy_failures=failures,
        max_match_distance=worst,
    )


def degree_stability_check(
    problem: ChartProblem,
    section: SectionDatum,
    solver_seed: int = SOLVE_SEED,
):
    """Counts and certificate verdicts must agree at degree d and d+1."""
    report_d = euler_counts(problem, section, solver_seed=solver_seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        bigger = make_problem(
            problem.group,
            problem.rep_v,
            problem.rep_w,
            problem.degree + 1,
            allow_low_degree=True,
        )
    lifted = SectionDatum(bigger, section.poly.with_degree(problem.degree + 1))
    report_d1 = euler_counts(bigger, lifted, solver_seed=solver_seed)
    tables_equal = _table_of(report_d) == _table_of(report_d1)
    verdicts_d = all(o.certificate.passed for c in report_d.strata for o in c.orbits)
    verdicts_d1 = all(
        o.certificate.passed for c in report_d1.strata for o in c.orbits
    )
    return tables_equal and verdicts_d == verdicts_d1, report_d, report_d1
