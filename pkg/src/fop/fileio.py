"""JSON file formats for problems, reports, systems, and solutions.

All complex numbers are serialized as two-element [re, im] arrays; on
input a bare number is accepted as a real value.  Floats go through
json's shortest round-trip repr, so serialization is bit-exact and a
canonical digest over the sorted compact encoding is stable.

Schema documents live in docs/problem-format.md and
docs/report-format.md.
"""

from __future__ import annotations

import hashlib
import json
import numbers

import numpy as np

from . import __version__
from . import tolerances
from .errors import ValidationError
from .euler import (
    ChartProblem,
    EulerReport,
    SectionDatum,
    make_problem,
    make_section,
)
from .groups import make_group
from .psolve import PolySystem, SolutionSet
from .reps import fixed_subspace, make_rep
from .tolerances import PERTURB_MAG, SOLVE_SEED

PROBLEM_FORMAT = "fop.problem/1"
REPORT_FORMAT = "fop.report/1"
SYSTEM_FORMAT = "fop.system/1"
SOLUTIONS_FORMAT = "fop.solutions/1"


def encode_complex(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def decode_complex(x, where: str = "value") -> complex:
    if isinstance(x, numbers.Real) and not isinstance(x, bool):
        return complex(x)
    if (
        isinstance(x, (list, tuple))
        and len(x) == 2
        and all(isinstance(t, numbers.Real) and not isinstance(t, bool) for t in x)
    ):
        return complex(x[0], x[1])
    raise ValidationError(f"{where}: expected a number or [re, im] pair, got {x!r}")


def canonical_digest(doc) -> str:
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return "sha256:" + hashlib.sha256(blob.encode("utf-8")).hexdigest()


def load_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: top level must be a JSON object")
    return doc


def save_json(path, doc, pretty: bool = True) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2 if pretty else None, sort_keys=True,
                  allow_nan=False)
        fh.write("\n")


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise ValidationError(f"{where}: missing required key {key!r}")
    return doc[key]


def _check_format(doc: dict, expected: str, where: str) -> None:
    got = doc.get("format")
    if got != expected:
        raise ValidationError(f"{where}: format must be {expected!r}, got {got!r}")


def _decode_rep_spec(raw: dict, where: str) -> dict:
    """Turn file-level rep specs into the in-memory form.

    The only transformation is converting [re, im] matrix entries of
    generator matrices into complex numbers.
    """
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ValidationError(f"{where}: rep spec must be an object with 'kind'")
    spec = dict(raw)
    spec.pop("split", None)
    if spec["kind"] == "matrices":
        gens = _require(spec, "generators", where)
        decoded = []
        for gi, mat in enumerate(gens):
            if not isinstance(mat, list) or not all(isinstance(r, list) for r in mat):
                raise ValidationError(f"{where}: generator {gi} must be a matrix")
            decoded.append(
                [
                    [decode_complex(e, f"{where}: generator {gi}") for e in row]
                    for row in mat
                ]
            )
        spec["generators"] = decoded
    if spec["kind"] == "weights":
        ws = _require(spec, "weights", where)
        if not isinstance(ws, list):
            raise ValidationError(f"{where}: weights must be a list")
        spec["weights"] = [tuple(w) if isinstance(w, list) else w for w in ws]
    return spec


def _decode_terms(raw, where: str) -> list:
    if not isinstance(raw, list) or not raw:
        raise ValidationError(f"{where}: terms must be a nonempty list")
    out = []
    for ti, t in enumerate(raw):
        tw = f"{where}: term {ti}"
        if not isinstance(t, dict):
            raise ValidationError(f"{tw}: must be an object")
        exps = _require(t, "exponents", tw)
        coord = _require(t, "coordinate", tw)
        coef = decode_complex(_require(t, "coefficient", tw), tw)
        if not isinstance(exps, list) or not all(
            isinstance(e, int) and e >= 0 for e in exps
        ):
            raise ValidationError(f"{tw}: exponents must be nonnegative integers")
        if not isinstance(coord, int) or coord < 0:
            raise ValidationError(f"{tw}: coordinate must be a nonnegative integer")
        out.append((tuple(exps), coord, coef))
    return out


def _check_split(rep, raw_spec, where: str) -> None:
    split = raw_spec.get("split") if isinstance(raw_spec, dict) else None
    if split is None:
        return
    if not isinstance(split, dict):
        raise ValidationError(f"{where}: split must be an object")
    fixed = int(fixed_subspace(rep).shape[1]) if rep.dim else 0
    want_fixed = split.get("fixed")
    want_moving = split.get("moving")
    if want_fixed is not None and want_fixed != fixed:
        raise ValidationError(
            f"{where}: declared fixed dimension {want_fixed} but the "
            f"invariant subspace has dimension {fixed}"
        )
    if want_moving is not None and want_moving != rep.dim - fixed:
        raise ValidationError(
            f"{where}: declared moving dimension {want_moving} but the "
            f"complement has dimension {rep.dim - fixed}"
        )


def _check_options(doc: dict) -> dict:
    opts = doc.get("options", {})
    if not isinstance(opts, dict):
        raise ValidationError("options must be an object")
    known = {"seed", "magnitude", "tolerances"}
    extra = set(opts) - known
    if extra:
        raise ValidationError(f"unknown options: {sorted(extra)}")
    out = {}
    if "seed" in opts:
        if not isinstance(opts["seed"], int):
            raise ValidationError("options.seed must be an integer")
        out["seed"] = opts["seed"]
    if "magnitude" in opts:
        mag = opts["magnitude"]
        if not isinstance(mag, numbers.Real) or isinstance(mag, bool) or mag <= 0:
            raise ValidationError("options.magnitude must be a positive number")
        out["magnitude"] = float(mag)
    if "tolerances" in opts:
        tols = opts["tolerances"]
        if not isinstance(tols, dict):
            raise ValidationError("options.tolerances must be an object")
        for name, value in tols.items():
            current = getattr(tolerances, name, None)
            if current is None or name.startswith("_"):
                raise ValidationError(f"unknown tolerance {name!r}")
            if value != current:
                # Constants are baked in at import; a file cannot retune them.
                raise ValidationError(
                    f"tolerance {name!r} differs from the built-in value "
                    f"{current!r}; runtime overrides are not supported"
                )
    return out


def build_problem(doc: dict, where: str = "problem") -> tuple:
    """Validate a problem document and build the live objects.

    Returns (problem, section, options) where options holds any seed
    and magnitude from the file.
    """
    _check_format(doc, PROBLEM_FORMAT, where)
    group = make_group(_require(doc, "group", where))
    raw_v = _require(doc, "source", where)
    raw_w = _require(doc, "target", where)
    rep_v = make_rep(group, _decode_rep_spec(raw_v, f"{where}.source"))
    rep_w = make_rep(group, _decode_rep_spec(raw_w, f"{where}.target"))
    _check_split(rep_w, raw_w, f"{where}.target")
    degree = _require(doc, "degree", where)
    if not isinstance(degree, int):
        raise ValidationError(f"{where}: degree must be an integer")
    options = _check_options(doc)
    problem = make_problem(group, rep_v, rep_w, degree)
    raw_sec = _require(doc, "section", where)
    if not isinstance(raw_sec, dict):
        raise ValidationError(f"{where}.section: must be an object")
    has_terms = "terms" in raw_sec
    has_basis = "basis_coefficients" in raw_sec
    if has_terms == has_basis:
        raise ValidationError(
            f"{where}.section: give exactly one of 'terms' or 'basis_coefficients'"
        )
    if has_terms:
        terms = _decode_terms(raw_sec["terms"], f"{where}.section")
        section = make_section(problem, terms)
    else:
        raw_coeffs = raw_sec["basis_coefficients"]
        if not isinstance(raw_coeffs, list):
            raise ValidationError(f"{where}.section: basis_coefficients must be a list")
        coeffs = [
            decode_complex(c, f"{where}.section: basis coefficient {i}")
            for i, c in enumerate(raw_coeffs)
        ]
        from .euler import section_from_basis

        section = section_from_basis(problem, coeffs)
    return problem, section, options


def load_problem(path) -> tuple:
    """Load a problem file.  Returns (doc, problem, section, options)."""
    doc = load_json(path)
    problem, section, options = build_problem(doc, where=str(path))
    return doc, problem, section, options


def problem_doc(
    group_spec: dict,
    source_spec: dict,
    target_spec: dict,
    degree: int,
    terms=None,
    basis_coefficients=None,
    seed: int | None = None,
    magnitude: float | None = None,
) -> dict:
    """Assemble (and validate) a problem document from in-memory parts."""
    section: dict = {}
    if terms is not None:
        section["terms"] = [
            {
                "exponents": list(e),
                "coordinate": int(c),
                "coefficient": encode_complex(z),
            }
            for (e, c, z) in terms
        ]
    if basis_coefficients is not None:
        section["basis_coefficients"] = [encode_complex(z) for z in basis_coefficients]
    doc = {
        "format": PROBLEM_FORMAT,
        "group": group_spec,
        "source": source_spec,
        "target": target_spec,
        "degree": int(degree),
        "section": section,
    }
    options = {}
    if seed is not None:
        options["seed"] = int(seed)
    if magnitude is not None:
        options["magnitude"] = float(magnitude)
    if options:
        doc["options"] = options
    build_problem(doc)
    return doc


def _certificate_to_dict(cert) -> dict | None:
    if cert is None:
        return None
    return {
        "residual": float(cert.residual),
        "ring_margin": None if cert.ring_margin is None else float(cert.ring_margin),
        "normal_margins": [
            {
                "irrep_index": m.irrep_index,
                "irrep_dim": m.irrep_dim,
                "mult_source": m.mult_source,
                "mult_target": m.mult_target,
                "margin": None if m.margin is None else float(m.margin),
            }
            for m in cert.normal_margins
        ],
        "scale": float(cert.scale),
        "threshold": float(cert.threshold),
        "passed": bool(cert.passed),
        "sign": int(cert.sign),
    }


def report_to_dict(
    report: EulerReport,
    problem_doc: dict | None = None,
    seed: int | None = None,
) -> dict:
    """Serialize a count report.  ``problem_doc`` is echoed and digested."""
    sec = report.section
    doc = {
        "format": REPORT_FORMAT,
        "tool_version": __version__,
        "input_digest": None if problem_doc is None else canonical_digest(problem_doc),
        "problem": problem_doc,
        "degree": report.problem.degree,
        "group_order": report.problem.group.order,
        "seed": SOLVE_SEED if seed is None else int(seed),
        "perturbed": bool(sec.perturbed),
        "perturb_seed": sec.perturb_seed,
        "perturb_magnitude": None if sec.magnitude is None else float(sec.magnitude),
        "attempts": int(report.attempts),
        "strata": [
            {
                "class_id": c.class_id,
                "members": list(c.members),
                "zero_dim": c.zero_dim,
                "chi": c.chi,
                "orbits": [
                    {
                        "representative": [encode_complex(z) for z in o.representative],
                        "points": [
                            [encode_complex(z) for z in p] for p in o.points
                        ],
                        "size": o.size,
                        "sign": o.sign,
                        "stabilizer": list(o.stabilizer.members),
                        "certificate": _certificate_to_dict(o.certificate),
                    }
                    for o in c.orbits
                ],
            }
            for c in report.strata
        ],
        "aggregates": [
            {
                "class_ids": list(a.class_ids),
                "chi_total": a.chi_total,
                "local_order": a.local_order,
            }
            for a in report.aggregates
        ],
        "total_weighted": report.total_weighted,
        "oracle_distinct": report.oracle_distinct,
        "consistent": report.consistent,
    }
    return doc


def load_report(path) -> dict:
    doc = load_json(path)
    _check_format(doc, REPORT_FORMAT, str(path))
    return doc


def system_from_dict(doc: dict, where: str = "system") -> PolySystem:
    _check_format(doc, SYSTEM_FORMAT, where)
    nvars = _require(doc, "nvars", where)
    if not isinstance(nvars, int) or nvars < 1:
        raise ValidationError(f"{where}: nvars must be a positive integer")
    raw_eqs = _require(doc, "equations", where)
    if not isinstance(raw_eqs, list) or not raw_eqs:
        raise ValidationError(f"{where}: equations must be a nonempty list")
    equations = []
    for ei, eq in enumerate(raw_eqs):
        ew = f"{where}: equation {ei}"
        if not isinstance(eq, list) or not eq:
            raise ValidationError(f"{ew}: must be a nonempty list of terms")
        terms = []
        for ti, t in enumerate(eq):
            tw = f"{ew}, term {ti}"
            if not isinstance(t, dict):
                raise ValidationError(f"{tw}: must be an object")
            exps = _require(t, "exponents", tw)
            coef = decode_complex(_require(t, "coefficient", tw), tw)
            if (
                not isinstance(exps, list)
                or len(exps) != nvars
                or not all(isinstance(e, int) and e >= 0 for e in exps)
            ):
                raise ValidationError(
                    f"{tw}: exponents must be {nvars} nonnegative integers"
                )
            terms.append((tuple(exps), coef))
        equations.append(terms)
    return PolySystem(nvars, equations)


def load_system(path) -> PolySystem:
    return system_from_dict(load_json(path), where=str(path))


def system_doc(system: PolySystem) -> dict:
    return {
        "format": SYSTEM_FORMAT,
        "nvars": system.nvars,
        "equations": [
            [
                {"exponents": [int(e) for e in exps], "coefficient": encode_complex(c)}
                for exps, c in zip(np.asarray(eq[0]).tolist(), np.asarray(eq[1]))
            ]
            for eq in system.equations
        ],
    }


def solutions_to_dict(sol: SolutionSet) -> dict:
    return {
        "format": SOLUTIONS_FORMAT,
        "tool_version": __version__,
        "points": [[encode_complex(z) for z in p] for p in sol.points],
        "multiplicities": [int(m) for m in sol.multiplicities],
        "residuals": [float(r) for r in sol.residuals],
        "bezout": int(sol.bezout),
        "diverged": int(sol.diverged),
        "lost": int(sol.lost),
        "seed": int(sol.seed),
        "gamma": encode_complex(sol.gamma),
        "backend": sol.backend,
        "distinct": len(sol),
        "total_with_multiplicity": sol.total_with_multiplicity,
    }
