"""Command-line driver.

Commands: ``fop basis|strata|solve|euler|audit|selftest``.  Exit codes:
0 success, 2 validation error, 3 numerical failure (failed certificate,
solver breakdown, failed audit or selftest), 1 internal error.

Seed resolution order: ``--seed`` flag, then the FOP_SEED environment
variable, then the problem file's ``options.seed``, then the built-in
default.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .equipoly import equivariant_basis, poly_dimension
from .errors import NumericalError, ValidationError
from .euler import dimension_audit, euler_counts, validate_properness
from .fileio import (
    build_problem,
    canonical_digest,
    encode_complex,
    load_json,
    report_to_dict,
    save_json,
    solutions_to_dict,
    system_from_dict,
)
from .psolve import solve_system
from .selftest import CRITERIA, run_all
from .strata import action_strata, section_space_info
from .tolerances import PERTURB_MAG, SOLVE_SEED


def _env_seed() -> int | None:
    raw = os.environ.get("FOP_SEED")
    if raw is None or raw == "":
        return None
    try:
        return int(raw, 0)
    except ValueError:
        raise ValidationError(f"FOP_SEED must be an integer, got {raw!r}")


def _resolve_seed(args, file_options: dict) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = _env_seed()
    if env is not None:
        return env
    if "seed" in file_options:
        return file_options["seed"]
    return SOLVE_SEED


def _resolve_magnitude(args, file_options: dict) -> float:
    if getattr(args, "magnitude", None) is not None:
        return args.magnitude
    return file_options.get("magnitude", PERTURB_MAG)


def _load_problem_args(args):
    doc = load_json(args.file)
    if args.degree_override is not None:
        doc = dict(doc)
        old = doc.get("degree")
        doc["degree"] = args.degree_override
        print(
            f"warning: overriding file degree {old} with {args.degree_override}",
            file=sys.stderr,
        )
    problem, section, options = build_problem(doc, where=str(args.file))
    return doc, problem, section, options


def _emit(args, doc: dict) -> None:
    if args.output:
        save_json(args.output, doc, pretty=not args.json)
    else:
        indent = None if args.json else 2
        json.dump(doc, sys.stdout, indent=indent, sort_keys=True, allow_nan=False)
        sys.stdout.write("\n")


def _fmt_complex(z: complex) -> str:
    re, im = z.real, z.imag
    if abs(im) < 1e-12 * max(1.0, abs(re)):
        return f"{re:.6g}"
    if abs(re) < 1e-12 * max(1.0, abs(im)):
        return f"{im:.6g}j"
    return f"({re:.6g}{im:+.6g}j)"


def _fmt_monomial(exps, nvars: int) -> str:
    if not any(exps):
        return "1"
    parts = []
    for i, e in enumerate(exps):
        if e == 0:
            continue
        name = "z" if nvars == 1 else f"z{i}"
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts)


def _fmt_poly(p, coordinate: int) -> str:
    terms = p.to_terms(coordinate)
    if not terms:
        return "0"
    parts = []
    for exps, c in terms:
        mono = _fmt_monomial(exps, p.nvars)
        label = _fmt_complex(c)
        if mono == "1":
            parts.append(label)
        elif label == "1":
            parts.append(mono)
        elif label == "-1":
            parts.append(f"-{mono}")
        else:
            parts.append(f"{label}*{mono}")
    return " + ".join(parts).replace("+ -", "- ")


def cmd_basis(args) -> int:
    doc, problem, _, _ = _load_problem_args(args)
    basis = equivariant_basis(problem.rep_v, problem.rep_w, problem.degree)
    dim = poly_dimension(problem.rep_v, problem.rep_w, problem.degree)
    if args.json:
        out = {
            "format": "fop.basis/1",
            "tool_version": __version__,
            "input_digest": canonical_digest(doc),
            "degree": problem.degree,
            "dimension": dim,
            "maps": [
                {
                    "degree": p.actual_degree(),
                    "coordinates": [
                        [
                            {
                                "exponents": list(e),
                                "coefficient": encode_complex(c),
                            }
                            for e, c in p.to_terms(j)
                        ]
                        for j in range(p.dimw)
                    ],
                }
                for p in basis
            ],
        }
        json.dump(out, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
        return 0
    print(f"equivariant maps of degree <= {problem.degree}: dimension {dim}")
    for i, p in enumerate(basis):
        rows = [
            _fmt_poly(p, j) for j in range(p.dimw)
        ]
        body = ", ".join(rows) if p.dimw > 1 else rows[0]
        if p.dimw > 1:
            body = f"({body})"
        print(f"  [{i:2d}] deg {p.actual_degree()}  {body}")
    return 0


def cmd_strata(args) -> int:
    doc, problem, section, _ = _load_problem_args(args)
    infos = []
    for st in action_strata(problem.rep_v):
        info = section_space_info(
            problem.rep_v, problem.rep_w, st.sub, problem.degree
        )
        infos.append((st, info))
    records, audit_ok = dimension_audit(problem)
    if args.json:
        out = {
            "format": "fop.strata/1",
            "tool_version": __version__,
            "input_digest": canonical_digest(doc),
            "strata": [
                {
                    "class_id": st.class_id,
                    "members": list(st.sub.members),
                    "order": st.sub.order,
                    "class_size": st.class_size,
                    "nonempty": st.nonempty,
                    "fixed_dim_source": st.fixed_dim,
                    "moving_dim_source": st.moving_dim,
                    "fixed_dim_target": info.fixed_dim_target,
                    "section_dim": info.section_dim,
                    "zero_dim": info.zero_dim,
                    "surjective": info.surjective,
                }
                for st, info in infos
            ],
            "dimension_audit": {
                "ok": audit_ok,
                "pairs": [
                    {
                        "small_class": r.small_class,
                        "big_class": r.big_class,
                        "small_dim": r.small_dim,
                        "big_dim": r.big_dim,
                        "ok": r.ok,
                    }
                    for r in records
                ],
            },
        }
        json.dump(out, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
        return 0 if audit_ok else 3
    print(
        f"{'class':>5} {'members':<16} {'size':>4} {'nonempty':>8} "
        f"{'fix V':>5} {'fix W':>5} {'n':>4} {'sec dim':>7} {'onto':>5}"
    )
    for st, info in infos:
        onto = "-" if info.surjective is None else ("yes" if info.surjective else "NO")
        print(
            f"{st.class_id:>5} {str(list(st.sub.members)):<16} {st.class_size:>4} "
            f"{'yes' if st.nonempty else 'no':>8} {st.fixed_dim:>5} "
            f"{info.fixed_dim_target:>5} {info.zero_dim if st.nonempty else '-':>4} "
            f"{info.section_dim:>7} {onto:>5}"
        )
    print(
        "dimension audit:",
        "ok" if audit_ok else "VIOLATED",
        f"({len(records)} adjacent pairs)",
    )
    return 0 if audit_ok else 3


def cmd_solve(args) -> int:
    doc = load_json(args.file)
    system = system_from_dict(doc, where=str(args.file))
    seed = args.seed if args.seed is not None else (_env_seed() or SOLVE_SEED)
    sol = solve_system(system, seed=seed, threads=args.threads)
    out = solutions_to_dict(sol)
    out["input_digest"] = canonical_digest(doc)
    _emit(args, out)
    return 0


def cmd_euler(args) -> int:
    doc, problem, section, options = _load_problem_args(args)
    seed = _resolve_seed(args, options)
    magnitude = _resolve_magnitude(args, options)
    report = euler_counts(
        problem,
        section,
        perturb_seed=seed,
        magnitude=magnitude,
        solver_seed=seed,
        threads=args.threads,
    )
    out = report_to_dict(report, problem_doc=doc, seed=seed)
    _emit(args, out)
    return 0


def cmd_audit(args) -> int:
    doc, problem, section, options = _load_problem_args(args)
    seed = _resolve_seed(args, options)
    records, audit_ok = dimension_audit(problem)
    proper = validate_properness(problem, section, solver_seed=seed,
                                 threads=args.threads)
    all_proper = all(r.proper for r in proper)
    surjective_ok = True
    for st in action_strata(problem.rep_v):
        info = section_space_info(problem.rep_v, problem.rep_w, st.sub,
                                  problem.degree)
        if info.surjective is False:
            surjective_ok = False
    ok = audit_ok and all_proper and surjective_ok
    if args.json:
        out = {
            "format": "fop.audit/1",
            "tool_version": __version__,
            "input_digest": canonical_digest(doc),
            "dimension_audit_ok": audit_ok,
            "proper": all_proper,
            "properness": [
                {
                    "class_id": r.class_id,
                    "members": list(r.members),
                    "proper": r.proper,
                    "witnesses": r.witnesses,
                }
                for r in proper
            ],
            "section_space_surjective": surjective_ok,
            "ok": ok,
        }
        json.dump(out, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    else:
        print(f"dimension audit: {'ok' if audit_ok else 'VIOLATED'}")
        for r in proper:
            state = "proper" if r.proper else f"IMPROPER ({r.witnesses} witnesses)"
            print(f"stratum {list(r.members)}: {state}")
        print(f"section spaces surjective: {'yes' if surjective_ok else 'NO'}")
        print(f"audit: {'ok' if ok else 'FAILED'}")
    return 0 if ok else 3


def cmd_selftest(args) -> int:
    numbers = None
    if args.only:
        try:
            numbers = {int(tok) for tok in args.only.split(",")}
        except ValueError:
            raise ValidationError(f"--only wants comma-separated integers, got {args.only!r}")
        known = {c.number for c in CRITERIA}
        if not numbers <= known:
            raise ValidationError(f"unknown criteria {sorted(numbers - known)}")
    _, all_passed = run_all(numbers, out=sys.stdout)
    return 0 if all_passed else 3


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fop",
        description="Equivariant zero-orbit counts over linear group charts.",
    )
    parser.add_argument("--version", action="version", version=f"fop {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_problem=True):
        if with_problem:
            p.add_argument("file", help="problem file (JSON)")
            p.add_argument(
                "--degree-override",
                type=int,
                default=None,
                metavar="D",
                help="replace the file's degree bound (prints a warning)",
            )
        p.add_argument("--json", action="store_true",
                       help="compact machine output")

    p = sub.add_parser("basis", help="print the equivariant map basis")
    add_common(p)
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("strata", help="print isotropy strata and audits")
    add_common(p)
    p.set_defaults(func=cmd_strata)

    p = sub.add_parser("solve", help="solve a plain polynomial system file")
    p.add_argument("file", help="system file (JSON)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--json", action="store_true", help="compact machine output")
    p.add_argument("--output", default=None, metavar="F", help="write to file")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("euler", help="count zero orbits and write a report")
    add_common(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--magnitude", type=float, default=None,
                   help="perturbation size (relative)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--output", default=None, metavar="F", help="write to file")
    p.set_defaults(func=cmd_euler)

    p = sub.add_parser("audit", help="properness, surjectivity, and dimension audits")
    add_common(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("selftest", help="run the acceptance criteria")
    p.add_argument("--only", default=None, metavar="N[,N...]",
                   help="run a subset of criteria by number")
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except BrokenPipeError:
        return 1
    except Exception as exc:  # pragma: no cover - internal errors
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
