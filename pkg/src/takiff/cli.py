"""Command-line frontend: ``takiff <subcommand> ...``.

Output is canonical JSON on stdout (or ``--out FILE``); ``--pretty`` prints a
readable table instead.  Exit status: 0 success, 1 a verification failed,
2 bad usage or malformed input.
"""
from __future__ import annotations

import argparse
import hashlib
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__

DEFAULT_LEVELS = '{"k": "1", "tk": "1"}'
DEFAULT_WEIGHT = '{"n": "0", "e": "0", "tn": "0", "te": "0"}'


class UsageError(Exception):
    pass


def parse_json(text: str, what: str):
    """JSON from a literal or @file; malformed input is a usage error with position."""
    if text.startswith("@"):
        try:
            text = Path(text[1:]).read_text()
        except OSError as exc:
            raise UsageError(f"{what}: cannot read {text[1:]}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what}: malformed JSON at line {exc.lineno} column {exc.colno} "
                         f"(char {exc.pos}): {exc.msg}") from None


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _levels(args):
    from .algebra import LevelPair
    from .rational import to_q
    d = parse_json(args.levels, "--levels")
    try:
        return LevelPair(to_q(d["k"]), to_q(d["tk"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"--levels: need k and tk (nonzero tk), got {d!r}: {exc}") from None


def _aff_label(text: str, what: str):
    from .affine import AffClassLabel
    d = parse_json(text, what)
    try:
        return AffClassLabel.from_json(d)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{what}: bad class label {d!r}: {exc}") from None


def _spec(arg: str):
    from .algebra import resolve_spec
    try:
        return resolve_spec(arg)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--spec: malformed JSON at line {exc.lineno} column {exc.colno} "
                         f"(char {exc.pos}): {exc.msg}") from None
    except (OSError, KeyError, ValueError) as exc:
        raise UsageError(f"--spec: {exc}") from None


# -- subcommands ------------------------------------------------------------------------------
# each returns (payload, ok); payload is a JSON-able object or a str (CSV)

def cmd_check_jacobi(args):
    from .algebra import check_jacobi
    rep = check_jacobi(_spec(args.spec))
    return rep.to_json(), rep.passed


def cmd_extend(args):
    from .algebra import spec_to_json, takiff_extend
    try:
        return spec_to_json(takiff_extend(_spec(args.spec))), True
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _fin_label(cls: str, weights: dict, side: str):
    from .findim import ClassLabel
    d = dict(weights.get(side, {}))
    if cls.lstrip().startswith("{"):
        d.update(parse_json(cls, f"--{side}"))
    else:
        d["kind"] = cls
    try:
        return ClassLabel.from_json(d)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"--{side}: bad class {d!r}: {exc}") from None


def cmd_tensor(args):
    from .findim import decompose, module_for_label, tensor
    weights = parse_json(args.weights, "--weights")
    a, b = _fin_label(args.left, weights, "left"), _fin_label(args.right, weights, "right")
    rep = decompose(tensor(module_for_label(a), module_for_label(b)), args.full_structure)
    out = rep.to_json()
    if not args.full_structure:
        del out["summands"]
    return out, True


def cmd_verma(args):
    from .affine import AffWeight, all_singular_vectors, build_verma
    from .rational import fmt_q
    d = parse_json(args.weight, "--weight")
    try:
        w = AffWeight(d.get("n", "0"), d.get("e", "0"), d.get("tn", "0"), d.get("te", "0"), _levels(args))
        gv = build_verma(w, args.cutoff)
    except (TypeError, ValueError, AttributeError) as exc:
        raise UsageError(str(exc)) from None
    if args.multiplicities and not args.singular:
        buf = io.StringIO()
        buf.write("grade,n_offset,dimension\n")
        for g, row in gv.multiplicities().items():
            for off, dim in row.items():
                buf.write(f"{g},{fmt_q(off)},{dim}\n")
        return buf.getvalue(), True
    out = {"weight": w.to_json(), "cutoff": args.cutoff, "grade_dims": gv.grade_dims()}
    if args.multiplicities:
        out["multiplicities"] = [[g, fmt_q(off), dim] for g, row in gv.multiplicities().items()
                                 for off, dim in row.items()]
    if args.singular:
        out["singular"] = [r.to_json(gv) for r in all_singular_vectors(gv)]
    return out, True


def cmd_sugawara_check(args):
    from .affine import AffWeight, InducedModule, build_verma, trivial_seed
    from .sugawara import ModeRealisation, build_T_general, build_T_gl11, check_primary, check_virasoro
    spec = _spec(args.spec)
    levels = _levels(args)
    mr = range(-args.mode_range, args.mode_range + 1)
    try:
        if spec.name == "gl11_takiff":
            d = parse_json(args.weight, "--weight")
            w = AffWeight(d.get("n", "0"), d.get("e", "0"), d.get("tn", "0"), d.get("te", "0"), levels)
            rep = ModeRealisation(build_verma(w, args.cutoff), build_T_gl11(levels))
            module = "verma " + json.dumps(w.to_json(), sort_keys=True)
        else:
            rep = ModeRealisation(InducedModule(spec, levels, trivial_seed(spec), args.cutoff),
                                  build_T_general(spec, levels))
            module = "vacuum"
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    vir = check_virasoro(rep, mr, mr)
    prim = check_primary(rep, mr, mr)
    out = {"spec": spec.name, "module": module, "cutoff": args.cutoff, "mode_range": args.mode_range,
           "central_charge": vir.to_json().get("central_charge"),
           "virasoro": vir.to_json(), "primary": prim.to_json(),
           "passed": vir.passed and prim.passed}
    return out, out["passed"]


def _eval_point(text: str):
    from .characters import ModularPoint
    vals = {}
    for part in text.split(","):
        if not part.strip():
            continue
        key, sep, val = part.partition("=")
        key = key.strip()
        if not sep or key not in ("tau", "nu", "mu", "tmu", "tnu", "t", "tt"):
            raise UsageError(f"--eval: expected key=value with keys tau, nu, mu, tmu, tnu, t, tt; got {part!r}")
        try:
            vals[key] = complex(val.strip().replace("i", "j"))
        except ValueError:
            raise UsageError(f"--eval: bad number {val!r}") from None
    if "tau" not in vals:
        raise UsageError("--eval needs tau")
    try:
        return ModularPoint(**vals)
    except ValueError as exc:
        raise UsageError(f"--eval: {exc}") from None


def cmd_character(args):
    from .characters import character, eval_at
    lab = _aff_label(args.label, "--label")
    levels = _levels(args)
    try:
        ch = character(lab, levels, args.cutoff, args.super)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = ch.to_json()
    if args.eval:
        p = _eval_point(args.eval)
        try:
            out["eval"] = {"point": {k: repr(v) for k, v in sorted(vars(p).items())},
                           **eval_at(ch, p).to_json()}
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return out, True


def cmd_verlinde(args):
    from .verlinde import verlinde
    a, b = _aff_label(args.a, "--a"), _aff_label(args.b, "--b")
    return verlinde(a, b, _levels(args)).to_json(), True


def cmd_fusion(args):
    from .verlinde import fusion_lift
    a, b = _aff_label(args.a, "--a"), _aff_label(args.b, "--b")
    return fusion_lift(a, b, _levels(args)).to_json(), True


def _run_criterion(number):
    from .acceptance import run
    return run(number).to_json()


def cmd_selftest(args):
    from .acceptance import CRITERIA
    numbers = sorted(CRITERIA)
    if args.criteria:
        try:
            numbers = [int(x) for x in args.criteria.split(",")]
        except ValueError:
            raise UsageError("--criteria: comma-separated numbers") from None
        if set(numbers) - set(CRITERIA):
            raise UsageError(f"--criteria: choose from {sorted(CRITERIA)}")
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_run_criterion, numbers))
    else:
        results = [_run_criterion(n) for n in numbers]
    for r in results:
        status = "PASS" if r["passed"] else "FAIL"
        print(f"{status} criterion {r['criterion']}: {r['title']}", file=sys.stderr)
    ok = all(r["passed"] for r in results)
    return {"criteria": results, "passed": ok}, ok


# -- pretty printing ---------------------------------------------------------------------------

def _scalar(v) -> str:
    return v if isinstance(v, str) else json.dumps(v, sort_keys=True)


def pretty(obj, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        width = max((len(k) for k in obj), default=0)
        for k in sorted(obj):
            v = obj[k]
            if isinstance(v, (dict, list)) and v and not _flat_list(v):
                lines.append(f"{pad}{k}:")
                lines.append(pretty(v, indent + 1))
            else:
                lines.append(f"{pad}{k.ljust(width)}  {_scalar(v)}")
    elif isinstance(obj, list):
        if obj and all(isinstance(x, dict) for x in obj):
            cols = sorted({k for x in obj for k in x if not isinstance(x[k], (dict, list))})
            rows = [[_scalar(x.get(c, "")) for c in cols] for x in obj]
            widths = [max(len(c), *(len(r[i]) for r in rows)) for i, c in enumerate(cols)]
            lines.append(pad + "  ".join(c.ljust(w) for c, w in zip(cols, widths)))
            for r in rows:
                lines.append(pad + "  ".join(s.ljust(w) for s, w in zip(r, widths)))
        else:
            lines.extend(pad + _scalar(x) for x in obj)
    else:
        lines.append(pad + _scalar(obj))
    return "\n".join(lines)


def _flat_list(v) -> bool:
    return isinstance(v, list) and all(not isinstance(x, (dict, list)) for x in v)


# -- parser ----------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the result here instead of stdout")
    common.add_argument("--pretty", action="store_true", help="human-readable output")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sample sweeps")
    common.add_argument("--manifest", help="write a run manifest (JSON) here")

    p = argparse.ArgumentParser(prog="takiff", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"takiff {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check-jacobi", parents=[common], help="graded Jacobi identity check")
    s.add_argument("--spec", required=True, help="spec file or builtin name")
    s.set_defaults(func=cmd_check_jacobi)

    s = sub.add_parser("extend", parents=[common], help="Takiff double of a superalgebra")
    s.add_argument("--spec", required=True)
    s.set_defaults(func=cmd_extend)

    s = sub.add_parser("tensor", parents=[common], help="decompose a finite tensor product")
    s.add_argument("--left", required=True, help="kind (A, S, T, ...) or a label as JSON")
    s.add_argument("--right", required=True)
    s.add_argument("--weights", default="{}", help='{"left": {...}, "right": {...}}')
    s.add_argument("--full-structure", action="store_true", help="also split into indecomposables")
    s.set_defaults(func=cmd_tensor)

    s = sub.add_parser("verma", parents=[common], help="affine Verma module data")
    s.add_argument("--weight", default=DEFAULT_WEIGHT)
    s.add_argument("--levels", default=DEFAULT_LEVELS)
    s.add_argument("--cutoff", type=int, required=True)
    s.add_argument("--singular", action="store_true")
    s.add_argument("--multiplicities", action="store_true", help="CSV grade,n_offset,dimension")
    s.set_defaults(func=cmd_verma)

    s = sub.add_parser("sugawara-check", parents=[common], help="Virasoro and primary relations")
    s.add_argument("--spec", required=True)
    s.add_argument("--levels", default=DEFAULT_LEVELS)
    s.add_argument("--weight", default=DEFAULT_WEIGHT, help="Verma label (gl(1|1) double only)")
    s.add_argument("--cutoff", type=int, required=True)
    s.add_argument("--mode-range", type=int, default=2)
    s.set_defaults(func=cmd_sugawara_check)

    s = sub.add_parser("character", parents=[common], help="character or supercharacter series")
    s.add_argument("--label", required=True)
    s.add_argument("--levels", default=DEFAULT_LEVELS)
    s.add_argument("--cutoff", type=int, required=True)
    s.add_argument("--super", action="store_true")
    s.add_argument("--eval", help="tau=...,nu=...[,mu=...,tmu=...,tnu=...,t=...,tt=...]")
    s.set_defaults(func=cmd_character)

    for name, fn, hlp in (("verlinde", cmd_verlinde, "Grothendieck fusion from the Verlinde formula"),
                          ("fusion", cmd_fusion, "fusion rules with status tags")):
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.add_argument("--a", required=True)
        s.add_argument("--b", required=True)
        s.add_argument("--levels", default=DEFAULT_LEVELS)
        s.set_defaults(func=fn)

    s = sub.add_parser("selftest", parents=[common], help="run the acceptance criteria")
    s.add_argument("--criteria", help="comma-separated subset")
    s.set_defaults(func=cmd_selftest)
    return p


def _digest(data: str) -> str:
    return hashlib.sha256(data.encode()).hexdigest()


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    t0 = time.perf_counter()
    try:
        payload, ok = args.func(args)
    except UsageError as exc:
        print(f"takiff {args.command}: error: {exc}", file=sys.stderr)
        return 2
    if isinstance(payload, str):
        text = payload
    elif args.pretty:
        text = pretty(payload) + "\n"
    else:
        text = canonical(payload)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.manifest:
        inputs = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "manifest", "pretty")}
        manifest = {"command": args.command, "version": __version__,
                    "input_digest": _digest(canonical(inputs)),
                    "cutoff": getattr(args, "cutoff", None), "exact": True,
                    "output_digest": _digest(text), "seconds": round(time.perf_counter() - t0, 3)}
        Path(args.manifest).write_text(canonical(manifest))
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
