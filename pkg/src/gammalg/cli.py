"""Command-line front end.

    gammalg <info|check-simple|algebra|fiber|norm> <specfile> [flags]

Every command builds a JSON report carrying the spec hash, the run
configuration and the library version.  Floats are written with 17
significant digits so that identical inputs give byte-identical reports.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any

from . import __version__
from . import deciders, expressions, fiber_rep
from .errors import BasisOverflow, EmptyShift, ExpressionError, GammalgError, InvalidSpec
from .shift_kernel import (
    FollowerAutomaton,
    SubshiftSpec,
    compile_spec,
    count_words,
    exists_aperiodic,
    is_finite,
    periodic_points,
    sft_irreducible,
)
from .star_algebra import (
    Element,
    diag_expectation,
    endo_phi_hat,
    evaluate,
    gauge_act,
    isotropy_expectation,
    product,
    sup_norm,
)

log = logging.getLogger("gammalg")

EXIT_OK = 0
EXIT_INVALID_SPEC = 2
EXIT_EMPTY_SHIFT = 3
EXIT_EXPRESSION = 4
EXIT_MODULE_ERROR = 5
EXIT_NOT_SIMPLE = 10
EXIT_UNKNOWN = 11
EXIT_NOT_APPLICABLE = 12

SEED_ENV = "GAMMALG_SEED"


@dataclass(frozen=True)
class RunConfig:
    tolerance: float = 1e-9
    drop_eps: float = 1e-12
    class_cap: int = deciders.DEFAULT_CLASS_CAP
    witness_len_cap: int | None = None
    seed: int = fiber_rep.DEFAULT_SEED
    output: str | None = None

    def __post_init__(self):
        if not (self.tolerance > self.drop_eps > 0):
            raise ValueError("need tolerance > drop_eps > 0")
        if self.class_cap < 1 or (self.witness_len_cap is not None and self.witness_len_cap < 1):
            raise ValueError("caps must be at least 1")


# -- report output ----------------------------------------------------------


def _float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return json.dumps(str(x))
    return format(x, ".17g")


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON with floats at 17 significant digits and sorted object keys."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, float):
        return _float(obj)
    if isinstance(obj, complex):
        return dumps([obj.real, obj.imag], indent, _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(obj[k], indent, _level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(x, (int, float, str, bool)) or x is None for x in obj):
            return "[" + ", ".join(dumps(x, indent, _level + 1) for x in obj) + "]"
        items = [pad + dumps(x, indent, _level + 1) for x in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_atomic(path: str, text: str) -> None:
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _complex_json(c: complex) -> list[float]:
    return [float(c.real), float(c.imag)]


# -- loading ----------------------------------------------------------------


def load(specfile: str) -> tuple[SubshiftSpec, FollowerAutomaton, str]:
    try:
        raw = Path(specfile).read_bytes()
    except OSError as exc:
        raise InvalidSpec(f"cannot read {specfile}: {exc}") from None
    try:
        data = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InvalidSpec(f"spec is not JSON: {exc}") from None
    spec = SubshiftSpec.from_dict(data)
    return spec, compile_spec(spec), hashlib.sha256(raw).hexdigest()


def read_expr(aut: FollowerAutomaton, source: str) -> Element:
    """``source`` is a file path, or inline expression text if no such file exists."""
    path = Path(source)
    text = path.read_text(encoding="utf-8") if path.is_file() else source
    return expressions.parse_expression(aut, text)


def _exprs(aut: FollowerAutomaton, args) -> list[Element]:
    if not args.expr:
        raise ExpressionError("--expr is required")
    return [read_expr(aut, s) for s in args.expr]


# -- commands ---------------------------------------------------------------


def cmd_info(spec, aut, args, cfg) -> tuple[dict, int]:
    counts = {str(n): count_words(aut, n)[0] for n in range(9)}
    periodic = {str(n): len(periodic_points(aut, n)) for n in range(1, 5)}
    irreducible = sft_irreducible(spec) if spec.kind == "sft_matrix" else None
    result = {
        "automaton": aut.summary(),
        "word_counts": counts,
        "periodic_counts": periodic,
        "aperiodic": exists_aperiodic(aut),
        "finite": is_finite(aut),
        "sft_irreducible": irreducible,
    }
    return result, EXIT_OK


def cmd_check_simple(spec, aut, args, cfg) -> tuple[dict, int]:
    if args.algebra == "AF":
        verdict = deciders.decide_af_simple(aut, cfg.class_cap, cfg.seed)
    else:
        verdict = deciders.decide_gamma_simple(aut, cfg.class_cap, cfg.witness_len_cap, cfg.seed)
    result = verdict.to_dict()
    if verdict.witness is not None:
        result["witness_verified"] = deciders.verify_certificate(aut, verdict.algebra, verdict.witness)
    code = {deciders.SIMPLE: EXIT_OK, deciders.NOT_SIMPLE: EXIT_NOT_SIMPLE, deciders.UNKNOWN: EXIT_UNKNOWN}
    return result, code[verdict.status]


def _element_result(e: Element, cfg: RunConfig) -> dict:
    return {
        "element": expressions.element_to_json(e),
        "exact": e.exact,
        "terms": len(e.terms),
        "points": len(e.points),
        "zero_within_tolerance": sup_norm(e) <= cfg.tolerance,
    }


def cmd_algebra(spec, aut, args, cfg) -> tuple[dict, int]:
    elems = _exprs(aut, args)
    op = args.op or "show"
    f = elems[0]
    if op == "mul":
        return _element_result(product(*elems), cfg), EXIT_OK
    if len(elems) != 1:
        raise ExpressionError(f"--op {op} takes exactly one --expr")
    if op == "show":
        return _element_result(f, cfg), EXIT_OK
    if op == "adjoint":
        return _element_result(f.star, cfg), EXIT_OK
    if op == "P":
        return _element_result(diag_expectation(f), cfg), EXIT_OK
    if op == "Q":
        return _element_result(isotropy_expectation(f), cfg), EXIT_OK
    if op == "phi_hat":
        return _element_result(endo_phi_hat(f), cfg), EXIT_OK
    if op == "supnorm":
        return {"scalar": sup_norm(f)}, EXIT_OK
    if op.startswith("gauge:"):
        z = expressions.parse_coef(op[len("gauge:"):])
        return _element_result(gauge_act(complex(z), f), cfg), EXIT_OK
    if op.startswith("eval:"):
        x, k, y = expressions.parse_arrow(aut, op[len("eval:"):])
        return {"scalar": _complex_json(evaluate(f, x, k, y))}, EXIT_OK
    raise ExpressionError(f"unknown op {op!r}")


def cmd_fiber(spec, aut, args, cfg) -> tuple[dict, int]:
    if not args.point:
        raise ExpressionError("--point is required")
    e = _exprs(aut, args)[0]
    a = expressions.parse_point(aut, args.point)
    fb = fiber_rep.fiber(aut, a, args.level)
    mat = fiber_rep.represent(fb, e)
    return {
        "base": a.render(aut.symbols),
        "level": args.level,
        "points": [p.render(aut.symbols) for p in fb.points],
        "matrix": [[_complex_json(c) for c in row] for row in mat.entries.tolist()],
        "norm": mat.norm(),
    }, EXIT_OK


def cmd_norm(spec, aut, args, cfg) -> tuple[dict, int]:
    e = _exprs(aut, args)[0]
    samples = fiber_rep.default_samples(aut, cfg.seed, args.samples)
    result: dict[str, Any] = {"level": args.level, "samples": len(samples), "sup_norm": sup_norm(e)}
    lower, upper = 0.0, None
    if e.is_core() and e.max_length() <= args.level:
        lower, upper = fiber_rep.norm_bounds(aut, e, args.level, samples)
        result["fiber_lower"] = lower
    # compressions of the regular representations also bound non-core elements
    compressed = 0.0
    for x in samples:
        try:
            c = fiber_rep.truncated_pi_x(e, x, args.level, args.level)
        except BasisOverflow:
            continue
        compressed = max(compressed, c.norm())
    result["compression_lower"] = compressed
    result["lower"] = max(lower, compressed)
    result["upper"] = upper
    return result, EXIT_OK


COMMANDS = {
    "info": cmd_info,
    "check-simple": cmd_check_simple,
    "algebra": cmd_algebra,
    "fiber": cmd_fiber,
    "norm": cmd_norm,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gammalg", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("specfile")
    p.add_argument("--algebra", choices=["OS", "AF"], default="OS")
    p.add_argument("--expr", action="append", help="expression file or inline text; repeat for --op mul")
    p.add_argument("--op", help="mul|adjoint|P|Q|phi_hat|gauge:z|eval:x;k;y|supnorm")
    p.add_argument("--point", help="base point as 'transient,period'")
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--samples", type=int, default=8, help="pseudorandom sample points for norm bounds")
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.add_argument("--class-cap", type=int, default=deciders.DEFAULT_CLASS_CAP)
    p.add_argument("--witness-len-cap", type=int, default=None)
    p.add_argument("--out", help="write the JSON report here (atomically)")
    p.add_argument("--json", action="store_true", help="print the JSON report on stdout")
    return p


def _seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return fiber_rep.DEFAULT_SEED
    try:
        return int(raw, 0)
    except ValueError:
        raise SystemExit(f"gammalg: {SEED_ENV} must be an integer, got {raw!r}") from None


def _summary_lines(command: str, result: dict) -> list[str]:
    if result.get("status") == "not_applicable":
        return [f"not applicable: {result['reason']}"]
    if command == "check-simple":
        lines = [f"{result['algebra']}: {result['status']}"]
        if result.get("witness"):
            w = result["witness"]
            lines.append(f"witness u={w['u']!r} F={w['F']} verified={result.get('witness_verified')}")
        return lines
    return [f"{k}: {dumps(v, indent=0).replace(chr(10), '')}" for k, v in sorted(result.items())]


def run(argv: list[str] | None = None) -> tuple[int, dict | None]:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            tolerance=args.tolerance,
            class_cap=args.class_cap,
            witness_len_cap=args.witness_len_cap,
            seed=_seed(),
            output=args.out,
        )
    except ValueError as exc:
        print(f"gammalg: {exc}", file=sys.stderr)
        return EXIT_INVALID_SPEC, None
    report: dict[str, Any] = {
        "command": args.command,
        "version": __version__,
        # the output path is not a computation parameter, so it stays out of the report
        "config": {k: v for k, v in asdict(cfg).items() if k != "output"},
    }
    try:
        spec, aut, digest = load(args.specfile)
        report["spec_sha256"] = digest
        report["warnings"] = list(aut.warnings)
        result, code = COMMANDS[args.command](spec, aut, args, cfg)
    except InvalidSpec as exc:
        return _fail(exc, EXIT_INVALID_SPEC)
    except EmptyShift as exc:
        return _fail(exc, EXIT_EMPTY_SHIFT)
    except ExpressionError as exc:
        return _fail(exc, EXIT_EXPRESSION)
    except GammalgError as exc:
        if exc.name == "NotApplicable":
            report["result"] = {"status": "not_applicable", "reason": str(exc)}
            report["exit_code"] = EXIT_NOT_APPLICABLE
            _emit(args, report)
            return EXIT_NOT_APPLICABLE, report
        return _fail(exc, EXIT_MODULE_ERROR)
    report["result"] = result
    report["exit_code"] = code
    _emit(args, report)
    return code, report


def _fail(exc: GammalgError, code: int) -> tuple[int, None]:
    print(f"gammalg: {exc.name}: {exc}", file=sys.stderr)
    return code, None


def _emit(args, report: dict) -> None:
    text = dumps(report) + "\n"
    if args.out:
        write_atomic(args.out, text)
    if args.json:
        sys.stdout.write(text)
    elif "result" in report:
        for line in _summary_lines(args.command, report["result"]):
            print(line)


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
