"""Command-line surface: one command per spec file, deterministic reports and exit codes."""

import argparse
import json
import logging
import random
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence

from . import __version__
from .ainfty import (
    check_relations,
    kuranishi_eval,
    kuranishi_symbolic,
    symbolic_element,
    symbolic_variables,
    twist,
)
from .calibrated import (
    STAR4_CONSTANT,
    cayley_check,
    diagonalize_definite,
    hodge_star2,
    is_definite,
    sd_split,
    star4_eigen_dimensions,
    star_eigen_dimensions,
    wedge_square_check,
)
from .corpus import random_plus_element
from .cyclic import check_cyclicity, cyclic_completion, darboux_defect, lemma_sum
from .errors import DefinitenessError, NonUnimodularError, SpecError, UnknownCommandError
from .graded_core import Element
from .guards.middleware import EXIT_INPUT_ERROR, EXIT_METHOD_LIMIT, audit_log, error_handler
from .maurer_cartan import Exhausted, Solution, mc_solve, mc_verify, unobstructedness_certificate
from .settings import Settings
from .spec_file import SpecFile, parse_spec, serialize_spec

logger = logging.getLogger(__name__)

REPORT_FORMAT_VERSION = 1
PASS, FAIL, ERROR = "PASS", "FAIL", "ERROR"
EXIT_CODES = {PASS: 0, FAIL: 1}


@dataclass
class Options:
    """Command flags; None means "take it from the spec file or Settings"."""

    arity: Optional[int] = None
    energy: Optional[Fraction] = None
    seed: int = Settings.SEED
    samples: int = Settings.SAMPLES
    format: str = "text"
    mode: str = "newton"
    grid: Optional[List[Fraction]] = None
    dimension: Optional[int] = None
    element: Optional[str] = None
    timing: bool = False

    def echo(self) -> Dict[str, Any]:
        echo: Dict[str, Any] = {"seed": self.seed, "samples": self.samples}
        for name in ("arity", "energy", "mode", "dimension", "element"):
            value = getattr(self, name)
            if value is not None:
                echo[name] = value if isinstance(value, (int, str)) else str(value)
        if self.grid is not None:
            echo["grid"] = [str(lam) for lam in self.grid]
        return echo


@dataclass
class Report:
    """The outcome of one command; deterministic for fixed spec bytes, flags and seed."""

    command: str
    verdict: str
    exit_code: int
    arguments: Dict[str, Any] = field(default_factory=dict)
    cutoffs: Dict[str, Any] = field(default_factory=dict)
    witnesses: List[Any] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)
    timing: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        doc = {
            "format_version": REPORT_FORMAT_VERSION,
            "command": self.command,
            "arguments": self.arguments,
            "cutoffs": self.cutoffs,
            "verdict": self.verdict,
            "exit_code": self.exit_code,
            "witnesses": self.witnesses,
            "details": self.details,
        }
        if self.timing is not None:
            doc["timing_seconds"] = round(self.timing, 6)
        return doc

    def render_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def render_text(self) -> str:
        lines = [f"{self.command}: {self.verdict} (exit {self.exit_code})"]
        if self.cutoffs:
            lines.append("cutoffs: " + ", ".join(f"{k}={v}" for k, v in self.cutoffs.items()))
        for key, value in self.details.items():
            if isinstance(value, str) and "\n" in value:
                lines.append(f"{key}:")
                lines.extend(f"  {line}" for line in value.rstrip("\n").split("\n"))
            else:
                lines.append(f"{key}: {json.dumps(value, ensure_ascii=False)}")
        for index, witness in enumerate(self.witnesses):
            lines.append(f"witness {index}: {json.dumps(witness, ensure_ascii=False)}")
        if self.timing is not None:
            lines.append(f"timing: {self.timing:.6f}s")
        return "\n".join(lines) + "\n"

    def render(self, output_format: str) -> str:
        return self.render_json() if output_format == "json" else self.render_text()


def _verdict(ok: bool) -> str:
    return PASS if ok else FAIL


def _report(command: str, ok: bool, spec: Optional[SpecFile], options: Options, witnesses=None,
            details=None) -> Report:
    verdict = _verdict(ok)
    cutoffs = {} if spec is None else {"arity": spec.arity_cutoff, "energy": str(spec.energy_cutoff)}
    return Report(command, verdict, EXIT_CODES[verdict], options.echo(), cutoffs,
                  list(witnesses or []), dict(details or {}))


def _render_element(x: Element) -> Dict[str, str]:
    return {label: scalar.render() for label, scalar in x.items()}


def _element_or_zero(spec: SpecFile, options: Options) -> Element:
    if options.element is not None:
        return spec.element(options.element)
    names = spec.element_names()
    if names:
        return spec.element(names[0])
    return Element.zero(spec.module(), spec.energy_cutoff)


def _samples(spec: SpecFile, options: Options) -> List[Element]:
    rng = random.Random(options.seed)
    module = spec.module()
    return [random_plus_element(rng, module, spec.energy_cutoff) for _ in range(options.samples)]


def _validate(spec: SpecFile, options: Options) -> Report:
    S = spec.structure()
    violations = check_relations(S)
    details = {"rank": S.module.rank, "strict": S.is_strict(), "gapped": S.is_gapped(),
               "constants": S.constant_count()}
    if spec.has_pairing():
        details["pairing_nondegenerate"] = spec.pairing().is_nondegenerate()
    return _report("validate", not violations, spec, options, [v.to_dict() for v in violations], details)


def _cyclic_check(spec: SpecFile, options: Options) -> Report:
    CS = spec.cyclic()
    violations = check_cyclicity(CS.S, CS.Q)
    return _report("cyclic-check", not violations, spec, options, [v.to_dict() for v in violations],
                   {"n": CS.Q.n})


def _lemma_check(spec: SpecFile, options: Options) -> Report:
    CS = spec.cyclic()
    witnesses = []
    samples = _samples(spec, options)
    for x in samples:
        for k in range(CS.S.k_max + 1):
            value = lemma_sum(CS.S, CS.Q, x, k)
            if not value.is_zero():
                witnesses.append({"k": k, "element": _render_element(x), "value": value.render()})
    return _report("lemma-check", not witnesses, spec, options, witnesses,
                   {"instances": len(samples) * (CS.S.k_max + 1)})


def _darboux_check(spec: SpecFile, options: Options) -> Report:
    CS = spec.cyclic()
    witnesses = []
    for x in _samples(spec, options):
        defect = darboux_defect(CS.S, CS.Q, x)
        if not defect.is_zero():
            witnesses.append({"element": _render_element(x), "defect": defect.render()})
    x = symbolic_element(CS.S.module, symbolic_variables(CS.S.module), CS.S.cutoff, Settings.SYMBOLIC_WEIGHT)
    symbolic = darboux_defect(CS.S, CS.Q, x)
    if not symbolic.is_zero():
        witnesses.append({"element": "symbolic", "defect": symbolic.render()})
    return _report("darboux-check", not witnesses, spec, options, witnesses,
                   {"symbolic_defect": symbolic.render()})


def _kuranishi(spec: SpecFile, options: Options) -> Report:
    S = spec.structure()
    if options.element is None and not spec.element_names():
        kappa = kuranishi_symbolic(S, weight=Settings.SYMBOLIC_WEIGHT)
        argument = "symbolic"
    else:
        x = _element_or_zero(spec, options)
        kappa = kuranishi_eval(S, x)
        argument = _render_element(x)
    return _report("kuranishi", True, spec, options, [],
                   {"argument": argument, "kappa": _render_element(kappa), "zero": kappa.is_zero()})


def _twist(spec: SpecFile, options: Options) -> Report:
    S = spec.structure()
    b = _element_or_zero(spec, options)
    twisted = twist(S, b)
    violations = check_relations(twisted)
    expected = kuranishi_eval(S, b)
    witnesses = [v.to_dict() for v in violations]
    if twisted.curvature() != expected:
        witnesses.append({"curvature": _render_element(twisted.curvature()), "kappa": _render_element(expected)})
    Q = spec.pairing() if spec.has_pairing() else None
    text = serialize_spec(SpecFile.from_structure(twisted, Q))
    return _report("twist", not witnesses, spec, options, witnesses,
                   {"b": _render_element(b), "twisted_spec": text})


def _mc_solve(spec: SpecFile, options: Options) -> Report:
    S = spec.structure()
    result = mc_solve(S, options.mode, options.grid, Settings.MAX_NEWTON_ITERATIONS)
    details = {"mode": options.mode, "result": result.to_dict()}
    if isinstance(result, Solution):
        return _report("mc-solve", True, spec, options, [], details)
    report = _report("mc-solve", False, spec, options, [result.to_dict()], details)
    if isinstance(result, Exhausted):
        report.verdict, report.exit_code = ERROR, EXIT_METHOD_LIMIT
    return report


def _mc_verify(spec: SpecFile, options: Options) -> Report:
    S = spec.structure()
    b = _element_or_zero(spec, options)
    ok = mc_verify(S, b)
    residual = kuranishi_eval(S, b).truncate(S.cutoff)
    witnesses = [] if ok else [{"element": _render_element(b), "residual": _render_element(residual)}]
    return _report("mc-verify", ok, spec, options, witnesses, {"b": _render_element(b)})


def _certify(spec: SpecFile, options: Options) -> Report:
    CS = spec.cyclic()
    b = _element_or_zero(spec, options)
    certificate = unobstructedness_certificate(CS, b, samples=options.samples, seed=options.seed,
                                               weight=Settings.SYMBOLIC_WEIGHT)
    incidents = [
        {"chain": chain.name, "incident": incident}
        for chain in [certificate.base] + certificate.twists
        for incident in chain.incidents
    ]
    return _report("certify-unobstructed", certificate.passed, spec, options, incidents,
                   {"certificate": certificate.to_dict()})


def _complete(spec: SpecFile, options: Options) -> Report:
    n = options.dimension if options.dimension is not None else (spec.pairing_n or 4)
    CS = cyclic_completion(spec.structure(), n)
    text = serialize_spec(SpecFile.from_structure(CS.S, CS.Q))
    return _report("complete", True, spec, options, [],
                   {"n": n, "rank": CS.S.module.rank, "completed_spec": text})


def _hodge(spec: SpecFile, options: Options) -> Report:
    g = spec.metric()
    plus, minus = star_eigen_dimensions(g)
    star4 = star4_eigen_dimensions()
    ok = (plus, minus) == (3, 3) and star4 == (6, 6)
    details: Dict[str, Any] = {
        "metric": g.rows(),
        "star_squared_identity": True,
        "eigen_dimensions": [plus, minus],
        "star4_constant": STAR4_CONSTANT,
        "star4_eigen_dimensions": list(star4),
    }
    witnesses = []
    if spec.geometry.form is not None:
        w = spec.two_form()
        w_plus, w_minus = sd_split(g, w)
        check = wedge_square_check(g, w)
        details.update({
            "form": w.render(),
            "star_form": hodge_star2(g, w).render(),
            "self_dual": w_plus.render(),
            "anti_self_dual": w_minus.render(),
            "norm_plus": str(check.norm_plus),
            "norm_minus": str(check.norm_minus),
        })
        if not check.passed:
            witnesses.append({"wedge_residual": str(check.wedge_residual),
                              "energy_residual": str(check.energy_residual)})
        ok = ok and check.passed
    return _report("hodge", ok, spec, options, witnesses, details)


def _cayley(spec: SpecFile, options: Options) -> Report:
    report = cayley_check(spec.plane(), Settings.CAYLEY_TOLERANCE)
    ok = report.biconditional_holds
    witnesses = [] if ok else [{"plane": spec.plane().rows(), **report.to_dict()}]
    return _report("cayley", ok, spec, options, witnesses, {"cayley": report.to_dict()})


def _lattice(spec: SpecFile, options: Options) -> Report:
    F = spec.lattice()
    if not F.is_unimodular():
        raise NonUnimodularError(f"Lattice has determinant {F.det()}")
    definite, sign = is_definite(F)
    if not definite:
        raise DefinitenessError("Lattice form is indefinite")
    U = diagonalize_definite(F, Settings.MAX_LATTICE_RANK)
    details = {"rank": F.rank, "sign": sign, "form": F.rows()}
    if U is None:
        return _report("lattice", False, spec, options, [{"form": F.rows(), "reason": "norm-1 vectors do not span"}],
                       details)
    details["basis"] = [[int(U[i, j]) for j in range(U.cols)] for i in range(U.rows)]
    return _report("lattice", True, spec, options, [], details)


COMMANDS: Dict[str, Callable[[SpecFile, Options], Report]] = {
    "validate": _validate,
    "cyclic-check": _cyclic_check,
    "lemma-check": _lemma_check,
    "darboux-check": _darboux_check,
    "kuranishi": _kuranishi,
    "twist": _twist,
    "mc-solve": _mc_solve,
    "mc-verify": _mc_verify,
    "certify-unobstructed": _certify,
    "complete": _complete,
    "hodge": _hodge,
    "cayley": _cayley,
    "lattice": _lattice,
}


@error_handler
@audit_log
def _dispatch(command: str, text: str, options: Options) -> Report:
    handler = COMMANDS.get(command)
    if handler is None:
        raise UnknownCommandError(f"Unknown command {command!r}; expected one of {sorted(COMMANDS)}")
    spec = parse_spec(text)
    spec = spec.with_cutoffs(options.arity, options.energy)
    return handler(spec, options)


def run(command: str, spec: str, flags: Optional[Options] = None) -> Report:
    """
    Run one command on a spec document.

    Args:
        command: One of COMMANDS
        spec: Spec document text
        flags: Command options; defaults come from Settings

    Returns:
        Report: Carries the verdict and exit code; ERROR reports carry the
            error type and message as their only witness
    """
    options = flags or Options()
    started = time.perf_counter()
    outcome = _dispatch(command, spec, options)
    if isinstance(outcome, dict):
        outcome = Report(command, ERROR, outcome["exit_code"], options.echo(), {},
                         [{"error_type": outcome["error_type"], "message": outcome["error"]}])
    if options.timing:
        outcome.timing = time.perf_counter() - started
    logger.info(f"{command}: {outcome.verdict} (exit {outcome.exit_code})")
    return outcome


def _parse_grid(text: str) -> List[Fraction]:
    try:
        return [Fraction(part.strip()) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be comma-separated rationals, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kuranishi",
        description="Exact verification of curved cyclic A-infinity algebras and calibrated linear algebra.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", help=f"one of: {', '.join(COMMANDS)}")
    parser.add_argument("spec", help="spec file path, or - for standard input")
    parser.add_argument("--arity", type=int, help="arity cutoff K")
    parser.add_argument("--energy", type=Fraction, help="energy cutoff E as p/q")
    parser.add_argument("--seed", type=int, default=Settings.SEED)
    parser.add_argument("--samples", type=int, default=Settings.SAMPLES)
    parser.add_argument("--format", choices=("text", "json"), default="text")
    parser.add_argument("--mode", choices=("newton", "ansatz"), default="newton")
    parser.add_argument("--grid", type=_parse_grid, help="ansatz energies, e.g. 1/2,1")
    parser.add_argument("--dimension", type=int, help="cyclic dimension n for complete")
    parser.add_argument("--element", help="named element of the spec's elements section")
    parser.add_argument("--timing", action="store_true", help="include wall-clock timing in the report")
    return parser


def _read_spec(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as f:
        return f.read()


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; prints the report to stdout and returns the exit code."""
    logging.basicConfig(
        level=Settings.LOG_LEVEL,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else EXIT_INPUT_ERROR
    options = Options(
        arity=args.arity, energy=args.energy, seed=args.seed, samples=args.samples, format=args.format,
        mode=args.mode, grid=args.grid, dimension=args.dimension, element=args.element, timing=args.timing,
    )
    try:
        text = _read_spec(args.spec)
    except OSError as e:
        logger.error(f"Cannot read spec {args.spec}: {e.strerror}")
        error = SpecError(f"cannot read spec file: {e.strerror}", 0, 0)
        report = Report(args.command, ERROR, EXIT_INPUT_ERROR, options.echo(), {},
                        [{"error_type": "SpecError", "message": str(error)}])
    else:
        report = run(args.command, text, options)
    sys.stdout.write(report.render(options.format))
    return report.exit_code
