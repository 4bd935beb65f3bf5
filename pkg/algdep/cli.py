"""
Command line entry point.

Exit codes: 0 computed (or a positive decision), 1 a negative decision,
2 usage, parse or file errors, 3 a resource limit was hit.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from . import exc
from .annihilator import (
    annihilator_space,
    is_dependent,
    lowest_annihilator,
    perron_bound,
    trdeg,
)
from .aps import aps_decide, verify_witness
from .circuit import Instance, load
from .config import RunConfig, make_rng
from .hitting import (
    HittingInstance,
    brute_counterexample,
    certify,
    load_candidates,
    search,
)
from .jacobian import jacobian_rank
from .laurent import load_witness
from .protocol import (
    ProtocolParams,
    am_decide,
    check_am_gap,
    check_coam_gap,
    coam_decide,
    fiber_stats,
)
from .types import Record

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NO = 1
EXIT_USAGE = 2
EXIT_LIMIT = 3

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class DependReport(Record):
    dependent: bool
    annihilator: Optional[str] = None

    def to_text(self) -> str:
        if not self.dependent:
            return "independent"
        if self.annihilator is None:
            return "dependent"
        return f"dependent; annihilator {self.annihilator}"


class WitnessReport(Record):
    verified: bool
    low: int
    high: int

    def to_text(self) -> str:
        status = "verified" if self.verified else "rejected"
        return f"witness {status} (eps window {self.low}..{self.high})"


class CertifyReport(Record):
    hitting: bool
    h: int
    counterexample: Optional[Tuple[int, ...]] = None

    def to_text(self) -> str:
        if self.hitting:
            return f"hitting set of size {self.h}: certified"
        text = f"not a hitting set (size {self.h})"
        if self.counterexample is not None:
            params = ", ".join(str(c) for c in self.counterexample)
            text += f"; parameters ({params}) vanish on it"
        return text

    def to_row(self) -> dict:
        row = {"hitting": self.hitting, "h": self.h}
        if self.counterexample is not None:
            row["counterexample"] = ",".join(map(str, self.counterexample))
        return row


class SearchReport(Record):
    found: HittingInstance

    def to_text(self) -> str:
        return (
            f"certified hitting set of size {self.found.h}:\n"
            + self.found.to_text().rstrip("\n")
        )

    def to_row(self) -> dict:
        return self.found.to_row()


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=int, default=8)
    common.add_argument("--rounds", type=int, default=64)
    common.add_argument("--degree-bound", type=int, default=None)
    common.add_argument(
        "--qprime-degree",
        type=int,
        default=None,
        help="extension degree of the enumeration field",
    )
    common.add_argument(
        "--format", dest="output", choices=("text", "tsv"), default="text"
    )
    common.add_argument(
        "--log-level",
        default="WARNING",
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
    )

    parser = argparse.ArgumentParser(
        prog="algdep",
        description="Algebraic dependence, approximate satisfiability and "
        "hitting-set checks over finite fields",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in (
        "trdeg",
        "depend",
        "annihilator",
        "jacobian",
        "am-gap",
        "coam-gap",
        "am-decide",
        "coam-decide",
    ):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("instance", type=Path)

    p = sub.add_parser("aps", parents=[common])
    p.add_argument("instance", type=Path)
    p.add_argument("--oracle", action="store_true",
                   help="answer with the direct annihilator oracle")
    p.add_argument("--exhaustive", action="store_true",
                   help="sweep every reduction plan")

    p = sub.add_parser("verify-witness", parents=[common])
    p.add_argument("instance", type=Path)
    p.add_argument("witness", type=Path)

    hitting = sub.add_parser("hitting")
    actions = hitting.add_subparsers(dest="action", required=True)
    p = actions.add_parser("certify", parents=[common])
    p.add_argument("--family", type=Path, required=True)
    p.add_argument("--candidates", type=Path, required=True)
    p.add_argument("--r", type=int, required=True)
    p = actions.add_parser("search", parents=[common])
    p.add_argument("--family", type=Path, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--budget", type=int, default=10)
    p.add_argument("--exhaustive", action="store_true")
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    subcommand = args.subcommand
    if subcommand == "hitting":
        subcommand = f"hitting-{args.action}"
    paths = [
        getattr(args, name)
        for name in ("instance", "witness", "family", "candidates")
        if getattr(args, name, None) is not None
    ]
    return RunConfig(
        subcommand=subcommand,
        paths=tuple(paths),
        seed=args.seed,
        trials=args.trials,
        rounds=args.rounds,
        degree_bound=args.degree_bound,
        qprime_degree=args.qprime_degree,
        output=args.output,
    )


def _qprime(inst: Instance, config: RunConfig):
    if config.qprime_degree is None:
        return None
    return inst.field.extension(config.qprime_degree)


# subcommands; each returns (record, exit code)


def _trdeg(args, config):
    return trdeg(load(args.instance), config.limits), EXIT_OK


def _depend(args, config):
    inst = load(args.instance)
    limits = config.limits
    dependent = is_dependent(inst, range(inst.m), limits)
    if not dependent:
        return DependReport(dependent=False), EXIT_NO
    annihilator = None
    if inst.m <= inst.nvars or config.degree_bound is not None:
        found = lowest_annihilator(inst, limits, config.degree_bound)
        if found is not None:
            annihilator = found.to_text("y")
    return DependReport(dependent=True, annihilator=annihilator), EXIT_OK


def _annihilator(args, config):
    inst = load(args.instance)
    d = config.degree_bound
    if d is None:
        d = perron_bound(inst)
    return annihilator_space(inst, d, config.limits), EXIT_OK


def _jacobian(args, config):
    inst = load(args.instance)
    rng = make_rng(config.seed, config.subcommand)
    report = jacobian_rank(inst, rng, config.trials, config.limits)
    return report, EXIT_OK if report.full else EXIT_NO


def _gap(mode):
    check = check_am_gap if mode == "am" else check_coam_gap

    def run(args, config):
        inst = load(args.instance)
        params = ProtocolParams.for_instance(
            inst, mode, _qprime(inst, config), config.rounds, config.seed
        )
        report = fiber_stats(inst, params.qprime, config.limits)
        result = check(report, params)
        code = EXIT_NO if result.verdict == "independent" else EXIT_OK
        return result, code

    return run


def _decide(mode):
    decide = am_decide if mode == "am" else coam_decide

    def run(args, config):
        inst = load(args.instance)
        params = ProtocolParams.for_instance(
            inst, mode, _qprime(inst, config), config.rounds, config.seed
        )
        rng = make_rng(config.seed, config.subcommand)
        transcript = decide(inst, params, rng, config.limits)
        code = EXIT_NO if transcript.verdict == "independent" else EXIT_OK
        return transcript, code

    return run


def _aps(args, config):
    inst = load(args.instance)
    verdict = aps_decide(
        inst,
        make_rng(config.seed, config.subcommand),
        config.trials,
        config.limits,
        exhaustive=args.exhaustive,
        oracle=args.oracle,
    )
    return verdict, EXIT_OK if verdict.answer else EXIT_NO


def _verify_witness(args, config):
    inst = load(args.instance)
    field = _qprime(inst, config) or inst.field
    witness = load_witness(args.witness, field, inst.nvars)
    low, high = witness.window()
    verified = verify_witness(inst, witness)
    report = WitnessReport(verified=verified, low=low, high=high)
    return report, EXIT_OK if verified else EXIT_NO


def _hitting(args, config):
    family = load(args.family)
    rng = make_rng(config.seed, config.subcommand)
    if args.action == "search":
        found = search(
            family,
            args.r,
            args.h,
            rng,
            budget=args.budget,
            trials=config.trials,
            limits=config.limits,
            exhaustive=args.exhaustive,
        )
        return SearchReport(found=found), EXIT_OK
    n = family.nvars - family.nparams
    points = load_candidates(args.candidates, family.field, n)
    hi = HittingInstance(family=family, r=args.r, points=tuple(points))
    hitting = certify(hi, rng, config.trials, config.limits)
    counterexample = None
    scan = family.field.q**hi.s <= config.limits.max_parameter_points
    if not hitting and scan:
        counterexample = brute_counterexample(hi, config.limits)
    report = CertifyReport(
        hitting=hitting, h=hi.h, counterexample=counterexample
    )
    return report, EXIT_OK if hitting else EXIT_NO


COMMANDS: Dict[str, Callable] = {
    "trdeg": _trdeg,
    "depend": _depend,
    "annihilator": _annihilator,
    "jacobian": _jacobian,
    "am-gap": _gap("am"),
    "coam-gap": _gap("coam"),
    "am-decide": _decide("am"),
    "coam-decide": _decide("coam"),
    "aps": _aps,
    "verify-witness": _verify_witness,
    "hitting": _hitting,
}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    logging.basicConfig(
        level=args.log_level, format=LOG_FORMAT, stream=sys.stderr,
        force=True,
    )
    try:
        config = _config(args)
        record, code = COMMANDS[args.subcommand](args, config)
    except exc.ResourceLimit as e:
        logger.error(f"resource limit: {e}")
        return EXIT_LIMIT
    except exc.NotFound as e:
        logger.error(f"not found: {e}")
        return EXIT_NO
    except (exc.AlgdepError, OSError, ValueError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_USAGE
    sys.stdout.write(record.render(config.output) + "\n")
    sys.stdout.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())
