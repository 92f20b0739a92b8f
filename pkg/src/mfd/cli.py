"""``mfd`` command line: generate fields, diagonalize, verify, certify.

Exit codes: 0 success, 2 certified obstruction, 3 tolerance not met,
4 format or validation error.  Every report is a plain-text summary, a
``---`` line and an ``mfd/1`` document, and depends only on the inputs and
the run configuration.
"""
import argparse
import os
import sys
from dataclasses import asdict, dataclass
from typing import Optional

from . import io
from .errors import BadParam, MfdError, Obstructed, ToleranceNotMet

EXIT_OK = 0
EXIT_OBSTRUCTED = 2
EXIT_TOLERANCE = 3
EXIT_INVALID = 4

STATUS = {
    EXIT_OK: "success",
    EXIT_OBSTRUCTED: "obstructed",
    EXIT_TOLERANCE: "tolerance-not-met",
    EXIT_INVALID: "invalid-input",
}


@dataclass
class RunConfig:
    eps: float = 0.05
    eta: Optional[float] = None
    dict_degree: int = 2
    max_refine: int = 2
    seed: int = 0
    threads: Optional[int] = None

    def __post_init__(self):
        env = os.environ.get("MFD_THREADS")
        if env:
            try:
                self.threads = int(env)
            except ValueError:
                raise BadParam(f"MFD_THREADS must be an integer, got {env!r}") from None
        if not self.eps > 0:
            raise BadParam("eps must be positive")
        if self.eta is not None and not self.eta > 0:
            raise BadParam("eta must be positive")
        if self.dict_degree < 1:
            raise BadParam("dict_degree must be at least 1")
        if self.max_refine < 0:
            raise BadParam("max_refine must be non-negative")
        if self.threads is not None and self.threads < 1:
            raise BadParam("threads must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise BadParam("seed must fit in 64 bits")

    def echo(self):
        """Configuration as stored in reports.  ``threads`` only changes how
        work is scheduled, so it is left out to keep reports identical
        across thread counts."""
        d = asdict(self)
        d.pop("threads")
        return d


def _carrier(dom):
    return f"{dom.kind}({dom.param})"


def _fmt(x):
    return repr(x) if isinstance(x, float) else str(x)


def _summary(command, code, cfg, lines):
    out = [f"mfd {command}", f"status: {STATUS[code]}", f"exit_code: {code}"]
    if cfg is not None:
        out.append("config: " + " ".join(f"{k}={_fmt(v)}" for k, v in cfg.echo().items()))
    out.extend(f"{k}: {_fmt(v)}" for k, v in lines)
    return "\n".join(out) + "\n"


def _emit(path, command, code, cfg, lines, payload):
    payload = {"command": command, "exit_code": code, "status": STATUS[code], **payload}
    if cfg is not None:
        payload["config"] = cfg.echo()
    summary = _summary(command, code, cfg, lines)
    text = summary + io.REPORT_MARKER.lstrip("\n") + io.dumps(payload)
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return code


def _residual_lines(rep):
    s = rep.summary()
    return [
        ("residual_max", s["max"]),
        ("residual_vertex_max", s["vertex_max"]),
        ("residual_edge_max", s["edge_max"]),
        ("residual_fill_max", s["fill_max"]),
    ]


def _obstruction_lines(reports):
    out = []
    for r in reports:
        out.append((f"certificate[{r.kind}]", r.verdict))
        if r.tension_flag:
            out.append(("tension_flag", True))
    return out


def _load_field(path):
    fld = io.load(path, expect="field")
    fld.validate()
    return fld


# ----------------------------------------------------------------------------
# subcommands


def cmd_gen(args):
    from .generators import gen_field

    fld = gen_field(args.kind, m=args.m, n=args.n, k=args.k, seed=args.seed, reflect=args.reflect)
    io.save(args.out, fld)
    return EXIT_OK


def _diagonalize(fld, cfg, eta):
    from .diag1d import diagonalize_cycle, diagonalize_path
    from .disk2d import diagonalize_complex2

    dom = fld.domain
    kw = dict(eta=eta, eps=cfg.eps, dict_degree=cfg.dict_degree)
    if dom.dimension <= 1 and dom.is_acyclic():
        return diagonalize_path(fld, **kw)
    if dom.dimension == 1 and dom.is_cycle():
        return diagonalize_cycle(fld, **kw)
    if dom.dimension <= 2:
        return diagonalize_complex2(fld, **kw)
    raise BadParam(f"no diagonalizer for carriers of dimension {dom.dimension}")


def cmd_diag(args, cfg):
    from .diag1d import default_eta
    from .obstruction import certify

    fld = _load_field(args.field)
    dom = fld.domain
    base = {"carrier": _carrier(dom), "n": fld.n, "g": fld.g}
    if dom.dimension == 3:
        reports, blocking = certify(fld, cfg.eta)
        code = EXIT_OBSTRUCTED if blocking else EXIT_INVALID
        lines = [("carrier", base["carrier"])] + _obstruction_lines(reports)
        if not blocking:
            lines.append(("note", "no diagonalizer for carriers of dimension 3"))
        return _emit(args.report, "diag", code, cfg, lines, {**base, "obstructions": reports})
    eta = cfg.eta if cfg.eta is not None else default_eta(fld)
    last = None
    for attempt in range(cfg.max_refine + 1):
        try:
            frames = _diagonalize(fld, cfg, eta)
        except Obstructed as exc:
            lines = [("carrier", base["carrier"])] + _obstruction_lines([exc.report])
            return _emit(
                args.report, "diag", EXIT_OBSTRUCTED, cfg, lines,
                {**base, "obstructions": [exc.report]},
            )
        except ToleranceNotMet as exc:
            last = exc.report
            eta = eta / 2.0
            continue
        rep = frames.meta["report"]
        if args.out:
            io.save(args.out, frames)
        lines = [("carrier", base["carrier"]), ("attempts", attempt + 1), ("eta_used", float(eta))]
        lines += _residual_lines(rep)
        if frames.meta.get("windings") is not None:
            lines.append(("label_windings", list(frames.meta["windings"])))
        if frames.meta.get("chern") is not None:
            lines.append(("chern", list(frames.meta["chern"])))
        extra = {k: frames.meta[k] for k in ("windings", "chern") if frames.meta.get(k) is not None}
        return _emit(
            args.report, "diag", EXIT_OK, cfg, lines,
            {**base, "residual": rep, "attempts": attempt + 1, "eta_used": float(eta), **extra},
        )
    lines = [("carrier", base["carrier"]), ("attempts", cfg.max_refine + 1)] + _residual_lines(last)
    return _emit(
        args.report, "diag", EXIT_TOLERANCE, cfg, lines,
        {**base, "residual": last, "attempts": cfg.max_refine + 1},
    )


def cmd_verify(args, cfg):
    from .field import FunctionDictionary, residual_report

    fld = _load_field(args.field)
    frames = io.load(args.frames, expect="frames")
    io.check_compatible(fld, frames)
    rep = residual_report(fld, frames, FunctionDictionary(cfg.dict_degree, fld.g), cfg.eps)
    code = EXIT_OK if rep.verdict else EXIT_TOLERANCE
    lines = [("carrier", _carrier(fld.domain)), ("projection_defect", frames.projection_defect())]
    return _emit(
        args.report, "verify", code, cfg, lines + _residual_lines(rep),
        {"carrier": _carrier(fld.domain), "residual": rep},
    )


def cmd_obstruct(args, cfg):
    from .obstruction import certify

    fld = _load_field(args.field)
    reports, blocking = certify(fld, cfg.eta)
    code = EXIT_OBSTRUCTED if blocking else EXIT_OK
    lines = [("carrier", _carrier(fld.domain)), ("blocking", blocking)] + _obstruction_lines(reports)
    return _emit(
        args.report, "obstruct", code, cfg, lines,
        {"carrier": _carrier(fld.domain), "blocking": blocking, "obstructions": reports},
    )


# ----------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the validation code, not argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _add_config(p):
    p.add_argument("--eps", type=float, default=0.05, help="residual tolerance")
    p.add_argument("--eta", type=float, default=None, help="matching radius (default: auto)")
    p.add_argument("--dict-degree", type=int, default=2)
    p.add_argument("--max-refine", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--report", default="-", help="report path ('-' for stdout)")


def build_parser():
    from .generators import GEN_KINDS

    parser = _Parser(prog="mfd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="write an example generator field")
    p.add_argument("--kind", required=True, choices=GEN_KINDS)
    p.add_argument("--m", type=int, default=None, help="interval/cycle size")
    p.add_argument("--n", type=int, default=None, help="matrix size")
    p.add_argument("--k", type=int, default=None, help="refinement level")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reflect", action="store_true")
    p.add_argument("--out", "-o", default="field.json")

    p = sub.add_parser("diag", help="diagonalize a field")
    p.add_argument("field", nargs="?", default="field.json")
    p.add_argument("--out", "-o", default="frames.json", help="frames output path")
    _add_config(p)

    p = sub.add_parser("verify", help="recompute residuals of stored frames")
    p.add_argument("field", nargs="?", default="field.json")
    p.add_argument("frames", nargs="?", default="frames.json")
    _add_config(p)

    p = sub.add_parser("obstruct", help="compute topological certificates")
    p.add_argument("field", nargs="?", default="field.json")
    _add_config(p)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen":
            return cmd_gen(args)
        cfg = RunConfig(
            eps=args.eps, eta=args.eta, dict_degree=args.dict_degree,
            max_refine=args.max_refine, seed=args.seed, threads=args.threads,
        )
        return {"diag": cmd_diag, "verify": cmd_verify, "obstruct": cmd_obstruct}[args.command](
            args, cfg
        )
    except Obstructed as exc:
        print(f"mfd: obstructed: {exc}", file=sys.stderr)
        return EXIT_OBSTRUCTED
    except ToleranceNotMet as exc:
        print(f"mfd: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except (MfdError, OSError, ValueError) as exc:
        print(f"mfd: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
