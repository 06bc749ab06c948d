import argparse
import os
import sys
import time
from typing import Dict, List, Optional

from dotenv import dotenv_values, load_dotenv

from core.crosscheck import ENGINE_ORDER, combined_status, crosscheck, run_engines
from core.functions import build_function_spec
from core.geometry import affine_hull
from core.ingest import read_point_csv
from core.oracle import body_from_points, oracle_plane_slices, oracle_strict_convexity
from core.report import (
    crosscheck_to_dict,
    hull_to_dict,
    render_crosscheck,
    render_hull,
    render_verdict,
    render_verdicts,
    to_json,
    verdict_to_dict,
    verdicts_to_dict,
)
from shared import config
from shared.errors import InputError, RegionTooThinError
from shared.logger import set_run_context, setup_logger
from shared.models import DEFAULT_TOLERANCES, Mode, RunConfig, Status, Verdict
from shared.registry import load_corpus

logger = setup_logger("main")

# options whose values may start with '-' (boxes like -1:1, expressions like -log(x))
DASH_VALUE_FLAGS = ("--box", "--function", "--domain", "--affine", "--tol")

MODE_FLAGS = {
    "main-theorem": (Mode.MAIN_THEOREM,),
    "oracle": (Mode.ORACLE,),
    "lines": (Mode.LINES,),
    "all": ENGINE_ORDER,
}

EXIT_CODES = {
    Status.CERTIFIED: config.EXIT_CERTIFIED,
    Status.REFUTED: config.EXIT_REFUTED,
    Status.INCONCLUSIVE: config.EXIT_INCONCLUSIVE,
}


# =============================
# Argument parsing
# =============================

class CliParser(argparse.ArgumentParser):
    """Usage errors are input errors: exit 3 with the shared `error:` line."""

    def error(self, message: str) -> None:
        raise InputError(f"{self.prog}: {message}")


def attach_dash_values(argv: List[str]) -> List[str]:
    """
    Rewrites `--box -1:1` as `--box=-1:1` so argparse does not read the
    value as an option.
    """
    out: List[str] = []
    i = 0
    while i < len(argv):
        token = argv[i]
        value = argv[i + 1] if i + 1 < len(argv) else ""
        if token in DASH_VALUE_FLAGS and value.startswith("-") and not value.startswith("--") and value != "-h":
            out.append(f"{token}={value}")
            i += 2
            continue
        out.append(token)
        i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(
        prog="strict-epi",
        description="Certify or refute strict convexity of the epigraph of f on an open domain.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--samples", type=int, help=f"domain samples k (default {config.DEFAULT_SAMPLES})")
        p.add_argument("--trials", type=int, help=f"oracle segment trials (default {config.DEFAULT_TRIALS})")
        p.add_argument("--seed", type=int, help=f"random seed (default {config.DEFAULT_SEED})")
        p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE", help="tolerance override")
        p.add_argument("--json", action="store_true", help="emit JSON on stdout")
        p.add_argument("--timing", action="store_true", help="report elapsed time")
        p.add_argument("--workers", type=int, help="threads for the line engine")
        p.add_argument("--config", help="dotenv-style KEY=VALUE file with flag defaults")

    analyze = sub.add_parser("analyze", help="run the verdict engines on one function")
    analyze.add_argument("--function", help="expression for f, e.g. \"x^2 + y^2\"")
    analyze.add_argument("--dim", type=int, help="ambient dimension n")
    analyze.add_argument("--domain", action="append", default=[], help="constraints g < 0, ';'-separated")
    analyze.add_argument("--affine", action="append", default=[], help="affine equalities h = 0, ';'-separated")
    analyze.add_argument("--box", help="sampling box lo:hi,lo:hi,...")
    analyze.add_argument("--mode", choices=config.MODES, help=f"engine (default {config.DEFAULT_MODE})")
    analyze.add_argument("--lines", type=int, help=f"line restrictions m (default {config.DEFAULT_LINES})")
    common(analyze)

    hull = sub.add_parser("hull", help="affine hull of a CSV point cloud")
    hull.add_argument("--csv", required=True, help="one point per line, comma-separated")
    hull.add_argument("--strict", action="store_true", help="also run the body oracle on the convex hull")
    hull.add_argument("--planes", type=int, default=config.DEFAULT_PLANES, help="plane slices for --strict")
    common(hull)

    check = sub.add_parser("crosscheck", help="cross-validate the engines on a corpus")
    check.add_argument("--corpus", help="corpus file (default: built-in corpus)")
    check.add_argument("--lines", type=int, help=f"line restrictions m (default {config.DEFAULT_LINES})")
    common(check)

    return parser


def _parse_tolerances(items: List[str]) -> Dict[str, float]:
    overrides: Dict[str, float] = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"Malformed tolerance override {item!r}, expected name=value")
        try:
            overrides[name.strip()] = float(value)
        except ValueError:
            raise InputError(f"Tolerance {name.strip()} must be a number, got {value!r}")
    return overrides


def _pick(flag, file_values: Dict[str, Optional[str]], key: str, default, cast=str):
    """Flag, then config file, then default."""
    if flag is not None and flag != []:
        return flag
    raw = file_values.get(key)
    if raw is None or raw == "":
        return default
    try:
        return cast(raw)
    except ValueError:
        raise InputError(f"Config key {key} has invalid value {raw!r}")


def build_run_config(args: argparse.Namespace) -> RunConfig:
    file_values: Dict[str, Optional[str]] = {}
    if args.config:
        if not os.path.exists(args.config):
            raise InputError(f"Config file not found: {args.config}")
        file_values = dict(dotenv_values(args.config))

    def get(name: str, default, cast=str):
        return _pick(getattr(args, name, None), file_values, name.upper(), default, cast)

    overrides = _parse_tolerances(args.tol or _split(file_values.get("TOL")))
    seed = get("seed", config.DEFAULT_SEED, int)
    env_seed = os.getenv(config.SEED_ENV_VAR)
    if env_seed:
        try:
            seed = int(env_seed)
        except ValueError:
            raise InputError(f"{config.SEED_ENV_VAR} must be an integer, got {env_seed!r}")

    cfg = RunConfig(
        subcommand=args.subcommand,
        function=get("function", ""),
        dim=get("dim", 0, int),
        constraints=list(args.domain) if getattr(args, "domain", None) else _split(file_values.get("DOMAIN")),
        affine=list(args.affine) if getattr(args, "affine", None) else _split(file_values.get("AFFINE")),
        box=get("box", ""),
        mode=get("mode", config.DEFAULT_MODE),
        samples=get("samples", config.DEFAULT_SAMPLES, int),
        lines=get("lines", config.DEFAULT_LINES, int),
        trials=get("trials", config.DEFAULT_TRIALS, int),
        seed=seed,
        tolerances=DEFAULT_TOLERANCES.with_overrides(overrides),
        json=args.json,
        timing=args.timing,
        workers=get("workers", 1, int),
        corpus=get("corpus", None),
        csv=get("csv", None),
    )
    if cfg.mode not in MODE_FLAGS:
        raise InputError(f"Unknown mode {cfg.mode!r}, expected one of {', '.join(config.MODES)}")
    for name in ("samples", "lines", "trials", "workers"):
        if getattr(cfg, name) < 1:
            raise InputError(f"--{name} must be >= 1, got {getattr(cfg, name)}")
    return cfg


def _split(raw: Optional[str]) -> List[str]:
    return [raw] if raw else []


# =============================
# Commands
# =============================

def cmd_analyze(cfg: RunConfig) -> int:
    if not cfg.function:
        raise InputError("analyze needs --function")
    if cfg.dim < 1:
        raise InputError("analyze needs --dim >= 1")

    spec = build_function_spec(cfg.function, cfg.dim, cfg.constraints, cfg.box, cfg.affine)
    verdicts: Dict[Mode, Verdict] = {}
    for mode in MODE_FLAGS[cfg.mode]:
        start = time.perf_counter()
        verdict = run_engines(
            spec, cfg.samples, cfg.lines, cfg.trials, cfg.seed, cfg.tolerances, cfg.workers, (mode,)
        )[mode]
        if cfg.timing:
            verdict.elapsed_ms = 1000.0 * (time.perf_counter() - start)
        verdicts[mode] = verdict

    if cfg.json:
        print(to_json(verdicts_to_dict(verdicts, cfg.samples, cfg.trials, cfg.timing)))
    else:
        print(f"f = {spec.source} on R^{spec.dim}\n")
        print(render_verdicts(verdicts))

    status = combined_status([v.overall for v in verdicts.values()])
    return EXIT_CODES[status]


def cmd_hull(cfg: RunConfig, strict: bool = False, planes: int = config.DEFAULT_PLANES) -> int:
    cloud = read_point_csv(cfg.csv)
    hull = affine_hull(cloud, cfg.tolerances)
    payload = hull_to_dict(hull)
    text = [render_hull(hull)]
    code = config.EXIT_CERTIFIED

    if strict:
        body = body_from_points(cloud, cfg.tolerances)
        trials = min(cfg.trials, config.DEFAULT_BODY_TRIALS)
        verdict = oracle_strict_convexity(body, trials, cfg.seed, cfg.tolerances)
        payload["oracle"] = verdict_to_dict(verdict, len(cloud), trials)
        text.append("\n" + render_verdict(verdict))
        if hull.ambient_dim >= 2:
            sliced = oracle_plane_slices(body, planes, trials, cfg.seed, cfg.tolerances)
            payload["plane_slices"] = verdict_to_dict(sliced, len(cloud), trials)
            text.append("\nplane slices\n" + render_verdict(sliced))
        code = EXIT_CODES[verdict.overall]

    print(to_json(payload) if cfg.json else "\n".join(text))
    return code


def cmd_crosscheck(cfg: RunConfig) -> int:
    corpus = load_corpus(cfg.corpus) if cfg.corpus else load_corpus()
    report = crosscheck(
        corpus, cfg.samples, cfg.trials, cfg.seed, cfg.tolerances, cfg.lines, cfg.workers
    )
    if cfg.json:
        print(to_json(crosscheck_to_dict(report, cfg.samples, cfg.trials)))
    else:
        print(render_crosscheck(report))
    return config.EXIT_CERTIFIED if report.ok else config.EXIT_INCONCLUSIVE


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    if argv is None:
        argv = sys.argv[1:]

    try:
        args = build_parser().parse_args(attach_dash_values(list(argv)))
        cfg = build_run_config(args)
        set_run_context(cfg.subcommand, cfg.seed)
        if cfg.subcommand == "analyze":
            return cmd_analyze(cfg)
        if cfg.subcommand == "hull":
            return cmd_hull(cfg, args.strict, args.planes)
        return cmd_crosscheck(cfg)

    except (InputError, RegionTooThinError) as e:
        diagnostic = e.diagnostic() if hasattr(e, "diagnostic") else str(e)
        print(f"error: {diagnostic}", file=sys.stderr)
        logger.warning(f"Input error: {e}")
        return config.EXIT_INPUT_ERROR

    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        print(f"error: {e}", file=sys.stderr)
        return config.EXIT_INCONCLUSIVE


if __name__ == "__main__":
    sys.exit(main())
