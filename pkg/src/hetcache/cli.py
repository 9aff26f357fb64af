"""Command-line front end.

    hetcache simulate --config point.json
    hetcache sweep --config sweep.json --plot
    hetcache bounds --config point.json
    hetcache verify
    hetcache preset fig4|fig5|fig6 [--seed S] [--trials T] [--jobs J] [--plot]

Exit codes: 0 ok, 2 bad config, 3 unsupported regime, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from hetcache.bounds import bounds_report
from hetcache.harness import (
    POLICIES,
    PRESETS,
    ExperimentSpec,
    SweepError,
    SweepResult,
    check_regime,
    csv_text,
    default_jobs,
    run_sweep,
    simulate_point,
    summary_csv_text,
)
from hetcache.ksmlp import DEFAULT_DELTA, UnsupportedRegime
from hetcache.plotting import sweep_svg
from hetcache.popularity import build_popularity
from hetcache.system import PlacementError, StorageProfile, SystemConfig, make_homogeneous_profile
from hetcache.verify import run_all

EXIT_OK, EXIT_CONFIG, EXIT_REGIME, EXIT_IO = 0, 2, 3, 4
SEED_ENV = "CACHESIM_SEED"
DEFAULT_SEED = 1


class ConfigError(ValueError):
    pass


class OutputSet:
    """Files of one run. Each is written atomically; ``discard`` removes them all."""

    def __init__(self, out_dir: str | os.PathLike):
        self.dir = Path(out_dir)
        self.written: list[Path] = []

    def write(self, name: str, text: str) -> Path:
        self.dir.mkdir(parents=True, exist_ok=True)
        final = self.dir / name
        fd, tmp = tempfile.mkstemp(dir=self.dir, prefix=f".{name}.", suffix=".part")
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, final)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
        self.written.append(final)
        return final

    def discard(self) -> None:
        for p in self.written:
            p.unlink(missing_ok=True)
        self.written.clear()


def _load_json(path) -> dict:
    with open(path) as fh:  # OSError propagates as an I/O failure
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return data


def _parse_seed(value, source: str) -> int:
    try:
        seed = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{source}: seed must be an integer, got {value!r}") from None
    if isinstance(value, float) or not 0 <= seed < 2**64:
        raise ConfigError(f"{source}: seed must be an unsigned 64-bit integer, got {value!r}")
    return seed


def resolve_seed(flag, file_value) -> int:
    """--seed, then the config file, then $CACHESIM_SEED, then 1."""
    if flag is not None:
        return _parse_seed(flag, "--seed")
    if file_value is not None:
        return _parse_seed(file_value, "config")
    env = os.environ.get(SEED_ENV)
    if env not in (None, ""):
        return _parse_seed(env, SEED_ENV)
    return DEFAULT_SEED


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _emit_sweep(result: SweepResult, out: OutputSet, plot: bool) -> None:
    name = result.spec.name
    out.write(f"{name}.csv", csv_text(result))
    out.write(f"{name}_summary.csv", summary_csv_text(result))
    if plot:
        out.write(f"{name}.svg", sweep_svg(result))


def _spec_from(base: dict, args) -> ExperimentSpec:
    d = dict(base)
    d["seed"] = resolve_seed(args.seed, d.get("seed"))
    for key in ("trials", "policy", "delta"):
        if getattr(args, key, None) is not None:
            d[key] = getattr(args, key)
    try:
        return ExperimentSpec.from_dict(d)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad sweep config: {exc}") from exc


def cmd_sweep(args, out: OutputSet) -> int:
    if args.command == "preset":
        base = PRESETS[args.preset]().to_dict()
        if args.config:
            base.update(_load_json(args.config))
    else:
        base = _load_json(args.config)
    spec = _spec_from(base, args)
    check_regime(spec)
    echo = _dump(spec.to_dict())
    sys.stdout.write(echo)
    jobs = args.jobs if args.jobs is not None else default_jobs()
    result = run_sweep(spec, jobs=max(1, jobs))
    _emit_sweep(result, out, args.plot)
    out.write(f"{spec.name}_config.json", echo)
    return EXIT_OK


def _point_from(d: dict) -> tuple[SystemConfig, StorageProfile]:
    try:
        config = SystemConfig.from_dict(d)
    except KeyError as exc:
        raise ConfigError(f"config is missing {exc}") from exc
    if "capacities" in d:
        profile = StorageProfile.from_dict(d)
    else:
        profile = make_homogeneous_profile(config.m, config.M)
    profile.check_against(config)
    return config, profile


def cmd_simulate(args, out: OutputSet) -> int:
    d = _load_json(args.config)
    config, profile = _point_from(d)
    policy = args.policy or d.get("policy", "ppmm")
    delta = float(args.delta if args.delta is not None else d.get("delta", DEFAULT_DELTA))
    trials = int(args.trials if args.trials is not None else d.get("trials", 100))
    seed = resolve_seed(args.seed, d.get("seed"))
    name = d.get("name", "simulate")
    if policy not in POLICIES:
        raise ConfigError(f"unknown policy {policy!r}")
    if trials < 1:
        raise ConfigError("need at least one trial")
    if policy == "ksmlp" and config.beta <= 1:
        raise UnsupportedRegime(f"KS+MLP needs beta > 1, got beta={config.beta}")
    effective = {**config.to_dict(), **profile.to_dict(), "name": name, "policy": policy,
                 "delta": delta, "trials": trials, "seed": seed}
    echo = _dump(effective)
    sys.stdout.write(echo)
    result = simulate_point(config, profile, policy, delta, trials, seed, name=name)
    out.write(f"{name}.csv", csv_text(result))
    out.write(f"{name}_summary.csv", summary_csv_text(result))
    out.write(f"{name}_config.json", echo)
    rec = result.records[0]
    print(f"mean rate {rec.mean:.4f} (stderr {rec.stderr:.4f}) over {trials} trials", file=sys.stderr)
    return EXIT_OK


def cmd_bounds(args, out: OutputSet) -> int:
    d = _load_json(args.config)
    try:
        config = SystemConfig.from_dict(d)
    except KeyError as exc:
        raise ConfigError(f"config is missing {exc}") from exc
    profile = StorageProfile.from_dict(d) if "capacities" in d else None
    delta = float(args.delta if args.delta is not None else d.get("delta", DEFAULT_DELTA))
    report = bounds_report(build_popularity(config.n, config.beta), config, profile, delta)
    text = _dump(report)
    sys.stdout.write(text)
    if args.out:
        out.write("bounds.json", text)
    return EXIT_OK


def cmd_verify(args, out: OutputSet) -> int:
    suites = run_all(args.instances)
    for s in suites:
        status = "PASS" if s.ok else "FAIL"
        line = f"{status} {s.name}: {s.passed} passed, {s.failed} failed"
        if s.first_failure:
            line += f" ({s.first_failure})"
        print(line)
    return EXIT_OK if all(s.ok for s in suites) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hetcache", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True, sweep=False):
        p.add_argument("--config", required=config_required, metavar="PATH", help="JSON config file")
        p.add_argument("--out", default=".", metavar="DIR", help="output directory (default: .)")
        p.add_argument("--seed", metavar="U64", help=f"master seed (fallback ${SEED_ENV}, then 1)")
        p.add_argument("--trials", type=int, metavar="N")
        p.add_argument("--policy", choices=POLICIES)
        p.add_argument("--delta", type=float, metavar="F", help="KS weight parameter")
        if sweep:
            p.add_argument("--plot", action="store_true", help="also write an SVG chart")
            p.add_argument("--jobs", type=int, metavar="N", help="worker processes (default: all cores)")

    common(sub.add_parser("simulate", help="trials at one configuration"))
    common(sub.add_parser("sweep", help="run a sweep described by a JSON spec"), sweep=True)
    bounds = sub.add_parser("bounds", help="lower bound and regime exponents for a configuration")
    bounds.add_argument("--config", required=True, metavar="PATH")
    bounds.add_argument("--out", metavar="DIR", help="also write bounds.json here")
    bounds.add_argument("--delta", type=float, metavar="F")
    verify = sub.add_parser("verify", help="run the oracle cross-checks")
    verify.add_argument("--instances", type=int, default=500, metavar="N")
    preset = sub.add_parser("preset", help="run a figure preset")
    preset.add_argument("preset", choices=sorted(PRESETS))
    common(preset, config_required=False, sweep=True)
    return parser


COMMANDS = {"simulate": cmd_simulate, "sweep": cmd_sweep, "preset": cmd_sweep,
            "bounds": cmd_bounds, "verify": cmd_verify}


def run_cli(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = OutputSet(getattr(args, "out", None) or ".")
    try:
        return COMMANDS[args.command](args, out)
    except BaseException as exc:
        out.discard()
        cause = exc.__cause__ if isinstance(exc, SweepError) and exc.__cause__ else exc
        if isinstance(cause, UnsupportedRegime):
            code = EXIT_REGIME
        elif isinstance(cause, (ConfigError, ValueError, TypeError, KeyError, PlacementError)):
            code = EXIT_CONFIG
        elif isinstance(cause, OSError):
            code = EXIT_IO
        else:
            raise
        print(f"hetcache: error: {exc}", file=sys.stderr)
        return code


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
