"""
Command line front end.

    beamlink sweep|signaling|displacement|timeseries|fit-ar [--config PATH] [--out DIR]
        [--seed N] [--order N] [--trace PATH] [--log-level LEVEL]
"""

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
from typing import Callable, Dict, Iterable, List, Optional, Sequence

from pydantic import ValidationError

from beamlink.dynamics import ar_fit, load_trace, reference_trace
from beamlink.errors import BeamlinkError, ConfigError, OutputError
from beamlink.log import configure_logging
from beamlink.models import LINK_SAMPLE_FIELDS, RunManifest, ScenarioConfig
from beamlink.settings import DEFAULT_AR_ORDER
from beamlink.sim import displacement_sweep, prepare, run_plan, signaling_sweep, sweep
from beamlink.version import VERSION

logger = logging.getLogger(__name__)

SWEEP_HEADER = ("strategy", "p0_w", "z_m", "mean_r_bps", "p5_r_bps", "p95_r_bps", "mean_pr_w")
SIGNALING_HEADER = ("delta_t_s", "p0_w", "z_m", "mean_r_bps", "p5_r_bps", "p95_r_bps", "mean_pr_w", "overhead_bps")
DISPLACEMENT_HEADER = ("p0_w", "z_m", "delta_m", "r_bps")


# ========================================
# Config
# ========================================

def _format_validation(err: ValidationError) -> str:
    first = err.errors()[0]
    loc = ".".join(str(part) for part in first["loc"]) or "<root>"
    return f"{loc}: {first['msg']}"


def _resolve_paths(data: dict, base_dir: str) -> None:
    """Relative file references in a config are relative to the config file."""

    def resolve(path):
        if isinstance(path, str) and not os.path.isabs(path):
            return os.path.join(base_dir, path)
        return path

    if "spectrum_path" in data:
        data["spectrum_path"] = resolve(data["spectrum_path"])
    perturbations = data.get("perturbations")
    if isinstance(perturbations, dict):
        for source in perturbations.values():
            if isinstance(source, dict) and "trace_path" in source:
                source["trace_path"] = resolve(source["trace_path"])


def load_config(path: Optional[str] = None, seed: Optional[int] = None) -> ScenarioConfig:
    """Read and validate a JSON scenario; no path means the reference defaults."""
    data: dict = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as handle:
                data = json.load(handle)
        except OSError as err:
            raise OutputError(f"cannot read config {path}: {err}") from err
        except json.JSONDecodeError as err:
            raise ConfigError(f"{path}: invalid JSON: {err}") from err
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        _resolve_paths(data, os.path.dirname(os.path.abspath(path)))
    if seed is not None:
        data["seed"] = seed
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_format_validation(err)) from err


def _file_digest(path: str) -> str:
    try:
        with open(path, "rb") as handle:
            digest = hashlib.sha256()
            for chunk in iter(lambda: handle.read(1 << 16), b""):
                digest.update(chunk)
            return digest.hexdigest()
    except OSError as err:
        raise OutputError(f"cannot read {path}: {err}") from err


def config_hash(cfg: ScenarioConfig) -> str:
    """
    sha256 of the canonical config JSON. Referenced files enter by content,
    not by location, so the hash does not depend on where the tree lives.
    """
    data = cfg.model_dump(mode="json")
    if data["spectrum_path"] is not None:
        data["spectrum_path"] = {"sha256": _file_digest(data["spectrum_path"])}
    for source in data["perturbations"].values():
        if source["trace_path"] is not None:
            source["trace_path"] = {"sha256": _file_digest(source["trace_path"])}
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# ========================================
# Writers
# ========================================

def _num(value) -> str:
    return repr(float(value))


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as err:
        raise OutputError(f"cannot write {path}: {err}") from err
    logger.info("wrote %s", path)


def write_json(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    except OSError as err:
        raise OutputError(f"cannot write {path}: {err}") from err
    logger.info("wrote %s", path)


def write_manifest(out_dir: str, cfg: ScenarioConfig, outputs: List[str]) -> None:
    manifest = RunManifest(config_hash=config_hash(cfg), seed=cfg.seed, tool_version=VERSION, outputs=outputs)
    write_json(os.path.join(out_dir, "manifest.json"), manifest.model_dump_json(indent=2))


def _make_out_dir(out_dir: str) -> None:
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as err:
        raise OutputError(f"cannot create output directory {out_dir}: {err}") from err


# ========================================
# Commands
# ========================================

def cmd_sweep(cfg: ScenarioConfig, out_dir: str) -> List[str]:
    result = sweep(cfg)
    rows = (
        [r.strategy.value, _num(r.p0_w), _num(r.z_m), _num(r.mean_r_bps), _num(r.p5_r_bps), _num(r.p95_r_bps), _num(r.mean_pr_w)]
        for r in result.rows
    )
    write_csv(os.path.join(out_dir, "sweep.csv"), SWEEP_HEADER, rows)
    return ["sweep.csv"]


def cmd_signaling(cfg: ScenarioConfig, out_dir: str) -> List[str]:
    """Dynamic compensation per signaling period of cfg.delta_t_list_s."""
    rows = (
        [
            _num(r.delta_t_s),
            _num(r.p0_w),
            _num(r.z_m),
            _num(r.mean_r_bps),
            _num(r.p5_r_bps),
            _num(r.p95_r_bps),
            _num(r.mean_pr_w),
            _num(r.overhead_bps),
        ]
        for r in signaling_sweep(cfg)
    )
    write_csv(os.path.join(out_dir, "signaling.csv"), SIGNALING_HEADER, rows)
    return ["signaling.csv"]


def cmd_displacement(cfg: ScenarioConfig, out_dir: str) -> List[str]:
    rows = ([_num(r.p0_w), _num(r.z_m), _num(r.delta_m), _num(r.r_bps)] for r in displacement_sweep(cfg))
    write_csv(os.path.join(out_dir, "displacement.csv"), DISPLACEMENT_HEADER, rows)
    return ["displacement.csv"]


def cmd_timeseries(cfg: ScenarioConfig, out_dir: str) -> List[str]:
    """One block of samples per (P0, z), using cfg.strategy."""
    plan = prepare(cfg)

    def blocks():
        for ip, p0 in enumerate(cfg.p0_list_w):
            for iz, z in enumerate(cfg.z_list_m):
                series = run_plan(plan, z, p0, (iz, ip))
                columns = [series.column(name) for name in LINK_SAMPLE_FIELDS]
                for values in zip(*columns):
                    yield [_num(v) for v in values]

    write_csv(os.path.join(out_dir, "timeseries.csv"), LINK_SAMPLE_FIELDS, blocks())
    return ["timeseries.csv"]


def cmd_fit_ar(trace_path: Optional[str], order: int, out_dir: str) -> List[str]:
    """Fit an AR model to a trace file, or to the bundled reference trace."""
    if trace_path is None:
        trace = reference_trace()
    else:
        trace, column = load_trace(trace_path)
        logger.info("fitting AR(%d) to %s column of %s", order, column, trace_path)
    model = ar_fit(trace, order)
    document = {
        "order": model.order,
        "coefficients": model.coefficients,
        "noise_std": model.noise_std,
        "sample_rate_hz": model.sample_rate_hz,
    }
    write_json(os.path.join(out_dir, "ar_model.json"), json.dumps(document, indent=2))
    return ["ar_model.json"]


def _scenario_command(command: Callable[[ScenarioConfig, str], List[str]]) -> Callable[[argparse.Namespace], None]:
    def run_command(args: argparse.Namespace) -> None:
        cfg = load_config(args.config, args.seed)
        _make_out_dir(args.out)
        outputs = command(cfg, args.out)
        write_manifest(args.out, cfg, outputs)

    return run_command


def _fit_ar_command(args: argparse.Namespace) -> None:
    _make_out_dir(args.out)
    cmd_fit_ar(args.trace, args.order, args.out)


COMMANDS: Dict[str, Callable[[argparse.Namespace], None]] = {
    "sweep": _scenario_command(cmd_sweep),
    "signaling": _scenario_command(cmd_signaling),
    "displacement": _scenario_command(cmd_displacement),
    "timeseries": _scenario_command(cmd_timeseries),
    "fit-ar": _fit_ar_command,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beamlink",
        description="Laser vehicle-to-vehicle link simulator with misalignment and RF-assisted pointing",
    )
    parser.add_argument("command", choices=list(COMMANDS))
    parser.add_argument("--config", default=None, help="scenario JSON, defaults to the reference parameters")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    parser.add_argument("--order", type=int, default=DEFAULT_AR_ORDER, help="AR order for fit-ar")
    parser.add_argument("--trace", default=None, help="trace file for fit-ar, defaults to the bundled trace")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code."""
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    logger.info("beamlink %s %s", VERSION, args.command)
    try:
        COMMANDS[args.command](args)
    except BeamlinkError as err:
        logger.error("%s: %s", type(err).__name__, err.detail)
        return err.exit_code
    except ValidationError as err:
        logger.error("ConfigError: %s", _format_validation(err))
        return ConfigError.exit_code
    except OSError as err:
        logger.error("OutputError: %s", err)
        return OutputError.exit_code
    logger.info("%s finished", args.command)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
