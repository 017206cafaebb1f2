"""Command-line front end for the experiment campaigns.

Every flag has a JSON config-file equivalent under the same name; the
precedence is built-in defaults, then the RGGCONN_THREADS environment
variable (thread count only), then the config file, then explicit
flags.  k ranges are written "lo:hi[:step]", inclusive at both ends.
Campaigns that write CSV also write a run manifest (merged config,
master seed, version, timestamps, output list) atomically next to the
primary output.  Timestamps live only in the manifest, so rerunning an
identical config and seed reproduces every CSV byte for byte.

Exit codes: 0 success, 1 invalid usage or configuration, 2 runtime
failure; `selfcheck` exits 2 when any property suite fails.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone

from . import __version__, experiments
from .constants import (
    decay_step,
    fault_tolerance_increment,
    prescribed_tile_count,
    sharpness_coefficient,
    threshold_constant_band,
)
from .points import Region, sample_poisson, write_csv
from .selfcheck import run_all

THREADS_ENV = "RGGCONN_THREADS"


class ConfigError(ValueError):
    """Invalid or missing configuration; reported as exit code 1."""


class _Parser(argparse.ArgumentParser):
    # the exit-code contract wants usage errors on stderr with code 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        t = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    if t < 1:
        raise ConfigError(f"{THREADS_ENV} must be >= 1, got {t}")
    return t


def _merged_config(args: argparse.Namespace, defaults: dict) -> dict:
    """defaults <- config file <- explicit flags, with unknown keys rejected."""
    cfg = dict(defaults)
    cfg["threads"] = _default_threads()
    path = getattr(args, "config", None)
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                loaded = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        known = set(defaults) | {"threads"}
        unknown = sorted(set(loaded) - known)
        if unknown:
            raise ConfigError(f"config file {path} has unknown keys: {', '.join(unknown)}")
        cfg.update(loaded)
    for key in list(defaults) + ["threads"]:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _need(cfg: dict, *keys: str) -> None:
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise ConfigError(f"missing required settings: {', '.join(missing)}")


def _as_int(cfg: dict, key: str) -> int:
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, int):
        try:
            v = int(str(v), 10)
        except ValueError as exc:
            raise ConfigError(f"{key} must be an integer, got {cfg[key]!r}") from exc
    return v


def _as_float(cfg: dict, key: str) -> float:
    try:
        return float(cfg[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be a number, got {cfg[key]!r}") from exc


def _as_bool(cfg: dict, key: str) -> bool:
    v = cfg[key]
    if not isinstance(v, bool):
        raise ConfigError(f"{key} must be true or false, got {v!r}")
    return v


def parse_k_range(value) -> list[int]:
    """Expand an int or a "lo:hi[:step]" string to an inclusive k list."""
    if isinstance(value, bool):
        raise ConfigError(f"k range must be an integer or lo:hi[:step], got {value!r}")
    if isinstance(value, int):
        return [value]
    parts = str(value).split(":")
    try:
        nums = [int(p, 10) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"k range must be an integer or lo:hi[:step], got {value!r}") from exc
    if len(nums) == 1:
        return nums
    if len(nums) == 2:
        lo, hi = nums
        step = 1
    elif len(nums) == 3:
        lo, hi, step = nums
    else:
        raise ConfigError(f"k range must be an integer or lo:hi[:step], got {value!r}")
    if step < 1 or hi < lo:
        raise ConfigError(f"k range needs lo <= hi and step >= 1, got {value!r}")
    return list(range(lo, hi + 1, step))


def parse_level_list(value) -> list[int]:
    """Neighbour increments: an int, a comma list, or lo:hi[:step]."""
    if isinstance(value, int) and not isinstance(value, bool):
        return [value]
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    text = str(value)
    if "," in text:
        try:
            return [int(p.strip(), 10) for p in text.split(",")]
        except ValueError as exc:
            raise ConfigError(f"level list must be integers, got {value!r}") from exc
    return parse_k_range(text)


def _write_manifest(path: str, command: str, cfg: dict, outputs: list, started: str, finished: str) -> None:
    doc = {
        "command": command,
        "config": cfg,
        "master_seed": cfg.get("seed"),
        "version": __version__,
        "started": started,
        "finished": finished,
        "outputs": [str(p) for p in outputs],
    }
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _finish(command: str, cfg: dict, outputs: list, started: str) -> None:
    manifest = cfg.get("manifest")
    if manifest is None:
        if not outputs:
            return
        manifest = f"{outputs[0]}.manifest.json"
    _write_manifest(manifest, command, cfg, outputs, started, _now())
    print(f"manifest: {manifest}")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_sample(cfg: dict) -> int:
    _need(cfg, "n", "seed", "out")
    started = _now()
    n = _as_float(cfg, "n")
    if not n > 0.0:
        raise ConfigError(f"n must be positive, got {n}")
    ps = sample_poisson(Region(0.0, 0.0, n ** 0.5), 1.0, _as_int(cfg, "seed"))
    write_csv(ps, cfg["out"])
    print(f"points: {len(ps)}")
    print(f"csv: {cfg['out']}")
    _finish("sample", cfg, [cfg["out"]], started)
    return 0


def _cmd_sweep(cfg: dict) -> int:
    _need(cfg, "n", "k", "trials", "seed", "out")
    started = _now()
    ks = parse_k_range(cfg["k"])
    rows, degenerate, wall = experiments.connectivity_sweep(
        _as_float(cfg, "n"), ks, _as_int(cfg, "trials"), _as_int(cfg, "seed"), _as_int(cfg, "threads")
    )
    experiments.write_sweep_csv(cfg["out"], rows)
    for row in rows:
        print(f"k={row.k}: p_hat={_fmt(row.p_hat)} ci=[{_fmt(row.ci_lo)}, {_fmt(row.ci_hi)}]")
    print(f"degenerate redraws: {degenerate}")
    print(f"csv: {cfg['out']}")
    _finish("sweep", cfg, [cfg["out"]], started)
    return 0


def _cmd_threshold(cfg: dict) -> int:
    _need(cfg, "n", "trials", "seed", "out")
    started = _now()
    result = experiments.estimate_threshold_constant(
        _as_float(cfg, "n"),
        _as_int(cfg, "trials"),
        _as_float(cfg, "quantile"),
        _as_int(cfg, "seed"),
        _as_int(cfg, "threads"),
    )
    experiments.write_cdf_csv(cfg["out"], result)
    outputs = [cfg["out"]]
    if cfg.get("samples_out") is not None:
        experiments.write_threshold_samples_csv(cfg["samples_out"], result.samples)
        outputs.append(cfg["samples_out"])
    print(f"k_q at q={_fmt(result.quantile)}: {result.k_q}")
    print(f"c_hat = k_q / log n = {_fmt(result.c_hat)}")
    print(f"asymptotic band: ({_fmt(result.band[0])}, {_fmt(result.band[1])})")
    print(f"csv: {cfg['out']}")
    _finish("threshold", cfg, outputs, started)
    return 0


def _cmd_sharpness(cfg: dict) -> int:
    _need(cfg, "n", "eps", "trials", "seed")
    started = _now()
    result = experiments.sharpness_width(
        _as_float(cfg, "n"), _as_float(cfg, "eps"), _as_int(cfg, "trials"), _as_int(cfg, "seed"), _as_int(cfg, "threads")
    )
    outputs = []
    if cfg.get("samples_out") is not None:
        experiments.write_threshold_samples_csv(cfg["samples_out"], result.samples)
        outputs.append(cfg["samples_out"])
    print(f"k_eps = {result.k_lo}, k_(1-eps) = {result.k_hi}")
    print(f"width = {result.width}")
    print(f"log(1/eps) = {_fmt(result.log_inv_eps)}")
    _finish("sharpness", cfg, outputs, started)
    return 0


def _cmd_local_events(cfg: dict) -> int:
    _need(cfg, "n", "k", "M", "trials", "seed", "out")
    started = _now()
    result = experiments.local_event_rate(
        _as_float(cfg, "n"),
        _as_int(cfg, "k"),
        _as_int(cfg, "M"),
        _as_int(cfg, "trials"),
        _as_int(cfg, "seed"),
        N=_as_int(cfg, "N"),
        eta=_as_float(cfg, "eta"),
        threads=_as_int(cfg, "threads"),
    )
    experiments.write_event_csv(cfg["out"], result.rows)
    ev, dn = result.event_rate, result.dense_rate
    print(f"event rate: {_fmt(ev.p_hat)} ci=[{_fmt(ev.ci_lo)}, {_fmt(ev.ci_hi)}]")
    print(f"dense-tile rate: {_fmt(dn.p_hat)} ci=[{_fmt(dn.ci_lo)}, {_fmt(dn.ci_hi)}]")
    cond = "undefined (no events)" if result.conditional_dense is None else _fmt(result.conditional_dense)
    print(f"dense given event: {cond}")
    print(f"csv: {cfg['out']}")
    _finish("local-events", cfg, [cfg["out"]], started)
    return 0


def _cmd_ratio_decay(cfg: dict) -> int:
    _need(cfg, "n", "k", "levels", "M", "trials", "seed", "out")
    started = _now()
    result = experiments.ratio_decay(
        _as_float(cfg, "n"),
        _as_int(cfg, "k"),
        parse_level_list(cfg["levels"]),
        _as_int(cfg, "M"),
        _as_int(cfg, "trials"),
        _as_int(cfg, "seed"),
        _as_int(cfg, "threads"),
    )
    experiments.write_ratio_csv(cfg["out"], result)
    print(f"base event rate: {_fmt(result.base_rate.p_hat)}")
    print(f"single-step reference ratio: {_fmt(result.reference)}")
    for row in result.rows:
        shown = _fmt(row.ratio) if row.defined else "undefined"
        print(f"L={row.L}: ratio={shown}")
    print(f"csv: {cfg['out']}")
    _finish("ratio-decay", cfg, [cfg["out"]], started)
    return 0


def _cmd_s_connectivity(cfg: dict) -> int:
    _need(cfg, "n", "k_base", "s", "trials", "seed")
    started = _now()
    result = experiments.s_connectivity_experiment(
        _as_float(cfg, "n"),
        _as_int(cfg, "k_base"),
        _as_int(cfg, "s"),
        _as_int(cfg, "delta_k"),
        _as_int(cfg, "trials"),
        _as_int(cfg, "seed"),
        coupled=_as_bool(cfg, "coupled"),
        threads=_as_int(cfg, "threads"),
    )
    est = result.estimate
    outputs = []
    if result.thresholds is not None and cfg.get("thresholds_out") is not None:
        experiments.write_threshold_samples_csv(cfg["thresholds_out"], result.thresholds)
        outputs.append(cfg["thresholds_out"])
    print(f"s={result.s} at k={result.k_effective}: p_hat={_fmt(est.p_hat)} ci=[{_fmt(est.ci_lo)}, {_fmt(est.ci_hi)}]")
    _finish("s-connectivity", cfg, outputs, started)
    return 0


def _cmd_gilbert_compare(cfg: dict) -> int:
    _need(cfg, "n", "trials", "seed", "out")
    started = _now()
    result = experiments.gilbert_penrose_compare(
        _as_float(cfg, "n"), _as_int(cfg, "trials"), _as_int(cfg, "seed"), _as_int(cfg, "threads")
    )
    experiments.write_gilbert_csv(cfg["out"], result)
    print(f"coincidence fraction: {_fmt(result.coincidence_fraction)}")
    print(f"order violations: {result.order_violations}")
    print(f"csv: {cfg['out']}")
    _finish("gilbert-compare", cfg, [cfg["out"]], started)
    return 0


def _cmd_constants(cfg: dict) -> int:
    _need(cfg, "M", "eta")
    M = _as_int(cfg, "M")
    eta = _as_float(cfg, "eta")
    N = _as_int(cfg, "N") if cfg.get("N") is not None else prescribed_tile_count(M)
    L = decay_step(M, N, eta)
    C = sharpness_coefficient(M, N, eta)
    lo, hi = threshold_constant_band()
    print(f"tile count N = {N}")
    print(f"decay step L = {L}")
    print(f"sharpness coefficient C = {_fmt(C)}")
    print(f"threshold constant band = ({_fmt(lo)}, {_fmt(hi)})")
    if cfg.get("n") is not None and cfg.get("s") is not None:
        inc = fault_tolerance_increment(_as_int(cfg, "s"), _as_float(cfg, "n"), M, N, eta)
        print(f"fault tolerance increment at s={_as_int(cfg, 's')}, n={_fmt(_as_float(cfg, 'n'))}: {inc}")
    return 0


def _cmd_selfcheck(cfg: dict) -> int:
    results = run_all()
    failures = 0
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        print(f"{status}  {r.name}: {r.detail}")
        failures += 0 if r.ok else 1
    print(f"{len(results) - failures}/{len(results)} suites passed")
    return 0 if failures == 0 else 2


# ---------------------------------------------------------------------------
# parser assembly


def _add_common(sp: argparse.ArgumentParser, *, seed=True, trials=True, out=None, manifest=True) -> None:
    sp.add_argument("--config", help="JSON config file; flags override its values")
    if seed:
        sp.add_argument("--seed", type=int, help="master seed (64-bit)")
    if trials:
        sp.add_argument("--trials", type=int, help="number of Monte Carlo trials")
    if out is not None:
        sp.add_argument("--out", help=out)
    if manifest:
        sp.add_argument("--manifest", help="manifest path (default: <out>.manifest.json)")
    sp.add_argument("--threads", type=int, help=f"worker processes (default ${THREADS_ENV} or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rggconn", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"rggconn {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="subcommand")

    sp = sub.add_parser("sample", help="draw one Poisson point set and write it as CSV")
    sp.add_argument("--n", type=float, help="expected number of points; the square has area n")
    _add_common(sp, trials=False, out="output CSV path")
    sp.set_defaults(run=_cmd_sample, defaults={"n": None, "seed": None, "out": None, "manifest": None})

    sp = sub.add_parser("sweep", help="connectivity probability across a k range")
    sp.add_argument("--n", type=float, help="expected points per sample")
    sp.add_argument("--k", help='k value or range "lo:hi[:step]"')
    _add_common(sp, out="sweep CSV path")
    sp.set_defaults(
        run=_cmd_sweep, defaults={"n": None, "k": None, "trials": None, "seed": None, "out": None, "manifest": None}
    )

    sp = sub.add_parser("threshold", help="per-sample connectivity threshold statistics")
    sp.add_argument("--n", type=float, help="expected points per sample")
    sp.add_argument("--quantile", type=float, help="threshold quantile (default 0.5)")
    sp.add_argument("--samples-out", dest="samples_out", help="optional per-trial threshold CSV")
    _add_common(sp, out="threshold CDF CSV path")
    sp.set_defaults(
        run=_cmd_threshold,
        defaults={
            "n": None,
            "quantile": 0.5,
            "trials": None,
            "seed": None,
            "out": None,
            "samples_out": None,
            "manifest": None,
        },
    )

    sp = sub.add_parser("sharpness", help="width of the connectivity transition window")
    sp.add_argument("--n", type=float, help="expected points per sample")
    sp.add_argument("--eps", type=float, help="tail mass on each side, in (0, 1/2]")
    sp.add_argument("--samples-out", dest="samples_out", help="optional per-trial threshold CSV")
    _add_common(sp)
    sp.set_defaults(
        run=_cmd_sharpness,
        defaults={"n": None, "eps": None, "trials": None, "seed": None, "samples_out": None, "manifest": None},
    )

    sp = sub.add_parser("local-events", help="obstruction event rate on the sampling box")
    sp.add_argument("--n", type=float, help="scale parameter fixing the box side")
    sp.add_argument("--k", type=int, help="neighbour count")
    sp.add_argument("--M", type=int, help="box side multiplier")
    sp.add_argument("--N", type=int, help="tiles per box-side unit (default 16)")
    sp.add_argument("--eta", type=float, help="density surplus in (0, 1/2] (default 0.25)")
    _add_common(sp, out="per-trial event CSV path")
    sp.set_defaults(
        run=_cmd_local_events,
        defaults={
            "n": None,
            "k": None,
            "M": None,
            "N": 16,
            "eta": 0.25,
            "trials": None,
            "seed": None,
            "out": None,
            "manifest": None,
        },
    )

    sp = sub.add_parser("ratio-decay", help="event probability decay under extra neighbours")
    sp.add_argument("--n", type=float, help="scale parameter fixing the box side")
    sp.add_argument("--k", type=int, help="base neighbour count")
    sp.add_argument("--levels", help='increments L: value, comma list, or "lo:hi[:step]"')
    sp.add_argument("--M", type=int, help="box side multiplier")
    _add_common(sp, out="ratio CSV path")
    sp.set_defaults(
        run=_cmd_ratio_decay,
        defaults={
            "n": None,
            "k": None,
            "levels": None,
            "M": None,
            "trials": None,
            "seed": None,
            "out": None,
            "manifest": None,
        },
    )

    sp = sub.add_parser("s-connectivity", help="s-fold connectivity rate at k_base + delta_k")
    sp.add_argument("--n", type=float, help="expected points per sample")
    sp.add_argument("--k-base", dest="k_base", type=int, help="baseline neighbour count")
    sp.add_argument("--s", type=int, help="required connectivity order")
    sp.add_argument("--delta-k", dest="delta_k", type=int, help="extra neighbours on top of k-base (default 0)")
    sp.add_argument("--coupled", action=argparse.BooleanOptionalAction, help="also record per-sample minimal k")
    sp.add_argument("--thresholds-out", dest="thresholds_out", help="per-trial minimal-k CSV (with --coupled)")
    _add_common(sp)
    sp.set_defaults(
        run=_cmd_s_connectivity,
        defaults={
            "n": None,
            "k_base": None,
            "s": None,
            "delta_k": 0,
            "coupled": False,
            "thresholds_out": None,
            "trials": None,
            "seed": None,
            "manifest": None,
        },
    )

    sp = sub.add_parser("gilbert-compare", help="disc-model connection radius vs isolation radius")
    sp.add_argument("--n", type=float, help="expected points per sample")
    _add_common(sp, out="per-trial radii CSV path")
    sp.set_defaults(
        run=_cmd_gilbert_compare, defaults={"n": None, "trials": None, "seed": None, "out": None, "manifest": None}
    )

    sp = sub.add_parser("constants", help="closed-form constants for a parameter choice")
    sp.add_argument("--M", type=int, help="box side multiplier")
    sp.add_argument("--N", type=int, help="tiles per box-side unit (default: prescribed for M)")
    sp.add_argument("--eta", type=float, help="density surplus in (0, 1/2]")
    sp.add_argument("--s", type=int, help="connectivity order for the increment")
    sp.add_argument("--n", type=float, help="scale for the increment")
    sp.add_argument("--config", help="JSON config file; flags override its values")
    sp.set_defaults(run=_cmd_constants, defaults={"M": None, "N": None, "eta": None, "s": None, "n": None})

    sp = sub.add_parser("selfcheck", help="run the deterministic property suites")
    sp.add_argument("--config", help="JSON config file (no settings required)")
    sp.set_defaults(run=_cmd_selfcheck, defaults={})

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse help/usage paths carry the code
        return int(exc.code or 0)
    if getattr(args, "run", None) is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        cfg = _merged_config(args, args.defaults)
        return args.run(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"rggconn: invalid configuration: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"rggconn: runtime failure: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
