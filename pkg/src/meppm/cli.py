"""Command-line front end.

Configuration is a JSON object with flat dotted keys such as
``channel.p0_w`` or ``scheme.type`` (nested objects are flattened).
Command-line ``--set key=value`` pairs and shortcut flags override it.
Every result CSV gets a sibling ``.manifest.json`` that ``replay`` can
re-run to reproduce the rows byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime as _dt
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .analysis import (
    CmeppmAnalysisParams,
    DmeppmAnalysisParams,
    RegimeError,
    cmeppm_exact_union_bound,
    cmeppm_ser,
    dmeppm_ber,
    ser_to_ber,
)
from .channel import ChannelParams, photon_budget
from .codes import (
    BibdCode,
    CodeFormatError,
    CodeVerificationError,
    InfeasibleSearchError,
    OocCode,
    _format_code,
    _parse_code,
    catalog_entries,
    load_catalog,
    load_code,
    msequence_difference_set,
    paley_difference_set,
    save_code,
    search_ooc,
    verify_bibd,
    verify_ooc,
)
from .modulation import (
    ccm_constellation,
    cmeppm_constellation,
    dmeppm_partition,
    dump_constellation_csv,
    eppm_constellation,
    meppm_constellation,
)
from .montecarlo import ConfigError, SimConfig, derived_seed, run_point, sweep

log = logging.getLogger("meppm")

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_RUNTIME = 0, 1, 2, 3

CSV_COLUMNS = [
    "scheme", "Q", "K", "lambda", "L", "w", "alpha", "n_users", "detector",
    "stats_mode", "p0_w", "pb_w", "eta", "wavelength_nm", "bitrate_bps",
    "trials", "symbol_errors", "bit_errors", "ser", "ber", "ci95", "seed", "source",
]

# key -> (default, type); type None means "string or null"
CONFIG_KEYS: dict[str, tuple[Any, type]] = {
    "scheme.type": ("cmeppm", str),
    "bibd.path": (None, str),
    "ooc.path": (None, str),
    "users.n": (1, int),
    "users.desired": (0, int),
    "channel.p0_w": (0.1e-6, float),
    "channel.pb_w": (0.1e-6, float),
    "channel.eta": (0.8, float),
    "channel.wavelength_nm": (650.0, float),
    "channel.bitrate_bps": (200e6, float),
    "channel.lam0": (None, float),
    "channel.lamb": (None, float),
    "sim.stats": ("poisson", str),
    "sim.detector": ("auto", str),
    "sim.trials": (1_000_000, int),
    "sim.target_errors": (100, int),
    "sim.seed": (0, int),
    "sim.block_size": (2000, int),
    "dmeppm.q": (4, int),
    "dmeppm.ell": (4, int),
    "dmeppm.type": ("II", str),
    "sweep.variable": (None, str),
    "sweep.values": (None, list),
    "note": (None, str),
}


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# Configuration
# --------------------------------------------------------------------------

def _flatten(obj: dict, prefix: str = "") -> dict:
    out = {}
    for key, value in obj.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(_flatten(value, name + "."))
        else:
            out[name] = value
    return out


def _coerce(key: str, value):
    default, kind = CONFIG_KEYS[key]
    if value is None:
        return None
    if kind is float:
        if isinstance(value, bool):
            raise UsageError(f"{key}: expected a number, got {value!r}")
        try:
            return float(value)
        except (TypeError, ValueError):
            raise UsageError(f"{key}: expected a number, got {value!r}") from None
    if kind is int:
        if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
            raise UsageError(f"{key}: expected an integer, got {value!r}")
        try:
            return int(value)
        except (TypeError, ValueError):
            raise UsageError(f"{key}: expected an integer, got {value!r}") from None
    if kind is list:
        if isinstance(value, str):
            value = json.loads(value) if value.strip().startswith("[") else value.split(",")
        if not isinstance(value, list):
            raise UsageError(f"{key}: expected a list, got {value!r}")
        return [_scalar(v) for v in value]
    if not isinstance(value, str):
        raise UsageError(f"{key}: expected a string, got {value!r}")
    return value


def _scalar(v):
    if isinstance(v, str):
        for cast in (int, float):
            try:
                return cast(v)
            except ValueError:
                pass
    return v


def resolve_settings(data: dict | None = None, overrides: Sequence[tuple[str, Any]] = ()) -> dict:
    """Merge defaults, a config mapping and overrides into a full flat dict.

    Unknown keys are rejected; giving one key two different values among
    the overrides is an error.
    """
    flat = _flatten(data or {})
    unknown = sorted(set(flat) - set(CONFIG_KEYS))
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
    settings = {k: default for k, (default, _) in CONFIG_KEYS.items()}
    for key, value in flat.items():
        settings[key] = _coerce(key, value)
    seen: dict[str, Any] = {}
    for key, value in overrides:
        if key not in CONFIG_KEYS:
            raise UsageError(f"unknown config key: {key}")
        value = _coerce(key, value)
        if key in seen and seen[key] != value:
            raise UsageError(f"contradictory values for {key}: {seen[key]!r} vs {value!r}")
        seen[key] = value
        settings[key] = value
    return settings


def canonical_json(settings: dict) -> str:
    return json.dumps(settings, sort_keys=True, indent=2) + "\n"


def _load_code_ref(ref: str | None, kind: type, key: str):
    if ref is None:
        return None
    if ref.startswith("paley:"):
        code = paley_difference_set(int(ref.split(":", 1)[1]))
    elif ref.startswith("msequence:"):
        code = msequence_difference_set(int(ref.split(":", 1)[1]))
    elif Path(ref).is_file():
        code = load_code(ref)
    elif ref in catalog_entries():
        code = load_catalog(ref)
    else:
        raise UsageError(f"{key}: {ref!r} is neither a file nor a catalog entry")
    if not isinstance(code, kind):
        raise UsageError(f"{key}: {ref!r} is not a {kind.__name__}")
    return code


def settings_to_config(settings: dict) -> SimConfig:
    """Build the validated :class:`SimConfig` described by ``settings``."""
    s = settings
    try:
        channel = ChannelParams(
            p0_w=s["channel.p0_w"],
            pb_w=s["channel.pb_w"],
            eta=s["channel.eta"],
            wavelength_m=s["channel.wavelength_nm"] * 1e-9,
            bitrate_bps=s["channel.bitrate_bps"],
        )
    except ValueError as exc:
        raise UsageError(f"channel: {exc}") from None
    try:
        return SimConfig(
            scheme=s["scheme.type"],
            bibd=_load_code_ref(s["bibd.path"], BibdCode, "bibd.path"),
            ooc=_load_code_ref(s["ooc.path"], OocCode, "ooc.path"),
            n_users=s["users.n"],
            desired_user=s["users.desired"],
            channel=channel,
            stats=s["sim.stats"],
            detector=s["sim.detector"],
            trials=s["sim.trials"],
            target_errors=s["sim.target_errors"],
            seed=s["sim.seed"],
            block_size=s["sim.block_size"],
            dmeppm_q=s["dmeppm.q"],
            dmeppm_ell=s["dmeppm.ell"],
            dmeppm_type=s["dmeppm.type"],
            lam0=s["channel.lam0"],
            lamb=s["channel.lamb"],
        )
    except ConfigError as exc:
        raise UsageError(str(exc)) from None


def parse_config(path=None, overrides: Sequence[tuple[str, Any]] = ()) -> SimConfig:
    """Config file and/or overrides to a validated :class:`SimConfig`."""
    return settings_to_config(_read_settings(path, overrides))


def _read_settings(path, overrides) -> dict:
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError(f"config {path} must hold a JSON object")
    return resolve_settings(data, overrides)


# --------------------------------------------------------------------------
# Result rows
# --------------------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _code_columns(cfg: SimConfig) -> dict:
    row = {"Q": None, "K": None, "lambda": None, "L": None, "w": None, "alpha": None}
    if cfg.bibd is not None and cfg.scheme != "ccm":
        row.update(Q=cfg.bibd.Q, K=cfg.bibd.K, **{"lambda": cfg.bibd.lam})
    if cfg.ooc is not None and cfg.scheme in ("cmeppm", "ccm"):
        row.update(L=cfg.ooc.L, w=cfg.ooc.w, alpha=cfg.ooc.alpha)
        if cfg.scheme == "ccm":
            row["Q"] = cfg.ooc.L
    return row


def _scheme_label(cfg: SimConfig) -> str:
    if cfg.scheme == "dmeppm":
        return f"dmeppm-{cfg.dmeppm_type.lower()}"
    return cfg.scheme


def _base_row(cfg: SimConfig) -> dict:
    ch = cfg.channel
    row = {
        "scheme": _scheme_label(cfg),
        **_code_columns(cfg),
        "n_users": cfg.n_users,
        "detector": cfg.detector,
        "stats_mode": cfg.stats,
        "p0_w": ch.p0_w,
        "pb_w": ch.pb_w,
        "eta": ch.eta,
        "wavelength_nm": round(ch.wavelength_m * 1e9, 9),
        "bitrate_bps": ch.bitrate_bps,
        "seed": cfg.seed,
    }
    return row


def simulation_row(cfg: SimConfig, result) -> dict:
    row = _base_row(cfg)
    row.update(
        trials=result.trials,
        symbol_errors=result.symbol_errors,
        bit_errors=result.bit_errors,
        ser=result.ser,
        ber=result.ber,
        ci95=result.ci95,
        source="simulation",
    )
    return row


def analytic_row(cfg: SimConfig, exact: bool = False) -> dict:
    """Closed-form SER/BER for the configuration (trials = 0)."""
    row = _base_row(cfg)
    row.update(stats_mode="", detector="", seed="")
    if cfg.scheme == "cmeppm":
        b, o = cfg.bibd, cfg.ooc
        link = dataclasses.replace(cfg.channel, Q=b.Q, M=b.Q)
        lam0, lamb = photon_budget(link)
        lam0 = lam0 if cfg.lam0 is None else cfg.lam0
        lamb = lamb if cfg.lamb is None else cfg.lamb
        if exact:
            est = cmeppm_exact_union_bound(b, o, cfg.n_users, lam0, lamb)
            name = "exact-union"
        else:
            params = CmeppmAnalysisParams(b.Q, b.K, b.lam, o.L, o.w, o.alpha, cfg.n_users, lam0, lamb)
            est, name = cmeppm_ser(params)
        log.info("analytic %s N=%d: raw SER %.6g", name, cfg.n_users, est.raw)
        ser, ber = est.value, ser_to_ber(est.value, b.Q)
    elif cfg.scheme == "dmeppm":
        b = cfg.bibd
        part = dmeppm_partition(b, [cfg.dmeppm_q] * cfg.n_users)
        const = meppm_constellation(b, part.sets[0], cfg.dmeppm_ell, cfg.dmeppm_type)
        link = dataclasses.replace(cfg.channel, Q=b.Q, M=const.M)
        lam0 = photon_budget(link)[0] if cfg.lam0 is None else cfg.lam0
        est = dmeppm_ber(
            DmeppmAnalysisParams(
                b.Q, b.K, b.lam, (cfg.dmeppm_ell,) * cfg.n_users, cfg.dmeppm_q, cfg.dmeppm_type, lam0
            )
        )
        log.info("analytic dmeppm N=%d: raw BER %.6g", cfg.n_users, est.raw)
        ser, ber = None, est.value
    else:
        raise UsageError(f"no closed form for scheme {cfg.scheme}")
    row.update(trials=0, symbol_errors=None, bit_errors=None, ser=ser, ber=ber, ci95=None,
               source="analytic")
    return row


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row.get(col)) for col in CSV_COLUMNS])
    return buf.getvalue()


# --------------------------------------------------------------------------
# Commands producing result files
# --------------------------------------------------------------------------

def _sweep_values(settings: dict) -> tuple[str | None, list]:
    var, values = settings["sweep.variable"], settings["sweep.values"]
    if (var is None) != (values is None):
        raise UsageError("sweep.variable and sweep.values must be given together")
    if var is not None and not values:
        raise UsageError("sweep.values is empty")
    return var, values or []


def compute_rows(command: str, settings: dict, workers: int = 1, exact: bool = False) -> list[dict]:
    cfg = settings_to_config(settings)
    var, values = _sweep_values(settings)
    if command == "sim run":
        return [simulation_row(cfg, run_point(cfg, workers))]
    if command == "sim sweep":
        if var is None:
            raise UsageError("sim sweep needs sweep.variable and sweep.values")
        try:
            points = sweep(cfg, var, values, workers)
        except ConfigError as exc:
            raise UsageError(str(exc)) from None
        return [simulation_row(c, r) for c, r in points]
    if command == "analyze":
        if var is None:
            return [analytic_row(cfg, exact)]
        from .montecarlo import _apply

        rows = []
        for i, value in enumerate(values):
            try:
                point = _apply(cfg, var, value)
            except ConfigError as exc:
                raise UsageError(str(exc)) from None
            rows.append(analytic_row(point, exact))
        return rows
    raise UsageError(f"unknown command {command!r}")


def _code_texts(settings: dict) -> dict:
    out = {}
    for key, kind in (("bibd.path", BibdCode), ("ooc.path", OocCode)):
        code = _load_code_ref(settings[key], kind, key)
        if code is not None:
            out[key] = _format_code(code)
    return out


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def write_results(command: str, settings: dict, out: Path, workers: int = 1, exact: bool = False) -> Path:
    """Run ``command``, write the CSV to ``out`` and its manifest beside it."""
    started = _now()
    rows = compute_rows(command, settings, workers, exact)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(rows_to_csv(rows))
    manifest = {
        "tool": "meppm",
        "version": __version__,
        "command": command,
        "exact": exact,
        "seed": settings["sim.seed"],
        "config": settings,
        "codes": _code_texts(settings),
        "started": started,
        "finished": _now(),
        "outputs": {"csv": str(out.resolve())},
    }
    path = manifest_path(out)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


def replay(manifest: Path, out: Path | None = None, workers: int = 1) -> tuple[Path, bool | None]:
    """Re-run a manifest; returns the new CSV path and whether it matches the original."""
    data = json.loads(Path(manifest).read_text())
    settings = resolve_settings({}, list(data["config"].items()))
    for key, text in data.get("codes", {}).items():
        ref = settings[key]
        if ref is not None and not Path(ref).is_file() and ref not in catalog_entries() \
                and not ref.startswith(("paley:", "msequence:")):
            # fall back to the embedded copy
            tmp = Path(manifest).with_name(Path(manifest).name + f".{key}.txt")
            tmp.write_text(text)
            settings[key] = str(tmp)
    original = Path(data["outputs"]["csv"])
    if out is None:
        out = original.with_name(original.stem + ".replay.csv")
    rows = compute_rows(data["command"], settings, workers, data.get("exact", False))
    text = rows_to_csv(rows)
    out.write_text(text)
    same = original.read_text() == text if original.is_file() else None
    return out, same


# --------------------------------------------------------------------------
# argparse plumbing
# --------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


SHORTCUTS = {
    "scheme": "scheme.type",
    "bibd": "bibd.path",
    "ooc": "ooc.path",
    "users": "users.n",
    "desired": "users.desired",
    "p0": "channel.p0_w",
    "pb": "channel.pb_w",
    "stats": "sim.stats",
    "detector": "sim.detector",
    "trials": "sim.trials",
    "target_errors": "sim.target_errors",
    "seed": "sim.seed",
    "sweep_var": "sweep.variable",
    "sweep_values": "sweep.values",
}


def _add_config_args(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key (repeatable)")
    p.add_argument("--scheme", choices=["cmeppm", "dmeppm", "ccm", "eppm"])
    p.add_argument("--bibd", help="BIBD file, catalog name, paley:Q or msequence:m")
    p.add_argument("--ooc", help="OOC file or catalog name")
    p.add_argument("--users", type=int)
    p.add_argument("--desired", type=int)
    p.add_argument("--p0", type=float, help="peak received power (W)")
    p.add_argument("--pb", type=float, help="background power (W)")
    p.add_argument("--stats", choices=["poisson", "gaussian", "noiseless"])
    p.add_argument("--detector")
    p.add_argument("--trials", type=int)
    p.add_argument("--target-errors", type=int)
    p.add_argument("--seed", type=int)


def _overrides(args) -> list[tuple[str, Any]]:
    out = []
    for item in args.set:
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        value = value.strip()
        out.append((key.strip(), None if value.lower() in ("null", "none") else value))
    for attr, key in SHORTCUTS.items():
        value = getattr(args, attr, None)
        if value is not None:
            out.append((key, value))
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="meppm", description="Coded and divided MEPPM link simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)

    codes = sub.add_parser("codes", help="generate or verify codes")
    csub = codes.add_subparsers(dest="action", required=True, parser_class=_Parser)
    gb = csub.add_parser("gen-bibd", help="cyclic BIBD from a difference set")
    g = gb.add_mutually_exclusive_group(required=True)
    g.add_argument("--paley", type=int, metavar="Q", help="prime Q = 3 mod 4")
    g.add_argument("--msequence", type=int, metavar="M", help="Q = 2^M - 1")
    gb.add_argument("--out", type=Path)
    go = csub.add_parser("gen-ooc", help="randomized OOC search")
    go.add_argument("L", type=int)
    go.add_argument("w", type=int)
    go.add_argument("alpha", type=int)
    go.add_argument("N", type=int)
    go.add_argument("--seed", type=int, default=0)
    go.add_argument("--restarts", type=int, default=10)
    go.add_argument("--out", type=Path)
    cv = csub.add_parser("verify", help="verify code files or catalog entries")
    cv.add_argument("paths", nargs="*")
    cv.add_argument("--catalog", action="store_true", help="verify every bundled code")

    const = sub.add_parser("constellation", help="constellation tools")
    ksub = const.add_subparsers(dest="action", required=True, parser_class=_Parser)
    dump = ksub.add_parser("dump", help="write a user's symbols as CSV")
    _add_config_args(dump)
    dump.add_argument("--out", type=Path)

    sim = sub.add_parser("sim", help="Monte Carlo simulation")
    ssub = sim.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("run", "sweep"):
        p = ssub.add_parser(name)
        _add_config_args(p)
        p.add_argument("--out", type=Path, required=True, help="result CSV")
        p.add_argument("--workers", type=int, default=1)
        if name == "sweep":
            p.add_argument("--var", dest="sweep_var", help="N, P0, lam0 or scheme")
            p.add_argument("--values", dest="sweep_values", help="comma separated")
        p.add_argument("--dump-config", action="store_true",
                       help="print the canonical config and exit")

    an = sub.add_parser("analyze", help="closed-form SER/BER")
    _add_config_args(an)
    an.add_argument("--var", dest="sweep_var")
    an.add_argument("--values", dest="sweep_values")
    an.add_argument("--exact", action="store_true", help="enumerated union bound (small codes)")
    an.add_argument("--out", type=Path, required=True)

    rp = sub.add_parser("replay", help="re-run a manifest")
    rp.add_argument("manifest", type=Path)
    rp.add_argument("--out", type=Path)
    rp.add_argument("--workers", type=int, default=1)
    return parser


def _cmd_codes(args) -> int:
    if args.action == "gen-bibd":
        code = paley_difference_set(args.paley) if args.paley else msequence_difference_set(args.msequence)
        return _emit_code(code, args.out, [f"{code}"])
    if args.action == "gen-ooc":
        try:
            code = search_ooc(args.L, args.w, args.alpha, args.N, seed=args.seed, restarts=args.restarts)
        except InfeasibleSearchError as exc:
            print(f"error: {exc}", file=sys.stderr)
            if exc.best is not None and exc.best.N and args.out:
                partial = args.out.with_name(args.out.name + ".partial")
                save_code(exc.best, partial, [f"partial result: {exc.best.N} of {args.N} words"])
                print(f"partial code written to {partial}", file=sys.stderr)
            return EXIT_RUNTIME
        return _emit_code(code, args.out, [f"{code}", f"search seed {args.seed}"])
    failed = 0
    targets = [(p, None) for p in args.paths]
    if args.catalog:
        targets += [(None, name) for name in catalog_entries()]
    if not targets:
        raise UsageError("codes verify needs paths or --catalog")
    for path, name in targets:
        label = path or f"catalog:{name}"
        try:
            code = load_code(path, verify=False) if path else load_catalog(name, verify=False)
        except CodeFormatError as exc:
            print(f"FAIL {label}: {exc}")
            failed += 1
            continue
        report = verify_bibd(code) if isinstance(code, BibdCode) else verify_ooc(code)
        print(f"{'ok  ' if report.ok else 'FAIL'} {label}: {code}"
              + ("" if report.ok else f" {report.describe()}"))
        failed += not report.ok
    return EXIT_VERIFY if failed else EXIT_OK


def _emit_code(code, out: Path | None, comments) -> int:
    if out is None:
        sys.stdout.write(_format_code(code, comments))
    else:
        save_code(code, out, comments)
    return EXIT_OK


def _cmd_dump(args) -> int:
    cfg = parse_config(args.config, _overrides(args))
    n, u = cfg.n_users, cfg.desired_user
    if cfg.scheme == "cmeppm":
        c = cmeppm_constellation(cfg.bibd, cfg.ooc.words[u], n, u)
    elif cfg.scheme == "ccm":
        c = ccm_constellation(cfg.ooc.words[u], n, u)
    elif cfg.scheme == "eppm":
        c = eppm_constellation(cfg.bibd)
    else:
        part = dmeppm_partition(cfg.bibd, [cfg.dmeppm_q] * n)
        c = meppm_constellation(cfg.bibd, part.sets[u], cfg.dmeppm_ell, cfg.dmeppm_type, u)
    if args.out is None:
        dump_constellation_csv(c, sys.stdout)
    else:
        with open(args.out, "w", newline="") as fh:
            dump_constellation_csv(c, fh)
    return EXIT_OK


def _cmd_results(command: str, args) -> int:
    settings = _read_settings(args.config, _overrides(args))
    if getattr(args, "dump_config", False):
        sys.stdout.write(canonical_json(settings))
        return EXIT_OK
    manifest = write_results(command, settings, args.out, getattr(args, "workers", 1),
                             getattr(args, "exact", False))
    print(f"wrote {args.out} and {manifest}")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if args.group == "codes":
            return _cmd_codes(args)
        if args.group == "constellation":
            return _cmd_dump(args)
        if args.group == "sim":
            return _cmd_results(f"sim {args.action}", args)
        if args.group == "analyze":
            return _cmd_results("analyze", args)
        out, same = replay(args.manifest, args.out, args.workers)
        print(f"wrote {out}" + ("" if same is None else f" ({'identical' if same else 'DIFFERS'})"))
        return EXIT_OK if same is not False else EXIT_VERIFY
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CodeVerificationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (CodeFormatError, RegimeError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasibleSearchError, OverflowError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
