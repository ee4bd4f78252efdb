"""``swarmcert`` command-line interface.

Exit codes: 0 ok, 2 input or config error, 3 numerical blow-up, 4 certificate failure.
"""

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, analysis, certify, runner, scenarios
from .errors import (
    BlowUpError,
    CertificateFailure,
    CertificationError,
    InputError,
    StepSizeError,
    SwarmError,
    UnsupportedPropulsionError,
)
from .model import accel, to_lienard
from .svg import series_svg, traces_svg

EXIT_OK, EXIT_INPUT, EXIT_BLOWUP, EXIT_CERT = 0, 2, 3, 4


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(certify.jsonable(obj), indent=2, sort_keys=True) + "\n")


def _file_entry(path: Path) -> dict:
    data = path.read_bytes()
    return {"name": path.name, "bytes": len(data), "sha256": hashlib.sha256(data).hexdigest()}


def worker_count() -> int:
    env = os.environ.get("SWARM_THREADS")
    cpus = os.cpu_count() or 1
    if env:
        try:
            return max(1, min(int(env), cpus))
        except ValueError:
            raise InputError(f"SWARM_THREADS must be an integer, got {env!r}") from None
    return cpus


def run_config(cfg: dict, out_dir) -> dict:
    """Simulate one resolved config into ``out_dir``; returns the analysis dict."""
    out = Path(out_dir)
    setup = runner.setup_from_config(cfg)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    traj = runner.simulate(setup)
    t1 = time.perf_counter()
    csv_path = out / "trajectory.csv"
    runner.write_trajectory_csv(csv_path, traj)
    report = runner.analyze(setup, traj)
    report["steps"] = {"accepted": traj.accepted, "rejected": traj.rejected}
    t2 = time.perf_counter()
    an_path = out / "analysis.json"
    _write_json(an_path, report)
    manifest = {
        "config": setup.resolved,
        "version": __version__,
        "seed": setup.resolved.get("seed", setup.resolved.get("overrides", {}).get("seed")),
        "files": [_file_entry(csv_path), _file_entry(an_path), {"name": "manifest.json"}],
        "timings": {"integrate_s": t1 - t0, "analyze_s": t2 - t1},
    }
    _write_json(out / "manifest.json", manifest)
    return report


def cmd_simulate(args) -> int:
    report = run_config(runner.read_config(args.config), args.out)
    _print_checks(report)
    return EXIT_OK


def _print_checks(report: dict) -> None:
    for chk in report.get("checks", []):
        state = {True: "PASS", False: "FAIL", None: "SKIP"}[chk["passed"]]
        print(f"{state} {chk['check']}: {chk.get('value', chk.get('note'))}")


def _register_in_manifest(path: Path) -> None:
    """Add ``path`` to the inventory of a run manifest in the same directory, if any."""
    man_path = path.parent / "manifest.json"
    if not man_path.exists():
        return
    manifest = json.loads(man_path.read_text())
    files = [f for f in manifest.get("files", []) if f["name"] not in (path.name, "manifest.json")]
    manifest["files"] = files + [_file_entry(path), {"name": "manifest.json"}]
    _write_json(man_path, manifest)


def cmd_certify(args) -> int:
    setup = runner.setup_from_config(runner.read_config(args.config))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cert_path = out / "certificate.json"
    try:
        cert = runner.certify_setup(setup, args.samples, args.seed, worker_count())
    except CertificateFailure as exc:
        _write_json(cert_path, exc.certificate.to_dict())
        _register_in_manifest(cert_path)
        print(f"certificate failure: {exc}", file=sys.stderr)
        return EXIT_CERT
    _write_json(cert_path, cert)
    _register_in_manifest(cert_path)
    print(json.dumps(certify.jsonable({k: cert[k] for k in ("kind", "status", "max_vdot", "M1") if k in cert})))
    return EXIT_OK


def _parse_set(items) -> dict:
    overrides = {}
    for item in items or []:
        if "=" not in item:
            raise InputError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            overrides[key] = json.loads(raw)
        except json.JSONDecodeError:
            overrides[key] = raw
    return overrides


def cmd_scenario(args) -> int:
    if args.action == "list":
        for name in sorted(scenarios.CATALOG):
            print(f"{name:24s} {scenarios.DESCRIPTIONS[name]}")
        return EXIT_OK
    if not args.name:
        raise InputError("scenario run needs a NAME")
    cfg = {"scenario": args.name, "overrides": _parse_set(args.set)}
    report = run_config(cfg, args.out or Path("runs") / args.name)
    _print_checks(report)
    return EXIT_OK


def _load_run(csv_path: Path):
    traj = runner.read_trajectory_csv(csv_path)
    manifest = csv_path.parent / "manifest.json"
    setup = None
    if manifest.exists():
        setup = runner.setup_from_config(runner.read_config(manifest))
    return traj, setup


def _lyapunov_series(setup, traj, cert_path: Path):
    model = setup.model
    model.require_linear()
    ls = to_lienard(model, traj.r[0], traj.v[0])
    E = certify.manifold_energies(model, ls)
    if cert_path.exists():
        c = json.loads(cert_path.read_text())
        if c.get("kind") != "linear":
            raise InputError(f"{cert_path} is not a linear-coupling certificate")
        params = certify.LyapunovParams(**{k: c[k] for k in certify.LyapunovParams.__dataclass_fields__})
    else:
        params = certify.select_params(model, E)
    y = np.array([accel(model, r, v) for r, v in zip(traj.r, traj.v)])
    values = certify.lyapunov_values(model, params, traj.v, y)
    return values, params


def cmd_plot(args) -> int:
    if not 0 < args.window <= 1:
        raise InputError("--window must be in (0, 1]")
    src = Path(args.input)
    csv_path = src / "trajectory.csv" if src.is_dir() else src
    if not csv_path.exists():
        raise InputError(f"{csv_path} does not exist")
    traj, setup = _load_run(csv_path)
    lo = int(np.floor((1.0 - args.window) * (len(traj) - 1)))
    if args.kind == "traces":
        Q = analysis.center_matrix(setup.model) if setup else np.full((traj.r.shape[1],) * 2, 1 / traj.r.shape[1])
        r = traj.r[lo:]
        center = analysis.generalized_center(Q, r).mean(axis=1)
        svg = traces_svg(r, center)
    else:
        if setup is None:
            raise InputError(f"kind={args.kind} needs manifest.json next to {csv_path}")
        if args.kind == "lyapunov":
            values, _ = _lyapunov_series(setup, traj, csv_path.parent / "certificate.json")
            svg = series_svg(traj.times[lo:], values[lo:], "lyapunov", "V", "Lyapunov function along the run")
        else:
            model = setup.model
            model.require_linear()
            y = np.array([accel(model, r, v) for r, v in zip(traj.r, traj.v)])
            E = analysis.generalized_center(model.coupling.Q, y + model.flux(traj.v))
            drift = np.abs(E - E[0]).max(axis=(1, 2))
            svg = series_svg(traj.times[lo:], drift[lo:], "energy", "max |E(t) - E(0)|", "energy drift")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(svg)
    return EXIT_OK


def _batch_job(item):
    cfg_path, out_dir = item
    try:
        run_config(runner.read_config(cfg_path), out_dir)
        return str(cfg_path), EXIT_OK, ""
    except Exception as exc:  # reported per run, the batch keeps going
        return str(cfg_path), exit_code_for(exc), str(exc)


def cmd_batch(args) -> int:
    out = Path(args.out)
    jobs = [(Path(c), out / Path(c).stem) for c in args.configs]
    if len({d for _, d in jobs}) != len(jobs):
        raise InputError("batch configs must have distinct file stems")
    with ProcessPoolExecutor(max_workers=min(worker_count(), len(jobs))) as pool:
        results = list(pool.map(_batch_job, jobs))
    worst = EXIT_OK
    for name, code, msg in results:
        print(f"{name}: exit {code}{' ' + msg if msg else ''}")
        worst = max(worst, code)
    return worst


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (BlowUpError, StepSizeError)):
        return EXIT_BLOWUP
    if isinstance(exc, (CertificateFailure,)):
        return EXIT_CERT
    if isinstance(exc, (InputError, UnsupportedPropulsionError, OSError, KeyError, ValueError)):
        return EXIT_INPUT
    if isinstance(exc, CertificationError):
        return EXIT_CERT
    if isinstance(exc, SwarmError):
        return EXIT_INPUT
    raise exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="swarmcert", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="integrate a configured swarm and analyze the run")
    s.add_argument("--config", required=True, help="JSON config or a previous manifest.json")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("certify", help="boundedness certificate for the configured model")
    c.add_argument("--config", required=True, help="JSON config or a previous manifest.json")
    c.add_argument("--out", required=True, help="directory for certificate.json")
    c.add_argument("--samples", type=int, default=10_000, help="states checked outside the box (linear coupling)")
    c.add_argument("--seed", type=int, default=0, help="sampling seed")
    c.set_defaults(func=cmd_certify)

    sc = sub.add_parser("scenario", help="list or run catalog scenarios")
    sc.add_argument("action", choices=["list", "run"])
    sc.add_argument("name", nargs="?", help="scenario to run")
    sc.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a builder argument (JSON value)")
    sc.add_argument("--out", help="output directory (default runs/NAME)")
    sc.set_defaults(func=cmd_scenario)

    pl = sub.add_parser("plot", help="render a run as SVG")
    pl.add_argument("--in", dest="input", required=True, help="trajectory.csv or its run directory")
    pl.add_argument("--kind", required=True, choices=["traces", "lyapunov", "energy"])
    pl.add_argument("--out", required=True, help="SVG file to write")
    pl.add_argument("--window", type=float, default=1.0, help="trailing fraction of the run to draw")
    pl.set_defaults(func=cmd_plot)

    b = sub.add_parser("batch", help="simulate several configs on a worker pool")
    b.add_argument("configs", nargs="+", help="config files, one run each")
    b.add_argument("--out", required=True, help="parent directory; each run gets a subdirectory")
    b.set_defaults(func=cmd_batch)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        code = exit_code_for(exc)
        print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
