"""Command-line front end: ``zakscatter run|sweep|diagnose|verify``.

Environment overrides: ``ZAKSCATTER_OUT`` (output directory when ``--out``
is absent) and ``ZAKSCATTER_THREADS`` (worker threads, default 1).
"""

import argparse
import dataclasses
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import checks
from .config import dump_config, parse_config
from .errors import RankDeficient, ZakScatterError
from .fiducials import fiducial_deviation, packaged_fiducial, read_seed_file
from .harness import CurvePoint, curve_to_csv, mse_curve, run_experiment, slope_fit
from .plotting import PLOT_SCRIPT_NAME, plot_script, render_figures
from .tfcore import build_K, full_boxes, offpeak_max, random_unimodular, welch_bound

ENV_OUT = "ZAKSCATTER_OUT"
ENV_THREADS = "ZAKSCATTER_THREADS"
DEFAULT_OUT = "zakscatter_out"
RUN_FILES = ("config.snapshot", "truth.csv", "estimate.csv", "report.txt", "mse.csv", PLOT_SCRIPT_NAME)


def _workers(arg: Optional[int]) -> int:
    if arg is not None:
        return max(1, arg)
    raw = os.environ.get(ENV_THREADS)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ZakScatterError(f"{ENV_THREADS} must be an integer, got {raw!r}") from None
    return 1


def _with_seed(cfg, seed):
    if seed is None:
        return cfg
    return dataclasses.replace(cfg, master_seed=seed)


def _out_dir(arg, cfg) -> Path:
    return Path(arg or os.environ.get(ENV_OUT) or cfg.output_dir or DEFAULT_OUT)


def write_artifacts(out_dir: Path, files: Dict[str, str]) -> None:
    """Write all files or none: on failure every file written so far is removed."""
    created_dir = not out_dir.exists()
    written: List[Path] = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            path = out_dir / name
            with open(path, "w", newline="") as fh:
                written.append(path)
                fh.write(text)
    except OSError:
        for path in written:
            try:
                path.unlink()
            except OSError:
                pass
        if created_dir:
            try:
                out_dir.rmdir()
            except OSError:
                pass
        raise


def cmd_run(args) -> int:
    cfg = _with_seed(parse_config(args.config), args.seed)
    workers = _workers(args.workers)
    report = run_experiment(cfg, workers=workers)
    if cfg.J_sweep:
        report.curve = mse_curve(cfg, cfg.J_sweep, workers=workers)
    else:
        report.curve = [CurvePoint(report.J, report.rel_mse, report.variance)]
    out_dir = _out_dir(args.out, cfg)
    files = {
        "config.snapshot": dump_config(cfg),
        "truth.csv": report.truth.to_csv(),
        "estimate.csv": report.estimate.to_csv(),
        "report.txt": report.to_text(),
        "mse.csv": curve_to_csv(report.curve),
        PLOT_SCRIPT_NAME: plot_script(cfg.grid),
    }
    write_artifacts(out_dir, files)
    if args.render:
        for path in render_figures(out_dir, cfg.grid):
            print(f"rendered {path}")
    print(report.to_text(), end="")
    print(f"artifacts written to {out_dir}")
    return 0


def _parse_J_list(raw: str) -> List[int]:
    try:
        return [int(v) for v in raw.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {raw!r}") from None


def cmd_sweep(args) -> int:
    cfg = _with_seed(parse_config(args.config), args.seed)
    J_list = args.J or list(cfg.J_sweep or ())
    if not J_list:
        raise ZakScatterError("no J values: pass --J or set J_sweep in the config")
    points = mse_curve(cfg, J_list, workers=_workers(args.workers))
    text = curve_to_csv(points)
    print(text, end="")
    if len(set(J_list)) >= 3:
        print(f"# slope {slope_fit(points):.4f} (1/J law: -1)")
    if args.out:
        write_artifacts(Path(args.out), {"mse.csv": text})
    return 0


def load_weights(source: str, seed: int = 0) -> np.ndarray:
    """Seed vector from a file or one of ``random:L``, ``unimodular:L``, ``fiducial:L``, ``delta:L``."""
    kind, sep, rest = source.partition(":")
    if sep and kind in ("random", "unimodular", "fiducial", "delta"):
        try:
            L = int(rest)
        except ValueError:
            raise ZakScatterError(f"bad weight source {source!r}") from None
        if L < 1:
            raise ZakScatterError("L must be positive")
        rng = np.random.default_rng(seed)
        if kind == "random":
            return (rng.standard_normal(L) + 1j * rng.standard_normal(L)) / np.sqrt(2.0)
        if kind == "unimodular":
            return random_unimodular(L, rng)
        if kind == "fiducial":
            return packaged_fiducial(L)
        c = np.zeros(L, dtype=complex)
        c[0] = 1.0
        return c
    return read_seed_file(source)


def diagnose_lines(c: np.ndarray, tol: float) -> List[str]:
    L = c.size
    norm = float(np.linalg.norm(c))
    try:
        cond = build_K(c, full_boxes(L)).cond
        cond_text = f"{cond:.12g}"
        full_rank = True
    except RankDeficient as exc:
        cond_text = f"RankDeficient ({exc})"
        full_rank = False
    dev, (a, b), _ = fiducial_deviation(c)
    verdict = "PASS" if full_rank and dev <= tol else "FAIL"
    return [
        f"L                  {L}",
        f"norm               {norm:.12g}",
        f"cond(K_full)       {cond_text}",
        f"Welch floor        {np.sqrt(L + 1):.12g}",
        f"coherence target   {welch_bound(L):.12g}",
        f"worst off-peak     {offpeak_max(c) / norm**2:.12g}",
        f"max deviation      {dev:.3e} at (a, b) = ({a}, {b})",
        f"fiducial verdict   {verdict}",
    ]


def cmd_diagnose(args) -> int:
    c = load_weights(args.weights, args.seed)
    print("\n".join(diagnose_lines(c, args.tol)))
    return 0


def cmd_verify(args) -> int:
    results = checks.run_all()
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zakscatter", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment and write its artifacts")
    p.add_argument("config")
    p.add_argument("--out", help=f"output directory (else ${ENV_OUT}, config, ./{DEFAULT_OUT})")
    p.add_argument("--seed", type=int, help="override master_seed")
    p.add_argument("--workers", type=int, help=f"worker threads (else ${ENV_THREADS}, 1)")
    p.add_argument("--render", action="store_true", help="also render PNG figures (needs matplotlib)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="MSE curve over a list of J values")
    p.add_argument("config")
    p.add_argument("--J", type=_parse_J_list, help="comma-separated J values, e.g. 16,64,256,1024")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="also write mse.csv into this directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("diagnose", help="conditioning and fiducial diagnostics for a seed vector")
    p.add_argument("--weights", required=True, help="file, random:L, unimodular:L, fiducial:L or delta:L")
    p.add_argument("--seed", type=int, default=0, help="RNG seed for random sources")
    p.add_argument("--tol", type=float, default=1e-8, help="fiducial tolerance")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ZakScatterError, OSError, ValueError) as exc:
        print(f"zakscatter: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
