"""Command-line front end: ``holomimo {synthesize,export,sweep,analyze}``.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""
import argparse
from datetime import datetime, timezone
import hashlib
import json
import math
import os
import platform
import sys

import numpy as np

from . import __version__
from ._backend import BACKEND
from .capacity import spacing_sweep
from .config import DEFAULT_SPACINGS, load_config
from .errors import ConfigurationError, HoloMimoError, InvalidGeometryError
from .measurement import (
    default_spacings,
    export_synthetic,
    load_dataset,
    measured_spacing_sweep,
    spatial_correlation,
)
from .presets import SWEEP_SAMPLES
from .synthesis import map_realizations, write_realization_csv

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3
STRATEGY_FLAGS = {"equal": ("equal",), "wf": ("waterfilling",), "both": ("equal", "waterfilling")}
SWEEP_COLUMNS = (
    "spacing_over_lambda",
    "n_rx",
    "strategy",
    "efficiency",
    "mean_capacity_bps_hz",
    "relative_percent",
    "num_realizations",
    "seed",
)


def _sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _canonical(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def resolve_workers(flag):
    """``--workers`` if given, else ``HOLO_WORKERS``, else 1."""
    value = flag if flag is not None else os.environ.get("HOLO_WORKERS")
    if value is None:
        return 1
    try:
        n = int(value)
    except ValueError:
        raise ConfigurationError(f"expected an integer, got {value!r}", "workers") from None
    if n < 1:
        raise ConfigurationError(f"must be >= 1, got {n}", "workers")
    return n


def parse_spacings(text):
    """Comma-separated wavelength fractions, e.g. ``0.5,0.25,0.125``."""
    try:
        vals = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigurationError(f"cannot parse {text!r}", "spacings") from None
    if not vals or any(not (math.isfinite(v) and v > 0) for v in vals):
        raise ConfigurationError(f"expected positive wavelength fractions, got {text!r}", "spacings")
    return vals


def parse_pairs(text):
    """``q:p-q:p`` items separated by commas, 1-based."""
    pairs = []
    for item in text.split(","):
        try:
            a, b = item.split("-")
            (qa, pa), (qb, pb) = (tuple(int(v) for v in x.split(":")) for x in (a, b))
            pairs.append(((qa, pa), (qb, pb)))
        except ValueError:
            raise ConfigurationError(f"cannot parse pair {item!r}; expected q:p-q:p", "pairs") from None
    return pairs


def _efficiency_kinds(flag):
    return ("ideal",) if flag == "ideal" else ("ideal", "hannan")


def _write_sweep_csv(results, wavelength, path):
    order = {"ideal": 0, "hannan": 1}
    rows = sorted(results, key=lambda r: (order.get(r.efficiency, 9), r.strategy, -r.spacing))
    with open(path, "w", newline="") as fh:
        fh.write(",".join(SWEEP_COLUMNS) + "\n")
        for r in rows:
            fh.write(
                f"{r.spacing / wavelength:.10g},{r.n_rx},{r.strategy},{r.efficiency},"
                f"{r.mean_capacity:.17g},{r.relative_percent:.17g},{r.num_realizations},"
                f"{'' if r.seed is None else r.seed}\n"
            )
    return rows


def _versions():
    import pandas

    return {
        "holomimo": __version__,
        "numpy": np.__version__,
        "pandas": pandas.__version__,
        "python": platform.python_version(),
    }


def cmd_synthesize(config_path, out_dir, seed=None, workers=1, num_realizations=None):
    """Write ``real_<index>.csv`` files plus ``manifest.json``.

    The manifest hash covers everything except the creation timestamp, so
    reruns with the same inputs reproduce it exactly.
    """
    cfg = load_config(config_path)
    seed = cfg.master_seed if seed is None else seed
    n = cfg.num_realizations if num_realizations is None else num_realizations
    scenario = cfg.scenario()
    os.makedirs(out_dir, exist_ok=True)
    width = max(4, len(str(n - 1)))
    names = [f"real_{i:0{width}d}.csv" for i in range(n)]

    def write(r):
        write_realization_csv(r, os.path.join(out_dir, names[r.realization_index]))

    map_realizations(scenario, n, seed, write, workers)
    manifest = {
        "scenario_id": cfg.scenario_id,
        "config_sha256": cfg.digest,
        "master_seed": seed,
        "num_realizations": n,
        "shape": [scenario.rx_array.num_elements, scenario.tx_array.num_elements],
        "backend": BACKEND,
        "versions": _versions(),
        "files": {name: _sha256_file(os.path.join(out_dir, name)) for name in names},
    }
    manifest["manifest_hash"] = hashlib.sha256(_canonical(manifest).encode()).hexdigest()
    manifest["created_utc"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def cmd_export(config_path, out_path, num_frequencies=SWEEP_SAMPLES, seed=None, workers=1):
    """Synthesize a frequency-sweep dataset file from a configuration."""
    cfg = load_config(config_path)
    seed = cfg.master_seed if seed is None else seed
    return export_synthetic(cfg.scenario(), num_frequencies, seed, out_path, workers=workers)


def cmd_sweep(config_path, out_csv, spacings=None, efficiency="ideal", strategy="both", seed=None, workers=1):
    """Capacity versus receive spacing; one CSV row per spacing, strategy and efficiency."""
    cfg = load_config(config_path)
    seed = cfg.master_seed if seed is None else seed
    fractions = cfg.spacings if spacings is None else spacings
    lam = cfg.wavelength
    results = spacing_sweep(
        cfg.scenario(),
        [f * lam for f in fractions],
        cfg.snr,
        cfg.num_realizations,
        _efficiency_kinds(efficiency),
        seed,
        STRATEGY_FLAGS[strategy],
        cfg.normalization,
        workers,
    )
    return _write_sweep_csv(results, lam, out_csv)


def default_pairs(dataset):
    """Adjacent and half-aperture receive pairs along x, at transmit element 1.

    The distant pairs sit half an aperture apart: the plane-wave expansion
    is periodic over the aperture, so row-end elements are effectively
    neighbours in synthetic data.  Returns ``(kind, pair_a, pair_b)``
    triples with 1-based indices.
    """
    rx = dataset.rx_array
    half = rx.count_x // 2
    out = []
    for iy in range(rx.count_y):
        row = iy * rx.count_x
        for ix in range(rx.count_x - 1):
            out.append(("adjacent", (row + ix + 1, 1), (row + ix + 2, 1)))
        if half > 1:
            for ix in range(rx.count_x - half):
                out.append(("distant", (row + ix + 1, 1), (row + ix + half + 1, 1)))
    return out


def cmd_analyze(
    dataset_path,
    out_dir,
    spacings=None,
    efficiency="ideal",
    strategy="both",
    snr_db=0.0,
    pairs=None,
    normalization="per-spacing",
    efficiency_domain="power",
):
    """Correlations, capacity versus spacing and per-frequency capacities.

    Files written to ``out_dir``: ``correlation.csv``,
    ``correlation_summary.csv``, ``capacity_vs_spacing.csv``,
    ``capacity_per_frequency.csv`` and ``frequency_response.csv``.
    Returns the sweep results.
    """
    ds = load_dataset(dataset_path)
    lam = ds.wavelength
    os.makedirs(out_dir, exist_ok=True)

    triples = default_pairs(ds) if pairs is None else [("custom", a, b) for a, b in pairs]
    summary = {}
    with open(os.path.join(out_dir, "correlation.csv"), "w", newline="") as fh:
        fh.write("kind,q_a,p_a,q_b,p_b,rx_separation_m,separation_over_lambda,correlation\n")
        for kind, a, b in triples:
            rep = spatial_correlation(ds, a, b)
            summary.setdefault(kind, []).append(rep.correlation_magnitude)
            fh.write(
                f"{kind},{a[0]},{a[1]},{b[0]},{b[1]},{rep.rx_separation:.17g},"
                f"{rep.rx_separation / lam:.10g},{rep.correlation_magnitude:.17g}\n"
            )
    with open(os.path.join(out_dir, "correlation_summary.csv"), "w", newline="") as fh:
        fh.write("kind,num_pairs,mean_correlation\n")
        for kind, vals in summary.items():
            fh.write(f"{kind},{len(vals)},{float(np.mean(vals)):.17g}\n")

    meters = default_spacings(ds) if spacings is None else [f * lam for f in spacings]
    results = measured_spacing_sweep(
        ds,
        meters,
        10.0 ** (snr_db / 10.0),
        _efficiency_kinds(efficiency),
        STRATEGY_FLAGS[strategy],
        normalization,
        efficiency_domain,
    )
    rows = _write_sweep_csv(results, lam, os.path.join(out_dir, "capacity_vs_spacing.csv"))
    freqs = ds.frequencies
    with open(os.path.join(out_dir, "capacity_per_frequency.csv"), "w", newline="") as fh:
        fh.write("spacing_over_lambda,efficiency,strategy,sample_index,frequency_hz,capacity_bps_hz\n")
        for r in rows:
            s = f"{r.spacing / lam:.10g}"
            for i, c in enumerate(r.per_snapshot):
                fh.write(f"{s},{r.efficiency},{r.strategy},{i},{freqs[i]:.17g},{c:.17g}\n")
    response_pairs = sorted({a for _, a, _ in triples} | {b for _, _, b in triples})[:8] if pairs else [(1, 1)]
    with open(os.path.join(out_dir, "frequency_response.csv"), "w", newline="") as fh:
        fh.write("q,p,sample_index,frequency_hz,magnitude_db\n")
        for q, p in response_pairs:
            mag = np.abs(ds.record(q, p).samples)
            with np.errstate(divide="ignore"):
                db = 20 * np.log10(mag)
            for i, v in enumerate(db):
                fh.write(f"{q},{p},{i},{freqs[i]:.17g},{v:.17g}\n")
    return rows


def build_parser():
    parser = argparse.ArgumentParser(prog="holomimo", description="Holographic MIMO channel synthesis and capacity analysis.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_help):
        p.add_argument("--config", required=True, help="scenario JSON file")
        p.add_argument("--out", required=True, help=out_help)
        p.add_argument("--seed", type=int, help="override master_seed from the config")
        p.add_argument("--workers", type=int, help="thread count (default: $HOLO_WORKERS or 1)")

    p = sub.add_parser("synthesize", help="write channel realizations and a manifest")
    common(p, "output directory")
    p.add_argument("--num-realizations", type=int, help="override num_realizations from the config")

    p = sub.add_parser("export", help="write a synthetic frequency-sweep dataset file")
    common(p, "dataset CSV path")
    p.add_argument("--num-frequencies", type=int, default=SWEEP_SAMPLES)

    p = sub.add_parser("sweep", help="capacity versus receive spacing from synthesis")
    common(p, "output CSV path")
    default = ",".join(str(s) for s in DEFAULT_SPACINGS)
    p.add_argument("--spacings", help=f"comma-separated wavelength fractions (default: config or {default})")
    p.add_argument("--efficiency", choices=("ideal", "hannan"), default="ideal",
                   help="hannan adds Hannan-efficiency rows next to the ideal ones")
    p.add_argument("--strategy", choices=tuple(STRATEGY_FLAGS), default="both")

    p = sub.add_parser("analyze", help="correlation and capacity analysis of a dataset file")
    p.add_argument("dataset", help="dataset CSV path")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--spacings", help="wavelength fractions (default: every integer decimation up to 0.5)")
    p.add_argument("--efficiency", choices=("ideal", "hannan"), default="ideal")
    p.add_argument("--strategy", choices=tuple(STRATEGY_FLAGS), default="both")
    p.add_argument("--snr-db", type=float, default=0.0)
    p.add_argument("--pairs", help="receive/transmit pairs to correlate, e.g. 1:1-2:1,1:1-16:1")
    p.add_argument("--normalization", choices=("per-spacing", "common"), default="per-spacing")
    return parser


def _run(args):
    if args.command == "analyze":
        return cmd_analyze(
            args.dataset,
            args.out,
            parse_spacings(args.spacings) if args.spacings else None,
            args.efficiency,
            args.strategy,
            args.snr_db,
            parse_pairs(args.pairs) if args.pairs else None,
            args.normalization,
        )
    workers = resolve_workers(args.workers)
    if args.seed is not None and args.seed < 0:
        raise ConfigurationError("must be >= 0", "seed")
    if args.command == "synthesize":
        return cmd_synthesize(args.config, args.out, args.seed, workers, args.num_realizations)
    if args.command == "export":
        return cmd_export(args.config, args.out, args.num_frequencies, args.seed, workers)
    return cmd_sweep(
        args.config,
        args.out,
        parse_spacings(args.spacings) if args.spacings else None,
        args.efficiency,
        args.strategy,
        args.seed,
        workers,
    )


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        _run(args)
    except (ConfigurationError, InvalidGeometryError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (HoloMimoError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
