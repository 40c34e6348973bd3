"""Command-line front end.

Exit codes: 0 success, 2 configuration or validation error, 3 pipeline or
numerical failure.  Failures print one JSON object on stderr, e.g.
``{"error": "SpectrumFormatError", "exit": 2, "message": "line 3: ..."}``.
All physical quantities are in metres.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np
from scipy.stats import spearmanr

from . import io as lgio
from .azimuthal import azimuthal_decompose
from .filtering import BandSpec, band_filter_spectrum, denoise, l_power_spectrum
from .fixtures import COMPARE_FIELDS, random_modes, render_image, ripple_fixture
from .lg_basis import check_order
from .pipeline import (DecomposeParams, DecompositionError, analyze_waist,
                       decompose, fidelity, reconstruct, residual_map)
from .polar_grid import DetectorSpec, to_polar
from .radial_fit import compare_methods
from .waist import DEFAULT_SCAN

THREADS_ENV = "LGDECOMP_THREADS"
EXIT_OK, EXIT_CONFIG, EXIT_PIPELINE = 0, 2, 3

log = logging.getLogger("lgdecomp")


class ConfigError(ValueError):
    pass


class PipelineFailure(RuntimeError):
    """Pipeline failure whose report has already been written."""


# --- argument helpers -----------------------------------------------------

def _positive(kind):
    def conv(text):
        value = kind(text)
        if not value > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return conv


def _fraction(text):
    value = float(text)
    if not 0 < value <= 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1], got {text}")
    return value


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        if value < 1:
            raise ConfigError(f"{THREADS_ENV} must be positive, got {value}")
        return value
    return os.cpu_count() or 1


def _add_detector(p, with_pixels=False):
    g = p.add_argument_group("detector")
    if with_pixels:
        g.add_argument("--nx", type=_positive(int), help="detector width in pixels")
        g.add_argument("--ny", type=_positive(int), help="detector height in pixels")
    g.add_argument("--pitch", type=_positive(float), help="pixel pitch in metres")
    g.add_argument("--center", type=float, nargs=2, metavar=("CX", "CY"),
                   help="optical axis in pixel coordinates (default: array centre)")


def _add_scan(p):
    g = p.add_argument_group("waist and truncation")
    g.add_argument("--power-fraction", type=_fraction, default=0.99,
                   help="azimuthal power fraction per ring (default 0.99)")
    g.add_argument("--width-frac-r", type=_fraction, default=0.99)
    g.add_argument("--width-frac-f", type=_fraction, default=0.95)
    g.add_argument("--ring-floor", type=float, default=1e-3,
                   help="rings below this share of the peak ring power get order 0")
    g.add_argument("--min-row-power", type=float, default=1e-4,
                   help="OAM rows below this share of the strongest row count as empty")
    g.add_argument("--scan", type=float, nargs=3, metavar=("MIN", "MAX", "STEP"),
                   help="waist scan grid in metres (default 600e-6 1500e-6 25e-6)")
    g.add_argument("--waist", type=_positive(float), help="force this waist; skips the scan")
    g.add_argument("--budget", type=_positive(int), default=256,
                   help="radial sample budget per subspace (default 256)")
    g.add_argument("--l-max", type=int, help="override the azimuthal truncation order")
    g.add_argument("--dropped", type=int, default=8,
                   help="outer nodes discarded from the effective area (default 8)")


def _scan_grid(args):
    if args.scan is None:
        return DEFAULT_SCAN
    lo, hi, step = args.scan
    if not (0 < lo <= hi and step > 0):
        raise ConfigError(f"invalid scan range {lo}..{hi} step {step}")
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return tuple(float(v) for v in np.round(lo + step * np.arange(n), 12))


def _params(args, workers=1) -> DecomposeParams:
    if args.dropped < 0:
        raise ConfigError("--dropped must be non-negative")
    if args.l_max is not None and args.l_max < 0:
        raise ConfigError("--l-max must be non-negative")
    params = DecomposeParams(
        power_fraction=args.power_fraction, ring_floor=args.ring_floor,
        width_frac_r=args.width_frac_r, width_frac_f=args.width_frac_f,
        min_row_power=args.min_row_power, candidates=_scan_grid(args),
        forced_w0=getattr(args, "waist", None), sample_budget=args.budget,
        dropped=args.dropped, l_max=args.l_max, workers=workers)
    try:
        params.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return params


def _load_image(path, args):
    """Image plus the detector it was recorded on."""
    img, pitch = lgio.read_image(path)
    pitch = args.pitch if args.pitch is not None else pitch
    if pitch is None:
        raise ConfigError(f"{path}: pixel pitch unknown; pass --pitch")
    ny, nx = img.shape
    center = tuple(args.center) if args.center else None
    return img, DetectorSpec(nx, ny, pitch, center)


def _is_spectrum_file(path) -> bool:
    with open(path, "rb") as fh:
        return fh.read(len(b"format=")) == b"format="


def _default_sibling(path, suffix):
    p = Path(path)
    return p.with_name(p.stem + suffix)


# --- subcommands ----------------------------------------------------------

def cmd_decompose(args):
    img, spec = _load_image(args.input, args)
    params = _params(args, _threads(args))
    t0 = time.perf_counter()
    spectrum = decompose(img, spec, params)
    elapsed = time.perf_counter() - t0
    lgio.write_spectrum(spectrum, args.output)

    d = spectrum.diagnostics
    max_p = max(spectrum.p_trunc.values(), default=0)
    report = {
        "input": str(args.input),
        "output": str(args.output),
        "w0_m": spectrum.w0,
        "waist_scanned": params.forced_w0 is None,
        "forced_w0_m": params.forced_w0,
        "l_max": spectrum.l_max,
        "max_p": max_p,
        "mode_count": spectrum.mode_count,
        "retained_fraction": d["retained_fraction"],
        "clipped_l": d["clipped"],
        "rank_deficient_l": d["rank_deficient"],
        "max_residual": max(d["residuals"].values(), default=0.0),
        "elapsed_s": elapsed,
    }
    report_path = args.report or _default_sibling(args.output, ".report.json")
    Path(report_path).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    print(f"modes={spectrum.mode_count} w0={spectrum.w0:.6g} l_max={spectrum.l_max} "
          f"max_p={max_p} elapsed={elapsed:.2f}s")
    return EXIT_OK


def cmd_reconstruct(args):
    spectrum = lgio.read_spectrum(args.spectrum)
    base = spectrum.detector
    if base is None and (args.nx is None or args.ny is None or args.pitch is None):
        raise ConfigError("spectrum has no detector geometry; pass --nx, --ny and --pitch")
    nx = args.nx or base.nx
    ny = args.ny or base.ny
    pitch = args.pitch or base.pitch
    if args.center:
        center = tuple(args.center)
    elif base is not None and (nx, ny) == (base.nx, base.ny):
        center = base.center
    else:
        center = None
    spec = DetectorSpec(nx, ny, pitch, center)
    image = reconstruct(spectrum, spec)
    lgio.write_image(args.output, image, spec.pitch)
    print(f"wrote {args.output} ({ny}x{nx})")
    if args.compare:
        original, _ = lgio.read_image(args.compare)
        score = fidelity(image, original)
        residual_path = args.residual or _default_sibling(args.output, ".residual.raw")
        lgio.write_raw(residual_path, residual_map(image, original), spec.pitch)
        print(f"fidelity={score:.6f}")
    return EXIT_OK


def cmd_analyze_waist(args):
    img, spec = _load_image(args.input, args)
    args.waist = None
    params = _params(args)
    report = analyze_waist(img, spec, params)
    Path(args.output).write_text(report.to_csv(), encoding="utf-8")

    w0s = np.array([c.w0 for c in report.candidates])
    counts = np.array([c.mode_count for c in report.candidates])
    finite = np.isfinite(counts)
    if finite.sum() >= 3 and np.ptp(counts[finite]) > 0:
        rho = spearmanr(w0s[finite], counts[finite]).statistic
        trend = "decreasing" if rho < 0 else "increasing"
        print(f"trend: mode count vs w0 spearman={rho:.3f} ({trend})")
    else:
        print("trend: undetermined (fewer than three distinct finite mode counts)")
    if report.selected is None:
        blocking = sorted({l for c in report.candidates for l in c.blocking(report.sample_budget)})
        raise PipelineFailure(f"no feasible waist with budget {report.sample_budget}; "
                              f"blocking subspaces l={blocking}; report written to {args.output}")
    best = report.candidate(report.selected)
    print(f"selected w0={report.selected:.6g} modes={best.mode_count} "
          f"max_samples={best.max_samples}")
    return EXIT_OK


def _parse_modes(text):
    """``"p:amp,p:amp"`` with complex amplitudes in Python syntax."""
    amps = {}
    for item in text.split(","):
        p, sep, a = item.partition(":")
        if not sep:
            raise ConfigError(f"mode entry {item!r} is not of the form p:amplitude")
        try:
            amps[int(p)] = complex(a.replace(" ", ""))
        except ValueError:
            raise ConfigError(f"bad mode entry {item!r}") from None
        check_order(0, int(p))
    return amps


def cmd_compare_fit(args):
    if args.modes:
        if args.w0 is None:
            raise ConfigError("--modes needs --w0")
        w0, amps = args.w0, _parse_modes(args.modes)
    else:
        w0, amps = COMPARE_FIELDS[args.field]
    truth = np.zeros(max(amps) + 1, dtype=np.complex128)
    for p, a in amps.items():
        truth[p] = a
    if not np.any(truth):
        raise ConfigError("the reference field is identically zero")
    if args.max_samples < len(truth):
        raise ConfigError(f"--max-samples must be at least p_trunc+1 = {len(truth)}")
    table = compare_methods(truth, w0, args.extent, range(len(truth), args.max_samples + 1))
    lgio.write_table(args.output, ["samples", "accuracy_least_squares", "accuracy_integral"],
                     [(int(m), repr(float(a)), repr(float(b))) for m, a, b in table])
    first = table[0]
    print(f"p_trunc={len(truth) - 1} samples={int(first[0])} "
          f"least_squares={first[1]:.6f} integral={first[2]:.6f}")
    return EXIT_OK


def cmd_filter(args):
    try:
        band = BandSpec(args.band[0], args.band[1])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if _is_spectrum_file(args.input):
            spectrum = lgio.read_spectrum(args.input)
            out = band_filter_spectrum(spectrum, band)
            lgio.write_spectrum(out, args.output)
            ls = sorted(spectrum.coeffs)
            before = [float(np.vdot(spectrum.coeffs[l], spectrum.coeffs[l]).real) for l in ls]
            after = [float(np.vdot(out.coeffs[l], out.coeffs[l]).real) for l in ls]
        else:
            img, spec = _load_image(args.input, args)
            filtered = denoise(img, spec, band)
            lgio.write_image(args.output, filtered, spec.pitch)
            ls, before = l_power_spectrum(azimuthal_decompose(to_polar(img, spec)))
            _, after = l_power_spectrum(azimuthal_decompose(to_polar(filtered, spec)))
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    csv_path = args.spectrum_csv or _default_sibling(args.output, ".lspectrum.csv")
    lgio.write_table(csv_path, ["l", "power_before", "power_after"],
                     [(int(l), repr(float(b)), repr(float(a)))
                      for l, b, a in zip(ls, before, after)])
    print(f"wrote {args.output} and {csv_path} (band {band.l_keep_min}..{band.l_keep_max})")
    return EXIT_OK


def cmd_fidelity(args):
    a, _ = lgio.read_image(args.reconstructed)
    b, _ = lgio.read_image(args.original)
    print(f"fidelity={fidelity(a, b, intensity=args.intensity):.6f}")
    return EXIT_OK


# per-kind defaults: (pixels per side, waist in metres, seed)
FIXTURE_DEFAULTS = {"mode": (256, 775e-6, 0), "random": (256, 450e-6, 1),
                    "ripple": (512, 1.5e-3, 3)}


def cmd_gen_fixture(args):
    side, waist, seed = FIXTURE_DEFAULTS[args.kind]
    if args.seed is None:
        args.seed = seed
    args.nx = args.nx or side
    args.ny = args.ny or side
    args.w0 = args.w0 or waist
    spec = DetectorSpec(args.nx, args.ny, args.pitch)
    if args.kind == "mode":
        check_order(args.l, args.p)
        img = render_image({(args.l, args.p): 1.0}, args.w0, spec)
    elif args.kind == "random":
        img = render_image(random_modes(args.n_modes, args.l_max, args.p_max, args.seed,
                                        args.decay), args.w0, spec)
    else:
        if args.intensity:
            raise ConfigError("ripple fixtures are already intensity images; drop --intensity")
        img, clean = ripple_fixture(spec, args.ripple_order, args.ripple_amplitude,
                                    seed=args.seed, w0=args.w0)
        if args.clean_output:
            lgio.write_image(args.clean_output, clean, spec.pitch)
    if args.intensity:
        img = np.abs(img) ** 2
    lgio.write_image(args.output, img, spec.pitch)
    print(f"wrote {args.output} ({args.kind}, {args.ny}x{args.nx}, seed={args.seed})")
    return EXIT_OK


# --- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lgdecomp",
        description="Laguerre-Gaussian mode decomposition of optical images.")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--threads", type=_positive(int),
                        help=f"worker threads (default: ${THREADS_ENV} or all cores)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="image -> LG spectrum file")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--report", help="provenance JSON (default: <output>.report.json)")
    _add_detector(p)
    _add_scan(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("reconstruct", help="LG spectrum file -> image")
    p.add_argument("spectrum")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--compare", help="original image; prints the fidelity")
    p.add_argument("--residual", help="residual intensity map (default: <output>.residual.raw)")
    _add_detector(p, with_pixels=True)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("analyze-waist", help="waist scan table as CSV")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    _add_detector(p)
    _add_scan(p)
    p.set_defaults(func=cmd_analyze_waist)

    p = sub.add_parser("compare-fit", help="least squares vs projection accuracy CSV")
    p.add_argument("--field", choices=sorted(COMPARE_FIELDS), default="p8")
    p.add_argument("--modes", help="user l=0 field as 'p:amp,p:amp' (needs --w0)")
    p.add_argument("--w0", type=_positive(float))
    p.add_argument("--extent", type=_positive(float), default=12.8e-3,
                   help="sampled radial extent in metres (default 12.8e-3)")
    p.add_argument("--max-samples", type=_positive(int), default=256)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_compare_fit)

    p = sub.add_parser("filter", help="azimuthal band filter of an image or spectrum file")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--band", type=int, nargs=2, metavar=("LMIN", "LMAX"), default=(-150, 150))
    p.add_argument("--spectrum-csv", help="l power before/after (default: <output>.lspectrum.csv)")
    _add_detector(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("fidelity", help="intensity overlap of two images")
    p.add_argument("reconstructed")
    p.add_argument("original")
    p.add_argument("--intensity", action="store_true",
                   help="inputs are intensity images rather than fields")
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("gen-fixture", help="write a synthetic test image")
    p.add_argument("--kind", choices=("mode", "random", "ripple"), default="mode")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--nx", type=_positive(int), help="default 512 for ripple, else 256")
    p.add_argument("--ny", type=_positive(int))
    p.add_argument("--pitch", type=_positive(float), default=50e-6)
    p.add_argument("--w0", type=_positive(float),
                   help="default 775e-6 (mode), 450e-6 (random), 1.5e-3 (ripple)")
    p.add_argument("--l", type=int, default=4)
    p.add_argument("--p", type=int, default=7)
    p.add_argument("--n-modes", type=_positive(int), default=200)
    p.add_argument("--l-max", type=int, default=40)
    p.add_argument("--p-max", type=int, default=60)
    p.add_argument("--decay", type=float, default=1.0)
    p.add_argument("--seed", type=int, help="default 1 (random), 3 (ripple)")
    p.add_argument("--ripple-order", type=int, default=178)
    p.add_argument("--ripple-amplitude", type=float, default=0.1)
    p.add_argument("--clean-output", help="ripple kind: also write the clean image")
    p.add_argument("--intensity", action="store_true", help="write |field|^2")
    p.set_defaults(func=cmd_gen_fixture)
    return parser


def _fail(exc, code):
    record = {"error": type(exc).__name__, "exit": code, "message": str(exc)}
    blocking = getattr(exc, "blocking", None)
    if blocking:
        record["blocking_l"] = blocking
    print(json.dumps(record), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (DecompositionError, PipelineFailure, np.linalg.LinAlgError,
            FloatingPointError, ArithmeticError, RuntimeError) as exc:
        return _fail(exc, EXIT_PIPELINE)
    except (ValueError, KeyError, OSError) as exc:
        return _fail(exc, EXIT_CONFIG)


if __name__ == "__main__":
    sys.exit(main())
