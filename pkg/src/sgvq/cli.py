"""Command line front end.

Every subcommand reads an experiment config file, runs one study, writes a
CSV (and a PNG figure next to it), and prints a short summary.  Exit code 0
on success; validation problems go to stderr with a nonzero exit code.

Environment overrides: SGVQ_MASTER_SEED replaces the config's master seed,
SGVQ_OUTPUT_DIR supplies the default output directory.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import report, sim
from .config import env_master_seed, env_output_dir, parse_experiment_file
from .gain import save_gain_codebook
from .shape import save_shape_codebook

__all__ = ["main", "build_parser"]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sgvq",
        description="Shape-gain quantized feedback for multiuser MIMO precoding",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, helptext, handler):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument(
            "--output-dir",
            default=None,
            help="directory for CSV/PNG output (default: SGVQ_OUTPUT_DIR or '.')",
        )
        p.add_argument("--trials", type=int, default=None, help="override trial count")
        p.set_defaults(func=handler)
        return p

    add("train-codebooks", "train and serialize gain/shape codebooks", _cmd_train)
    p = add("distortion-gain", "gain quantizer distortion vs bit count", _cmd_gain)
    p.add_argument("--bits", type=int, nargs="+", default=list(range(6, 11)))
    p = add("distortion-shape", "shape quantizer distortion vs bit count", _cmd_shape)
    p.add_argument("--bits", type=int, nargs="+", default=list(range(6, 15)))
    p.add_argument("--queries", type=int, default=10000)
    add("sweep-bitalloc", "feedback distortion vs shape/gain bit split", _cmd_bitalloc)
    add("sweep-smse", "downlink sum MSE vs SNR", _cmd_smse)
    add("sweep-ber", "uncoded bit error rate vs SNR", _cmd_ber)
    p = add("ccdf", "CCDF of the minimum shape quantization distance", _cmd_ccdf)
    p.add_argument("--bits", type=int, default=10)
    add("allocate", "optimal bit split from fitted distortion constants", _cmd_allocate)
    return parser


def _load_spec(args):
    spec = parse_experiment_file(args.config)
    seed = env_master_seed()
    if seed is not None:
        spec = spec.replace(master_seed=seed)
    if args.trials is not None:
        spec = spec.replace(trials=args.trials)
    return spec


def _outdir(args):
    out = args.output_dir if args.output_dir is not None else (env_output_dir() or ".")
    os.makedirs(out, exist_ok=True)
    return out


def _emit(rep, outdir, stem, render=None):
    csv_path = os.path.join(outdir, stem + ".csv")
    rep.to_csv(csv_path)
    paths = [csv_path]
    if render is not None:
        png_path = os.path.join(outdir, stem + ".png")
        render(rep, png_path)
        paths.append(png_path)
    return paths


def _cmd_train(args):
    spec = _load_spec(args)
    if not spec.B_s_list:
        raise ValueError("config must set B_s_list to train codebooks")
    out = _outdir(args)
    for B_s in spec.B_s_list:
        gain_cb, shape_cb = sim.train_codebooks(spec, B_s)
        gpath = os.path.join(out, f"gain_codebook_Bg{spec.B - B_s}.txt")
        spath = os.path.join(out, f"shape_codebook_Bs{B_s}.txt")
        save_gain_codebook(gain_cb, gpath)
        save_shape_codebook(shape_cb, spath)
        print(f"B_s={B_s} B_g={spec.B - B_s}: wrote {gpath} and {spath}")
    return 0


def _cmd_gain(args):
    spec = _load_spec(args)
    rep = sim.gain_distortion_curve(spec, tuple(args.bits))
    paths = _emit(rep, _outdir(args), "distortion_gain", report.render_gain_curve)
    b = rep.column("B_g")
    d = rep.column("distortion_mean")
    if b.size >= 2:
        slope = np.polyfit(b, np.log2(d), 1)[0]
        print(f"gain distortion slope {slope:.3f} bits^-1 (law: -2); wrote {', '.join(paths)}")
    else:
        print(f"gain distortion {d[0]:.6g} at B_g={int(b[0])}; wrote {', '.join(paths)}")
    return 0


def _cmd_shape(args):
    spec = _load_spec(args)
    rep = sim.shape_distortion_curve(spec, tuple(args.bits), args.queries)
    paths = _emit(rep, _outdir(args), "distortion_shape", report.render_shape_curve)
    b = rep.column("B_s")
    d = rep.column("distortion_mean")
    if b.size >= 2:
        slope = np.polyfit(b, np.log2(d), 1)[0]
        print(
            f"shape distortion slope {slope:.3f} bits^-1 "
            f"(law: {-2.0 / (2 * spec.M - 1):.3f}); wrote {', '.join(paths)}"
        )
    else:
        print(f"shape distortion {d[0]:.6g} at B_s={int(b[0])}; wrote {', '.join(paths)}")
    return 0


def _cmd_bitalloc(args):
    spec = _load_spec(args)
    rep = sim.sweep_bit_allocation(spec)
    paths = _emit(rep, _outdir(args), "sweep_bitalloc", report.render_bitalloc)
    b = rep.column("B_s")
    d = rep.column("distortion_mean")
    best = int(b[np.argmin(d)])
    print(f"empirical best split: B_s={best} B_g={spec.B - best}; wrote {', '.join(paths)}")
    return 0


def _cmd_smse(args):
    spec = _load_spec(args)
    rep = sim.sweep_smse(spec)
    paths = _emit(rep, _outdir(args), "sweep_smse", report.render_smse)
    print(f"{len(rep.rows)} SMSE points over {len(spec.snr_db_list)} SNRs; wrote {', '.join(paths)}")
    return 0


def _cmd_ber(args):
    spec = _load_spec(args)
    rep = sim.sweep_ber(spec)
    paths = _emit(rep, _outdir(args), "sweep_ber", report.render_ber)
    print(f"{len(rep.rows)} BER points over {len(spec.snr_db_list)} SNRs; wrote {', '.join(paths)}")
    return 0


def _cmd_ccdf(args):
    spec = _load_spec(args)
    rng = sim.trial_stream(spec.master_seed, f"ccdf-{args.bits}", 0)
    rep = sim.ccdf_compare(spec.M, args.bits, spec.trials, rng)
    paths = _emit(rep, _outdir(args), "ccdf", report.render_ccdf)
    gap_exact = float(np.max(np.abs(rep.column("mc_ccdf") - rep.column("exact_ccdf"))))
    gap_approx = float(
        np.max(np.abs(rep.column("exact_ccdf") - rep.column("approx_ccdf_smallangle")))
    )
    print(
        f"sup|MC - exact| = {gap_exact:.4f}, sup|exact - approx| = {gap_approx:.4f}; "
        f"wrote {', '.join(paths)}"
    )
    return 0


def _cmd_allocate(args):
    spec = _load_spec(args)
    rep = sim.allocate_report(spec)
    out = _outdir(args)
    csv_path = os.path.join(out, "allocate.csv")
    rep.to_csv(csv_path)
    model = sim.fitted_distortion_model(spec)
    png_path = os.path.join(out, "allocate.png")
    report.render_allocation(rep, model, png_path)
    row = dict(zip(rep.columns, rep.rows[0]))
    print(f"real allocation: B_s={row['real_B_s']:.1f} B_g={row['real_B_g']:.1f}")
    print(f"integer allocation: B_s={row['int_B_s']} B_g={row['int_B_g']}")
    print(f"wrote {csv_path}, {png_path}")
    return 0


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports its own diagnostics
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
