import argparse
import dataclasses
import os
import sys

import numpy as np

from src.core import DegenerateInputError, InsufficientBeatsError, ParseError, UniformSignal
from src.edr.beats import dump_annotations, detect_peaks, load_annotations
from src.edr.pipeline import EdrConfig, SstConfig, run_edr, run_sst
from src.evaluation.metrics import segment_error
from src.infrastructure import csv_io
from src.infrastructure.config import apply_overrides, as_public_dict, load_config_file
from src.infrastructure.logging import log_banner, log_event, log_parameters, open_run_log
from src.infrastructure.util_funcs import fix_random_seeds, set_printoptions
from src.signals.uniform import median_detrend
from src.synthesis.generators import SynthConfig, build_generator


EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INSUFFICIENT_BEATS = 3
EXIT_DEGENERATE = 4

DEFAULT_SEGMENTS = (240, 120, 20)
PARAMS_FILE = "params.cfg"


#---------------------------------------- Arguments ----------------------------------------#
def _add_common(parser):
    parser.add_argument("-o", "--out-dir", dest="out_dir", type=str, default=".",
        help="Directory receiving the outputs and the run log")
    parser.add_argument("-s", "--seed", dest="seed", type=int, default=None,
        help="random seed value")
    parser.add_argument("--config", dest="config", type=str, default=None,
        help="File of key=value overrides, applied before the flags")
    parser.add_argument("--progress", dest="progress", action="store_true",
        help="Display progress bars")


def _add_transform(parser):
    parser.add_argument("--sigma", dest="sigma", type=float, default=None,
        help="Wavelet width parameter, 0 < sigma < 1")
    parser.add_argument("--n-v", dest="n_v", type=int, default=None,
        help="Number of voices per octave")
    parser.add_argument("--gamma", dest="gamma", type=float, default=None,
        help="Magnitude threshold of the phase transform")
    parser.add_argument("--lambda", dest="lmbda", type=float, default=None,
        help="Smoothness penalty of the ridge extraction")
    parser.add_argument("--n-w", dest="n_w", type=int, default=None,
        help="Half-width in bins of the reconstruction band")
    parser.add_argument("--n-xi", dest="n_xi", type=int, default=None,
        help="Number of frequency bins")
    parser.add_argument("--derivative", dest="derivative", type=str, default=None,
        choices=["spectral", "central"], help="Time-derivative stencil of the CWT")
    parser.add_argument("--write-sst", dest="write_sst", action="store_true",
        help="Also write the squeezed magnitudes to sst.csv")


def build_parser():
    parser = argparse.ArgumentParser(prog="sst_edr",
        description="Synchrosqueezing IF estimation and ECG-derived respiration.")
    commands = parser.add_subparsers(dest="command", required=True)

    sst = commands.add_parser("sst", help="Estimate the instantaneous frequency of a signal")
    sst.add_argument("signal", type=str, help="Signal file with header t,value")
    sst.add_argument("--resample-dt", dest="resample_dt", type=float, default=None,
        help="Linearly resample the signal to this interval first")
    _add_transform(sst)
    _add_common(sst)
    sst.set_defaults(func=cmd_sst)

    edr = commands.add_parser("edr", help="Derive the respiration from an ECG")
    edr.add_argument("ecg", type=str, help="ECG file with header t,value")
    edr.add_argument("-a", "--annotations", dest="annotations", type=str, default=None,
        help="Beat annotations with header t,label; the detector is used if missing")
    edr.add_argument("--detrend-window", dest="detrend_window", type=float, default=None,
        help="Median-filter window in seconds")
    edr.add_argument("--edr-dt", dest="edr_dt", type=float, default=None,
        help="Sampling interval of the beat-amplitude spline")
    edr.add_argument("--drop-pac", dest="keep_pac", action="store_const", const=False,
        default=None, help="Exclude PAC beats from the spline as well")
    _add_transform(edr)
    _add_common(edr)
    edr.set_defaults(func=cmd_edr)

    ev = commands.add_parser("eval", help="Compare two instantaneous-frequency files")
    ev.add_argument("ref", type=str, help="Reference file with header t,freq_hz")
    ev.add_argument("est", type=str, help="Estimate file with header t,freq_hz")
    ev.add_argument("-K", "--segments", dest="segments", type=int, nargs="+",
        default=list(DEFAULT_SEGMENTS), help="Segment counts")
    _add_common(ev)
    ev.set_defaults(func=cmd_eval)

    synth = commands.add_parser("synth", help="Generate a signal with known instantaneous frequency")
    synth.add_argument("--kind", dest="kind", type=str, default=None, choices=["respiration", "ecg"])
    synth.add_argument("--iif", dest="iif", type=float, default=None,
        help="Respiratory frequency in Hz (start frequency of a chirp)")
    synth.add_argument("--iif-end", dest="iif_end", type=float, default=None,
        help="End frequency of a linear chirp")
    synth.add_argument("--rr", dest="rr", type=str, default=None, choices=["metronomic", "af", "ramp"])
    synth.add_argument("--rr-mean", dest="rr_mean", type=float, default=None)
    synth.add_argument("--rr-low", dest="rr_low", type=float, default=None)
    synth.add_argument("--rr-high", dest="rr_high", type=float, default=None)
    synth.add_argument("--duration", dest="duration", type=float, default=None)
    synth.add_argument("--dt", dest="dt", type=float, default=None)
    synth.add_argument("--mod-depth", dest="mod_depth", type=float, default=None)
    synth.add_argument("--noise", dest="noise", type=float, default=None)
    synth.add_argument("--drift", dest="drift", type=float, default=None)
    synth.add_argument("--pac-fraction", dest="pac_fraction", type=float, default=None)
    synth.add_argument("--pvc-fraction", dest="pvc_fraction", type=float, default=None)
    _add_common(synth)
    synth.set_defaults(func=cmd_synth)
    return parser


def _resolve(defaults, args):
    """Layer the config file and the flags over `defaults`.

    Returns:
        config (dataclass): The effective configuration.
        seed (int): The effective seed, 0 unless given in the file or as a flag.
    """
    file_layer = load_config_file(args.config) if args.config is not None else {}
    seed = int(file_layer.pop("seed", 0))
    if args.seed is not None:
        seed = args.seed
    names = [f.name for f in dataclasses.fields(defaults)]
    flags = {name: getattr(args, name, None) for name in names}
    return apply_overrides(defaults, file_layer, flags), seed


def _start_run(args, cfg, seed):
    """Fix the seeds, write the parameter file and open the run log."""
    fix_random_seeds(seed)
    os.makedirs(args.out_dir, exist_ok=True)
    params = {k: v for k, v in as_public_dict(cfg).items() if v is not None}
    params["seed"] = seed
    with open(os.path.join(args.out_dir, PARAMS_FILE), "w") as f:
        log_parameters(params, f)
    stdout = open_run_log(args.out_dir)
    log_banner(stdout)
    log_event(f"command={args.command}", stdout)
    log_event(f"seed={seed}", stdout)
    return stdout


#---------------------------------------- Commands ----------------------------------------#
def cmd_sst(args):
    cfg, seed = _resolve(SstConfig(), args)
    sig = csv_io.read_signal(args.signal)
    with _start_run(args, cfg, seed) as stdout:
        log_event(f"input={args.signal}", stdout)
        run = run_sst(sig, cfg, stdout=stdout, progress=args.progress)
        csv_io.write_if(os.path.join(args.out_dir, "ridge.csv"), run.if_est)
        if args.write_sst:
            csv_io.write_sst_matrix(os.path.join(args.out_dir, "sst.csv"), run.sst)
        log_event("Wrote ridge.csv" + (" and sst.csv" if args.write_sst else ""), stdout)
    return EXIT_OK


def _beats_for(args, ecg, cfg, stdout):
    if args.annotations is not None and os.path.exists(args.annotations):
        with open(args.annotations, "r") as f:
            beats = load_annotations(f.read(), t0=ecg.t0)
        log_event(f"beats=annotations ({args.annotations})", stdout)
        return beats
    if args.annotations is not None:
        log_event(f"WARNING: annotations file {args.annotations} not found, using the detector", stdout)
    beats = detect_peaks(median_detrend(ecg, cfg.detrend_window))
    log_event(f"beats=detector (polarity {beats.polarity})", stdout)
    return beats


def cmd_edr(args):
    cfg, seed = _resolve(EdrConfig(), args)
    ecg = csv_io.read_signal(args.ecg)
    with _start_run(args, cfg, seed) as stdout:
        log_event(f"input={args.ecg}", stdout)
        beats = _beats_for(args, ecg, cfg, stdout)
        result = run_edr(ecg, beats, cfg, stdout=stdout, progress=args.progress)
        csv_io.write_if(os.path.join(args.out_dir, "if_e.csv"), result.if_e)
        csv_io.write_signal(os.path.join(args.out_dir, "edr.csv"), result.edr)
        if args.write_sst:
            csv_io.write_sst_matrix(os.path.join(args.out_dir, "sst.csv"), result.sst)
        log_event("Wrote if_e.csv and edr.csv", stdout)
    return EXIT_OK


def _align(ref, est):
    """Return the reference values on the time grid of the estimate.
    Identical grids are used as they are; otherwise the reference must cover the
    time range of the estimate and is linearly interpolated onto its grid.
    """
    tol = 1e-6 * min(ref.dt, est.dt)
    if len(ref) == len(est) and abs(ref.t0 - est.t0) <= tol and abs(ref.dt - est.dt) <= tol:
        return ref.samples, False
    t_ref, t_est = ref.times, est.times
    if t_est[0] < t_ref[0] - tol or t_est[-1] > t_ref[-1] + tol:
        raise ValueError(f"Misaligned inputs: the estimate spans [{t_est[0]:.9g}, {t_est[-1]:.9g}]s, "
                         f"the reference only [{t_ref[0]:.9g}, {t_ref[-1]:.9g}]s")
    return np.interp(t_est, t_ref, ref.samples), True


def cmd_eval(args):
    seed = 0 if args.seed is None else args.seed
    ref = csv_io.read_if(args.ref)
    est = csv_io.read_if(args.est)
    ref_values, interpolated = _align(ref, est)
    metrics = {"ref": args.ref, "est": args.est, "n": len(est), "dt": est.dt,
               "ref_interpolated": interpolated, "segments": {}}
    for K in args.segments:
        report = segment_error(ref_values, est.samples, est.dt, K)
        metrics["segments"][str(K)] = {
            "e_k": report.e_k,
            "e_k_signed": report.e_k_signed,
            "n_empty": report.n_empty,
            "deltas": [float(d) for d in report.deltas],
        }

    os.makedirs(args.out_dir, exist_ok=True)
    with open_run_log(args.out_dir) as stdout:
        log_banner(stdout)
        log_event(f"command={args.command}", stdout)
        log_event(f"ref={args.ref} est={args.est} seed={seed}", stdout)
        for K, entry in metrics["segments"].items():
            log_event(f"E_{K}={entry['e_k']:.6g}% (signed {entry['e_k_signed']:.6g}%, "
                      f"{entry['n_empty']} empty segments)", stdout)
        csv_io.write_metrics(os.path.join(args.out_dir, "metrics.json"), metrics)
    return EXIT_OK


def cmd_synth(args):
    cfg, seed = _resolve(SynthConfig(), args)
    sample = build_generator(cfg).generate(seed)
    with _start_run(args, cfg, seed) as stdout:
        log_parameters(as_public_dict(cfg), stdout)
        truth = UniformSignal(sample.true_iif, sample.signal.dt, sample.signal.t0)
        if cfg.kind == "respiration":
            csv_io.write_signal(os.path.join(args.out_dir, "respiration.csv"), sample.signal)
        else:
            csv_io.write_signal(os.path.join(args.out_dir, "ecg.csv"), sample.signal)
            with open(os.path.join(args.out_dir, "annotations.csv"), "w") as f:
                f.write(dump_annotations(sample.beats, t0=sample.signal.t0))
            log_event(f"beats={len(sample.beats)}", stdout)
        csv_io.write_if(os.path.join(args.out_dir, "truth_iif.csv"), truth)
        log_event(f"Wrote {cfg.kind} signal with {len(sample.signal)} samples", stdout)
    return EXIT_OK


#------------------------------------------ Entry ------------------------------------------#
def main(argv=None):
    """Run the command line interface and return its exit code.

    Exit codes: 0 success; 2 input, parse or parameter error; 3 insufficient beats;
    4 degenerate time-frequency representation.
    """
    set_printoptions(precision=5, sci_mode=False)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_INPUT

    try:
        return args.func(args)
    except InsufficientBeatsError as e:
        print(f"error: insufficient beats: {e}", file=sys.stderr)
        return EXIT_INSUFFICIENT_BEATS
    except DegenerateInputError as e:
        print(f"error: degenerate input: {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ParseError as e:
        print(f"error: cannot parse input: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
