"""Command-line front end: synth, analyze, optimize, simulate, compare.

Each run is driven by one JSON config document (see `wavekit.config`);
the --out, --seed, and --format flags override the corresponding config
fields.  Exit codes: 0 success (including non-converged optimizations,
which are reported, not fatal), 2 config/validation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from .config import (_Tree, load_config, parse_dopplers, parse_region,
                     parse_scene, parse_waveform, resolve_sample_rate)
from .errors import ConfigError, InvalidInputError, OutputError
from .fileio import write_csv, write_json, write_wav
from .metrics import (ambiguity_function, autocorrelation,
                      doppler_tolerance_curve, metrics_report)
from .optimize import (OptimizationProblem, default_initial_parameters,
                       nlfm_initial_parameters, objective_db,
                       optimize_waveform)
from .scene import mf_bank, resolvability_report, simulate_returns
from .signal import SampledSignal, spectrogram, spectrum, to_db, to_passband
from .waveforms import (MtsfmParameters, WaveformSpec, swept_bandwidth,
                        synth_mtsfm, synth_waveform)

_FORMATS = ("csv", "json", "wav")


def _resolve_run_options(tree: _Tree, args) -> tuple:
    """Output directory and format set, with CLI flags overriding config."""
    out_dir = tree.take("output_dir", default=".")
    if args.out is not None:
        out_dir = args.out
    formats = tree.take("formats", default=["csv", "json"])
    if args.format is not None:
        formats = [f.strip() for f in args.format.split(",") if f.strip()]
    if not isinstance(formats, list) or not formats:
        raise ConfigError("formats must be a nonempty list")
    bad = [f for f in formats if f not in _FORMATS]
    if bad:
        raise ConfigError(f"unknown output formats: {', '.join(bad)}")
    return out_dir, frozenset(formats)


def _path(out_dir: str, name: str) -> str:
    return os.path.join(out_dir, name)


def _metrics_doc(signal: SampledSignal, bandwidth_hz: float, region,
                 zero_pad_factor: int) -> dict:
    report = metrics_report(signal, bandwidth_hz, region=region,
                            zero_pad_factor=zero_pad_factor)
    doc = report.to_dict()
    doc.update({
        "bandwidth_hz": float(bandwidth_hz),
        "duration_s": float(signal.duration_s),
        "sample_rate_hz": float(signal.sample_rate_hz),
        "region_inner_delay_s": float(region.inner_delay_s),
        "region_outer_delay_s": float(region.outer_delay_s),
    })
    return doc


def _default_window(num_samples: int) -> int:
    window = min(256, max(16, num_samples // 8))
    return max(2, min(window, num_samples))


def _parse_analysis_options(tree: _Tree, spec: WaveformSpec):
    zpf = tree.take_int("zero_pad_factor", default=4, minimum=1)
    sg = tree.take_subtree("spectrogram", default=None)
    if sg is None:
        window_len, overlap = None, 0.75
    else:
        window_len = sg.take_int("window_len_samples", default=None, minimum=2)
        overlap = sg.take_number("overlap", default=0.75, minimum=0.0)
        sg.finish()
    af = tree.take_subtree("ambiguity", default=None)
    if af is None:
        af_opts = {"max_delay_s": spec.duration_s / 2.0,
                   "max_doppler_hz": 10.0 / spec.duration_s,
                   "num_delays": 129, "num_dopplers": 129}
    else:
        af_opts = {
            "max_delay_s": af.take_number("max_delay_s",
                                          default=spec.duration_s / 2.0,
                                          positive=True),
            "max_doppler_hz": af.take_number("max_doppler_hz",
                                             default=10.0 / spec.duration_s,
                                             positive=True),
            "num_delays": af.take_int("num_delays", default=129, minimum=2),
            "num_dopplers": af.take_int("num_dopplers", default=129, minimum=2),
        }
        af.finish()
    return zpf, window_len, overlap, af_opts


def _write_analysis_bundle(out_dir: str, formats, signal: SampledSignal,
                           bandwidth_hz: float, region, zpf: int,
                           window_len, overlap: float, af_opts: dict) -> None:
    if "csv" in formats:
        spec = spectrum(signal, zpf)
        db = to_db(spec.magnitude / spec.magnitude.max())
        write_csv(_path(out_dir, "spectrum.csv"), ("f_hz", "db"),
                  zip(spec.freqs_hz, db))

        wlen = window_len if window_len is not None else _default_window(signal.num_samples)
        gram = spectrogram(signal, wlen, overlap)
        write_csv(_path(out_dir, "spectrogram.csv"), ("t_s", "f_hz", "db"),
                  ((t, f, gram.magnitude_db[i, j])
                   for i, t in enumerate(gram.times_s)
                   for j, f in enumerate(gram.freqs_hz)))

        ac = autocorrelation(signal)
        write_csv(_path(out_dir, "autocorrelation.csv"), ("lag_s", "db"),
                  zip(ac.lags_s, ac.magnitude_db))

        af = ambiguity_function(signal, af_opts["max_delay_s"],
                                af_opts["max_doppler_hz"],
                                af_opts["num_delays"], af_opts["num_dopplers"])
        af_db = to_db(af.magnitude)
        write_csv(_path(out_dir, "ambiguity.csv"), ("tau_s", "nu_hz", "db"),
                  ((tau, nu, af_db[i, j])
                   for j, nu in enumerate(af.dopplers_hz)
                   for i, tau in enumerate(af.delays_s)))
    if "json" in formats:
        write_json(_path(out_dir, "metrics.json"),
                   _metrics_doc(signal, bandwidth_hz, region, zpf))


def cmd_synth(tree: _Tree, args) -> None:
    out_dir, formats = _resolve_run_options(tree, args)
    spec = parse_waveform(tree.take("waveform"))
    fs = resolve_sample_rate(spec, tree.take_number("sample_rate_hz", default=None,
                                                    positive=True))
    region_data = tree.take("region", default=None)
    zpf = tree.take_int("zero_pad_factor", default=4, minimum=1)
    carrier = tree.take_number("wav_carrier_hz", default=None, positive=True)
    tree.finish()
    signal = synth_waveform(spec, fs)
    region = parse_region(region_data, spec.bandwidth_hz, signal.duration_s)
    if "csv" in formats:
        t = signal.time_grid()
        write_csv(_path(out_dir, "waveform.csv"), ("index", "t_s", "re", "im"),
                  ((i, t[i], signal.samples[i].real, signal.samples[i].imag)
                   for i in range(signal.num_samples)))
    if "json" in formats:
        write_json(_path(out_dir, "metrics.json"),
                   _metrics_doc(signal, spec.bandwidth_hz, region, zpf))
    if "wav" in formats:
        pb_signal = signal
        if signal.center_freq_hz <= 0:
            fc = carrier if carrier is not None else fs / 4.0
            pb_signal = replace(signal, center_freq_hz=fc)
        write_wav(_path(out_dir, "waveform.wav"), to_passband(pb_signal), fs)


def cmd_analyze(tree: _Tree, args) -> None:
    out_dir, formats = _resolve_run_options(tree, args)
    spec = parse_waveform(tree.take("waveform"))
    fs = resolve_sample_rate(spec, tree.take_number("sample_rate_hz", default=None,
                                                    positive=True))
    region_data = tree.take("region", default=None)
    zpf, window_len, overlap, af_opts = _parse_analysis_options(tree, spec)
    tree.finish()
    signal = synth_waveform(spec, fs)
    region = parse_region(region_data, spec.bandwidth_hz, signal.duration_s)
    _write_analysis_bundle(out_dir, formats, signal, spec.bandwidth_hz, region,
                           zpf, window_len, overlap, af_opts)


def _build_initial(initial, num_harmonics: int, bandwidth_hz: float,
                   duration_s: float, sample_rate_hz: float, seed: int,
                   sidelobe_db: float, nbar: int) -> MtsfmParameters:
    if initial == "default":
        return default_initial_parameters(bandwidth_hz, duration_s,
                                          num_harmonics, seed)
    if initial == "nlfm":
        return nlfm_initial_parameters(bandwidth_hz, duration_s, num_harmonics,
                                       sample_rate_hz, sidelobe_db=sidelobe_db,
                                       nbar=nbar)
    if isinstance(initial, dict):
        itree = _Tree(initial, "problem.initial")
        alpha = itree.take("alpha")
        beta = itree.take("beta")
        itree.finish()
        params = MtsfmParameters(num_harmonics=len(alpha),
                                 alpha=np.array(alpha, dtype=float),
                                 beta=np.array(beta, dtype=float),
                                 duration_s=duration_s)
        if params.num_harmonics != num_harmonics:
            raise ConfigError("problem.initial: coefficient count differs from num_harmonics")
        return params
    raise ConfigError("problem.initial must be 'default', 'nlfm', or {alpha, beta}")


def cmd_optimize(tree: _Tree, args) -> None:
    out_dir, formats = _resolve_run_options(tree, args)
    prob = tree.take_subtree("problem")
    tree.finish()
    num_harmonics = prob.take_int("num_harmonics", default=32, minimum=1)
    duration = prob.take_number("duration_s", positive=True)
    bandwidth = prob.take_number("bandwidth_hz", positive=True)
    fs = resolve_sample_rate(
        WaveformSpec(kind="lfm", bandwidth_hz=bandwidth, duration_s=duration),
        prob.take_number("sample_rate_hz", default=None, positive=True))
    objective = prob.take("objective", default="isl")
    region_data = prob.take("region", default=None)
    target = prob.take("bandwidth_target_hz", default="initial_rms")
    tolerance = prob.take_number("bandwidth_tolerance", default=0.1, positive=True)
    weight = prob.take_number("penalty_weight", default=1.0, positive=True)
    budget = prob.take_int("budget", minimum=1)
    seed = prob.take_int("seed", default=0)
    if args.seed is not None:
        seed = args.seed
    method = prob.take("method", default="nelder_mead")
    initial_spec = prob.take("initial", default="default")
    sidelobe_db = prob.take_number("nlfm_sidelobe_db", default=45.0, positive=True)
    nbar = prob.take_int("nlfm_nbar", default=10, minimum=2)
    prob.finish()

    region = parse_region(region_data, bandwidth, duration)
    initial = _build_initial(initial_spec, num_harmonics, bandwidth, duration,
                             fs, seed, sidelobe_db, nbar)
    before = synth_mtsfm(initial, fs)
    if target == "initial_rms":
        # next_pow2(2N) matches the optimizer's internal FFT grid exactly
        target = metrics_report(before, bandwidth, region=region,
                                zero_pad_factor=2).rms_bandwidth_hz
    elif isinstance(target, bool) or not isinstance(target, (int, float)) or target <= 0:
        raise ConfigError("problem.bandwidth_target_hz must be positive or 'initial_rms'")
    try:
        problem = OptimizationProblem(
            initial=initial, region=region, objective=objective,
            bandwidth_target_hz=float(target), bandwidth_tolerance=tolerance,
            penalty_weight=weight, budget=budget, seed=seed, sample_rate_hz=fs)
        result = optimize_waveform(problem, method=method)
    except InvalidInputError as exc:
        raise ConfigError(f"problem: {exc}") from exc

    after = synth_mtsfm(result.final, fs)
    zpf, window_len, overlap, af_opts = 4, None, 0.75, {
        "max_delay_s": duration / 2.0, "max_doppler_hz": 10.0 / duration,
        "num_delays": 129, "num_dopplers": 129}
    if "json" in formats:
        write_json(_path(out_dir, "coefficients.json"), {
            "num_harmonics": result.final.num_harmonics,
            "duration_s": result.final.duration_s,
            "alpha": list(result.final.alpha),
            "beta": list(result.final.beta),
        })
        doc = result.to_dict()
        doc.update({
            "method": method,
            "objective": objective,
            "seed": seed,
            "budget": budget,
            "sample_rate_hz": fs,
            "bandwidth_target_hz": float(target),
            "bandwidth_tolerance": tolerance,
            "penalty_weight": weight,
            "region_inner_delay_s": region.inner_delay_s,
            "region_outer_delay_s": region.outer_delay_s,
            "before_metrics": _metrics_doc(before, bandwidth, region, zpf),
            "after_metrics": _metrics_doc(after, bandwidth, region, zpf),
        })
        write_json(_path(out_dir, "optimize_result.json"), doc)
    if "csv" in formats:
        write_csv(_path(out_dir, "trace.csv"), ("evaluation", "objective_db"),
                  ((idx, objective_db(val, objective)) for idx, val in result.trace))
    _write_analysis_bundle(out_dir, formats, after, bandwidth, region, zpf,
                           window_len, overlap, af_opts)


def cmd_simulate(tree: _Tree, args) -> None:
    out_dir, formats = _resolve_run_options(tree, args)
    spec = parse_waveform(tree.take("waveform"))
    fs = resolve_sample_rate(spec, tree.take_number("sample_rate_hz", default=None,
                                                    positive=True))
    scene = parse_scene(tree.take("scene"))
    dopplers = parse_dopplers(tree)
    margin = tree.take_number("margin_db", default=6.0, positive=True)
    seed = tree.take_int("seed", default=0)
    if args.seed is not None:
        seed = args.seed
    window = tree.take_number("window_s", default=None, positive=True)
    tree.finish()
    signal = synth_waveform(spec, fs)
    received = simulate_returns(signal, scene, seed, window_s=window)
    rd = mf_bank(received, signal, dopplers)
    report = resolvability_report(rd, scene, spec.bandwidth_hz, margin_db=margin)
    if "csv" in formats:
        write_csv(_path(out_dir, "range_doppler.csv"), ("tau_s", "nu_hz", "db"),
                  ((tau, nu, rd.magnitude_db[i, j])
                   for i, nu in enumerate(rd.dopplers_hz)
                   for j, tau in enumerate(rd.delays_s)))
        cut = rd.zero_doppler_cut()
        write_csv(_path(out_dir, "zero_doppler_cut.csv"), ("lag_s", "db"),
                  zip(rd.delays_s, cut))
    if "json" in formats:
        write_json(_path(out_dir, "resolvability.json"), {
            "bandwidth_hz": spec.bandwidth_hz,
            "margin_db": margin,
            "seed": seed,
            "all_detected": all(e["detected"] for e in report),
            "echoes": report,
        })


def cmd_compare(tree: _Tree, args) -> None:
    out_dir, formats = _resolve_run_options(tree, args)
    entries = tree.take("waveforms")
    if not isinstance(entries, list) or len(entries) < 2:
        raise ConfigError("compare needs a 'waveforms' list with >= 2 entries")
    common_fs = tree.take_number("sample_rate_hz", default=None, positive=True)
    region_data = tree.take("region", default=None)
    mode = tree.take("doppler_mode", default="narrowband")
    fraction = tree.take_number("doppler_fraction", default=0.1, positive=True)
    num_points = tree.take_int("num_doppler_points", default=16, minimum=2)
    inband_bw = tree.take_number("inband_bandwidth_hz", default=None, positive=True)
    zpf = tree.take_int("zero_pad_factor", default=4, minimum=1)
    tree.finish()

    parsed = []
    for i, entry in enumerate(entries):
        etree = _Tree(entry, f"waveforms[{i}]")
        name = etree.take("name")
        spec = parse_waveform(etree.take("waveform"), f"waveforms[{i}].waveform")
        fs = resolve_sample_rate(spec, etree.take_number("sample_rate_hz",
                                                         default=common_fs,
                                                         positive=True))
        etree.finish()
        parsed.append((str(name), spec, fs))
    rates = {fs for _, _, fs in parsed}
    if len(rates) != 1:
        raise InvalidInputError("compare requires a single common sample rate; "
                                f"got {sorted(rates)}")

    first = parsed[0][1]
    region = parse_region(region_data, first.bandwidth_hz, first.duration_s)
    ref_bandwidth = max(spec.bandwidth_hz for _, spec, _ in parsed)
    fractions = np.linspace(0.0, 1.5 * fraction, num_points)
    dopplers = fractions * ref_bandwidth
    eval_hz = fraction * ref_bandwidth
    eval_idx = int(np.argmin(np.abs(dopplers - eval_hz)))

    rows, curve_rows, docs = [], [], []
    for name, spec, fs in parsed:
        signal = synth_waveform(spec, fs)
        report = metrics_report(signal, inband_bw or spec.bandwidth_hz,
                                region=region, zero_pad_factor=zpf)
        curve = doppler_tolerance_curve(signal, dopplers, mode=mode)
        loss = curve[eval_idx].peak_loss_db
        rows.append((name, report.psl_db, report.isl_db,
                     report.rms_bandwidth_hz, report.p99_bandwidth_hz,
                     report.inband_energy_fraction, loss))
        curve_rows.extend((name, p.doppler_hz, p.peak_loss_db, p.peak_shift_s)
                          for p in curve)
        doc = report.to_dict()
        doc.update({
            "name": name,
            "bandwidth_hz": spec.bandwidth_hz,
            "doppler_loss_db": loss,
            "doppler_curve": {
                "dopplers_hz": [p.doppler_hz for p in curve],
                "loss_db": [p.peak_loss_db for p in curve],
                "peak_shift_s": [p.peak_shift_s for p in curve],
            },
        })
        docs.append(doc)
    if "csv" in formats:
        write_csv(_path(out_dir, "comparison.csv"),
                  ("name", "psl_db", "isl_db", "rms_bandwidth_hz",
                   "p99_bandwidth_hz", "inband_energy_fraction",
                   "doppler_loss_db"), rows)
        write_csv(_path(out_dir, "doppler_curves.csv"),
                  ("name", "doppler_hz", "loss_db", "peak_shift_s"), curve_rows)
    if "json" in formats:
        write_json(_path(out_dir, "comparison.json"), {
            "doppler_mode": mode,
            "doppler_eval_hz": float(dopplers[eval_idx]),
            "region_inner_delay_s": region.inner_delay_s,
            "region_outer_delay_s": region.outer_delay_s,
            "entries": docs,
        })


_COMMANDS = {
    "synth": cmd_synth,
    "analyze": cmd_analyze,
    "optimize": cmd_optimize,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavekit",
        description="Transmit-waveform synthesis, analysis, sidelobe "
                    "optimization, and echo-scene simulation.")
    sub = parser.add_subparsers(dest="cmd", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument("--format", default=None,
                       help="comma-separated subset of csv,json,wav")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        tree = load_config(args.config, args.cmd)
        _COMMANDS[args.cmd](tree, args)
    except (ConfigError, InvalidInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
