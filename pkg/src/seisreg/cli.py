"""seisreg command line interface.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
divergence.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import emdreg, metrics, mlp, pipeline, resample, synthbench, volpost
from .errors import ConfigError, DataError, DivergenceError
from .formats.las import parse_las, write_las
from .formats.segy import TraceLayout, parse_segy
from .formats.svol import read_svol, write_svol
from .formats.volume import volume_from_traces


def _cmd_convert(args):
    if bool(args.segy) == bool(args.las):
        raise ConfigError("convert needs exactly one of --segy or --las")
    if args.segy:
        with open(args.segy, "rb") as fh:
            raw = parse_segy(fh.read(),
                             TraceLayout(args.inline_byte, args.xline_byte))
        vol = volume_from_traces(raw)
        vol.attribute_name = args.attribute
        write_svol(args.out, vol)
        print(f"wrote {args.out}: {len(vol.inlines)}x{len(vol.xlines)}x"
              f"{vol.n_samples} at dt={vol.dt_ms} ms")
        return
    with open(args.las) as fh:
        log = parse_las(fh.read())
    with open(args.out, "w") as fh:
        fh.write(",".join(log.curve_names) + "\n")
        for row in log.rows:
            fh.write(",".join("" if np.isnan(v) else f"{v:.17g}" for v in row)
                     + "\n")
    print(f"wrote {args.out}: {log.rows.shape[0]} rows, "
          f"{len(log.curves)} curves")


def _cmd_synth(args):
    params = synthbench.SynthFieldParams(
        seed=args.seed, n_inlines=args.inlines, n_xlines=args.xlines,
        n_samples=args.samples, layer_count=args.layers,
        wavelet_center_freq_hz=args.wavelet_freq, noise_level=args.noise)
    field = synthbench.generate_field(params)
    os.makedirs(args.out, exist_ok=True)
    for name, vol in field.volumes.items():
        write_svol(os.path.join(args.out, f"{name}.svol"), vol)
    for well in field.wells:
        las_path = os.path.join(args.out, f"well_{well.well_id}.las")
        with open(las_path, "w") as fh:
            fh.write(write_las(synthbench.well_to_las(well)))
        vel_path = os.path.join(args.out, f"vel_{well.well_id}.csv")
        with open(vel_path, "w") as fh:
            fh.write(synthbench.velocity_csv(well.velocity))
    print(f"wrote benchmark field to {args.out} "
          f"({len(field.wells)} wells, seed {args.seed})")


def _well_configs(args):
    wells = []
    for spec in args.well:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"--well needs ID:las_path:velocity_csv, got {spec!r}")
        wells.append(pipeline.WellConfig(well_id=parts[0], las_path=parts[1],
                                         velocity_path=parts[2]))
    return wells


def _cmd_prep(args):
    volumes = {"imp": read_svol(args.imp), "amp": read_svol(args.amp),
               "freq": read_svol(args.freq)}
    wells = [pipeline.prepare_well(wc, volumes, args.dt)
             for wc in _well_configs(args)]
    pipeline.write_patterns_csv(args.out, wells)
    total = sum(len(w.sf) for w in wells)
    print(f"wrote {args.out}: {total} patterns from {len(wells)} wells at "
          f"dt={args.dt} ms")


def _cmd_metrics(args):
    wells = pipeline.read_patterns_csv(args.patterns)
    sep = "," if args.format == "csv" else "  "
    for w in wells:
        scored = {"impedance": w.imp, "amplitude": w.amp, "inst_frequency": w.freq}
        print(f"# entropy_bits well={w.well_id}")
        print(sep.join(["variable", "entropy_bits"]))
        for name, vals in scored.items():
            h = metrics.series_entropy(w.series(vals))
            print(sep.join([name, f"{h:.4f}"]))
        h = metrics.series_entropy(w.series(w.sf))
        print(sep.join(["sf", f"{h:.4f}"]))
        print(f"# nmi well={w.well_id}")
        print(sep.join(["predictor", "vs_sf"]))
        for name, vals in scored.items():
            print(sep.join([name, f"{metrics.nmi(vals, w.sf, args.bins):.4f}"]))


def _cmd_regularize(args):
    wells = pipeline.read_patterns_csv(args.patterns)
    params = pipeline.MethodParams(
        method=args.method, zeta_max_hz=args.zeta_max, wavelet=args.wavelet,
        wd_levels=args.levels,
        truncate_details=[int(v) for v in args.truncate.split(",") if v]
        if args.truncate else None,
        p1=args.p1, sd_threshold=args.sd, avg_span=args.span)
    reports = {}
    for w in wells:
        out, report = pipeline.regularize_target(
            w.series(w.sf), params, w.series(w.amp), args.gate_tol)
        w.sf = out.values
        reports[w.well_id] = report
    pipeline.write_patterns_csv(args.out, wells)
    with open(args.report, "w") as fh:
        json.dump(reports, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(f"wrote {args.out} and {args.report}")


def _cmd_emd_dump(args):
    wells = pipeline.read_patterns_csv(args.patterns)
    for w in wells:
        decomposition = emdreg.emd(w.series(w.sf),
                                   emdreg.SiftParams(sd_threshold=args.sd))
        path = os.path.join(args.out, f"emd_{w.well_id}.csv")
        names = [f"imf_{i + 1}" for i in range(len(decomposition))]
        with open(path, "w") as fh:
            fh.write("time_ms," + ",".join(names + ["residue"]) + "\n")
            cols = [imf.values for imf in decomposition.imfs]
            cols.append(decomposition.residue.values)
            for k, t in enumerate(w.times_ms):
                fh.write(f"{t:.17g}," + ",".join(f"{c[k]:.17g}" for c in cols) + "\n")
        print(f"wrote {path}: {len(decomposition)} IMFs + residue")


def _cmd_train(args):
    wells = pipeline.read_patterns_csv(args.patterns)
    raw_inputs = np.vstack([np.column_stack([w.imp, w.amp, w.freq]) for w in wells])
    inputs_scored, input_stats = resample.zscore(raw_inputs)
    raw_targets = np.concatenate([w.sf for w in wells])
    targets_norm, target_stats = resample.minmax_to_band(raw_targets)
    provenance = []
    for w in wells:
        provenance.extend((w.well_id, float(t)) for t in w.times_ms)
    patterns = resample.PatternSet(inputs=inputs_scored, targets=targets_norm,
                                   provenance=provenance)
    split = resample.split_patterns(patterns, seed=args.split_seed)
    model = mlp.init_model(3, args.hidden, seed=args.seed)
    trained, history = mlp.scg_train(
        model, split.train.inputs, split.train.targets,
        mlp.ScgParams(max_iters=args.max_iters, target_loss=args.target_loss))
    bundle = mlp.ModelBundle(model=trained, input_stats=input_stats,
                             target_stats=target_stats, seed=args.seed)
    mlp.save_model(args.out, bundle)

    def describe(ps):
        pred = target_stats.invert(mlp.forward_batch(trained, ps.inputs))
        report = metrics.evaluate(pred, target_stats.invert(ps.targets))
        return (f"cc={report.cc:.4f} rmse={report.rmse:.4f} "
                f"aem={report.aem:.4f} si={report.si:.4f}")

    print(f"trained {history.iterations} iterations "
          f"(stop: {history.stop_reason}, loss {history.final_loss:.3e})")
    print(f"test:       {describe(split.test)}")
    print(f"validation: {describe(split.validation)}")
    print(f"wrote {args.out}")


def _cmd_predict(args):
    paths = args.vol.split(",")
    if len(paths) != 3:
        raise ConfigError("--vol needs imp.svol,amp.svol,freq.svol")
    bundle = mlp.load_model(args.model)
    vols = [read_svol(p) for p in paths]
    out = volpost.predict_volume(bundle, vols)
    write_svol(args.out, out)
    print(f"wrote {args.out}")


def _cmd_filter(args):
    vol = read_svol(args.infile)
    out = volpost.median_filter_3d(vol, args.window)
    write_svol(args.out, out)
    print(f"wrote {args.out}")


def _cmd_slice(args):
    vol = read_svol(args.infile)
    csv = volpost.heatmap_csv(vol, args.inline)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(csv)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(csv)


def _cmd_run(args):
    with open(args.config) as fh:
        text = fh.read()
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    config = pipeline.parse_config(text, overrides)
    report, _, _ = pipeline.run_workflow(config)
    final = report.final
    pooled = final["validation_pooled"]
    print(f"method={final['method_params']['method']} "
          f"attempts={len(report.attempts)} "
          f"validation_cc={pooled['cc']:.4f} rmse={pooled['rmse']:.4f}")
    if config.outdir:
        print(f"outputs in {config.outdir}")
    else:
        sys.stdout.write(pipeline.report_tables(report))


def _cmd_report(args):
    with open(args.report) as fh:
        data = json.load(fh)
    report = pipeline.RunReport(config_text=data.get("config", ""),
                                attempts=data["attempts"],
                                chosen_attempt=data["chosen_attempt"],
                                model=data.get("model"))
    sys.stdout.write(pipeline.report_tables(report, fmt=args.format))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seisreg",
        description="Sand fraction from seismic attributes: preprocessing, "
                    "SCG-trained MLP, volume post-processing.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="SEG-Y to .svol, or LAS to CSV")
    p.add_argument("--segy", default="")
    p.add_argument("--las", default="")
    p.add_argument("--out", required=True)
    p.add_argument("--attribute", default="")
    p.add_argument("--inline-byte", type=int, default=189)
    p.add_argument("--xline-byte", type=int, default=193)
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("synth", help="generate the synthetic benchmark field")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--inlines", type=int, default=16)
    p.add_argument("--xlines", type=int, default=16)
    p.add_argument("--samples", type=int, default=116)
    p.add_argument("--layers", type=int, default=48)
    p.add_argument("--wavelet-freq", type=float, default=40.0)
    p.add_argument("--noise", type=float, default=0.02)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("prep", help="LAS + velocity + volumes to pattern CSV")
    p.add_argument("--imp", required=True)
    p.add_argument("--amp", required=True)
    p.add_argument("--freq", required=True)
    p.add_argument("--well", action="append", required=True,
                   metavar="ID:las:velocity_csv")
    p.add_argument("--dt", type=float, default=0.15)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_prep)

    p = sub.add_parser("metrics", help="entropy and NMI tables for a pattern CSV")
    p.add_argument("patterns")
    p.add_argument("--bins", type=int, default=16)
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("regularize", help="filter the target column of a pattern CSV")
    p.add_argument("patterns")
    p.add_argument("--method", choices=("none", "avg9", "ft", "wd", "emd"),
                   required=True)
    p.add_argument("--zeta-max", type=float, default=None, help="Hz (ft)")
    p.add_argument("--wavelet", default="db4")
    p.add_argument("--levels", type=int, default=6)
    p.add_argument("--truncate", default=None, help="e.g. 1,2,3,4,5 (wd)")
    p.add_argument("--p1", type=int, default=1, help="IMFs to suppress (emd)")
    p.add_argument("--sd", type=float, default=0.2, help="sift threshold (emd)")
    p.add_argument("--span", type=int, default=9, help="window (avg9)")
    p.add_argument("--gate-tol", type=float, default=0.05)
    p.add_argument("--out", required=True)
    p.add_argument("--report", required=True)
    p.set_defaults(func=_cmd_regularize)

    p = sub.add_parser("emd-dump", help="write each IMF and the residue as CSV")
    p.add_argument("patterns")
    p.add_argument("--sd", type=float, default=0.2)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_emd_dump)

    p = sub.add_parser("train", help="train the MLP on a pattern CSV")
    p.add_argument("patterns")
    p.add_argument("--hidden", type=int, default=10)
    p.add_argument("--max-iters", type=int, default=2000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--split-seed", type=int, default=7)
    p.add_argument("--target-loss", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="sweep a trained model over a volume")
    p.add_argument("--model", required=True)
    p.add_argument("--vol", required=True, metavar="imp.svol,amp.svol,freq.svol")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("filter", help="3-D median filter a .svol volume")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("slice", help="inline section as heatmap CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--inline", type=int, required=True)
    p.add_argument("--out", default="")
    p.set_defaults(func=_cmd_slice)

    p = sub.add_parser("run", help="full workflow from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--set", action="append", metavar="key=value",
                   help="override a config key")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("report", help="render tables from a report.json")
    p.add_argument("report")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except DivergenceError as exc:
        print(f"numeric divergence: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
