"""Command-line front end chaining synth -> map -> evaluate -> sweep.

Stages communicate through JSON artifacts so each step can be rerun and
inspected independently. All randomness is seed-derived and recorded in
the output; identical commands produce byte-identical files.
"""

from __future__ import annotations

import json
import os
import sys
import tempfile

import click

from . import __version__, evaluate, partition
from .bench import BenchError, BooleanNetwork, load_bench
from .devices import DeviceParams, write_sim_trials
from .mapping import MappingConfig, MappingInfeasible, map_design, summary
from .synthesis import synthesize_tln, verify_equivalence
from .tlg import ThresholdLogicNetwork

EXIT_INPUT = 1
EXIT_EQUIV = 2
EXIT_CAPACITY = 3
EXIT_MISMATCH = 4
EXIT_TIMING = 5

PARAMS_ENV = "SMTL_PARAMS"


def _atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".smtl-")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _dump(obj):
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _load_params(path):
    path = path or os.environ.get(PARAMS_ENV)
    try:
        return DeviceParams.load(path)
    except (OSError, ValueError, TypeError, KeyError,
            json.JSONDecodeError) as e:
        raise click.ClickException(f"bad device parameters: {e}")


def _fail(code, message):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
@click.version_option(__version__)
def main():
    """Threshold-logic synthesis and crossbar hardware mapping toolchain."""


@main.command()
@click.option("--bench", "bench_path", required=True,
              type=click.Path(exists=False), help="ISCAS85 .bench netlist")
@click.option("--fanin", default=4, show_default=True,
              help="fan-in limit for threshold gates (2..4)")
@click.option("--wmax", default=6, show_default=True,
              help="number of conductance levels / max |weight|")
@click.option("-o", "--output", default="tln.json", show_default=True)
def synth(bench_path, fanin, wmax, output):
    """Compile a gate netlist into a threshold logic network."""
    if not 2 <= fanin <= 4:
        _fail(EXIT_INPUT, "fan-in limit must be between 2 and 4")
    try:
        net = load_bench(bench_path)
    except (OSError, BenchError) as e:
        _fail(EXIT_INPUT, str(e))
    tln = synthesize_tln(net, fanin_limit=fanin, w_max=wmax)
    n_inputs = len(net.inputs)
    if n_inputs <= 20:
        ok, ce = verify_equivalence(net, tln, "exhaustive")
    else:
        ok, ce = verify_equivalence(net, tln, "sampled", count=10_000, seed=0)
    if not ok:
        _fail(EXIT_EQUIV, f"synthesized network is not equivalent: {ce}")
    doc = {"tln": tln.to_json(), "source": net.to_json(),
           "fanin_limit": fanin, "w_max": wmax}
    _atomic_write(output, _dump(doc))
    click.echo(
        f"nodes={len(tln.nodes)} levels={tln.depth()} "
        f"max_fanin={tln.max_fan_in()} -> {output}"
    )


def _load_tln(path):
    try:
        with open(path) as f:
            doc = json.load(f)
        return (ThresholdLogicNetwork.from_json(doc["tln"]),
                BooleanNetwork.from_json(doc["source"]), doc)
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as e:
        _fail(EXIT_INPUT, f"bad TLN file {path}: {e}")


@main.command("map")
@click.option("--tln", "tln_path", required=True, type=click.Path())
@click.option("--levels-per-stage", "k", default=2, show_default=True,
              help="MCA logic levels per pipeline stage")
@click.option("--blocks", default=None, type=int,
              help="blocks per stage (default: as many as needed)")
@click.option("--rows", default=64, show_default=True)
@click.option("--cols", default=32, show_default=True)
@click.option("--subarray", default=None,
              help="sub-array dims RxC for partitioning (default rows x cols)")
@click.option("--fmax", default=8, show_default=True, help="fan-out bound")
@click.option("-o", "--output", default="mapped.json", show_default=True)
def map_cmd(tln_path, k, blocks, rows, cols, subarray, fmax, output):
    """Map a threshold network onto pipelined crossbar blocks."""
    tln, net, doc = _load_tln(tln_path)
    if subarray:
        try:
            rows, cols = (int(v) for v in subarray.lower().split("x"))
        except ValueError:
            _fail(EXIT_INPUT, f"bad --subarray {subarray!r}, expected RxC")
    cfg = MappingConfig(k=k, rows=rows, cols=cols, blocks_per_stage=blocks,
                        f_max=fmax)
    try:
        design = map_design(tln, net, cfg,
                            fanin_limit=doc.get("fanin_limit", 4),
                            w_max=doc.get("w_max", 6))
    except (MappingInfeasible, partition.PartitionInfeasible) as e:
        _fail(EXIT_CAPACITY, str(e))
    _atomic_write(output, _dump(design.to_json()))
    s = summary(design)
    click.echo(
        f"stages={s['stages']} nodes={s['nodes']} buffers={s['buffers']} "
        f"direct={s['direct_links']} routed={s['routed_links']} "
        f"backward={s['backward_links']} -> {output}"
    )
    for w in s["warnings"]:
        click.echo(f"warning: {w}", err=True)


def _load_design(path):
    from .mapping import MappedDesign

    try:
        with open(path) as f:
            return MappedDesign.from_json(json.load(f))
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as e:
        _fail(EXIT_INPUT, f"bad mapped design {path}: {e}")


@main.command("evaluate")
@click.option("--mapped", "mapped_path", required=True, type=click.Path())
@click.option("--params", "params_path", default=None,
              help=f"device parameter JSON (default: packaged Table I, "
                   f"override with ${PARAMS_ENV})")
@click.option("--sigma", default=0.0, show_default=True,
              help="relative conductance std-dev")
@click.option("--vectors", default=10_000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--report", "report_path", default="report.json",
              show_default=True)
@click.option("--baseline-energy", default=None, type=float,
              help="external baseline energy (J) for ratio reporting")
@click.option("--baseline-delay", default=None, type=float,
              help="external baseline delay (s) for ratio reporting")
def evaluate_cmd(mapped_path, params_path, sigma, vectors, seed, report_path,
                 baseline_energy, baseline_delay):
    """Simulate under variation and report power/delay/area."""
    design = _load_design(mapped_path)
    params = _load_params(params_path)
    try:
        rep = evaluate.full_report(design, params, sigma=sigma,
                                   vectors=vectors, seed=seed)
    except evaluate.TimingViolation as e:
        _fail(EXIT_TIMING, str(e))
    if baseline_energy is not None and baseline_delay is not None:
        rep["baseline"] = evaluate.baseline_ratios(
            rep, baseline_energy, baseline_delay
        )
    if sigma == 0.0 and rep["errors"]:
        _atomic_write(report_path, _dump(rep))
        _fail(EXIT_MISMATCH,
              f"{rep['errors']} functional errors at sigma=0 "
              f"(report in {report_path})")
    _atomic_write(report_path, _dump(rep))
    click.echo(
        f"errors={rep['errors']}/{rep['vectors']} "
        f"P_total={rep['power']['p_total'] * 1e6:.2f}uW "
        f"latency={rep['delay']['latency'] * 1e9:.1f}ns "
        f"energy={rep['energy'] * 1e12:.3f}pJ -> {report_path}"
    )


@main.command("sweep")
@click.option("--mapped", "mapped_path", required=True, type=click.Path())
@click.option("--tln", "tln_path", default=None,
              help="synthesized TLN (required for --param k)")
@click.option("--params", "params_path", default=None)
@click.option("--param", "parameter", required=True,
              type=click.Choice(["dv", "i_threshold", "k", "subarray_dim"]))
@click.option("--grid", required=True,
              help="comma-separated values; dv in mV, i_threshold in uA")
@click.option("-o", "--output", default="sweep.csv", show_default=True)
def sweep_cmd(mapped_path, tln_path, params_path, parameter, grid, output):
    """Evaluate the design across a parameter grid; writes CSV."""
    design = _load_design(mapped_path)
    params = _load_params(params_path)
    try:
        values = [float(v) for v in grid.split(",") if v.strip()]
    except ValueError:
        _fail(EXIT_INPUT, f"bad grid {grid!r}")
    if not values:
        _fail(EXIT_INPUT, "empty sweep grid")
    if parameter == "dv":
        values = [v * 1e-3 for v in values]
    elif parameter == "i_threshold":
        values = [v * 1e-6 for v in values]
    source_tln = None
    if parameter == "k":
        if tln_path is None:
            _fail(EXIT_INPUT, "--param k requires --tln")
        source_tln, _, _ = _load_tln(tln_path)
    try:
        rows = evaluate.sweep(design, params, parameter, values,
                              source_tln=source_tln)
    except evaluate.TimingViolation as e:
        _fail(EXIT_TIMING, str(e))
    _atomic_write(output, evaluate.sweep_csv(rows))
    click.echo(f"{len(rows)} rows -> {output}")


@main.command("write-sim")
@click.option("--bits", default="4,6,8", show_default=True,
              help="comparator resolutions to simulate")
@click.option("--iprog", default=10.0, show_default=True,
              help="programming current in uA")
@click.option("--trials", default=200, show_default=True)
@click.option("--tmax", default=20.0, show_default=True,
              help="write timeout in us")
@click.option("--seed", default=0, show_default=True)
@click.option("--params", "params_path", default=None)
@click.option("-o", "--output", default="write_sim.csv", show_default=True)
def write_sim_cmd(bits, iprog, trials, tmax, seed, params_path, output):
    """Monte-Carlo the feedback write loop over comparator resolutions."""
    params = _load_params(params_path)
    try:
        bit_list = [int(b) for b in bits.split(",") if b.strip()]
    except ValueError:
        _fail(EXIT_INPUT, f"bad --bits {bits!r}")
    if not bit_list:
        _fail(EXIT_INPUT, "empty --bits grid")
    rows = []
    for b in bit_list:
        r = write_sim_trials(b, iprog * 1e-6, params, trials=trials,
                             t_max=tmax * 1e-6, seed=seed)
        rows.append({
            "bits": b,
            "i_prog_uA": iprog,
            "t_max_us": tmax,
            "trials": trials,
            "seed": seed,
            "mean_error": r["mean_error"],
            "p95_error": r["p95_error"],
        })
        click.echo(f"bits={b} mean_error={r['mean_error']:.4f} "
                   f"p95={r['p95_error']:.4f}")
    _atomic_write(output, evaluate.sweep_csv(rows))


if __name__ == "__main__":
    main()
