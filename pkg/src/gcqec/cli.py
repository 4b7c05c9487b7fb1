"""Command-line harness: compile, labels, encode, ec-cycle, sweep."""
from __future__ import annotations

import csv
from pathlib import Path

import click
import numpy as np

from . import __version__, codes, compiler, labels, orchestrator, qsim
from .core import load_config

CODE_CHOICE = click.Choice(["steane", "shor"])

NAMED_STATES = {
    "0": (1, 0),
    "1": (0, 1),
    "+": (2 ** -0.5, 2 ** -0.5),
    "-": (2 ** -0.5, -(2 ** -0.5)),
}


def _metadata(**fields) -> str:
    items = " ".join(f"{k}={v}" for k, v in fields.items())
    return f"# {items} version={__version__}\n"


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="YAML file with layout, cost_model and noise sections.")
@click.pass_context
def main(ctx: click.Context, config_path: str | None):
    """Globally controlled error-correction toolkit."""
    ctx.obj = load_config(config_path)


@main.command("compile")
@click.option("--code", "code_name", type=click.Choice(["steane", "shor", "both"]), default="both")
@click.option("--phase", type=click.Choice(["encode", "ec", "both"]), default="both")
@click.option("--cost-model", type=click.Path(exists=True, dir_okay=False),
              help="YAML config whose cost_model section overrides the defaults.")
@click.option("--out", type=click.Path(dir_okay=False), help="JSON report; a CSV breakdown is written beside it.")
@click.pass_obj
def compile_cmd(config, code_name, phase, cost_model, out):
    """Compile encoder and EC circuits to pulse counts."""
    model = load_config(cost_model).cost_model if cost_model else config.cost_model
    names = ["steane", "shor"] if code_name == "both" else [code_name]
    reports = {n: compiler.compile_code(codes.get_code(n), model, phase) for n in names}
    click.echo(compiler.format_table(reports))
    if out:
        path = Path(out)
        path.write_text(compiler.report_json(reports))
        path.with_suffix(".csv").write_text(compiler.report_csv(reports))
        click.echo(f"wrote {path} and {path.with_suffix('.csv')}")


def _build_plan(mode: str, p: int, L: int, num_ss: int):
    if mode == "hierarchy":
        return labels.hierarchy_labels(p, L, num_ss)
    if mode == "supercu":
        return labels.supercu_labels(p, L, num_ss)
    if mode == "composite":
        return labels.composite_labels(labels.hierarchy_labels(p, L, num_ss),
                                       labels.supercu_labels(max(p, 2), L, num_ss))
    hier = labels.hierarchy_labels(p, L, num_ss)
    return labels.explicit_per_level_labels(p, [hier.active(b) for b in range(p)])


@main.command("labels")
@click.option("--mode", type=click.Choice(["hierarchy", "supercu", "composite", "explicit"]),
              default="hierarchy")
@click.option("--p", "p", type=int, default=3, show_default=True)
@click.option("--L", "L", type=int, default=16, show_default=True)
@click.option("--num-ss", type=int, default=None, help="Stations (default L**(p-1)).")
@click.option("--level", type=int, default=0, show_default=True)
@click.option("--half", type=click.Choice(["a", "b"]), default="a",
              help="Composite mode: hierarchy half (a) or super-CU half (b).")
@click.option("--out", type=click.Path(dir_okay=False))
def labels_cmd(mode, p, L, num_ss, level, half, out):
    """Station labels and their activation at one level."""
    num_ss = num_ss or L ** max(p - 1, 1)
    plan = _build_plan(mode, p, L, num_ss)
    if mode == "composite":
        active = plan.active(level, half)
        values = [f"{a}|{b}" for a, b in plan.labels]
    elif mode == "explicit":
        active = plan.active(level)
        values = ["".join(map(str, row)) for row in plan.bits]
    else:
        active = plan.active(level)
        values = list(plan.labels)
    rows = [(i, v, int(on)) for i, (v, on) in enumerate(zip(values, active), start=1)]
    click.echo(f"{sum(active)} of {num_ss} stations active at level {level}")
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(_metadata(mode=mode, p=p, L=L, level=level))
            w = csv.writer(fh)
            w.writerow(["index", "label", f"active_at_level_{level}"])
            w.writerows(rows)
        click.echo(f"wrote {out}")


@main.command("encode")
@click.option("--code", "code_name", type=CODE_CHOICE, default="steane")
@click.option("--state", "state_name", default="random", show_default=True,
              help="0, 1, +, - or random.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), help="Dump the block's amplitudes.")
def encode_cmd(code_name, state_name, seed, out):
    """Encode one logical qubit and check it against the codeword oracle."""
    code = codes.get_code(code_name)
    rng = np.random.default_rng(seed)
    if state_name == "random":
        psi = qsim.random_qubit(rng)
    elif state_name in NAMED_STATES:
        psi = np.array(NAMED_STATES[state_name], dtype=complex)
    else:
        raise click.BadParameter(f"unknown state {state_name!r}", param_hint="--state")
    state = codes.encoded_state(code, psi, seed=rng)
    click.echo(f"{code.name}: {state.n_qubits} qubits, fidelity with codeword "
               f"{codes.logical_fidelity(code, state, psi):.12f}")
    if out:
        state.dump(out)
        click.echo(f"wrote {out}")


@main.command("ec-cycle")
@click.option("--code", "code_name", type=CODE_CHOICE, default="steane")
@click.option("--blocks", type=int, default=4, show_default=True)
@click.option("--cycles", type=int, default=1, show_default=True)
@click.option("--level", type=int, default=0, show_default=True)
@click.option("--p", "levels", type=int, default=2, show_default=True, help="Label levels parameter.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), help="Per-cycle CSV report.")
@click.pass_obj
def ec_cycle_cmd(config, code_name, blocks, cycles, level, levels, seed, out):
    """Run full machine cycles with the configured noise."""
    noise = orchestrator.NoiseModel(config.noise.p_x, config.noise.p_y, config.noise.p_z,
                                    config.noise.granularity)
    ss_cells = config.layout.get("ss_cells", 10)
    state = orchestrator.DeviceState.create(code_name, blocks, p=levels, seed=seed,
                                            cost_model=config.cost_model, ss_cells=ss_cells,
                                            algorithm_budget=config.algorithm_budget)
    rows = []
    for k in range(cycles):
        state, rep = orchestrator.run_cycle(state, level, noise=noise)
        errs = sum(len(e) for e in rep.injected)
        rows.append((k, rep.ec_pulses, rep.transition_pulses, rep.algorithm_pulses,
                     rep.reactivation_pulses, len(rep.active_blocks), errs, min(rep.fidelities)))
        click.echo(f"cycle {k}: {rep.total_pulses} pulses, {len(rep.active_blocks)} active in "
                   f"algorithm phase, {errs} errors, min fidelity {min(rep.fidelities):.6f}")
    click.echo(f"ledger: {state.pulse_ledger}")
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(_metadata(seed=seed, code=code_name, blocks=blocks))
            w = csv.writer(fh)
            w.writerow(["cycle", "ec", "transition", "algorithm", "reactivation",
                        "active_blocks", "injected_errors", "min_fidelity"])
            w.writerows(rows)
        click.echo(f"wrote {out}")


@main.command("sweep")
@click.option("--code", "code_name", type=CODE_CHOICE, default="steane")
@click.option("--rates", default="0.001,0.003,0.01", show_default=True,
              help="Comma-separated physical error rates.")
@click.option("--trials", type=int, default=100_000, show_default=True)
@click.option("--cycles", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--engine", type=click.Choice(["frame", "statevector"]), default="frame")
@click.option("--out", type=click.Path(dir_okay=False))
def sweep_cmd(code_name, rates, trials, cycles, seed, engine, out):
    """Logical error rate against physical rate."""
    try:
        rate_list = [float(r) for r in rates.split(",") if r.strip()]
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--rates") from exc
    rows = orchestrator.monte_carlo_sweep(code_name, rate_list, cycles, trials, seed, engine)
    for r in rows:
        click.echo(f"p={r.rate:g}  P_L={r.logical_error_rate:.3e} +/- {r.stderr:.1e}  ({r.failures}/{r.trials})")
    try:
        click.echo(f"log-log slope {orchestrator.fit_loglog_slope(rows):.3f}")
    except ValueError:
        click.echo("too few failures to fit a slope")
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(_metadata(seed=seed, code=code_name, cycles=cycles, engine=engine))
            w = csv.writer(fh)
            w.writerow(["rate", "trials", "failures", "logical_error_rate", "stderr"])
            for r in rows:
                w.writerow([r.rate, r.trials, r.failures, r.logical_error_rate, r.stderr])
        click.echo(f"wrote {out}")


if __name__ == "__main__":
    main()
