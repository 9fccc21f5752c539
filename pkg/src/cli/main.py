"""
Command-line driver

    python -m src.cli.main gen-data --degree 5 --scale 0.1 --output data/
    python -m src.cli.main train --train data/annsi_N5_gauss_train.bin --output models/annsi_N5.ckpt
    python -m src.cli.main simulate --case riemann4 --indicator annsi --annsi-checkpoint models/annsi_N5.ckpt
    python -m src.cli.main refine-plan --snapshot output/snapshot_00004.csv --annsl-checkpoint models/annsl_N5.ckpt

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
"""
import sys
from pathlib import Path
from typing import Optional, Sequence

import click
import numpy as np
import pandas as pd
import psutil

from src.cases.definitions import get_case, list_cases
from src.common.config import (
    init_config,
    load_datagen_config,
    load_indicator_config,
    load_run_config,
    load_train_config,
)
from src.common.exceptions import (
    CheckpointError,
    ConfigurationError,
    DatasetError,
    ShockCaptureError,
)
from src.common.logging import get_logger, setup_logging
from src.common.models import IndicatorKind, NodeFamily
from src.datagen.dataset import build_dataset, dataset_summary, read_dataset, write_dataset
from src.indicators import build_refine_plan, create_indicator, refinement_factors
from src.indicators.annsi import ShockLocalizer
from src.indicators.meshref import BASE, DEFAULT_THRESHOLDS
from src.ml.checkpoint import load_checkpoint, read_checkpoint, save_checkpoint
from src.ml.hednet import annsl_localize, build_network
from src.ml.trainer import Trainer
from src.numerics.basis import get_operators
from src.orchestration.simulation import Simulation
from src.orchestration.simulation_core import evaluate_indicators, snapshot_mesh
from src.solver.fvsubcell import switch_elements
from src.storage.file_storage import FileStorage, edge_map_frame, load_snapshot_file, write_refine_plan

USAGE_ERRORS = (ConfigurationError, CheckpointError, DatasetError)

logger = get_logger("cli")


def exit_code_for(error: BaseException) -> int:
    """1 for usage and configuration errors, 2 for runtime failures"""
    return 1 if isinstance(error, USAGE_ERRORS) else 2


def default_threads() -> int:
    return psutil.cpu_count(logical=False) or 1


class ShockGroup(click.Group):
    """Group that turns framework errors into exit codes"""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.show()
            ctx.exit(1)
        except ShockCaptureError as e:
            logger.error(f"{e.__class__.__name__}: {e}")
            click.echo(f"Error: {e}", err=True)
            ctx.exit(exit_code_for(e))


def threads_option(func):
    return click.option(
        '--threads', type=click.IntRange(min=1), default=None,
        help='Worker threads (default: physical core count)'
    )(func)


def resolve_threads(threads: Optional[int]) -> int:
    return threads if threads is not None else default_threads()


@click.group(cls=ShockGroup)
@click.option('--config', 'config_file', type=click.Path(dir_okay=False), default=None,
              help='YAML configuration file (default: config/local.yaml)')
@click.option('--env-file', type=click.Path(dir_okay=False), default=None, help='.env file')
@click.option('--log-level', default=None, help='DEBUG, INFO, WARNING, ERROR')
@click.option('--log-format', type=click.Choice(['text', 'json']), default=None)
@click.pass_context
def cli(ctx: click.Context, config_file, env_file, log_level, log_format):
    """DG/FV shock capturing with learned shock indicators"""
    config = init_config(config_file, env_file)
    setup_logging(
        level=log_level or config.get('logging.level', 'INFO'),
        log_file=config.get('logging.file'),
        format_type=log_format or config.get('logging.format', 'text'),
    )
    ctx.obj = config


# ============================================================
# Training data and network
# ============================================================

@cli.command('gen-data')
@click.option('--degree', type=int, default=None, help='Polynomial degree N')
@click.option('--node-family', type=click.Choice([f.value for f in NodeFamily]), default=None)
@click.option('--table', type=click.Choice(['annsi', 'annsl']), default=None,
              help='Per-family count table (default: annsi for gauss, annsl for equispaced)')
@click.option('--scale', type=float, default=None, help='Multiplier on the per-family counts')
@click.option('--seed', type=int, default=None)
@click.option('--epsilon', type=float, default=None, help='Labeling tolerance')
@click.option('--no-validation', is_flag=True, help='Skip the validation split')
@click.option('--output', 'output_dir', type=click.Path(file_okay=False), default='data', show_default=True)
@click.option('--prefix', default=None, help='File name prefix (default: <table>_N<degree>_<family>)')
@click.option('--progress', is_flag=True, help='Show progress bars')
@threads_option
@click.pass_obj
def gen_data(config, degree, node_family, table, scale, seed, epsilon, no_validation, output_dir, prefix,
             progress, threads):
    """Generate synthetic training and validation datasets"""
    if table is None and node_family == NodeFamily.EQUISPACED.value:
        table = 'annsl'
    settings = load_datagen_config(
        config,
        degree=degree,
        node_family=node_family,
        table=table,
        scale=scale,
        seed=seed,
        epsilon=epsilon,
        validation=False if no_validation else None,
    )
    threads = resolve_threads(threads)
    prefix = prefix or f"{settings.table}_N{settings.degree}_{settings.node_family.value}"
    output = Path(output_dir)

    train, validation = build_dataset(settings, threads=threads, progress=progress)
    written = [write_dataset(train, output / f"{prefix}_train.bin")]
    lines = [f"# training set: {len(train)} samples", dataset_summary(train).to_string()]
    if validation is not None:
        written.append(write_dataset(validation, output / f"{prefix}_val.bin"))
        lines += [f"# validation set: {len(validation)} samples", dataset_summary(validation).to_string()]

    summary_path = output / f"{prefix}_summary.txt"
    summary_path.write_text("\n".join(lines) + "\n")
    written.append(summary_path)
    click.echo("\n".join(lines))
    for path in written:
        click.echo(f"wrote {path}")


@cli.command()
@click.option('--train', 'train_path', type=click.Path(dir_okay=False), required=True, help='Training dataset')
@click.option('--validation', 'validation_path', type=click.Path(dir_okay=False), default=None)
@click.option('--output', type=click.Path(dir_okay=False), required=True, help='Checkpoint to write')
@click.option('--history', type=click.Path(dir_okay=False), default=None,
              help='Per-epoch CSV (default: <checkpoint>_history.csv)')
@click.option('--resume', type=click.Path(dir_okay=False), default=None,
              help='Checkpoint with optimizer state to continue from')
@click.option('--epochs', type=int, default=None)
@click.option('--batch-size', type=int, default=None)
@click.option('--learning-rate', type=float, default=None)
@click.option('--seed', type=int, default=None)
@click.option('--precision', type=click.Choice(['float32', 'float64']), default=None)
@click.option('--side-kernel', type=click.Choice(['1', '3']), default='1', show_default=True)
@click.option('--progress', is_flag=True)
@threads_option
@click.pass_obj
def train(config, train_path, validation_path, output, history, resume, epochs, batch_size, learning_rate, seed,
          precision, side_kernel, progress, threads):
    """Train a detection (gauss) or localization (equispaced) network"""
    settings = load_train_config(
        config,
        epochs=epochs,
        batch_size=batch_size,
        learning_rate=learning_rate,
        seed=seed,
        precision=precision,
    )
    dtype = np.float64 if settings.precision == "float64" else np.float32

    if resume:
        contents = read_checkpoint(resume)
        network = contents.network.astype(dtype)
        optimizer, start_epoch = contents.optimizer, contents.epoch
        if optimizer is None:
            raise CheckpointError(f"Checkpoint {resume} carries no optimizer state to resume from")
        train_set = read_dataset(train_path, network.degree, network.node_family)
    else:
        train_set = read_dataset(train_path)
        network = build_network(train_set.degree, settings.seed, train_set.node_family, int(side_kernel), dtype)
        optimizer, start_epoch = None, 0
    validation_set = None
    if validation_path:
        validation_set = read_dataset(validation_path, network.degree, network.node_family)

    trainer = Trainer(network, settings, optimizer, start_epoch, resolve_threads(threads), progress)
    records = trainer.train(train_set, validation_set)

    save_checkpoint(network, output, trainer.optimizer, trainer.epoch)
    history_path = Path(history) if history else Path(output).with_name(f"{Path(output).stem}_history.csv")
    trainer.save_history(history_path)
    last = records[-1]
    click.echo(f"epoch {last.epoch}: train_loss={last.train_loss:.6f} val_loss={last.val_loss:.6f} "
               f"val_f1={last.val_f1:.5f}")
    click.echo(f"wrote {output}")
    click.echo(f"wrote {history_path}")


@cli.command('eval')
@click.option('--checkpoint', type=click.Path(dir_okay=False), required=True)
@click.option('--dataset', 'dataset_paths', type=click.Path(dir_okay=False), multiple=True, required=True)
@click.option('--pixel-threshold', type=float, default=None)
@threads_option
@click.pass_obj
def evaluate(config, checkpoint, dataset_paths, pixel_threshold, threads):
    """Loss and pixel F1 of a checkpoint on one or more datasets"""
    settings = load_train_config(config, pixel_threshold=pixel_threshold)
    network = load_checkpoint(checkpoint)
    trainer = Trainer(network, settings, threads=resolve_threads(threads))
    rows = []
    for path in dataset_paths:
        dataset = read_dataset(path, network.degree, network.node_family)
        loss, f1 = trainer.evaluate(dataset)
        rows.append({'dataset': path, 'samples': len(dataset), 'loss': loss, 'f1': f1})
    click.echo(pd.DataFrame(rows).to_string(index=False))


# ============================================================
# Simulation
# ============================================================

def load_networks(settings, threads: int):
    """(ANNSI network or None, ShockLocalizer or None) for a run configuration"""
    network = None
    if settings.annsi_checkpoint:
        network = load_checkpoint(settings.annsi_checkpoint, settings.degree, NodeFamily.GAUSS)
    localizer = None
    if settings.annsl_checkpoint:
        localizer = ShockLocalizer(
            load_checkpoint(settings.annsl_checkpoint, settings.degree, NodeFamily.EQUISPACED),
            settings.degree,
            settings.indicator.pixel_threshold,
            threads,
            settings.annsl_all_elements,
        )
    return network, localizer


def run_simulation(settings, threads: int) -> Simulation:
    network, localizer = load_networks(settings, threads)
    case = get_case(settings.case, **settings.case_options)
    indicator = create_indicator(settings.indicator, settings.degree, network, threads)
    return (Simulation(settings)
            .with_case(case)
            .with_indicator(indicator)
            .with_localizer(localizer)
            .with_storage(FileStorage(settings.output_dir))
            .run())


@cli.command()
@click.option('--case', default=None, help=f"One of: {', '.join(list_cases())}")
@click.option('--degree', type=int, default=None)
@click.option('--mesh', type=(int, int), default=None, help='Element counts NX NY (single-block cases)')
@click.option('--refine', type=(int, int), default=None, help='Uniform refinement factors FX FY')
@click.option('--flux', type=click.Choice(['roe', 'hlle']), default=None)
@click.option('--indicator', type=click.Choice([k.value for k in IndicatorKind]), default=None)
@click.option('--variable', type=click.Choice(['density', 'pressure']), default=None)
@click.option('--upper', type=float, default=None, help='Switch-to-FV threshold')
@click.option('--lower', type=float, default=None, help='Switch-to-DG threshold')
@click.option('--annsi-checkpoint', type=click.Path(dir_okay=False), default=None)
@click.option('--annsl-checkpoint', type=click.Path(dir_okay=False), default=None)
@click.option('--annsl-all', is_flag=True, help='Localize every element, not only FV ones')
@click.option('--cfl', type=float, default=None)
@click.option('--t-end', type=float, default=None)
@click.option('--output-interval', type=float, default=None)
@click.option('--output-dir', type=click.Path(file_okay=False), default=None)
@click.option('--format', 'formats', type=click.Choice(['csv', 'vtk', 'parquet']), multiple=True)
@click.option('--max-steps', type=int, default=None)
@threads_option
@click.pass_obj
def simulate(config, case, degree, mesh, refine, flux, indicator, variable, upper, lower, annsi_checkpoint,
             annsl_checkpoint, annsl_all, cfl, t_end, output_interval, output_dir, formats, max_steps, threads):
    """Integrate a case ab initio and write snapshots"""
    threads = resolve_threads(threads)
    settings = load_run_config(
        config,
        case=case,
        degree=degree,
        mesh=mesh,
        mesh_refinement=refine,
        flux=flux,
        indicator={'kind': indicator, 'variable': variable, 'upper': upper, 'lower': lower},
        annsi_checkpoint=annsi_checkpoint,
        annsl_checkpoint=annsl_checkpoint,
        annsl_all_elements=annsl_all or None,
        cfl=cfl,
        t_end=t_end,
        output_interval=output_interval,
        output_dir=output_dir,
        output_formats=list(formats) or None,
        max_steps=max_steps,
        threads=threads,
    )
    simulation = run_simulation(settings, threads)
    stats = simulation.get_stats()
    click.echo(f"{stats['case']}: t={stats['final_time']:.6g} after {stats['steps']} steps, "
               f"{len(stats['snapshots'])} snapshot(s) in {settings.output_dir}, "
               f"max FV fraction {stats['max_fv_fraction']:.4f}")


# ============================================================
# Offline analysis
# ============================================================

@cli.command()
@click.option('--snapshot', type=click.Path(dir_okay=False), required=True, help='Any file of a snapshot')
@click.option('--indicator', 'kinds', type=click.Choice(['modal', 'jump', 'annsi', 'all']), multiple=True,
              help='Indicators to evaluate (default: all available)')
@click.option('--variable', type=click.Choice(['density', 'pressure']), default=None)
@click.option('--annsi-checkpoint', type=click.Path(dir_okay=False), default=None)
@click.option('--annsl-checkpoint', type=click.Path(dir_okay=False), default=None)
@click.option('--output', type=click.Path(dir_okay=False), default=None, help='Report CSV (default: stdout)')
@click.option('--edges', type=click.Path(dir_okay=False), default=None,
              help='Edge-map CSV of flagged elements (needs --annsl-checkpoint or annsi)')
@threads_option
@click.pass_obj
def indicate(config, snapshot, kinds, variable, annsi_checkpoint, annsl_checkpoint, output, edges, threads):
    """Evaluate indicators offline on a stored snapshot"""
    threads = resolve_threads(threads)
    stored = load_snapshot_file(snapshot)
    state = stored.state
    degree = state.degree

    kinds = set(kinds) or {'all'}
    if 'all' in kinds:
        kinds = {'modal', 'jump'} | ({'annsi'} if annsi_checkpoint else set())
    if 'annsi' in kinds and not annsi_checkpoint:
        raise ConfigurationError("indicator 'annsi' requires --annsi-checkpoint")

    network = load_checkpoint(annsi_checkpoint, degree, NodeFamily.GAUSS) if 'annsi' in kinds else None
    indicators = [
        create_indicator(load_indicator_config(config, kind=kind, variable=variable), degree, network, threads)
        for kind in ('modal', 'jump', 'annsi') if kind in kinds
    ]
    report = evaluate_indicators(state, indicators, logger)

    if output:
        report.to_csv(output, index=False)
        click.echo(f"wrote {output}")
    else:
        click.echo(report.to_csv(index=False), nl=False)

    if edges:
        edge_maps = {}
        flagged = report['annsi_flag'].to_numpy() if 'annsi_flag' in report else state.flags
        if annsl_checkpoint:
            localizer = ShockLocalizer(
                load_checkpoint(annsl_checkpoint, degree, NodeFamily.EQUISPACED), degree, threads=threads
            )
            elements, maps = localizer.localize(switch_elements(state, flagged, get_operators(degree)))
            edge_maps = {int(e): m for e, m in zip(elements, maps)}
        elif network is not None:
            annsi = indicators[-1]
            edge_maps = {int(e): annsi.last_edge_maps[e] for e in np.nonzero(flagged)[0]}
        else:
            raise ConfigurationError("--edges needs --annsl-checkpoint or the annsi indicator")
        Path(edges).parent.mkdir(parents=True, exist_ok=True)
        edge_map_frame(edge_maps).to_csv(edges, index=False)
        click.echo(f"wrote {edges} ({len(edge_maps)} element(s))")


@cli.command('refine-plan')
@click.option('--snapshot', type=click.Path(dir_okay=False), required=True)
@click.option('--annsl-checkpoint', type=click.Path(dir_okay=False), default=None)
@click.option('--thresholds', type=(float, float), default=None, help='First and second pass thresholds')
@click.option('--base', type=float, default=None, help='Line weight base')
@click.option('--all-elements', is_flag=True, help='Localize every element, not only FV ones')
@click.option('--output', type=click.Path(dir_okay=False), default=None,
              help='Plan file (default: <snapshot>_refine.txt)')
@click.option('--rerun', is_flag=True, help='Re-run the case on the conforming refined mesh')
@click.option('--rerun-dir', type=click.Path(file_okay=False), default=None)
@click.option('--annsi-checkpoint', type=click.Path(dir_okay=False), default=None,
              help='Detection network for a re-run with the annsi indicator')
@threads_option
@click.pass_obj
def refine_plan(config, snapshot, annsl_checkpoint, thresholds, base, all_elements, output, rerun, rerun_dir,
                annsi_checkpoint, threads):
    """Two-pass anisotropic refinement plan from localized edge maps"""
    if not annsl_checkpoint:
        raise ConfigurationError("refine-plan requires --annsl-checkpoint")
    threads = resolve_threads(threads)
    thresholds = thresholds or tuple(config.get('refinement.thresholds', DEFAULT_THRESHOLDS))
    base = base if base is not None else config.get_float('refinement.base', BASE)

    stored = load_snapshot_file(snapshot)
    state = stored.state
    degree = state.degree
    network = load_checkpoint(annsl_checkpoint, degree, NodeFamily.EQUISPACED)
    mesh = snapshot_mesh(stored)

    localizer = ShockLocalizer(network, degree, threads=threads, all_elements=all_elements)
    elements, maps = localizer.localize(state)
    edge_maps = np.zeros(state.fields.shape[:3], dtype=np.uint8)
    edge_maps[elements] = maps
    _, density = ShockLocalizer(network, degree, threads=threads, all_elements=True).subcell_density(state)

    def localize(fields):
        return annsl_localize(fields, network, threads=threads)

    plan = build_refine_plan(edge_maps, density, mesh, thresholds, base, localize)
    snapshot_path = Path(snapshot)
    output = Path(output) if output else snapshot_path.with_name(f"{snapshot_path.name.split('.')[0]}_refine.txt")
    write_refine_plan(plan, output)
    click.echo(f"{len(plan.split_elements())} element(s) split, levels {plan.max_levels()}")
    click.echo(f"wrote {output}")

    if rerun:
        if plan.is_empty():
            click.echo("empty plan: nothing to re-run")
            return
        factor_x, factor_y = refinement_factors(plan)
        run = stored.metadata.get('custom_metadata', {}) or {}
        refinement = run.get('mesh_refinement') or [1, 1]
        settings = load_run_config(
            config,
            case=stored.case,
            case_options=run.get('case_options') or None,
            degree=degree,
            mesh=tuple(run['mesh']) if run.get('mesh') else None,
            mesh_refinement=(refinement[0] * factor_x, refinement[1] * factor_y),
            indicator={'kind': run.get('indicator')},
            annsi_checkpoint=annsi_checkpoint,
            output_dir=rerun_dir or str(snapshot_path.parent / "rerun"),
            threads=threads,
        )
        simulation = run_simulation(settings, threads)
        click.echo(f"re-run on {factor_x}x{factor_y} refined mesh: t={simulation.result.final_time:.6g}, "
                   f"{len(simulation.result.snapshots)} snapshot(s) in {settings.output_dir}")


@cli.command()
@click.option('--case', default=None, help='Describe one case')
@click.option('--checkpoint', type=click.Path(dir_okay=False), default=None, help='Describe a checkpoint')
@click.option('--dataset', type=click.Path(dir_okay=False), default=None, help='Describe a dataset')
@click.option('--degree', type=int, default=5, show_default=True, help='Degree for the network summary')
@click.pass_obj
def describe(config, case, checkpoint, dataset, degree):
    """Cases, network size and file contents"""
    if case:
        spec = get_case(case)
        mesh = spec.build_mesh()
        click.echo(f"{spec.name}: {spec.description}")
        click.echo(f"  domain {spec.domain}, {mesh.n_elements} elements {spec.default_elements}, "
                   f"t_end {spec.t_end:g}, flux {spec.flux.value}")
        click.echo(f"  boundaries: {', '.join(sorted(spec.boundaries))}")
    elif checkpoint:
        contents = read_checkpoint(checkpoint)
        network = contents.network
        click.echo(f"{checkpoint}: N={network.degree}, {network.node_family.value} nodes, "
                   f"side kernel {network.side_kernel}, {network.n_parameters()} parameters, "
                   f"epoch {contents.epoch}, optimizer {'yes' if contents.optimizer else 'no'}")
    elif dataset:
        samples = read_dataset(dataset)
        click.echo(f"{dataset}: {len(samples)} samples, N={samples.degree}, {samples.node_family.value} nodes")
        click.echo(dataset_summary(samples).to_string())
    else:
        click.echo("cases: " + ", ".join(list_cases()))
        for side_kernel in (1, 3):
            network = build_network(degree, side_kernel=side_kernel)
            click.echo(f"network N={degree}, side kernel {side_kernel}: {network.n_parameters()} parameters")
        click.echo(f"default threads: {default_threads()}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Console entry point returning the process exit code"""
    try:
        result = cli.main(args=list(argv) if argv is not None else None, standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return 1
    except click.Abort:
        return 1
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(main())
