"""
Module that contains the command line app.

Why does this file exist, and why not put this in __main__?

  You might be tempted to import things from __main__ later, but that will
  cause problems: the code will get executed twice:

  - When you run `python -mdetection_calibration` python will execute
    ``__main__.py`` as a script. That means there won't be any
    ``detection_calibration.__main__`` in ``sys.modules``.
  - When you import __main__ it will get executed again (as a module)
    because there's no ``detection_calibration.__main__`` in
    ``sys.modules``.

  Also see (1) from http://click.pocoo.org/5/setuptools/#setuptools-integration

Exit codes: 0 on success, 2 on invalid input (files, flags, configuration)
and 1 on any other error.
"""
import functools
import json
from pathlib import Path

import click

from detection_calibration.calibrators.pipeline import (
    CalibrationObjective,
    CalibrationPipeline,
)
from detection_calibration.calibrators.utils import (
    CALIBRATOR_KINDS,
    LAECE0,
    OBJECTIVES,
)
from detection_calibration.data.coco import (
    to_coco_ground_truth,
    to_coco_results,
)
from detection_calibration.manager import EvaluationManager
from detection_calibration.matching.matching import EvalConfig
from detection_calibration.measures.utils import LA_ECE0
from detection_calibration.utils.data_grabber import DataGrabber
from detection_calibration.utils.exceptions import DatasetValidationError
from detection_calibration.utils.messages import AUTO_THRESHOLD_REQUIRES_VAL
from detection_calibration.utils.utils import (
    dumps_csv,
    dumps_json,
    write_json,
)

#: Exit code of invalid input
INPUT_ERROR = 2
#: Exit code of any other failure
INTERNAL_ERROR = 1

#: Files written by ``detcal split``
SPLIT_FILES = {
    "val": ("val_gt.json", "val_dets.json"),
    "test": ("test_gt.json", "test_dets.json"),
}

INPUT_FILE = click.Path(exists=True, dir_okay=False, path_type=Path)
OUTPUT_FILE = click.Path(dir_okay=False, path_type=Path)


def _root_settings() -> dict:
    return click.get_current_context().find_root().obj or {}


def _report_error(error: Exception, message: str, exit_code: int) -> None:
    if _root_settings().get("json_errors"):
        payload = {
            "error": type(error).__name__,
            "message": message,
            "exit_code": exit_code,
        }
        click.echo(json.dumps(payload), err=True)
    else:
        click.echo(f"Error: {message}", err=True)
    click.get_current_context().exit(exit_code)


def handle_errors(command):
    """
    Map exceptions raised by a command to exit codes and diagnostic
    messages.
    """

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except click.exceptions.Exit:
            raise
        except click.ClickException as error:
            if not _root_settings().get("json_errors"):
                raise
            _report_error(error, error.format_message(), error.exit_code)
        except DatasetValidationError as error:
            _report_error(error, str(error), INPUT_ERROR)
        except Exception as error:
            _report_error(error, str(error), INTERNAL_ERROR)

    return wrapper


def load_config(config_file: Path = None, **overrides) -> EvalConfig:
    """
    The evaluation configuration: packaged defaults, then *config_file*,
    then command-line flags.
    """
    try:
        return EvalConfig.from_file(config_file, **overrides)
    except DatasetValidationError:
        raise
    except (TypeError, ValueError) as error:
        raise click.UsageError(str(error))


def emit(text: str, out: Path = None) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")


def emit_table(frame, out: Path, output_format: str) -> None:
    if output_format == "json":
        emit(dumps_json(frame.to_dict(orient="records")), out)
    else:
        emit(dumps_csv(frame), out)


def input_options(command):
    command = click.option(
        "--dets",
        "detections",
        type=INPUT_FILE,
        required=True,
        help="COCO results file with the detections.",
    )(command)
    return click.option(
        "--gt",
        "ground_truth",
        type=INPUT_FILE,
        required=True,
        help="COCO annotation file with the ground truth.",
    )(command)


def config_options(command):
    options = [
        click.option(
            "--config",
            "config_file",
            type=INPUT_FILE,
            help="JSON file overriding the default configuration.",
        ),
        click.option(
            "--tau",
            type=click.FloatRange(0, 1, max_open=True),
            help="TP-validation IoU of LRP and the proposed measures.",
        ),
        click.option(
            "--legacy-tau",
            type=click.FloatRange(0, 1, min_open=True, max_open=True),
            help="TP-validation IoU of AP, D-ECE and LaECE.",
        ),
        click.option(
            "--bins",
            type=click.IntRange(min=1),
            help="Number of bins of LaECE and LaECE0.",
        ),
        click.option(
            "--dece-bins",
            type=click.IntRange(min=1),
            help="Number of bins of D-ECE.",
        ),
        click.option(
            "--top-k",
            type=click.IntRange(min=1),
            help="Detections kept per image.",
        ),
    ]
    for option in reversed(options):
        command = option(command)
    return command


@click.group()
@click.option(
    "--json-errors",
    is_flag=True,
    help="Report errors as JSON on stderr.",
)
@click.option("--progress", is_flag=True, help="Display progress bars.")
@click.version_option(package_name="detection_calibration")
@click.pass_context
def main(ctx, json_errors: bool = False, progress: bool = False):
    """
    Joint accuracy and calibration evaluation of object detectors.
    """
    ctx.obj = {"json_errors": json_errors, "progress": progress}


@main.command()
@input_options
@config_options
@click.option(
    "--auto-threshold",
    is_flag=True,
    help="Apply LRP-optimal thresholds obtained on the validation set.",
)
@click.option("--val-gt", type=INPUT_FILE, help="Validation ground truth.")
@click.option("--val-dets", type=INPUT_FILE, help="Validation detections.")
@click.option(
    "--kernel-ce",
    "kernel",
    is_flag=True,
    help="Include the kernel calibration error.",
)
@click.option(
    "--coco-d-ece",
    "coco",
    is_flag=True,
    help="Include the D-ECE averaged over the configured coco_taus.",
)
@click.option("--out", type=OUTPUT_FILE, help="Output file (default stdout).")
@click.option(
    "--format",
    "output_format",
    type=click.Choice(["json", "csv"]),
    default="json",
    show_default=True,
    help="Full report (json) or per-class table (csv).",
)
@handle_errors
def evaluate(
    ground_truth: Path,
    detections: Path,
    config_file: Path = None,
    tau: float = None,
    legacy_tau: float = None,
    bins: int = None,
    dece_bins: int = None,
    top_k: int = None,
    auto_threshold: bool = False,
    val_gt: Path = None,
    val_dets: Path = None,
    kernel: bool = False,
    coco: bool = False,
    out: Path = None,
    output_format: str = "json",
):
    """
    Report LRP, AP and the calibration errors of a detection set.
    """
    if auto_threshold and not (val_gt and val_dets):
        raise click.UsageError(AUTO_THRESHOLD_REQUIRES_VAL)
    config = load_config(
        config_file,
        tau=tau,
        legacy_tau=legacy_tau,
        bins=bins,
        dece_bins=dece_bins,
        top_k=top_k,
    )
    manager = EvaluationManager(ground_truth, detections, config)
    thresholds = None
    if auto_threshold:
        validation = EvaluationManager(val_gt, val_dets, config)
        thresholds = validation.optimal_thresholds(
            progress=_root_settings().get("progress", False)
        )
    report = manager.evaluate(
        thresholds=thresholds, kernel=kernel, coco=coco
    )
    report["config"]["auto_threshold"] = auto_threshold
    if thresholds is not None:
        report["thresholds"] = {str(c): t for c, t in thresholds.items()}
    if output_format == "csv":
        emit(dumps_csv(manager.per_class_table(report)), out)
    else:
        emit(dumps_json(report), out)


@main.command("calibrate-fit")
@input_options
@click.option(
    "--objective",
    type=click.Choice(OBJECTIVES),
    default=LAECE0,
    show_default=True,
    help="Calibration error the pipeline is trained for.",
)
@click.option(
    "--calibrator",
    type=click.Choice(list(CALIBRATOR_KINDS)),
    default="ir",
    show_default=True,
    help="Calibrator fitted to every class.",
)
@click.option(
    "--tau",
    type=click.FloatRange(0, 1, min_open=True, max_open=True),
    help="TP-validation IoU of the dece objective (default 0.5).",
)
@click.option(
    "--pre-threshold",
    type=click.FloatRange(0, 1),
    help=(
        "Minimum confidence of dece calibration pairs (default: the "
        "configured dece_pre_threshold)."
    ),
)
@click.option(
    "--config",
    "config_file",
    type=INPUT_FILE,
    help="JSON file overriding the default configuration.",
)
@click.option(
    "--class-agnostic",
    is_flag=True,
    help="Fit one calibrator on the pooled detections of all classes.",
)
@click.option(
    "--no-calibration-threshold",
    is_flag=True,
    help="Fit on all detections instead of the LRP-optimal survivors.",
)
@click.option(
    "--top-k",
    type=click.IntRange(min=1),
    help="Detections kept per image.",
)
@click.option(
    "--fraction",
    type=click.FloatRange(0, 1, min_open=True, max_open=True),
    help="Fit on a seeded share of the images only.",
)
@click.option(
    "--seed", type=int, default=0, show_default=True, help="Split seed."
)
@click.option("--out", type=OUTPUT_FILE, required=True, help="Pipeline JSON.")
@handle_errors
def calibrate_fit(
    ground_truth: Path,
    detections: Path,
    objective: str = LAECE0,
    calibrator: str = "ir",
    tau: float = None,
    pre_threshold: float = None,
    config_file: Path = None,
    class_agnostic: bool = False,
    no_calibration_threshold: bool = False,
    top_k: int = None,
    fraction: float = None,
    seed: int = 0,
    out: Path = None,
):
    """
    Train a calibration pipeline on a validation set.
    """
    config = load_config(config_file, top_k=top_k)
    if pre_threshold is None:
        pre_threshold = config.dece_pre_threshold
    try:
        calibration_objective = CalibrationObjective.from_name(
            objective, tau, pre_threshold
        )
    except ValueError as error:
        raise click.UsageError(str(error))
    manager = EvaluationManager(ground_truth, detections, config)
    dataset = manager.dataset
    if fraction is not None:
        dataset, _ = manager.split(fraction, seed)
    pipeline = manager.fit_pipeline(
        calibration_objective,
        calibrator,
        class_wise=not class_agnostic,
        use_calibration_threshold=not no_calibration_threshold,
        dataset=dataset,
        progress=_root_settings().get("progress", False),
    )
    pipeline.save(out)


@main.command("calibrate-apply")
@click.option(
    "--pipeline",
    "pipeline_file",
    type=INPUT_FILE,
    required=True,
    help="Pipeline JSON written by calibrate-fit.",
)
@input_options
@click.option(
    "--top-k",
    type=click.IntRange(min=1),
    help="Detections kept per image (default: every detection).",
)
@click.option(
    "--out",
    type=OUTPUT_FILE,
    required=True,
    help="Calibrated detections (COCO results).",
)
@handle_errors
def calibrate_apply(
    pipeline_file: Path,
    ground_truth: Path,
    detections: Path,
    top_k: int = None,
    out: Path = None,
):
    """
    Calibrate and threshold detections with a trained pipeline.
    """
    pipeline = CalibrationPipeline.load(pipeline_file)
    data_grabber = DataGrabber(ground_truth, detections, top_k=top_k)
    manager = EvaluationManager(data_grabber=data_grabber)
    write_json(to_coco_results(manager.apply_pipeline(pipeline)), out)


@main.command()
@input_options
@config_options
@click.option(
    "--measure",
    type=click.Choice(EvaluationManager.BINNED_MEASURES),
    default=LA_ECE0,
    show_default=True,
    help="Binned calibration measure.",
)
@click.option(
    "--category",
    "category_id",
    type=int,
    help="Restrict to one class (default: all detections pooled).",
)
@click.option("--out", type=OUTPUT_FILE, help="Output file (default stdout).")
@click.option(
    "--format",
    "output_format",
    type=click.Choice(["csv", "json"]),
    default="csv",
    show_default=True,
)
@handle_errors
def reliability(
    ground_truth: Path,
    detections: Path,
    config_file: Path = None,
    tau: float = None,
    legacy_tau: float = None,
    bins: int = None,
    dece_bins: int = None,
    top_k: int = None,
    measure: str = LA_ECE0,
    category_id: int = None,
    out: Path = None,
    output_format: str = "csv",
):
    """
    Export the reliability-diagram rows of a binned measure.
    """
    config = load_config(
        config_file,
        tau=tau,
        legacy_tau=legacy_tau,
        bins=bins,
        dece_bins=dece_bins,
        top_k=top_k,
    )
    manager = EvaluationManager(ground_truth, detections, config)
    try:
        if out is not None and output_format == "csv":
            manager.save_reliability(out, measure, category_id)
            return
        rows = manager.reliability(measure, category_id)
    except ValueError as error:
        raise click.UsageError(str(error))
    emit_table(rows, out, output_format)


@main.command()
@input_options
@config_options
@click.option(
    "--step",
    type=click.FloatRange(0, 1, min_open=True),
    default=0.05,
    show_default=True,
    help="Spacing of the confidence-threshold grid.",
)
@click.option("--out", type=OUTPUT_FILE, help="Output file (default stdout).")
@click.option(
    "--format",
    "output_format",
    type=click.Choice(["csv", "json"]),
    default="csv",
    show_default=True,
)
@handle_errors
def sweep(
    ground_truth: Path,
    detections: Path,
    config_file: Path = None,
    tau: float = None,
    legacy_tau: float = None,
    bins: int = None,
    dece_bins: int = None,
    top_k: int = None,
    step: float = 0.05,
    out: Path = None,
    output_format: str = "csv",
):
    """
    Evaluate the detections over a grid of global confidence thresholds.
    """
    config = load_config(
        config_file,
        tau=tau,
        legacy_tau=legacy_tau,
        bins=bins,
        dece_bins=dece_bins,
        top_k=top_k,
    )
    manager = EvaluationManager(ground_truth, detections, config)
    table = manager.sweep(
        step, progress=_root_settings().get("progress", False)
    )
    emit_table(table, out, output_format)


@main.command()
@input_options
@click.option(
    "--fraction",
    type=click.FloatRange(0, 1, min_open=True, max_open=True),
    default=0.8,
    show_default=True,
    help="Share of images in the validation part.",
)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option(
    "--out",
    type=click.Path(file_okay=False, path_type=Path),
    required=True,
    help="Directory receiving the val_* and test_* files.",
)
@handle_errors
def split(
    ground_truth: Path,
    detections: Path,
    fraction: float = 0.8,
    seed: int = 0,
    out: Path = None,
):
    """
    Randomly split the images into validation and test file pairs.
    """
    data_grabber = DataGrabber(
        ground_truth, detections, top_k=None, load=False
    )
    manager = EvaluationManager(data_grabber=data_grabber)
    parts = dict(zip(SPLIT_FILES, manager.split(fraction, seed)))
    for name, dataset in parts.items():
        gt_name, dets_name = SPLIT_FILES[name]
        write_json(to_coco_ground_truth(dataset), out / gt_name)
        write_json(to_coco_results(dataset), out / dets_name)
        click.echo(
            f"{name}: {len(dataset.image_ids)} images, "
            f"{dataset.num_objects} objects, "
            f"{dataset.num_detections} detections"
        )
