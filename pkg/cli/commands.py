"""
cli/commands.py
Subcomandos de la CLI: train, reconstruct, eval, count-params, verify, compare.

Los logs van a stderr; informes y tablas a stdout.
Códigos de salida: 0 éxito, 1 error de dominio, 2 error de uso.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from cli.verify import run_suites
from config.settings import EnvSettings, RunConfig
from data_io.checkpoint import load_checkpoint
from data_io.images import load_grayscale, save_grayscale
from data_io.manifest import Split, load_manifest
from metrics.quality import PEAK, psnr
from metrics.report import evaluate_manifest, reconstruct_image, write_report
from metrics.timing import MIN_REPEATS
from msdcnn.models import MfePattern
from msdcnn.structure import ParamScope, count_parameters
from tensor_core.errors import MsdcnnError
from training.ablation import ALL_VARIANTS, format_ablation, run_ablation
from training.trainer import train

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN_ERROR = 1
EXIT_USAGE_ERROR = 2


# ============================================================
# PARSER
# ============================================================

def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="fichero key=value de experimento")
    common.add_argument("--seed", type=int, help="semilla (por defecto MSDCNN_SEED)")
    common.add_argument("--mr", type=float, help="measurement rate")
    common.add_argument("--channels", type=int, help="canales del MFE (1..3)")
    common.add_argument("--out", type=Path, help="ruta de salida")
    return common


def _bounded_int(minimum: int, allowed: Tuple[int, ...] = ()) -> Callable[[str], int]:
    """Tipo argparse: entero >= minimum (o uno de `allowed`)."""
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid int value: '{text}'")
        if value < minimum and value not in allowed:
            extra = f" or one of {allowed}" if allowed else ""
            raise argparse.ArgumentTypeError(f"must be >= {minimum}{extra}, got {value}")
        return value
    return parse


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="msdcnn", description="Toolkit MsDCNN de compressed sensing")
    sub = parser.add_subparsers(dest="command", required=True)
    patterns = [p.value for p in MfePattern]

    p = sub.add_parser("train", parents=[common], help="entrena medida + reconstrucción")
    p.add_argument("--train-manifest", type=Path, required=True)
    p.add_argument("--val-manifest", type=Path, help="por defecto, el manifiesto de entrenamiento")
    p.add_argument("--epochs", type=int)
    p.add_argument("--pattern", choices=patterns)
    p.add_argument("--history", type=Path, help="log JSON lines (por defecto <out>.history.jsonl)")

    p = sub.add_parser("reconstruct", parents=[common], help="reconstruye una imagen")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--input", type=Path, required=True)

    p = sub.add_parser("eval", parents=[common], help="PSNR/SSIM sobre un manifiesto")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--split", choices=[s.value for s in Split], default=Split.TEST.value)
    p.add_argument("--repeats", type=_bounded_int(MIN_REPEATS, allowed=(1,)), default=1,
                   help="1 (una pasada) o >= 3 para tiempos por mediana")

    p = sub.add_parser("count-params", parents=[common], help="recuento de parámetros")
    p.add_argument("--pattern", choices=patterns)
    p.add_argument("--scope", choices=[s.value for s in ParamScope], default=ParamScope.MFE_ONLY.value)

    p = sub.add_parser("verify", parents=[common], help="suites de oráculos")
    p.add_argument("--seeds", type=int, default=3, help="semillas para las comprobaciones de gradiente")

    p = sub.add_parser("compare", parents=[common], help="tabla de ablación: parámetros, tiempos y PSNR")
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--repeats", type=_bounded_int(MIN_REPEATS), default=11)
    p.add_argument("--train-manifest", type=Path, help="si se da, entrena cada variante con el mismo plan")
    p.add_argument("--val-manifest", type=Path, help="por defecto, el manifiesto de entrenamiento")
    p.add_argument("--epochs", type=int)
    p.add_argument("--seeds", type=_bounded_int(1), default=1, help="semillas de entrenamiento por variante")
    return parser


def _run_config(args: argparse.Namespace, env: EnvSettings) -> RunConfig:
    overrides = {"mr": args.mr, "channels": args.channels, "seed": args.seed,
                 "epochs": getattr(args, "epochs", None), "pattern": getattr(args, "pattern", None)}
    outputs = {"out": args.out} if args.out is not None else {}
    return RunConfig(args.command, args.config, overrides, outputs, env)


# ============================================================
# SUBCOMANDOS
# ============================================================

def cmd_train(args: argparse.Namespace, run: RunConfig) -> int:
    config, plan = run.network_config(), run.train_plan()
    train_manifest = load_manifest(args.train_manifest)
    val_manifest = load_manifest(args.val_manifest) if args.val_manifest else train_manifest
    checkpoint_path = run.outputs.get("out", Path("msdcnn.ckpt"))
    history_path = args.history or checkpoint_path.with_name(checkpoint_path.name + ".history.jsonl")
    checkpoint_path.parent.mkdir(parents=True, exist_ok=True)
    train(config, plan, train_manifest, val_manifest, checkpoint_path, history_path)
    logger.info(f"💾 History written: {history_path}")
    return EXIT_OK


def cmd_reconstruct(args: argparse.Namespace, run: RunConfig) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    if args.mr is not None and args.mr != ckpt.config.measurement_rate:
        logger.warning(f"⚠️ --mr {args.mr} ignored: the checkpoint was trained at MR={ckpt.config.measurement_rate}")
    net = ckpt.to_network()
    image = load_grayscale(args.input)
    recon = reconstruct_image(net, image)
    out = run.outputs.get("out", args.input.with_name(args.input.stem + "_recon.pgm"))
    save_grayscale(out, recon)
    logger.info(f"📊 {args.input.name}: {image.dims[2]}x{image.dims[3]}, "
                f"PSNR {psnr(image.image(0) * PEAK, recon.image(0) * PEAK):.2f} dB")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace, run: RunConfig) -> int:
    net = load_checkpoint(args.checkpoint).to_network()
    report = evaluate_manifest(net, load_manifest(args.manifest), Split(args.split), args.repeats)
    write_report(report, sys.stdout)
    if "out" in run.outputs:
        with open(run.outputs["out"], "w", encoding="utf-8") as f:
            write_report(report, f)
        logger.info(f"💾 Report written: {run.outputs['out']}")
    return EXIT_OK


def cmd_count_params(args: argparse.Namespace, run: RunConfig) -> int:
    n = count_parameters(run.network_config(), ParamScope(args.scope))
    print(f"{n:,}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, run: RunConfig) -> int:
    base = run.seed()
    ok = run_suites(tuple(range(base, base + max(1, args.seeds))))
    if ok:
        logger.info("✅ All verification suites passed")
        return EXIT_OK
    logger.error("❌ Some verification suites failed")
    return EXIT_DOMAIN_ERROR


def cmd_compare(args: argparse.Namespace, run: RunConfig) -> int:
    base = run.network_config()
    plan = train_manifest = val_manifest = None
    if args.train_manifest is not None:
        plan = run.train_plan()
        train_manifest = load_manifest(args.train_manifest)
        val_manifest = load_manifest(args.val_manifest) if args.val_manifest else train_manifest
    first = run.seed()
    scores = run_ablation(ALL_VARIANTS, base, args.size, args.repeats, plan, train_manifest, val_manifest,
                          seeds=tuple(range(first, first + args.seeds)))
    sys.stdout.write(format_ablation(scores))
    return EXIT_OK


COMMANDS: Dict[str, Callable[[argparse.Namespace, RunConfig], int]] = {
    "train": cmd_train,
    "reconstruct": cmd_reconstruct,
    "eval": cmd_eval,
    "count-params": cmd_count_params,
    "verify": cmd_verify,
    "compare": cmd_compare,
}


def main(argv: Optional[List[str]] = None, env: Optional[EnvSettings] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE_ERROR

    run = _run_config(args, env or EnvSettings())
    try:
        logger.info(f"⚙️ {args.command}: {run.describe()}")
        return COMMANDS[args.command](args, run)
    except (MsdcnnError, OSError) as e:
        logger.error(f"❌ {e}")
        logger.debug("traceback", exc_info=True)
        return EXIT_DOMAIN_ERROR
