#!/usr/bin/env python3
"""
start.py
SCRIPT MAESTRO DE LANZAMIENTO
Ejecuta: python start.py <subcomando> [opciones]
    python start.py count-params --channels 2 --pattern dilated
    python start.py verify
    python start.py train --train-manifest data/bsds.tsv --epochs 2 --out runs/smoke.ckpt
"""
import sys

from config.threads import apply_thread_limits, read_thread_count


def main() -> int:
    # config.threads no importa numpy: los límites quedan fijados antes de que BLAS cargue
    try:
        apply_thread_limits(read_thread_count())
    except ValueError as e:
        print(f"❌ Configuración de entorno inválida: {e}", file=sys.stderr)
        return 2

    from config.settings import load_environment, setup_logging
    try:
        env = load_environment()
    except ValueError as e:
        print(f"❌ Configuración de entorno inválida: {e}", file=sys.stderr)
        return 2
    setup_logging(env.log_level)

    from cli.commands import main as cli_main
    return cli_main(sys.argv[1:], env)


if __name__ == "__main__":
    sys.exit(main())
