"""Configuração do sistema de logging."""
import sys
from pathlib import Path
from loguru import logger

from app.core.config import settings

LOG_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
    "<level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> | "
    "<level>{message}</level>"
)


def setup_logging(level: str | None = None):
    """Configura o sistema de logging da aplicação.

    Args:
        level: Nível mínimo do console (usa LOG_LEVEL se None)
    """
    # Remove handler padrão
    logger.remove()

    # Console em stderr; stdout fica para as saídas da CLI
    logger.add(
        sys.stderr,
        format=LOG_FORMAT,
        level=(level or settings.LOG_LEVEL).upper(),
        colorize=True,
    )

    if settings.LOG_TO_FILE:
        log_dir = Path(settings.LOG_DIR)
        log_dir.mkdir(exist_ok=True)

        # Log geral
        logger.add(
            log_dir / "app.log",
            format=LOG_FORMAT,
            level="INFO",
            rotation="1 day",
            retention="30 days",
            compression="zip",
        )

        # Log de erros
        logger.add(
            log_dir / "errors.log",
            format=LOG_FORMAT,
            level="ERROR",
            rotation="1 day",
            retention="30 days",
            compression="zip",
        )


def add_run_sink(directory: Path) -> int:
    """Grava o log de uma execução em `<directory>/run.log`, junto dos artefatos.

    Returns:
        Id do handler, para `logger.remove` ao fim da execução
    """
    return logger.add(
        Path(directory) / "run.log",
        format=LOG_FORMAT,
        level="DEBUG",
        colorize=False,
        mode="w",
        encoding="utf-8",
    )
