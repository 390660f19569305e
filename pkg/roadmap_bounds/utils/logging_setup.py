"""
Logging Setup
Configures loguru sinks for the command-line entry point. Library modules only
import the logger and never add sinks themselves.
"""

import sys
from pathlib import Path
from typing import Optional

from loguru import logger

from config import settings


def configure_logging(level: Optional[str] = None, log_to_file: Optional[bool] = None) -> None:
    """
    Replace loguru's default sink.

    Terminal: short "HH:mm:ss | message" lines on stderr at the configured level,
    keeping stdout free for JSON/CSV results.
    File (optional): detailed DEBUG log under settings.log_dir.

    Args:
        level: Terminal level; defaults to settings.log_level
        log_to_file: Whether to add the file sink; defaults to settings.log_to_file
    """
    level = (level or settings.log_level).upper()
    to_file = settings.log_to_file if log_to_file is None else log_to_file

    logger.remove()
    logger.add(
        sys.stderr,
        format="<dim>{time:HH:mm:ss}</dim> | <level>{message}</level>",
        level=level,
        colorize=True,
    )

    if to_file:
        log_dir = Path(settings.log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        logger.add(
            str(log_dir / "roadmap_{time:YYYY-MM-DD_HH-mm-ss}.log"),
            format="{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | {name}:{function}:{line} - {message}",
            level="DEBUG",
            rotation="50 MB",
            retention="14 days",
            enqueue=True,
        )
        logger.debug(f"File logging enabled in {log_dir}")
