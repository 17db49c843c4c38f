import json
import logging
import os
from dataclasses import dataclass, replace
from logging.handlers import TimedRotatingFileHandler
from typing import Optional

from dotenv import load_dotenv

from minimaple.interpreter import RunOptions

# Load environment variables from base directory
base_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
package_dir = os.path.dirname(os.path.abspath(__file__))
CONFIG_PATH = os.path.join(package_dir, 'config.json')

LOG_FORMAT = '%(asctime)s|%(levelname)s|%(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


@dataclass(frozen=True)
class Settings:
    run_options: RunOptions
    workers: int = 4
    log_level: str = 'WARNING'
    log_dir: Optional[str] = None
    log_file: str = 'minimaple.log'

    def with_run_options(self, **overrides) -> 'Settings':
        """Apply CLI flags on top of file and environment settings; None means not given."""
        given = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, run_options=replace(self.run_options, **given))


def _env_int(name: str, default: int, logger: logging.Logger) -> int:
    raw = os.getenv(name)
    if raw is None or raw == '':
        return default
    try:
        value = int(raw)
        if value < 1:
            raise ValueError(raw)
        return value
    except ValueError:
        logger.warning(f"Ignoring {name}={raw!r}: expected a positive integer, keeping {default}")
        return default


def load_settings(config_path: str = CONFIG_PATH, logger=None) -> Settings:
    """Defaults from config.json, overridden by .env and the environment"""
    logger = logger or logging.getLogger(__name__)
    load_dotenv(os.path.join(base_dir, '.env'))

    with open(config_path, encoding='utf-8') as config_file:
        config = json.load(config_file)

    run = config.get('run_options', {})
    options = RunOptions(
        check_assertions=run.get('check_assertions', True),
        check_loop_specs=run.get('check_loop_specs', False),
        check_contracts=run.get('check_contracts', False),
        step_limit=_env_int('MINIMAPLE_STEP_LIMIT', run.get('step_limit', 1_000_000), logger),
        quantifier_bound=_env_int('MINIMAPLE_QUANTIFIER_BOUND', run.get('quantifier_bound', 10_000), logger),
    )
    report = config.get('report', {})
    logging_config = config.get('logging', {})
    return Settings(
        run_options=options,
        workers=report.get('workers', 4),
        log_level=os.getenv('MINIMAPLE_LOG_LEVEL', logging_config.get('level', 'WARNING')).upper(),
        log_dir=os.getenv('MINIMAPLE_LOG_DIR') or None,
        log_file=logging_config.get('log_file', 'minimaple.log'),
    )


def setup_logger(name: str = 'minimaple', log_dir: Optional[str] = None, level: str = 'WARNING',
                 log_file: str = 'minimaple.log') -> logging.Logger:
    """Setup logger with date-based file rotation"""
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, level, logging.WARNING))

    if logger.hasHandlers():
        logger.handlers.clear()

    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

    # File handler only when a log directory is configured
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)
        file_handler = TimedRotatingFileHandler(
            os.path.join(log_dir, log_file),
            when='midnight',
            backupCount=7,
            encoding='utf-8'
        )
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    # Console handler on stderr; stdout carries the reports
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)
    logger.propagate = False

    return logger
