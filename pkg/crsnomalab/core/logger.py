import inspect
import logging
import os
import sys

from crsnomalab.core import config

_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
_package_logger = logging.getLogger(config.LOGGER_NAME)
_file_handler = None


def _resolve_level(level):
    if isinstance(level, int):
        return level
    return getattr(logging, str(level).upper(), logging.INFO)


def configure_logger(log_dir=None, log_level=None):
    """
    Configures the package logger. The console handler is installed once; a file handler
    is (re)attached whenever a log directory is given.

    Args:
        log_dir (str, optional): Directory receiving `config.LOG_FILE_NAME`.
        log_level (str | int, optional): Overrides `config.LOG_LEVEL`.
    """
    global _file_handler
    level = _resolve_level(log_level or config.LOG_LEVEL)
    formatter = logging.Formatter(_FORMAT)
    _package_logger.setLevel(level)

    if not any(getattr(h, '_crsnomalab_console', False) for h in _package_logger.handlers):
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler._crsnomalab_console = True
        console_handler.setFormatter(formatter)
        _package_logger.addHandler(console_handler)
    for handler in _package_logger.handlers:
        handler.setLevel(level)

    if log_dir:
        os.makedirs(log_dir, exist_ok=True)
        if _file_handler is not None:
            _package_logger.removeHandler(_file_handler)
            _file_handler.close()
        _file_handler = logging.FileHandler(os.path.join(log_dir, config.LOG_FILE_NAME), encoding='utf-8')
        _file_handler.setFormatter(formatter)
        _file_handler.setLevel(level)
        _package_logger.addHandler(_file_handler)
        _package_logger.info(f"Logging to {os.path.join(log_dir, config.LOG_FILE_NAME)}")
    return _package_logger


def get_dynamic_logger(depth=1):
    """
    Returns the logger named after the module `depth` frames up the call stack.
    Loggers of package modules propagate to the configured package logger.
    """
    frame = inspect.currentframe()
    for _ in range(depth):
        if frame is None:
            break
        frame = frame.f_back
    module_name = frame.f_globals.get('__name__', '__main__') if frame is not None else '__main__'
    if not _package_logger.handlers:
        configure_logger()
    return logging.getLogger(module_name)


def __getattr__(name):
    # Frames: get_dynamic_logger -> __getattr__ -> caller
    dynamic_logger = get_dynamic_logger(depth=2)
    return getattr(dynamic_logger, name)


logger = get_dynamic_logger()
