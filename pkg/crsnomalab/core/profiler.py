import cProfile
import io
import os
import pstats
from functools import wraps

from crsnomalab.core import logger


def _dump_stats(profile, path, sortby='cumulative'):
    stream = io.StringIO()
    pstats.Stats(profile, stream=stream).sort_stats(sortby).print_stats()
    with open(path, "w", encoding='utf-8') as f:
        f.write(stream.getvalue())
    logger.info(f"[Profiler] Statistics written to {path}")


def profile_function(func=None, *, output_dir='.'):
    """
    Decorator profiling each call of `func` and writing `<name>_profile.txt` into `output_dir`.
    Usable bare (`@profile_function`) or with arguments (`@profile_function(output_dir=...)`).
    """
    def decorate(target):
        @wraps(target)
        def wrapper(*args, **kwargs):
            pr = cProfile.Profile()
            pr.enable()
            try:
                return target(*args, **kwargs)
            finally:
                pr.disable()
                _dump_stats(pr, os.path.join(output_dir, f"{target.__name__}_profile.txt"))
        return wrapper

    if func is not None:
        return decorate(func)
    return decorate
