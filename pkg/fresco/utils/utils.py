import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from fresco import config

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(threads: Optional[int] = None) -> int:
    """Worker count from the argument, the environment, or the config default."""
    if threads is None:
        env_name = config.get("runtime").get("threads_env")
        env_value = os.environ.get(env_name) if env_name else None
        if env_value:
            try:
                threads = int(env_value)
            except ValueError:
                logger.warning(f"Ignoring non-integer {env_name}={env_value!r}")
        if threads is None:
            threads = config.get("runtime").get("threads", 1)
    return max(1, int(threads))


def parallel_map(
    func: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None
) -> List[R]:
    """Apply `func` to every item, preserving input order.

    Args:
        func: callable applied to each item.
        items: iterable of arguments.
        threads: int or None, worker cap; see `resolve_threads`.

    Returns:
        List of results in the order of `items`.
    """
    items = list(items)
    workers = min(resolve_threads(threads), max(1, len(items)))
    if workers == 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def format_number(value: float, digits: Optional[int] = None) -> str:
    """Render a float with a fixed count of significant digits as a JSON number."""
    if digits is None:
        digits = config.get("report").get("significant_digits", 17)
    text = format(float(value), f".{digits}g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return text
