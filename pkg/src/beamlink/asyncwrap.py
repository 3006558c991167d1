"""Thread-pool execution of blocking simulation work from asyncio"""

import asyncio
import atexit
from concurrent.futures import ThreadPoolExecutor
from functools import partial, wraps
from typing import Awaitable, Callable, Optional, TypeVar

from beamlink.settings import WORKERS

T = TypeVar("T")

DEFAULT_EXECUTOR = ThreadPoolExecutor(max_workers=WORKERS, thread_name_prefix="beamlink")


def asyncwrap(func: Callable[..., T]) -> Callable[..., Awaitable[T]]:
    """Wrap a blocking function so awaiting it runs it on the executor"""

    @wraps(func)
    async def run(*args, executor: Optional[ThreadPoolExecutor] = None, **kwargs) -> T:
        loop = asyncio.get_running_loop()
        return await loop.run_in_executor(executor or DEFAULT_EXECUTOR, partial(func, *args, **kwargs))

    return run


@atexit.register
def close_executor():
    """Waits until the executor is closed"""
    DEFAULT_EXECUTOR.shutdown(wait=True)
