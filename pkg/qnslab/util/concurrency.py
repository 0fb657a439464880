"""
Tools to facilitate developing thread-safe components.
"""

import functools
import logging
from concurrent.futures import ThreadPoolExecutor

__authors__ = ['qnslab contributors']
__copyright__ = "Copyright 2026 qnslab contributors"
__license__ = """Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

  http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License."""

logger = logging.getLogger(__name__)


def synchronized(lock):
    def synchronize(func):
        """
        Decorator to lock and unlock a function or method.

        The decorated callable holds C{lock} (a C{threading.Lock} or C{threading.RLock})
        for the whole call.

        @param func: Method to decorate
        @type func: C{callable}
        """
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            with lock:
                return func(*args, **kwargs)
        return wrapper
    return synchronize


def ordered_map(func, items, threads=1):
    """
    Apply C{func} to every item, possibly on a worker pool, returning results in input order.

    With a single thread no pool is created, so results (and any floating point reductions
    the caller performs on them) are identical whatever the thread count.

    >>> ordered_map(abs, [-3, 2, -1], threads=2)
    [3, 2, 1]

    @param func: Callable taking one item.
    @type func: C{callable}

    @param items: The work items.
    @type items: C{iterable}

    @param threads: Worker count; values below 2 run inline.
    @type threads: C{int}

    @rtype: C{list}
    """
    items = list(items)
    if threads < 2 or len(items) < 2:
        return [func(item) for item in items]
    logger.debug("Mapping %d items over %d threads", len(items), threads)
    with ThreadPoolExecutor(max_workers=threads, thread_name_prefix='qnslab-worker') as pool:
        return list(pool.map(func, items))
