__all__ = ["OrderedPool", "ordered_map"]

import concurrent.futures
import typing


_T = typing.TypeVar("_T")
_R = typing.TypeVar("_R")

_Initializer = typing.Optional[typing.Callable[..., None]]


class OrderedPool:
    """Process pool whose ``map`` returns results in input order.

    With ``workers <= 1`` everything runs in-process, and the initializer is
    still called once so both paths see the same worker state. Mapped
    functions and the initializer must be importable module-level callables.
    """

    def __init__(
        self,
        workers: int = 1,
        initializer: _Initializer = None,
        initargs: typing.Tuple = (),
    ) -> None:
        self.workers = workers
        self._initializer = initializer
        self._initargs = initargs
        self._executor: typing.Optional[
            concurrent.futures.ProcessPoolExecutor
        ] = None

    def __enter__(self) -> "OrderedPool":
        if self.workers > 1:
            self._executor = concurrent.futures.ProcessPoolExecutor(
                max_workers=self.workers,
                initializer=self._initializer,
                initargs=self._initargs,
            )
        elif self._initializer is not None:
            self._initializer(*self._initargs)
        return self

    def __exit__(self, *exc_info) -> None:
        if self._executor is not None:
            self._executor.shutdown()
            self._executor = None

    def map(
        self, func: typing.Callable[[_T], _R], items: typing.Iterable[_T]
    ) -> typing.List[_R]:
        items = list(items)
        if self._executor is None:
            return [func(item) for item in items]
        chunksize = max(1, len(items) // (self.workers * 8))
        return list(self._executor.map(func, items, chunksize=chunksize))


def ordered_map(
    func: typing.Callable[[_T], _R],
    items: typing.Iterable[_T],
    workers: int = 1,
    initializer: _Initializer = None,
    initargs: typing.Tuple = (),
) -> typing.List[_R]:
    """One-shot :class:`OrderedPool` map."""
    with OrderedPool(workers, initializer, initargs) as pool:
        return pool.map(func, items)
