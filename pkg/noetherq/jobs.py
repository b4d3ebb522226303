"""In-process run queue and report store behind the HTTP API."""

import asyncio
import logging
import time
import uuid
from typing import Any, Awaitable, Callable

from .conf import conf

logger = logging.getLogger(conf.APP_NAME)


class RunQueue:
    """FIFO of submitted runs drained by a single background worker."""

    def __init__(self) -> None:
        self._q: asyncio.Queue[Any] = asyncio.Queue()
        self._worker_task: asyncio.Task | None = None

    async def enqueue(self, item: Any) -> None:
        await self._q.put(item)

    def __len__(self) -> int:
        return self._q.qsize()

    def start(self, process: Callable[[Any], Awaitable[None]]) -> None:
        async def _drain():
            while True:
                item = await self._q.get()
                try:
                    await process(item)
                except asyncio.CancelledError:
                    raise
                except Exception:
                    logger.exception("Worker failed on %r", item)
                finally:
                    self._q.task_done()

        self._worker_task = asyncio.create_task(_drain())

    async def join(self) -> None:
        await self._q.join()

    async def close(self) -> None:
        if self._worker_task and not self._worker_task.done():
            self._worker_task.cancel()
            try:
                await self._worker_task
            except asyncio.CancelledError:
                pass


class RunStore:
    """Reports keyed by run id; entries expire ``ttl`` seconds after they are stored."""

    def __init__(self, ttl: int = conf.RUN_RESULT_TTL, clock: Callable[[], float] = time.monotonic):
        self._ttl = ttl
        self._clock = clock
        self._entries: dict[uuid.UUID, tuple[dict, float]] = {}

    def _purge(self) -> None:
        now = self._clock()
        for run_id in [k for k, (_, expiry) in self._entries.items() if now > expiry]:
            del self._entries[run_id]

    async def put(self, run_id: uuid.UUID, entry: dict, ttl: int | None = None) -> None:
        self._purge()
        self._entries[run_id] = (entry, self._clock() + (ttl or self._ttl))

    async def get(self, run_id: uuid.UUID) -> dict | None:
        self._purge()
        found = self._entries.get(run_id)
        return None if found is None else found[0]

    def __len__(self) -> int:
        self._purge()
        return len(self._entries)
