import asyncio
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Optional, Set

logger = logging.getLogger(__name__)


@dataclass
class _MessageEnvelope:
    """A message in the inbox, with the future its reply goes to (None for tell)."""

    content: Any
    reply_future: Optional[asyncio.Future] = None


class Actor(ABC):
    """
    Async actor: messages are handled one at a time in arrival order.

    Handlers may be long (an experiment can run for minutes), so ask
    accepts timeout=None to wait indefinitely.
    """

    def __init__(self, name: Optional[str] = None, inbox_size: int = 100):
        self.name = name or self.__class__.__name__
        self.inbox: asyncio.Queue[_MessageEnvelope] = asyncio.Queue(maxsize=inbox_size)
        self._task: Optional[asyncio.Task] = None
        self._running: bool = False
        self._pending: Set[asyncio.Future] = set()

    @property
    def running(self) -> bool:
        return self._running

    async def start(self) -> None:
        if self._running:
            raise RuntimeError(f"Actor {self.name} is already running")

        self._running = True
        self._task = asyncio.create_task(self._process_messages())
        await self.on_start()

    async def stop(self) -> None:
        if not self._running:
            return

        await self.on_stop()
        self._running = False

        if self._task:
            self._task.cancel()
            try:
                await self._task
            except asyncio.CancelledError:
                pass
            self._task = None

        for future in self._pending:
            if not future.done():
                future.cancel()
        self._pending.clear()

    async def _process_messages(self) -> None:
        try:
            while self._running:
                envelope = await self.inbox.get()
                reply = envelope.reply_future
                try:
                    result = await self.on_receive(envelope.content)
                    if reply and not reply.done():
                        reply.set_result(result)
                except Exception as e:
                    if reply and not reply.done():
                        reply.set_exception(e)
                    else:
                        logger.error(f"Error handling {type(envelope.content).__name__} in {self.name}: {e}")
                finally:
                    if reply is not None:
                        self._pending.discard(reply)
        except asyncio.CancelledError:
            pass

    @abstractmethod
    async def on_receive(self, message: Any) -> Optional[Any]:
        """Handle one message; typed dataclass messages are dispatched by the subclass."""
        raise NotImplementedError("Subclasses must implement on_receive()")

    async def tell(self, message: Any) -> None:
        """Fire-and-forget."""
        if not self._running:
            raise RuntimeError(f"Actor {self.name} is not running")
        await self.inbox.put(_MessageEnvelope(content=message))

    async def ask(self, message: Any, timeout: Optional[float] = 5.0) -> Any:
        """Send a message and wait for the reply; timeout=None waits as long as it takes."""
        if not self._running:
            raise RuntimeError(f"Actor {self.name} is not running")

        reply_future = asyncio.get_running_loop().create_future()
        self._pending.add(reply_future)
        await self.inbox.put(_MessageEnvelope(content=message, reply_future=reply_future))

        try:
            return await asyncio.wait_for(reply_future, timeout=timeout)
        except asyncio.TimeoutError:
            if not reply_future.done():
                reply_future.cancel()
            self._pending.discard(reply_future)
            raise

    async def on_start(self) -> None:
        pass

    async def on_stop(self) -> None:
        pass
