"""Line transports connecting the two protocol endpoints.

Every transport offers ``send(line)`` and ``receive(timeout) -> str | None``
where ``None`` signals a timeout. Lines carry their trailing ``\\n``.
"""

from __future__ import annotations

import os
import queue
import threading
import time
from pathlib import Path
from typing import Callable, Optional, Protocol, TextIO


class Transport(Protocol):
    def send(self, line: str) -> None: ...

    def receive(self, timeout: Optional[float] = None) -> Optional[str]: ...

    def close(self) -> None: ...


class MemoryTransport:
    """One side of an in-process duplex channel."""

    def __init__(self, inbox: queue.Queue, outbox: queue.Queue):
        self._inbox = inbox
        self._outbox = outbox

    def send(self, line: str) -> None:
        self._outbox.put(line)

    def receive(self, timeout: Optional[float] = None) -> Optional[str]:
        try:
            if timeout is not None and timeout <= 0:
                return self._inbox.get_nowait()
            return self._inbox.get(timeout=timeout)
        except queue.Empty:
            return None

    def close(self) -> None:
        pass


def memory_pair() -> tuple[MemoryTransport, MemoryTransport]:
    a_to_b: queue.Queue = queue.Queue()
    b_to_a: queue.Queue = queue.Queue()
    return MemoryTransport(b_to_a, a_to_b), MemoryTransport(a_to_b, b_to_a)


class StreamTransport:
    """Bridge over a pair of text streams (e.g. stdin/stdout or OS pipes).

    A daemon thread drains ``reader`` into a queue so ``receive`` can honour
    a timeout on streams that only support blocking reads.
    """

    def __init__(self, reader: TextIO, writer: TextIO):
        self._reader = reader
        self._writer = writer
        self._lines: queue.Queue = queue.Queue()
        self._write_lock = threading.Lock()
        self._pump = threading.Thread(target=self._drain, daemon=True)
        self._pump.start()

    def _drain(self) -> None:
        try:
            for line in self._reader:
                self._lines.put(line)
        except (ValueError, OSError):
            pass

    def send(self, line: str) -> None:
        with self._write_lock:
            self._writer.write(line)
            self._writer.flush()

    def receive(self, timeout: Optional[float] = None) -> Optional[str]:
        try:
            return self._lines.get(timeout=timeout)
        except queue.Empty:
            return None

    def close(self) -> None:
        try:
            self._writer.close()
        except OSError:
            pass


def pipe_pair() -> tuple[StreamTransport, StreamTransport]:
    """Two stream transports joined by OS pipes, one pipe per direction."""
    r1, w1 = os.pipe()
    r2, w2 = os.pipe()
    a = StreamTransport(os.fdopen(r2, "r", encoding="ascii"), os.fdopen(w1, "w", encoding="ascii"))
    b = StreamTransport(os.fdopen(r1, "r", encoding="ascii"), os.fdopen(w2, "w", encoding="ascii"))
    return a, b


class FileTransport:
    """Append lines to one file and tail another from a remembered offset."""

    def __init__(self, outbound: Path, inbound: Path, poll_interval: float = 0.001):
        self.outbound = Path(outbound)
        self.inbound = Path(inbound)
        self.poll_interval = poll_interval
        self._offset = 0
        self._pending = ""

    def send(self, line: str) -> None:
        with open(self.outbound, "a", encoding="ascii") as fh:
            fh.write(line)
            fh.flush()

    def _read_new(self) -> None:
        try:
            with open(self.inbound, "r", encoding="ascii", newline="") as fh:
                fh.seek(self._offset)
                chunk = fh.read()
                self._offset = fh.tell()
        except FileNotFoundError:
            return
        self._pending += chunk

    def _pop_line(self) -> Optional[str]:
        idx = self._pending.find("\n")
        if idx < 0:
            return None
        line, self._pending = self._pending[: idx + 1], self._pending[idx + 1:]
        return line

    def receive(self, timeout: Optional[float] = None) -> Optional[str]:
        deadline = None if timeout is None else time.monotonic() + timeout
        while True:
            line = self._pop_line()
            if line is not None:
                return line
            self._read_new()
            line = self._pop_line()
            if line is not None:
                return line
            if deadline is not None and time.monotonic() >= deadline:
                return None
            time.sleep(self.poll_interval)

    def close(self) -> None:
        pass


def file_pair(directory: Path) -> tuple[FileTransport, FileTransport]:
    """Brain/jetson transports over two fresh log files in ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    to_jetson = directory / "brain_to_jetson.log"
    to_brain = directory / "jetson_to_brain.log"
    for path in (to_jetson, to_brain):
        path.write_text("")
    return FileTransport(to_jetson, to_brain), FileTransport(to_brain, to_jetson)


class FaultyTransport:
    """Wraps a transport and duplicates or drops outbound lines.

    ``drop`` receives each outbound line and its zero-based send index and
    returns True to discard it.
    """

    def __init__(
        self,
        inner: Transport,
        copies: int = 1,
        drop: Optional[Callable[[str, int], bool]] = None,
    ):
        if copies < 1:
            raise ValueError("copies must be >= 1")
        self.inner = inner
        self.copies = copies
        self.drop = drop
        self.sent = 0

    def send(self, line: str) -> None:
        index = self.sent
        self.sent += 1
        if self.drop is not None and self.drop(line, index):
            return
        for _ in range(self.copies):
            self.inner.send(line)

    def receive(self, timeout: Optional[float] = None) -> Optional[str]:
        return self.inner.receive(timeout)

    def close(self) -> None:
        self.inner.close()
