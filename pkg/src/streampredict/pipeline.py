"""Minimal term-based stream-processing runtime.

A pipeline is a tree of terms composed sequentially (``t1 * t2``: t2 consumes
t1's output) or in parallel (``t1 | t2``: both consume the same upstream
input and expose their outputs as separate streams). Terms communicate only
through append-only data streams; each stream is owned by exactly one term,
which is the only writer, while any number of downstream terms read through
cursor-based views that always observe a gap-free prefix.

Every leaf term runs in its own thread. Appends block once the writer gets
too far ahead of the slowest registered reader (backpressure); streams can
optionally drop items already consumed by every reader to bound memory.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Iterator, Mapping

_POLL_S = 0.05


class PipelineError(Exception):
    pass


class CompositionError(PipelineError):
    """Terms were combined in a way that cannot be wired."""


class StreamOwnershipError(PipelineError):
    """A term other than the owner tried to write to a stream."""


class _Stopped(Exception):
    """Internal: a blocking stream operation was interrupted by stop()."""


class _EndOfStream:
    def __repr__(self) -> str:  # pragma: no cover
        return "END"


#: Returned by StreamView.next() once the stream is closed and drained.
END = _EndOfStream()


@dataclass(frozen=True)
class DataItem:
    """One record flowing through a stream, with per-stream sequence metadata."""

    data: Mapping[str, Any]
    seq: int
    ts: float


class DataStream:
    """Append-only item list with a single owner and prefix-consistent views."""

    def __init__(self, name: str, capacity: int = 65536, truncate: bool = False) -> None:
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.name = name
        self.capacity = capacity
        self.truncate = truncate
        self._lock = threading.Lock()
        self._readable = threading.Condition(self._lock)
        self._writable = threading.Condition(self._lock)
        self._items: list[DataItem] = []
        self._base = 0  # absolute seq of _items[0]
        self._next_seq = 0
        self._closed = False
        self._owner: "Term | None" = None
        self._views: list[StreamView] = []

    def set_owner(self, term: "Term") -> None:
        if self._owner is not None:
            raise StreamOwnershipError(f"stream {self.name} already has an owner")
        self._owner = term

    @property
    def owner(self) -> "Term | None":
        return self._owner

    @property
    def closed(self) -> bool:
        with self._lock:
            return self._closed

    def __len__(self) -> int:
        """Number of items ever appended."""
        with self._lock:
            return self._next_seq

    def view(self) -> "StreamView":
        """Register a reader cursor starting at the oldest retained item."""
        with self._lock:
            v = StreamView(self, self._base)
            self._views.append(v)
            return v

    def append(
        self,
        term: "Term",
        data: Mapping[str, Any],
        stop: threading.Event | None = None,
    ) -> DataItem:
        if term is not self._owner:
            raise StreamOwnershipError(
                f"term {getattr(term, 'name', term)!r} does not own stream {self.name}"
            )
        with self._lock:
            while self._views and self._window_size() >= self.capacity:
                if stop is not None and stop.is_set():
                    raise _Stopped()
                self._writable.wait(timeout=_POLL_S)
            if self._closed:
                raise StreamOwnershipError(f"stream {self.name} is closed")
            item = DataItem(data=data, seq=self._next_seq, ts=time.time())
            self._items.append(item)
            self._next_seq += 1
            self._readable.notify_all()
            return item

    def close(self, term: "Term") -> None:
        if term is not self._owner:
            raise StreamOwnershipError(
                f"term {getattr(term, 'name', term)!r} does not own stream {self.name}"
            )
        with self._lock:
            self._closed = True
            self._readable.notify_all()

    def snapshot(self) -> list[DataItem]:
        """Prefix-consistent copy of the currently retained items."""
        with self._lock:
            return list(self._items)

    # both helpers assume the lock is held

    def _window_size(self) -> int:
        slowest = min(v._cursor for v in self._views)
        return self._next_seq - slowest

    def _after_advance(self) -> None:
        if self.truncate and self._views:
            slowest = min(v._cursor for v in self._views)
            drop = slowest - self._base
            if drop > 0:
                del self._items[:drop]
                self._base = slowest
        self._writable.notify_all()


class StreamView:
    """Read-only cursor over a stream; never hands out partially written items."""

    def __init__(self, stream: DataStream, cursor: int) -> None:
        self._stream = stream
        self._cursor = cursor

    @property
    def cursor(self) -> int:
        return self._cursor

    def next(
        self,
        timeout: float | None = None,
        stop: threading.Event | None = None,
    ) -> DataItem | _EndOfStream:
        """Block for the next item; END when the stream is closed and drained.

        With a timeout, returns None-like END only on close; on timeout it
        raises TimeoutError.
        """
        deadline = None if timeout is None else time.monotonic() + timeout
        s = self._stream
        with s._lock:
            while self._cursor >= s._next_seq:
                if s._closed:
                    return END
                if stop is not None and stop.is_set():
                    return END
                if deadline is not None and time.monotonic() >= deadline:
                    raise TimeoutError(f"no item on {s.name} within {timeout}s")
                s._readable.wait(timeout=_POLL_S)
            item = s._items[self._cursor - s._base]
            self._cursor += 1
            s._after_advance()
            return item

    def try_next(self) -> DataItem | _EndOfStream | None:
        """Non-blocking: an item, END if closed and drained, else None."""
        s = self._stream
        with s._lock:
            if self._cursor < s._next_seq:
                item = s._items[self._cursor - s._base]
                self._cursor += 1
                s._after_advance()
                return item
            return END if s._closed else None


# -- terms --------------------------------------------------------------------


class Term:
    """A pipeline node. Subclasses declare what input they accept and
    implement ``run``; composite terms only wire their parts together."""

    accepts_input = "one"  # "none" | "one" | "many"
    _counter = 0

    def __init__(self, name: str | None = None) -> None:
        if name is None:
            Term._counter += 1
            name = f"{type(self).__name__.lower()}-{Term._counter}"
        self.name = name
        self.inputs: list[StreamView] = []
        self.output: DataStream | None = None

    # composition

    def __mul__(self, other: "Term") -> "Term":
        return compose_sequential(self, other)

    def __or__(self, other: "Term") -> "Term":
        return compose_parallel(self, other)

    def leaves(self) -> list["Term"]:
        return [self]

    def tails(self) -> list[DataStream]:
        return [self.output] if self.output is not None else []

    def connect(self, streams: list[DataStream]) -> None:
        if self.accepts_input == "none":
            raise CompositionError(f"source term {self.name} cannot take an input")
        if self.inputs:
            raise CompositionError(f"term {self.name} is already connected")
        if self.accepts_input == "one" and len(streams) != 1:
            raise CompositionError(
                f"term {self.name} takes one input stream, got {len(streams)}"
            )
        if not streams:
            raise CompositionError(f"term {self.name} needs at least one input")
        self.inputs = [s.view() for s in streams]

    def run(self, ctx: "RunContext") -> None:
        raise NotImplementedError

    def _make_output(self, capacity: int = 65536, truncate: bool = True) -> None:
        self.output = DataStream(f"{self.name}.out", capacity=capacity, truncate=truncate)
        self.output.set_owner(self)


class _Composite(Term):
    def __init__(self, parts: list[Term], name: str) -> None:
        super().__init__(name)
        self.parts = parts

    def leaves(self) -> list[Term]:
        return [leaf for p in self.parts for leaf in p.leaves()]

    def run(self, ctx: "RunContext") -> None:  # pragma: no cover
        raise PipelineError("composite terms are not run directly")


class SequentialTerm(_Composite):
    def __init__(self, first: Term, second: Term) -> None:
        super().__init__([first, second], f"({first.name} * {second.name})")
        tails = first.tails()
        if not tails:
            raise CompositionError(
                f"left side of * ({first.name}) produces no output stream"
            )
        second.connect(tails)

    def tails(self) -> list[DataStream]:
        return self.parts[1].tails()

    def connect(self, streams: list[DataStream]) -> None:
        self.parts[0].connect(streams)


class ParallelTerm(_Composite):
    def __init__(self, left: Term, right: Term) -> None:
        super().__init__([left, right], f"({left.name} | {right.name})")

    def tails(self) -> list[DataStream]:
        return [t for p in self.parts for t in p.tails()]

    def connect(self, streams: list[DataStream]) -> None:
        for p in self.parts:
            p.connect(streams)


def compose_sequential(t1: Term, t2: Term) -> Term:
    """Feed t1's output stream into t2."""
    return SequentialTerm(t1, t2)


def compose_parallel(t1: Term, t2: Term) -> Term:
    """Fan the same upstream input out to both terms."""
    return ParallelTerm(t1, t2)


class SourceTerm(Term):
    """Emits items without consuming any stream."""

    accepts_input = "none"

    def __init__(self, name: str | None = None, capacity: int = 65536) -> None:
        super().__init__(name)
        self._make_output(capacity=capacity)

    def items(self) -> Iterator[Mapping[str, Any]]:
        raise NotImplementedError

    def run(self, ctx: "RunContext") -> None:
        assert self.output is not None
        try:
            for data in self.items():
                if ctx.stop.is_set():
                    break
                self.output.append(self, data, stop=ctx.stop)
        except _Stopped:
            pass
        finally:
            self.output.close(self)


class FunctionTerm(Term):
    """Consumes one input stream in order and appends transformed items."""

    def __init__(self, name: str | None = None, capacity: int = 65536) -> None:
        super().__init__(name)
        self._make_output(capacity=capacity)

    def process(self, item: DataItem) -> Iterable[Mapping[str, Any]]:
        raise NotImplementedError

    def finish(self) -> Iterable[Mapping[str, Any]]:
        return ()

    def run(self, ctx: "RunContext") -> None:
        assert self.output is not None
        view = self.inputs[0]
        try:
            while not ctx.stop.is_set():
                item = view.next(stop=ctx.stop)
                if item is END:
                    break
                for out in self.process(item):
                    self.output.append(self, out, stop=ctx.stop)
            if not ctx.stop.is_set():
                for out in self.finish():
                    self.output.append(self, out, stop=ctx.stop)
        except _Stopped:
            pass
        finally:
            self.output.close(self)


class SinkTerm(Term):
    """Consumes items without producing a stream for other terms."""

    def consume(self, item: DataItem) -> None:
        raise NotImplementedError

    def finish(self) -> None:
        pass

    def run(self, ctx: "RunContext") -> None:
        view = self.inputs[0]
        while not ctx.stop.is_set():
            item = view.next(stop=ctx.stop)
            if item is END:
                break
            self.consume(item)
        self.finish()


# -- stock terms ---------------------------------------------------------------


class IterableSource(SourceTerm):
    """Streams the items of an in-memory iterable, in order."""

    def __init__(self, data: Iterable[Mapping[str, Any]], name: str | None = None) -> None:
        super().__init__(name)
        self._data = data

    def items(self) -> Iterator[Mapping[str, Any]]:
        return iter(self._data)


class Transform(FunctionTerm):
    """Applies a function to each item's data; None results are dropped."""

    def __init__(
        self,
        fn: Callable[[Mapping[str, Any]], Mapping[str, Any] | None],
        name: str | None = None,
    ) -> None:
        super().__init__(name)
        self._fn = fn

    def process(self, item: DataItem) -> Iterable[Mapping[str, Any]]:
        out = self._fn(item.data)
        return () if out is None else (out,)


class KeyFilter(FunctionTerm):
    """Projects each record onto a fixed set of keys."""

    def __init__(self, keys: Iterable[str], name: str | None = None) -> None:
        super().__init__(name)
        self.keys = tuple(keys)

    def process(self, item: DataItem) -> Iterable[Mapping[str, Any]]:
        yield {k: item.data[k] for k in self.keys if k in item.data}


class MergeByArrival(Term):
    """Merges any number of input streams into one, in arrival order."""

    accepts_input = "many"

    def __init__(self, name: str | None = None, capacity: int = 65536) -> None:
        super().__init__(name)
        self._make_output(capacity=capacity)

    def run(self, ctx: "RunContext") -> None:
        assert self.output is not None
        open_views = list(self.inputs)
        try:
            while open_views and not ctx.stop.is_set():
                progressed = False
                for view in list(open_views):
                    got = view.try_next()
                    if got is END:
                        open_views.remove(view)
                    elif got is not None:
                        self.output.append(self, got.data, stop=ctx.stop)
                        progressed = True
                if not progressed:
                    time.sleep(0.002)
        except _Stopped:
            pass
        finally:
            self.output.close(self)


class CollectSink(SinkTerm):
    """Gathers every consumed record into a list (test and CLI helper)."""

    def __init__(self, name: str | None = None) -> None:
        super().__init__(name)
        self.collected: list[Mapping[str, Any]] = []

    def consume(self, item: DataItem) -> None:
        self.collected.append(item.data)


# -- execution -----------------------------------------------------------------


@dataclass
class RunContext:
    stop: threading.Event


class RunHandle:
    """Control surface for a started pipeline: join, stop, inspect streams."""

    def __init__(self, leaves: list[Term], ctx: RunContext) -> None:
        self._leaves = leaves
        self._ctx = ctx
        self.errors: list[BaseException] = []
        self._threads = [
            threading.Thread(target=self._run_leaf, args=(leaf,), daemon=True)
            for leaf in leaves
        ]

    def _run_leaf(self, leaf: Term) -> None:
        try:
            leaf.run(self._ctx)
        except BaseException as exc:  # noqa: BLE001 - fail fast, surface via check()
            self.errors.append(exc)
            self._ctx.stop.set()

    def _start(self) -> None:
        for t in self._threads:
            t.start()

    def join(self, timeout: float | None = None) -> bool:
        deadline = None if timeout is None else time.monotonic() + timeout
        for t in self._threads:
            remaining = None if deadline is None else max(0.0, deadline - time.monotonic())
            t.join(remaining)
        return not any(t.is_alive() for t in self._threads)

    def stop(self) -> None:
        self._ctx.stop.set()

    def check(self) -> None:
        if self.errors:
            raise self.errors[0]

    def stream(self, term_name: str) -> DataStream:
        for leaf in self._leaves:
            if leaf.name == term_name and leaf.output is not None:
                return leaf.output
        raise KeyError(term_name)

    def term(self, term_name: str) -> Term:
        for leaf in self._leaves:
            if leaf.name == term_name:
                return leaf
        raise KeyError(term_name)


def _check_acyclic(leaves: list[Term]) -> None:
    owner_of = {id(leaf.output): leaf for leaf in leaves if leaf.output is not None}
    adjacency: dict[int, list[int]] = {id(leaf): [] for leaf in leaves}
    for leaf in leaves:
        for view in leaf.inputs:
            upstream = owner_of.get(id(view._stream))
            if upstream is not None:
                adjacency[id(upstream)].append(id(leaf))
    state: dict[int, int] = {}

    def visit(node: int) -> None:
        state[node] = 1
        for nxt in adjacency[node]:
            if state.get(nxt) == 1:
                raise CompositionError("pipeline graph contains a cycle")
            if nxt not in state:
                visit(nxt)
        state[node] = 2

    for node in adjacency:
        if node not in state:
            visit(node)


def run_pipeline(
    root: Term,
    source_items: Iterable[Mapping[str, Any]] | None = None,
) -> RunHandle:
    """Validate the wired term graph and start every leaf in its own thread.

    When ``source_items`` is given, an IterableSource is prepended to feed
    the (otherwise unconnected) head of ``root``.
    """
    if source_items is not None:
        root = IterableSource(source_items) * root
    leaves = root.leaves()
    sources = [t for t in leaves if t.accepts_input == "none"]
    if not sources:
        raise CompositionError("pipeline has no source term")
    for leaf in leaves:
        if leaf.accepts_input != "none" and not leaf.inputs:
            raise CompositionError(f"term {leaf.name} has no input wired")
    _check_acyclic(leaves)
    handle = RunHandle(leaves, RunContext(stop=threading.Event()))
    handle._start()
    return handle
