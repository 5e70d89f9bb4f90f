"""Online checking service and rolling violation statistics.

Requests and responses are single-line JSON objects over TCP::

    {"op": "check", "direction": "en-zh", "source": "...", "translation": "..."}
    {"op": "stats"}

A check response mirrors the violation report; the stats response holds
per-window counts of checked tasks and flagged translations. The server
only reports; routing traffic to a backup model is left to the caller.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import socketserver
import threading
import time
from dataclasses import asdict, dataclass
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Tuple

from .corpus import SentencePair, normalize
from .detect import CheckConfig, check
from .lexicon import Lexicon, load_lexicon

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 300.0
STATS_NOTE = (
    "unique_flagged counts distinct (source, translation) pairs with any violation "
    "within a window; flagged_tasks counts every flagged request"
)


@dataclass
class WindowStats:
    window_start: float
    window_length: float
    tasks_checked: int = 0
    under_count: int = 0
    over_count: int = 0
    flagged_tasks: int = 0
    unique_flagged: int = 0

    @property
    def flagged_pct(self) -> float:
        return 100.0 * self.flagged_tasks / self.tasks_checked if self.tasks_checked else 0.0


@dataclass
class MonitorSeries:
    windows: List[WindowStats]
    window_length: float = DEFAULT_WINDOW

    @property
    def totals(self) -> Dict[str, int]:
        keys = ("tasks_checked", "under_count", "over_count", "flagged_tasks", "unique_flagged")
        return {k: sum(getattr(w, k) for w in self.windows) for k in keys}

    def to_dict(self) -> dict:
        return {
            "window_length": self.window_length,
            "note": STATS_NOTE,
            "windows": [asdict(w) for w in self.windows],
            "totals": self.totals,
        }

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        buf.write(f"# {STATS_NOTE}\n")
        cols = [
            "window_start", "window_length", "tasks_checked", "under_count", "over_count",
            "flagged_tasks", "unique_flagged", "pct_under", "pct_over", "pct_flagged",
        ]
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for w in self.windows:
            n = w.tasks_checked

            def pct(x):
                return f"{100.0 * x / n:.2f}" if n else "0.00"

            writer.writerow([
                f"{w.window_start:g}", f"{w.window_length:g}", n, w.under_count, w.over_count,
                w.flagged_tasks, w.unique_flagged, pct(w.under_count), pct(w.over_count), pct(w.flagged_tasks),
            ])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text


class StatsAccumulator:
    """Thread-safe per-window counters."""

    def __init__(self, window_length: float = DEFAULT_WINDOW):
        if window_length <= 0:
            raise ValueError("window length must be positive")
        self.window_length = float(window_length)
        self._lock = threading.Lock()
        self._windows: Dict[int, WindowStats] = {}
        self._seen: Dict[int, set] = {}

    def record(self, timestamp: float, source: str, translation: str, has_under: bool, has_over: bool) -> None:
        slot = math.floor(timestamp / self.window_length)
        with self._lock:
            w = self._windows.get(slot)
            if w is None:
                w = self._windows[slot] = WindowStats(slot * self.window_length, self.window_length)
                self._seen[slot] = set()
            w.tasks_checked += 1
            w.under_count += has_under
            w.over_count += has_over
            if has_under or has_over:
                w.flagged_tasks += 1
                key = (source, translation)
                if key not in self._seen[slot]:
                    self._seen[slot].add(key)
                    w.unique_flagged += 1

    def snapshot(self) -> MonitorSeries:
        with self._lock:
            if not self._windows:
                return MonitorSeries([], self.window_length)
            lo, hi = min(self._windows), max(self._windows)
            rows = []
            for slot in range(lo, hi + 1):
                w = self._windows.get(slot)
                rows.append(
                    WindowStats(**asdict(w)) if w else WindowStats(slot * self.window_length, self.window_length)
                )
        return MonitorSeries(rows, self.window_length)


def monitor_report(
    records: Iterable[Mapping],
    window: float = DEFAULT_WINDOW,
    seconds_per_record: float = 1.0,
) -> MonitorSeries:
    """Bin ``check`` output records into windows.

    Records lacking a ``timestamp`` are placed at ``position * seconds_per_record``.
    """
    timed = []
    for pos, rec in enumerate(records):
        ts = rec.get("timestamp")
        timed.append((float(ts) if ts is not None else pos * seconds_per_record, pos, rec))
    timed.sort(key=lambda x: (x[0], x[1]))
    acc = StatsAccumulator(window)
    for ts, _, rec in timed:
        acc.record(ts, rec.get("source", ""), rec.get("translation", ""), bool(rec["has_under"]), bool(rec["has_over"]))
    return acc.snapshot()


def read_report(path) -> List[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def direction_key(source_lang: str, target_lang: str) -> str:
    return f"{source_lang}-{target_lang}"


class CheckService:
    """Dispatches requests to per-direction lexicons; the only mutable state is the stats."""

    def __init__(
        self,
        lexicons: Iterable[Lexicon],
        configs: Optional[Mapping[str, CheckConfig]] = None,
        default_config: CheckConfig = CheckConfig(),
        window: float = DEFAULT_WINDOW,
        clock: Callable[[], float] = time.time,
    ):
        self.lexicons: Dict[str, Lexicon] = {}
        for lex in lexicons:
            self.lexicons[direction_key(*lex.direction)] = lex
        if not self.lexicons:
            raise ValueError("at least one lexicon is required")
        self.configs = dict(configs or {})
        self.default_config = default_config
        self.stats = StatsAccumulator(window)
        self.clock = clock
        self._counter = 0
        self._counter_lock = threading.Lock()

    def _next_id(self) -> int:
        with self._counter_lock:
            self._counter += 1
            return self._counter - 1

    def handle(self, request: Mapping) -> dict:
        op = request.get("op", "check")
        if op == "stats":
            return {"ok": True, "stats": self.stats.snapshot().to_dict()}
        if op != "check":
            return {"ok": False, "error": f"unknown op {op!r}"}
        direction = request.get("direction")
        lexicon = self.lexicons.get(direction)
        if lexicon is None:
            return {"ok": False, "error": f"unknown direction {direction!r}"}
        source, translation = request.get("source"), request.get("translation")
        if not isinstance(source, str) or not isinstance(translation, str):
            return {"ok": False, "error": "source and translation must be strings"}
        task_id = request.get("id")
        if task_id is None:
            task_id = self._next_id()
        pair = SentencePair(task_id, tuple(normalize(source)), tuple(normalize(translation)))
        report = check(pair, lexicon, self.configs.get(direction, self.default_config))
        ts = request.get("timestamp")
        self.stats.record(
            float(ts) if ts is not None else self.clock(),
            " ".join(pair.source), " ".join(pair.target), report.has_under, report.has_over,
        )
        out = report.to_dict()
        return {
            "ok": True,
            "id": out["id"],
            "has_under": out["has_under"],
            "has_over": out["has_over"],
            "violations": {"under": out["under"], "over": out["over"]},
        }

    def handle_line(self, line: str) -> str:
        try:
            request = json.loads(line)
            if not isinstance(request, dict):
                raise ValueError("request must be a JSON object")
        except ValueError as exc:
            return json.dumps({"ok": False, "error": f"bad request: {exc}"})
        return json.dumps(self.handle(request), ensure_ascii=False)


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        for raw in self.rfile:
            line = raw.decode("utf-8").strip()
            if not line:
                continue
            self.wfile.write((self.server.service.handle_line(line) + "\n").encode("utf-8"))
            self.wfile.flush()


class CheckServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address: Tuple[str, int], service: CheckService):
        super().__init__(address, _Handler)
        self.service = service


def make_server(
    lexicon_paths: Iterable,
    config: CheckConfig = CheckConfig(),
    host: str = "127.0.0.1",
    port: int = 0,
    window: float = DEFAULT_WINDOW,
    configs: Optional[Mapping[str, CheckConfig]] = None,
) -> CheckServer:
    """Load lexicons and bind; any load failure aborts startup."""
    lexicons = [load_lexicon(p) for p in lexicon_paths]
    service = CheckService(lexicons, configs, config, window)
    return CheckServer((host, port), service)


def serve(lexicon_paths, config: CheckConfig = CheckConfig(), host: str = "127.0.0.1", port: int = 8765, **kwargs):
    server = make_server(lexicon_paths, config, host, port, **kwargs)
    logger.info("serving %s on %s:%d", ", ".join(server.service.lexicons), *server.server_address[:2])
    try:
        server.serve_forever()
    finally:
        server.server_close()


class CheckClient:
    """Minimal line-protocol client."""

    def __init__(self, host: str, port: int, timeout: float = 10.0):
        import socket

        self.sock = socket.create_connection((host, port), timeout=timeout)
        self._reader = self.sock.makefile("r", encoding="utf-8")

    def request(self, payload: Mapping) -> dict:
        self.sock.sendall((json.dumps(payload, ensure_ascii=False) + "\n").encode("utf-8"))
        return json.loads(self._reader.readline())

    def check(self, direction: str, source: str, translation: str, **extra) -> dict:
        return self.request({"op": "check", "direction": direction, "source": source, "translation": translation, **extra})

    def stats(self) -> dict:
        return self.request({"op": "stats"})["stats"]

    def close(self):
        self._reader.close()
        self.sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
