"""HTTP review service backing the browser correction frontend.

Read endpoints serve session metadata, per-millisecond event rasters,
cluster/assignment details, and labels; the only write path appends
correction records under an optimistic version check. The stream and the
auto labels are never mutated; /export always equals replaying the full
correction log over the auto labels.

All responses are JSON except /export, which returns the corrected label
file verbatim.
"""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .labels import Correction, CorrectionSet, write_corrections, write_labels
from .session import Session, open_session, raster_runs

MAX_FRAME_SPAN_MS = 2_000


class ServiceState:
    """Session handle plus the single-writer correction lock."""

    def __init__(self, session: Session, frontend_dir: Path | None = None):
        self.session = session
        self.frontend_dir = frontend_dir
        self.write_lock = threading.Lock()

    # -- corrections ------------------------------------------------------

    def append_corrections(self, base_version: int, records: list[dict]):
        """Append records if base_version matches; returns the new version.

        Raises VersionConflict when the client is stale; the client must
        reload and retry (last writer wins only through an explicit retry).
        """
        with self.write_lock:
            current = self.session.version()
            if base_version != current:
                raise VersionConflict(current)
            now_us = int(time.time() * 1e6)
            parsed = []
            for i, r in enumerate(records):
                parsed.append(Correction(
                    t_ms=int(r["t_ms"]), led_id=str(r["led_id"]),
                    action=str(r["action"]),
                    x=float(r["x"]) if r.get("x") is not None else None,
                    y=float(r["y"]) if r.get("y") is not None else None,
                    cluster_ref=int(r["cluster_ref"])
                    if r.get("cluster_ref") is not None else None,
                    author=str(r.get("author", "")) or "-",
                    created_at=now_us + i,
                ))
            # validate against the label table before committing
            merged = self.session.auto_labels()
            trial = CorrectionSet(tuple(self.session.corrections().records)
                                  + tuple(parsed))
            from .labels import apply_corrections
            apply_corrections(merged, trial,
                              cluster_centroid=self.session.cluster_centroid)
            body = write_corrections(CorrectionSet(tuple(parsed))).decode()
            lines = body.splitlines()[1:]  # drop the FCOR header
            with open(self.session.root / "corrections.log", "a") as fh:
                for line in lines:
                    fh.write(line + "\n")
            return self.session.version(), [r.t_ms for r in parsed]


class VersionConflict(Exception):
    def __init__(self, current: int):
        super().__init__(f"stale version; current is {current}")
        self.current = current


def _label_rows(table, t0=None, t1=None):
    src_names = {0: "auto", 1: "corrected", 2: "coasted"}
    out = []
    for i in range(len(table)):
        t = int(table.t_ms[i])
        if t0 is not None and not (t0 <= t < t1):
            continue
        out.append({
            "t_ms": t,
            "led_id": table.led_ids[int(table.led_idx[i])],
            "x": float(table.x[i]), "y": float(table.y[i]),
            "source": src_names[int(table.source[i])],
        })
    return out


class ReviewHandler(BaseHTTPRequestHandler):
    state: ServiceState  # set by make_server

    # -- plumbing ---------------------------------------------------------

    def log_message(self, fmt, *args):
        pass  # keep test output quiet

    def _json(self, payload, status=200):
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _bytes(self, body: bytes, ctype: str, status=200):
        self.send_response(status)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _error(self, status: int, message: str):
        self._json({"error": message}, status=status)

    def _tick_range(self, q, lo_key="t0_ms", hi_key="t1_ms"):
        s = self.state.session
        t0 = int(q.get(lo_key, ["0"])[0])
        t1 = int(q.get(hi_key, [str(t0 + 1)])[0])
        if t0 < 0 or t1 <= t0 or t1 > s.n_ticks:
            raise LookupError(f"tick range [{t0}, {t1}) outside "
                              f"[0, {s.n_ticks})")
        return t0, t1

    # -- routes -----------------------------------------------------------

    def do_GET(self):
        url = urlparse(self.path)
        q = parse_qs(url.query)
        s = self.state.session
        try:
            if url.path == "/session":
                meta = dict(s.meta)
                meta["version"] = s.version()
                meta["label_count"] = len(s.auto_labels())
                self._json(meta)
            elif url.path == "/frames":
                t0, t1 = self._tick_range(q)
                if t1 - t0 > MAX_FRAME_SPAN_MS:
                    raise LookupError(
                        f"span too large (max {MAX_FRAME_SPAN_MS} ms)")
                width = s.meta["sensor_width"]
                frames = []
                for t in range(t0, t1):
                    ev = s.events_in_span(t, t + 1)
                    frames.append({"t_ms": t, "runs": raster_runs(ev, width)})
                self._json({"width": width,
                            "height": s.meta["sensor_height"],
                            "frames": frames})
            elif url.path == "/clusters":
                t = int(q.get("t_ms", ["-1"])[0])
                if not 0 <= t < s.n_ticks:
                    raise LookupError(f"tick {t} outside [0, {s.n_ticks})")
                self._json({"t_ms": t, "clusters": s.clusters_at(t)})
            elif url.path == "/labels":
                t0, t1 = self._tick_range(q)
                self._json({"labels": _label_rows(s.auto_labels(), t0, t1)})
            elif url.path == "/export":
                self._bytes(write_labels(s.corrected_labels()),
                            "text/plain; charset=utf-8")
            else:
                # anything else is a frontend asset (/, /main.js, /ui/...)
                self._static(url.path)
        except LookupError as exc:
            self._error(404, str(exc))
        except Exception as exc:  # pragma: no cover - defensive
            self._error(500, f"{type(exc).__name__}: {exc}")

    def do_POST(self):
        url = urlparse(self.path)
        if url.path != "/corrections":
            self._error(404, f"unknown path {url.path}")
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            payload = json.loads(self.rfile.read(length) or b"{}")
            base = int(payload.get("base_version", -1))
            records = payload.get("records", [])
            version, ticks = self.state.append_corrections(base, records)
            merged = self.state.session.corrected_labels()
            touched = sorted(set(ticks))
            view = [r for r in _label_rows(merged) if r["t_ms"] in set(touched)]
            self._json({"version": version, "labels": view})
        except VersionConflict as exc:
            self._json({"error": str(exc), "current_version": exc.current},
                       status=409)
        except (KeyError, ValueError, TypeError) as exc:
            self._error(400, f"bad correction payload: {exc}")
        except Exception as exc:
            self._error(422, f"{type(exc).__name__}: {exc}")

    def _static(self, path: str):
        root = self.state.frontend_dir
        if root is None:
            self._error(404, "frontend not built")
            return
        rel = "index.html" if path in ("/", "/ui", "/ui/") \
            else path.removeprefix("/ui/").removeprefix("/")
        target = (root / rel).resolve()
        if not str(target).startswith(str(root.resolve())) or not target.is_file():
            self._error(404, f"no such asset {rel}")
            return
        ctype = {
            ".html": "text/html", ".js": "text/javascript",
            ".css": "text/css", ".map": "application/json",
        }.get(target.suffix, "application/octet-stream")
        self._bytes(target.read_bytes(), ctype)


def make_server(session_dir, port: int = 0,
                frontend_dir=None) -> ThreadingHTTPServer:
    """Bind the review service; port 0 picks a free port."""
    session = open_session(session_dir)
    if frontend_dir is None:
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        frontend_dir = candidate if candidate.exists() else None
    state = ServiceState(session, Path(frontend_dir) if frontend_dir else None)
    handler = type("BoundHandler", (ReviewHandler,), {"state": state})
    return ThreadingHTTPServer(("127.0.0.1", port), handler)


def serve_forever(session_dir, port: int, frontend_dir=None) -> None:
    server = make_server(session_dir, port, frontend_dir)
    host, bound_port = server.server_address
    print(f"review service on http://{host}:{bound_port} "
          f"(session {session_dir})", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
