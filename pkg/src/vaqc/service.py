"""Quantum-application-as-a-service job API.

Jobs are validated on submission, queued FIFO and executed by worker threads
through the same select -> transpile -> simulate pipeline as the CLI. The
in-process simulator stands in for the vendor's quantum hardware.

HTTP surface (JSON bodies)::

    POST /jobs        {"program", "shots", "backend_id"?, "seed"?} -> 202 {"job_id"}
    GET  /jobs/{id}   -> job record
    GET  /backends    -> registry
"""
from __future__ import annotations

import copy
import json
import logging
import queue
import threading
import time
import uuid
from dataclasses import dataclass, field
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Sequence

from .analyzer import BackendDescriptor, dump_registry, select_backend
from .circuit import Circuit
from .simulator import measurement_distribution, sample
from .transpiler import transpile
from .vaql import SourceError, parse_vaql

log = logging.getLogger(__name__)


class RequestError(ValueError):
    """A rejected submission; ``detail`` is the JSON error body."""

    def __init__(self, detail: dict, status: int = HTTPStatus.BAD_REQUEST):
        super().__init__(detail["error"])
        self.detail = detail
        self.status = status


class JobNotFound(KeyError):
    pass


@dataclass(frozen=True)
class JobRequest:
    program: str
    shots: int
    backend_id: str | None = None
    seed: int | None = None

    @classmethod
    def from_dict(cls, data) -> "JobRequest":
        if not isinstance(data, dict):
            raise RequestError({"error": "request body must be a JSON object"})
        unknown = set(data) - {"program", "shots", "backend_id", "seed"}
        if unknown:
            raise RequestError({"error": f"unknown request field(s): {sorted(unknown)}"})
        program, shots = data.get("program"), data.get("shots")
        seed, backend = data.get("seed"), data.get("backend_id")
        if not isinstance(program, str):
            raise RequestError({"error": "'program' must be vaql source text"})
        if not isinstance(shots, int) or isinstance(shots, bool):
            raise RequestError({"error": "'shots' must be an integer"})
        if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
            raise RequestError({"error": "'seed' must be an integer"})
        if backend is not None and not isinstance(backend, str):
            raise RequestError({"error": "'backend_id' must be a string"})
        return cls(program, shots, backend, seed)

    def to_dict(self) -> dict:
        return {"program": self.program, "shots": self.shots,
                "backend_id": self.backend_id, "seed": self.seed}


@dataclass
class JobRecord:
    id: str
    request: JobRequest
    position: int = 0
    status: str = "queued"
    submitted_at: float = field(default_factory=time.time)
    started_at: float | None = None
    finished_at: float | None = None
    result: dict | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        out = {"id": self.id, "position": self.position, "status": self.status,
               "submitted_at": self.submitted_at, "started_at": self.started_at, "finished_at": self.finished_at,
               "request": self.request.to_dict()}
        if self.result is not None:
            out["result"] = self.result
        if self.error is not None:
            out["error"] = self.error
        return out


def run_job(circuit: Circuit, request: JobRequest, registry: Sequence[BackendDescriptor]) -> dict:
    """select (or look up) backend -> transpile -> exact distribution -> sampled histogram."""
    if request.backend_id is None:
        ranking = select_backend(circuit, registry, "success", request.shots)
        best = ranking.best
        if best is None:
            raise RuntimeError("no feasible backend for this circuit")
        backend_id, program = best.backend_id, best.program
    else:
        backend = next(b for b in registry if b.id == request.backend_id)
        backend_id, program = backend.id, transpile(circuit, backend)
    dist = measurement_distribution(program.circuit)
    hist = sample(dist, request.shots, request.seed if request.seed is not None else 0)
    return {"histogram": dict(sorted(hist.counts.items())),
            "distribution": dict(sorted(dist.probabilities.items())),
            "backend_id": backend_id,
            "transpiled": program.to_dict()}


class JobService:
    """Thread-safe job store plus a FIFO queue drained by ``workers`` threads."""

    def __init__(self, registry: Sequence[BackendDescriptor], workers: int = 1,
                 journal: str | Path | None = None):
        if workers < 1:
            raise ValueError("need at least one worker")
        self.registry = list(registry)
        self.workers = workers
        self.journal = Path(journal) if journal else None
        self._jobs: dict[str, JobRecord] = {}
        self._lock = threading.Lock()
        self._queue: queue.Queue[str | None] = queue.Queue()
        self._threads: list[threading.Thread] = []

    def start(self) -> "JobService":
        for k in range(self.workers - len(self._threads)):
            t = threading.Thread(target=self._work, name=f"qaas-worker-{k}", daemon=True)
            t.start()
            self._threads.append(t)
        return self

    def stop(self, timeout: float | None = 5.0) -> None:
        for _ in self._threads:
            self._queue.put(None)
        for t in self._threads:
            t.join(timeout)
        self._threads.clear()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()

    def list_backends(self) -> list[BackendDescriptor]:
        return list(self.registry)

    def submit(self, req: JobRequest | dict) -> str:
        """Validate and enqueue; return the job id. Invalid requests raise RequestError."""
        if isinstance(req, dict):
            req = JobRequest.from_dict(req)
        if req.shots < 1:
            raise RequestError({"error": "shots must be at least 1"})
        try:
            parse_vaql(req.program)
        except SourceError as exc:
            raise RequestError(exc.to_dict()) from None
        if req.backend_id is not None and req.backend_id not in {b.id for b in self.registry}:
            raise RequestError({"error": f"unknown backend id {req.backend_id!r}"})
        with self._lock:
            job = JobRecord(uuid.uuid4().hex, req, position=len(self._jobs))
            self._jobs[job.id] = job
            self._write_journal(job)
            self._queue.put(job.id)
        return job.id

    def get(self, job_id: str) -> dict:
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None:
                raise JobNotFound(job_id)
            return copy.deepcopy(job.to_dict())

    def wait(self, job_id: str, timeout: float = 10.0) -> dict:
        deadline = time.monotonic() + timeout
        while True:
            rec = self.get(job_id)
            if rec["status"] in ("done", "failed") or time.monotonic() > deadline:
                return rec
            time.sleep(0.005)

    def _write_journal(self, job: JobRecord) -> None:
        if self.journal is not None:
            with self.journal.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(job.to_dict()) + "\n")

    def _transition(self, job_id: str, **changes) -> JobRecord:
        with self._lock:
            job = self._jobs[job_id]
            for k, v in changes.items():
                setattr(job, k, v)
            self._write_journal(job)
            return job

    def _work(self) -> None:
        while True:
            job_id = self._queue.get()
            if job_id is None:
                return
            job = self._transition(job_id, status="running", started_at=time.time())
            try:
                circuit = parse_vaql(job.request.program)
                result = run_job(circuit, job.request, self.registry)
            except Exception as exc:  # job failures are data, the worker keeps going
                log.info("job %s failed: %s", job_id, exc)
                self._transition(job_id, status="failed", error=str(exc), finished_at=time.time())
            else:
                self._transition(job_id, status="done", result=result, finished_at=time.time())


def _make_handler(service: JobService):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, fmt, *args):
            log.debug("%s - " + fmt, self.address_string(), *args)

        def _send(self, status: int, body) -> None:
            data = json.dumps(body).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def do_GET(self):
            path = self.path.rstrip("/")
            if path == "/backends":
                self._send(HTTPStatus.OK, json.loads(dump_registry(service.list_backends())))
            elif path.startswith("/jobs/"):
                try:
                    self._send(HTTPStatus.OK, service.get(path[len("/jobs/"):]))
                except JobNotFound:
                    self._send(HTTPStatus.NOT_FOUND, {"error": "job not found"})
            else:
                self._send(HTTPStatus.NOT_FOUND, {"error": "no such endpoint"})

        def do_POST(self):
            if self.path.rstrip("/") != "/jobs":
                self._send(HTTPStatus.NOT_FOUND, {"error": "no such endpoint"})
                return
            length = int(self.headers.get("Content-Length") or 0)
            try:
                body = json.loads(self.rfile.read(length) or b"null")
                job_id = service.submit(JobRequest.from_dict(body))
            except json.JSONDecodeError as exc:
                self._send(HTTPStatus.BAD_REQUEST, {"error": f"invalid JSON: {exc}"})
            except RequestError as exc:
                self._send(exc.status, exc.detail)
            else:
                self._send(HTTPStatus.ACCEPTED, {"job_id": job_id})

    return Handler


def make_server(service: JobService, host: str = "127.0.0.1", port: int = 8000) -> ThreadingHTTPServer:
    server = ThreadingHTTPServer((host, port), _make_handler(service))
    server.daemon_threads = True
    return server


def serve(registry: Sequence[BackendDescriptor], port: int = 8000, workers: int = 1,
          journal: str | Path | None = None, host: str = "127.0.0.1") -> None:
    service = JobService(registry, workers, journal).start()
    server = make_server(service, host, port)
    log.info("serving on http://%s:%d", host, server.server_address[1])
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
        service.stop()
