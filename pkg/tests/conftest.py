"""Shared fixtures: snapshots, dataset files, and a local fake HTTP server."""

import json
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

import pytest

from kgqa import data as toy_data
from kgqa.kgstore import load_snapshot


@pytest.fixture(scope="session")
def toy_snapshot():
    return load_snapshot(toy_data.toy_entity_file(), toy_data.toy_predicate_file(),
                         toy_data.toy_triple_file())


@pytest.fixture
def snapshot_files(tmp_path):
    """Write snapshot input files and return their paths.

    ``entities`` are (id, label) or (id, label, description, aliases) tuples,
    ``triples`` are (s, p, o) tuples rendered as TSV.
    """

    def build(entities, predicates, triples, entity_lines=None, triple_lines=None):
        entity_file = tmp_path / "entities.jsonl"
        predicate_file = tmp_path / "predicates.jsonl"
        triple_file = tmp_path / "triples.tsv"
        if entity_lines is None:
            entity_lines = []
            for row in entities:
                row = (list(row) + ["", []])[:4] if len(row) < 4 else list(row)
                entity_lines.append(json.dumps({
                    "id": row[0], "label": row[1], "description": row[2],
                    "aliases": row[3],
                }))
        entity_file.write_text("\n".join(entity_lines) + "\n", encoding="utf-8")
        predicate_file.write_text(
            "\n".join(json.dumps({"id": p[0], "label": p[1],
                                  "description": p[2] if len(p) > 2 else ""})
                      for p in predicates) + "\n", encoding="utf-8")
        if triple_lines is None:
            triple_lines = ["\t".join(t) for t in triples]
        triple_file.write_text("\n".join(triple_lines) + ("\n" if triple_lines else ""),
                               encoding="utf-8")
        return entity_file, predicate_file, triple_file

    return build


@dataclass
class RecordedRequest:
    method: str
    path: str
    query: dict
    headers: dict
    body: str

    def json(self):
        return json.loads(self.body)


@dataclass
class FakeHttpServer:
    requests: list = field(default_factory=list)
    _queue: list = field(default_factory=list)
    default_response: tuple = (200, {})

    def start(self):
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def _handle(self):
                parsed = urlparse(self.path)
                length = int(self.headers.get("Content-Length") or 0)
                body = self.rfile.read(length).decode("utf-8") if length else ""
                outer.requests.append(RecordedRequest(
                    self.command, parsed.path, parse_qs(parsed.query),
                    {k.lower(): v for k, v in self.headers.items()}, body))
                if outer._queue:
                    status, payload = outer._queue.pop(0)
                else:
                    status, payload = outer.default_response
                if isinstance(payload, bytes):
                    data = payload
                elif isinstance(payload, str):
                    data = payload.encode("utf-8")
                else:
                    data = json.dumps(payload).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            do_GET = _handle
            do_POST = _handle

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(
            target=lambda: self._server.serve_forever(poll_interval=0.02), daemon=True)
        self._thread.start()
        return self

    @property
    def url(self) -> str:
        return f"http://127.0.0.1:{self._server.server_port}/"

    def enqueue(self, status, payload):
        self._queue.append((status, payload))

    def enqueue_chat(self, content, status=200):
        self.enqueue(status, {"choices": [{"message": {"content": content}}]})

    def close(self):
        self._server.shutdown()
        self._server.server_close()


@pytest.fixture
def fake_server():
    server = FakeHttpServer().start()
    yield server
    server.close()
