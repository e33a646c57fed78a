"""Tiny in-process data provider for exercising the HTTP fetch path.

Serves one CSV document, checks the API key, and records the connector
headers of every request so tests can assert exactly what was sent.
"""

from __future__ import annotations

import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


class MockProvider:
    def __init__(self, csv_text: str, api_key: str | None = None):
        self.csv_text = csv_text
        self.api_key = api_key
        self.requests: list[dict] = []
        provider = self

        class Handler(BaseHTTPRequestHandler):
            def do_GET(self):
                provider.requests.append(
                    {
                        "path": self.path,
                        "authorization": self.headers.get("Authorization"),
                        "consumer_agent_id": self.headers.get("X-Consumer-Agent-Id"),
                        "provider_agent_id": self.headers.get("X-Provider-Agent-Id"),
                    }
                )
                if provider.api_key is not None and self.headers.get("Authorization") != provider.api_key:
                    self.send_response(401)
                    self.end_headers()
                    return
                body = provider.csv_text.encode("utf-8")
                self.send_response(200)
                self.send_header("Content-Type", "text/csv")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def log_message(self, *args):  # keep test output quiet
                pass

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}/data.csv"

    def __enter__(self) -> "MockProvider":
        self._thread.start()
        return self

    def __exit__(self, *exc) -> None:
        self._server.shutdown()
        self._server.server_close()
