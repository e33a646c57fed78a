"""Data source validation and retrieval.

Sources are classified in priority order URL -> database DSN -> local file
path. HTTP fetches can carry data-space connector headers (API key plus
consumer/provider agent ids); database DSNs validate syntactically but are
not fetchable in this build.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from urllib.parse import urlparse

import httpx

from ..errors import EnerfitError


class UnrecognizedSourceError(EnerfitError):
    code = "UnrecognizedSource"


class UnsupportedSourceError(EnerfitError):
    code = "UnsupportedSource"


class IoError(EnerfitError):
    code = "IoError"


class HttpStatusError(EnerfitError):
    code = "HttpStatus"

    def __init__(self, status: int, url: str):
        super().__init__(f"HTTP {status} fetching {url}")
        self.status = status


class MalformedCsvError(EnerfitError):
    code = "MalformedCsv"

    def __init__(self, line: int, message: str):
        super().__init__(f"malformed CSV at line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class DataSource:
    kind: str  # "file" | "http" | "dsn"
    value: str


_DB_SCHEMES = {"postgres", "postgresql", "mysql", "mariadb", "sqlite", "mssql", "oracle", "mongodb"}
_PATH_RE = re.compile(r"^[A-Za-z0-9._~ +\-/\\]+$")


def validate_source(text: str) -> DataSource:
    """Classify a source string as HTTP endpoint, database DSN, or file path."""
    if not isinstance(text, str) or not text.strip():
        raise UnrecognizedSourceError(f"empty source {text!r}")
    candidate = text.strip()
    if "://" in candidate:
        parsed = urlparse(candidate)
        if parsed.scheme in ("http", "https") and parsed.netloc:
            return DataSource(kind="http", value=candidate)
        if parsed.scheme.lower() in _DB_SCHEMES:
            return DataSource(kind="dsn", value=candidate)
        raise UnrecognizedSourceError(f"unrecognized source {text!r}")
    if _PATH_RE.match(candidate):
        return DataSource(kind="file", value=candidate)
    raise UnrecognizedSourceError(f"unrecognized source {text!r}")


@dataclass(frozen=True)
class ConnectorConfig:
    """Static credentials for authenticated data-space fetches."""

    authorization: str
    consumer_agent_id: str
    provider_agent_id: str

    def __post_init__(self):
        if not self.authorization.startswith("APIKEY-") or len(self.authorization) <= len("APIKEY-"):
            raise EnerfitError(
                "authorization must be 'APIKEY-' plus a token", field="authorization"
            )
        if not self.consumer_agent_id:
            raise EnerfitError("consumer_agent_id must be non-empty", field="consumer_agent_id")
        if not self.provider_agent_id:
            raise EnerfitError("provider_agent_id must be non-empty", field="provider_agent_id")

    def headers(self) -> dict[str, str]:
        return {
            "Authorization": self.authorization,
            "X-Consumer-Agent-Id": self.consumer_agent_id,
            "X-Provider-Agent-Id": self.provider_agent_id,
        }


@dataclass
class RawTable:
    header: list[str]
    rows: list[list[str]]


def parse_csv(text: str) -> RawTable:
    """Parse RFC-4180 CSV text with a mandatory header row."""
    reader = csv.reader(io.StringIO(text))
    header: list[str] | None = None
    rows: list[list[str]] = []
    for line_no, record in enumerate(reader, start=1):
        if not record:
            continue  # blank line
        if header is None:
            header = [cell.strip() for cell in record]
            continue
        if len(record) != len(header):
            raise MalformedCsvError(line_no, f"expected {len(header)} cells, got {len(record)}")
        rows.append(record)
    if header is None:
        raise MalformedCsvError(1, "missing header row")
    return RawTable(header=header, rows=rows)


def fetch(source: DataSource, connector: ConnectorConfig | None = None) -> RawTable:
    """Retrieve and parse a CSV table from the given source.

    HTTP requests carry the three connector headers exactly when a connector
    is supplied, none otherwise.
    """
    if source.kind == "file":
        try:
            with open(source.value, "r", encoding="utf-8", newline="") as fh:
                text = fh.read()
        except OSError as exc:
            raise IoError(f"cannot read {source.value}: {exc}")
        return parse_csv(text)
    if source.kind == "http":
        headers = connector.headers() if connector is not None else {}
        try:
            response = httpx.get(source.value, headers=headers, timeout=30.0)
        except httpx.HTTPError as exc:
            raise IoError(f"cannot fetch {source.value}: {exc}")
        if not (200 <= response.status_code < 300):
            raise HttpStatusError(response.status_code, source.value)
        return parse_csv(response.text)
    raise UnsupportedSourceError(
        f"database DSN sources are validated but not fetchable: {source.value}"
    )
