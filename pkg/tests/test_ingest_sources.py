import pytest

from enerfit.errors import EnerfitError
from enerfit.ingest import (
    ConnectorConfig,
    HttpStatusError,
    IoError,
    MalformedCsvError,
    UnrecognizedSourceError,
    UnsupportedSourceError,
    fetch,
    parse_csv,
    validate_source,
)
from enerfit.ingest.mock_provider import MockProvider


class TestValidateSource:
    def test_http_endpoint(self):
        source = validate_source("https://baseurl/data-app-path/openapi/v1/endpoint")
        assert source.kind == "http"

    def test_local_file(self):
        source = validate_source("/srv/shared_storage/data.csv")
        assert source.kind == "file"

    def test_dsn(self):
        source = validate_source("postgresql://user:pw@host:5432/db")
        assert source.kind == "dsn"

    @pytest.mark.parametrize("text", ["ht!tp:::bad", "", "   ", "ftp://host/x", "a:b!c"])
    def test_unrecognized(self, text):
        with pytest.raises(UnrecognizedSourceError):
            validate_source(text)

    def test_url_beats_file_classification(self):
        assert validate_source("http://host/a/b.csv").kind == "http"


class TestConnectorConfig:
    def test_valid(self):
        config = ConnectorConfig("APIKEY-secret", "urn:consumer:1", "urn:provider:2")
        assert config.headers() == {
            "Authorization": "APIKEY-secret",
            "X-Consumer-Agent-Id": "urn:consumer:1",
            "X-Provider-Agent-Id": "urn:provider:2",
        }

    @pytest.mark.parametrize(
        "auth,consumer,provider",
        [
            ("secret", "urn:c", "urn:p"),
            ("APIKEY-", "urn:c", "urn:p"),
            ("APIKEY-x", "", "urn:p"),
            ("APIKEY-x", "urn:c", ""),
        ],
    )
    def test_invalid(self, auth, consumer, provider):
        with pytest.raises(EnerfitError):
            ConnectorConfig(auth, consumer, provider)


class TestParseCsv:
    def test_basic(self):
        table = parse_csv("a,b\n1,2\n3,4\n")
        assert table.header == ["a", "b"]
        assert table.rows == [["1", "2"], ["3", "4"]]

    def test_ragged_row_names_line(self):
        with pytest.raises(MalformedCsvError) as err:
            parse_csv("a,b\n1,2\n3\n")
        assert err.value.line == 3

    def test_empty_document(self):
        with pytest.raises(MalformedCsvError):
            parse_csv("")

    def test_quoted_cells(self):
        table = parse_csv('a,b\n"x,y",2\n')
        assert table.rows == [["x,y", "2"]]


class TestFetch:
    def test_local_file(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("a,b\n1,2\n3,4\n5,6\n", encoding="utf-8")
        table = fetch(validate_source(str(path)))
        assert len(table.rows) == 3

    def test_local_file_missing(self, tmp_path):
        with pytest.raises(IoError):
            fetch(validate_source(str(tmp_path / "nope.csv")))

    def test_http_with_connector_sends_exactly_three_headers(self):
        connector = ConnectorConfig("APIKEY-good", "urn:consumer:a", "urn:provider:b")
        with MockProvider("a,b\n1,2\n", api_key="APIKEY-good") as provider:
            table = fetch(validate_source(provider.url), connector)
            assert table.rows == [["1", "2"]]
            assert provider.requests[-1] == {
                "path": "/data.csv",
                "authorization": "APIKEY-good",
                "consumer_agent_id": "urn:consumer:a",
                "provider_agent_id": "urn:provider:b",
            }

    def test_http_without_connector_sends_no_connector_headers(self):
        with MockProvider("a,b\n1,2\n") as provider:
            fetch(validate_source(provider.url))
            recorded = provider.requests[-1]
            assert recorded["authorization"] is None
            assert recorded["consumer_agent_id"] is None
            assert recorded["provider_agent_id"] is None

    def test_http_wrong_key_is_401(self):
        connector = ConnectorConfig("APIKEY-wrong", "urn:c", "urn:p")
        with MockProvider("a,b\n1,2\n", api_key="APIKEY-good") as provider:
            with pytest.raises(HttpStatusError) as err:
                fetch(validate_source(provider.url), connector)
            assert err.value.status == 401

    def test_unreachable_endpoint(self):
        with pytest.raises(IoError):
            fetch(validate_source("http://127.0.0.1:9/never-there.csv"))

    def test_dsn_fetch_unsupported(self):
        with pytest.raises(UnsupportedSourceError):
            fetch(validate_source("postgresql://u@h/db"))
