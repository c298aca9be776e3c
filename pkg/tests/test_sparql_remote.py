"""SPARQL-protocol client against a local fake endpoint."""

import pytest

from kgqa.errors import RemoteExecutionError
from kgqa.sparql import EndpointConfig, RemoteExecutor, execute_remote


def _config(url, **overrides):
    defaults = dict(base_url=url, timeout=5.0, max_retries=1,
                    politeness_delay=0.0, backoff_base=0.0,
                    user_agent="kgqa-tests/0.1")
    defaults.update(overrides)
    return EndpointConfig(**defaults)


def bindings_doc(var, values):
    return {
        "head": {"vars": [var]},
        "results": {"bindings": [{var: value} for value in values]},
    }


class TestProtocol:
    def test_boolean_document(self, fake_server):
        fake_server.enqueue(200, {"boolean": True})
        result = execute_remote("ASK { wd:Q1 wdt:P1 wd:Q2 }", _config(fake_server.url))
        assert result.truth is True
        assert result.terms == {"true"}

    def test_uri_normalization(self, fake_server):
        fake_server.enqueue(200, bindings_doc("x", [
            {"type": "uri", "value": "http://www.wikidata.org/entity/Q42"},
        ]))
        result = execute_remote("SELECT ?x WHERE { wd:Q1 wdt:P1 ?x }",
                                _config(fake_server.url))
        assert result.terms == {"Q42"}

    def test_literal_passthrough(self, fake_server):
        fake_server.enqueue(200, bindings_doc("x", [
            {"type": "literal", "value": "1968-01-01T00:00:00Z"},
        ]))
        result = execute_remote("SELECT ?x WHERE { wd:Q1 wdt:P1 ?x }",
                                _config(fake_server.url))
        assert result.terms == {"1968-01-01T00:00:00Z"}

    def test_get_with_query_param_and_headers(self, fake_server):
        fake_server.enqueue(200, bindings_doc("x", []))
        execute_remote("SELECT ?x WHERE { wd:Q1 wdt:P1 ?x }",
                       _config(fake_server.url, user_agent="agent-007"))
        request = fake_server.requests[0]
        assert request.method == "GET"
        assert request.query["query"] == ["SELECT ?x WHERE { wd:Q1 wdt:P1 ?x }"]
        assert request.headers["accept"] == "application/sparql-results+json"
        assert request.headers["user-agent"] == "agent-007"

    def test_post_for_long_queries(self, fake_server):
        fake_server.enqueue(200, bindings_doc("x", []))
        long_query = "SELECT ?x WHERE { wd:Q1 wdt:P1 ?x } #" + "y" * 2100
        execute_remote(long_query, _config(fake_server.url))
        request = fake_server.requests[0]
        assert request.method == "POST"
        assert "query=" in request.body

    def test_multi_var_takes_first(self, fake_server):
        fake_server.enqueue(200, {
            "head": {"vars": ["a", "b"]},
            "results": {"bindings": [
                {"a": {"type": "uri", "value": "http://www.wikidata.org/entity/Q1"},
                 "b": {"type": "literal", "value": "x"}},
            ]},
        })
        result = execute_remote("SELECT ?a ?b WHERE { ?a wdt:P1 ?b }",
                                _config(fake_server.url))
        assert result.terms == {"Q1"}


class TestFailureModes:
    def test_http_error_carries_status_and_snippet(self, fake_server):
        fake_server.enqueue(500, "java.lang.StackOverflow deep in the engine")
        with pytest.raises(RemoteExecutionError) as err:
            execute_remote("SELECT ?x WHERE { wd:Q1 wdt:P1 ?x }",
                           _config(fake_server.url))
        assert "500" in str(err.value)
        assert "StackOverflow" in str(err.value)

    def test_rate_limit_retries_then_succeeds(self, fake_server):
        fake_server.enqueue(429, "slow down")
        fake_server.enqueue(200, {"boolean": False})
        result = execute_remote("ASK { wd:Q1 wdt:P1 wd:Q2 }",
                                _config(fake_server.url, max_retries=2))
        assert result.truth is False
        assert len(fake_server.requests) == 2

    def test_rate_limit_exhausted(self, fake_server):
        for _ in range(3):
            fake_server.enqueue(429, "busy")
        with pytest.raises(RemoteExecutionError):
            execute_remote("ASK { wd:Q1 wdt:P1 wd:Q2 }",
                           _config(fake_server.url, max_retries=2))

    def test_malformed_document(self, fake_server):
        fake_server.enqueue(200, "this is not json {")
        with pytest.raises(RemoteExecutionError) as err:
            execute_remote("SELECT ?x WHERE { wd:Q1 wdt:P1 ?x }",
                           _config(fake_server.url))
        assert "malformed" in str(err.value)

    def test_missing_results_key(self, fake_server):
        fake_server.enqueue(200, {"head": {"vars": ["x"]}})
        with pytest.raises(RemoteExecutionError):
            execute_remote("SELECT ?x WHERE { wd:Q1 wdt:P1 ?x }",
                           _config(fake_server.url))

    def test_connection_refused(self):
        config = _config("http://127.0.0.1:1/", max_retries=0)
        with pytest.raises(RemoteExecutionError) as err:
            execute_remote("ASK { wd:Q1 wdt:P1 wd:Q2 }", config)
        assert "transport" in str(err.value)


class TestExecutorHandle:
    def test_run_contract(self, fake_server):
        fake_server.enqueue(200, bindings_doc("x", [
            {"type": "uri", "value": "http://www.wikidata.org/entity/Q7"},
        ]))
        executor = RemoteExecutor(_config(fake_server.url))
        assert executor.run("SELECT ?x WHERE { wd:Q1 wdt:P1 ?x }").terms == {"Q7"}
