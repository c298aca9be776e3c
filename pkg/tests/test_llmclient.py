"""Chat-completions client: wire shape, auth, retries."""

import pytest

from kgqa.errors import ConfigError, TransportError
from kgqa.llmclient import ChatCompletionsClient, ReasonerClientConfig


def _config(url, **overrides):
    defaults = dict(base_url=url, model_name="test-model", timeout=5.0,
                    max_retries=1, backoff_base=0.0)
    defaults.update(overrides)
    return ReasonerClientConfig(**defaults)


def test_config_validation():
    with pytest.raises(ConfigError):
        ReasonerClientConfig(base_url="x", model_name="m", timeout=0)
    with pytest.raises(ConfigError):
        ReasonerClientConfig(base_url="x", model_name="m", max_retries=-1)
    assert ReasonerClientConfig(base_url="x", model_name="m").temperature == 0.0


def test_request_shape_and_bearer_token(fake_server, monkeypatch):
    monkeypatch.setenv("KGQA_API_KEY", "sk-verysecret")
    fake_server.enqueue_chat("hello")
    client = ChatCompletionsClient(_config(fake_server.url))
    answer = client.complete([{"role": "user", "content": "hi"}])
    assert answer == "hello"
    request = fake_server.requests[0]
    assert request.method == "POST"
    payload = request.json()
    assert payload == {"model": "test-model",
                       "messages": [{"role": "user", "content": "hi"}],
                       "temperature": 0.0}
    assert request.headers["authorization"] == "Bearer sk-verysecret"


def test_no_key_no_header(fake_server, monkeypatch):
    monkeypatch.delenv("KGQA_API_KEY", raising=False)
    fake_server.enqueue_chat("ok")
    ChatCompletionsClient(_config(fake_server.url)).complete([])
    assert "authorization" not in fake_server.requests[0].headers


def test_retry_on_server_error(fake_server):
    fake_server.enqueue(500, "boom")
    fake_server.enqueue_chat("recovered")
    client = ChatCompletionsClient(_config(fake_server.url, max_retries=2))
    assert client.complete([]) == "recovered"
    assert len(fake_server.requests) == 2


def test_retries_exhausted(fake_server):
    for _ in range(3):
        fake_server.enqueue(503, "down")
    client = ChatCompletionsClient(_config(fake_server.url, max_retries=2))
    with pytest.raises(TransportError):
        client.complete([])
    assert len(fake_server.requests) == 3


def test_client_error_fails_fast(fake_server):
    fake_server.enqueue(401, "bad key")
    client = ChatCompletionsClient(_config(fake_server.url, max_retries=3))
    with pytest.raises(TransportError) as err:
        client.complete([])
    assert "401" in str(err.value)
    assert len(fake_server.requests) == 1


def test_malformed_completion(fake_server):
    fake_server.enqueue(200, {"choices": []})
    client = ChatCompletionsClient(_config(fake_server.url))
    with pytest.raises(TransportError) as err:
        client.complete([])
    assert "malformed" in str(err.value)
