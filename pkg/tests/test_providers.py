"""Provider layer: deterministic embedding, cosine, mock and remote chat."""
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from coforge.errors import InvalidSpecError, ProviderRejectedError, ProviderUnreachableError
from coforge.providers import (
    FALLBACK_PREFIX,
    MOCK_DIMENSION,
    ChatTurn,
    EmbeddingVector,
    GenParams,
    MockProvider,
    RemoteProvider,
    cosine,
    fnv1a64,
    hash_embed,
)

# Published FNV-1a 64-bit reference values.
FNV_VECTORS = [
    (b"", 0xCBF29CE484222325),
    (b"a", 0xAF63DC4C8601EC8C),
    (b"hello", 0xA430D84680AABD0B),
    (b"foobar", 0x85944171F73967E8),
]


@pytest.mark.parametrize("data,expected", FNV_VECTORS)
def test_fnv1a64_reference_vectors(data, expected):
    assert fnv1a64(data) == expected


@given(st.binary(max_size=64))
def test_fnv1a64_matches_oracle(data):
    assert fnv1a64(data) == oracles.fnv1a(data)


class TestHashEmbed:
    def test_empty_text_is_zero_vector(self):
        vec = hash_embed("")
        assert vec.is_zero()
        assert vec.dimension == MOCK_DIMENSION

    def test_whitespace_only_is_zero_vector(self):
        assert hash_embed("  \n\t ").is_zero()

    def test_case_and_punctuation_insensitive(self):
        assert hash_embed("Hello, World!").components == hash_embed("hello world").components

    def test_underscore_is_a_token_separator(self):
        assert hash_embed("foo_bar").components == hash_embed("foo bar").components

    def test_unit_norm(self):
        vec = hash_embed("press the green button to start")
        assert math.isclose(vec.norm, 1.0, rel_tol=0, abs_tol=1e-12)

    @given(st.text(max_size=80))
    @settings(max_examples=200)
    def test_matches_oracle_componentwise(self, text):
        assert hash_embed(text).components == oracles.embed(text)

    @given(st.text(min_size=1, max_size=60))
    def test_deterministic(self, text):
        assert hash_embed(text).components == hash_embed(text).components

    def test_custom_dimension(self):
        vec = hash_embed("hello", dimension=8)
        assert vec.dimension == 8
        assert vec.components == oracles.embed("hello", dimension=8)


finite_components = st.lists(
    st.floats(min_value=-10, max_value=10, allow_nan=False), min_size=4, max_size=4
)


class TestCosine:
    def test_zero_vector_scores_zero(self):
        zero = EmbeddingVector((0.0,) * 4)
        other = EmbeddingVector((1.0, 0.0, 0.0, 0.0))
        assert cosine(zero, other) == 0.0
        assert cosine(other, zero) == 0.0
        assert cosine(zero, zero) == 0.0

    @given(finite_components)
    def test_self_similarity_is_exactly_one(self, comps):
        vec = EmbeddingVector(tuple(comps))
        if vec.is_zero():
            assert cosine(vec, vec) == 0.0
        else:
            assert cosine(vec, vec) == 1.0

    @given(finite_components, finite_components)
    def test_symmetric_and_bounded(self, a, b):
        va, vb = EmbeddingVector(tuple(a)), EmbeddingVector(tuple(b))
        s = cosine(va, vb)
        assert s == cosine(vb, va)
        assert -1.0 <= s <= 1.0

    @given(finite_components, finite_components)
    def test_matches_oracle(self, a, b):
        va, vb = EmbeddingVector(tuple(a)), EmbeddingVector(tuple(b))
        assert cosine(va, vb) == pytest.approx(oracles.cosine(a, b), abs=1e-12)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(InvalidSpecError):
            cosine(EmbeddingVector((1.0, 0.0)), EmbeddingVector((1.0, 0.0, 0.0)))


class TestChatTurn:
    def test_roles_validated(self):
        with pytest.raises(InvalidSpecError):
            ChatTurn(role="narrator", content="hi")

    def test_empty_content_only_for_system(self):
        ChatTurn(role="system", content="")
        with pytest.raises(InvalidSpecError):
            ChatTurn(role="user", content="")
        with pytest.raises(InvalidSpecError):
            ChatTurn(role="assistant", content="   ")


class TestGenParams:
    def test_defaults(self):
        params = GenParams()
        assert params.temperature == 0.7
        assert params.max_output_tokens == 512
        assert params.stop_sequences == ()

    @pytest.mark.parametrize("temp", [-0.1, 2.01])
    def test_temperature_range(self, temp):
        with pytest.raises(InvalidSpecError):
            GenParams(temperature=temp)

    def test_max_tokens_positive(self):
        with pytest.raises(InvalidSpecError):
            GenParams(max_output_tokens=0)

    def test_stop_sequences_capped(self):
        with pytest.raises(InvalidSpecError):
            GenParams(stop_sequences=("a", "b", "c", "d", "e"))


class TestMockProvider:
    def test_scripted_replies_fifo(self):
        mock = MockProvider(script=("first", "second"))
        turns = [ChatTurn("user", "hi")]
        assert mock.chat_complete(turns) == "first"
        assert mock.chat_complete(turns) == "second"
        assert mock.script_remaining() == 0

    def test_fallback_echoes_last_user_content(self):
        mock = MockProvider()
        reply = mock.chat_complete(
            [
                ChatTurn("system", "be brief"),
                ChatTurn("user", "how do I scan?"),
                ChatTurn("assistant", "press the button"),
                ChatTurn("user", "which button?"),
            ]
        )
        assert reply == FALLBACK_PREFIX + "which button?"

    def test_fallback_without_user_turn(self):
        mock = MockProvider()
        reply = mock.chat_complete([ChatTurn("system", "be brief")])
        assert reply == FALLBACK_PREFIX

    def test_calls_are_recorded_immutably(self):
        mock = MockProvider(script=("ok",))
        turns = [ChatTurn("user", "hello")]
        mock.chat_complete(turns)
        turns.append(ChatTurn("user", "mutated"))
        assert len(mock.chat_calls) == 1
        assert mock.chat_calls[0] == (ChatTurn("user", "hello"),)

    def test_extend_script(self):
        mock = MockProvider()
        mock.extend_script(["later"])
        assert mock.chat_complete([ChatTurn("user", "x")]) == "later"

    def test_embed_uses_hash_embedding(self):
        mock = MockProvider()
        vec = mock.embed_text("green button")
        assert vec.components == hash_embed("green button").components
        assert mock.embed_calls == 1

    def test_dimension(self):
        assert MockProvider().dimension == 64
        assert MockProvider(dimension=16).embed_text("x").dimension == 16


class _FakeResponse:
    def __init__(self, status_code=200, payload=None):
        self.status_code = status_code
        self._payload = payload if payload is not None else {}
        self.text = "body"

    def json(self):
        if isinstance(self._payload, Exception):
            raise self._payload
        return self._payload


class _FakeSession:
    def __init__(self, response):
        self.response = response
        self.requests = []

    def post(self, url, json=None, headers=None, timeout=None):
        self.requests.append({"url": url, "json": json, "headers": headers, "timeout": timeout})
        if isinstance(self.response, Exception):
            raise self.response
        return self.response


class TestRemoteProvider:
    def _provider(self, response, **kwargs):
        fake = _FakeSession(response)
        provider = RemoteProvider(
            base_url="http://upstream/v1",
            model="m",
            embed_model="e",
            dimension=4,
            api_key="sk-test",
            session=fake,
            **kwargs,
        )
        return provider, fake

    def test_chat_posts_openai_shape(self):
        payload = {"choices": [{"message": {"content": "fine"}}]}
        provider, fake = self._provider(_FakeResponse(payload=payload))
        reply = provider.chat_complete(
            [ChatTurn("user", "hi")], GenParams(temperature=0.1, max_output_tokens=9)
        )
        assert reply == "fine"
        req = fake.requests[0]
        assert req["url"] == "http://upstream/v1/chat/completions"
        assert req["json"]["model"] == "m"
        assert req["json"]["messages"] == [{"role": "user", "content": "hi"}]
        assert req["json"]["temperature"] == 0.1
        assert req["json"]["max_tokens"] == 9
        assert req["headers"]["Authorization"] == "Bearer sk-test"
        assert req["timeout"] == 30.0

    def test_embed_posts_and_parses(self):
        payload = {"data": [{"embedding": [1.0, 0.0, 0.0, 0.0]}]}
        provider, fake = self._provider(_FakeResponse(payload=payload))
        vec = provider.embed_text("hello")
        assert vec.components == (1.0, 0.0, 0.0, 0.0)
        assert fake.requests[0]["url"] == "http://upstream/v1/embeddings"
        assert fake.requests[0]["json"] == {"model": "e", "input": "hello"}

    def test_transport_error_maps_to_unreachable(self):
        import requests as requests_lib

        provider, _ = self._provider(requests_lib.ConnectionError("refused"))
        with pytest.raises(ProviderUnreachableError):
            provider.chat_complete([ChatTurn("user", "hi")])

    def test_http_error_maps_to_rejected(self):
        provider, _ = self._provider(_FakeResponse(status_code=429))
        with pytest.raises(ProviderRejectedError):
            provider.chat_complete([ChatTurn("user", "hi")])

    def test_malformed_body_maps_to_rejected(self):
        provider, _ = self._provider(_FakeResponse(payload={"unexpected": True}))
        with pytest.raises(ProviderRejectedError):
            provider.chat_complete([ChatTurn("user", "hi")])

    def test_api_key_from_environment(self, monkeypatch):
        monkeypatch.setenv("AGENT_COFORGE_API_KEY", "sk-env")
        payload = {"choices": [{"message": {"content": "ok"}}]}
        fake = _FakeSession(_FakeResponse(payload=payload))
        provider = RemoteProvider(
            base_url="http://upstream/v1", model="m", embed_model="e", session=fake
        )
        provider.chat_complete([ChatTurn("user", "hi")])
        assert fake.requests[0]["headers"]["Authorization"] == "Bearer sk-env"
