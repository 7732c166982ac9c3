"""Generation client: payload canonicalization, validation, wire behavior.

The HTTP tests run against the in-process mock server, so they exercise the
real request/poll loop end to end.
"""

from __future__ import annotations

import base64
import json

import numpy as np
import pytest

from sitblend.diffusion import (
    ControlUnit,
    DiffusionClient,
    GenerationRequest,
    canonical_payload,
    pad_to_multiple,
    validate_request,
)
from sitblend.errors import (
    BackendConnectError,
    BackendError,
    GenerationTimeout,
    RequestError,
)
from sitblend.mockbackend import MODEL_NAME, MockBackendServer, mock_generate
from sitblend.png import decode_png


def _req(**over):
    base = dict(prompt="a wall", width=64, height=48, seed=7)
    base.update(over)
    return GenerationRequest(**base)


# ---------------------------------------------------------------------------
# validation


def test_validate_rejects_bad_fields():
    cases = [
        dict(prompt=""),
        dict(width=0),
        dict(height=-8),
        dict(width=65),          # not a multiple of 8
        dict(steps=0),
        dict(cfg_scale=0),
        dict(denoising_strength=1.5),
    ]
    for over in cases:
        with pytest.raises(RequestError):
            validate_request(_req(**over))


def test_validate_rejects_bad_controls():
    good_map = np.zeros((48, 64), dtype=np.uint8)
    with pytest.raises(RequestError, match="role"):
        validate_request(_req(controls=(ControlUnit("sketch", good_map),)))
    with pytest.raises(RequestError, match="weight"):
        validate_request(_req(controls=(ControlUnit("outline", good_map, weight=-1),)))
    with pytest.raises(RequestError, match="32x32"):
        validate_request(
            _req(controls=(ControlUnit("outline", np.zeros((32, 32), np.uint8)),))
        )


def test_validate_rejects_mismatched_init():
    with pytest.raises(RequestError, match="init image"):
        validate_request(_req(init_image=np.zeros((20, 20, 3), np.uint8)))


# ---------------------------------------------------------------------------
# canonical payload


def test_payload_is_byte_stable():
    init = np.full((48, 64, 3), 90, dtype=np.uint8)
    ctrl = ControlUnit("outline", np.zeros((48, 64), np.uint8), weight=1.0)
    a = canonical_payload(_req(init_image=init, controls=(ctrl,)))
    b = canonical_payload(_req(init_image=init, controls=(ctrl,)))
    assert a == b


def test_payload_key_order_and_separators():
    body = canonical_payload(_req()).decode("utf-8")
    keys = list(json.loads(body).keys())
    assert keys == [
        "prompt", "negative_prompt", "seed", "steps", "cfg_scale",
        "denoising_strength", "width", "height", "init_image", "controls",
    ]
    assert ": " not in body and ", " not in body


def test_payload_images_round_trip():
    init = np.arange(48 * 64 * 3, dtype=np.uint8).reshape(48, 64, 3)
    body = json.loads(canonical_payload(_req(init_image=init)))
    back = decode_png(base64.b64decode(body["init_image"]))
    assert np.array_equal(back, init)


# ---------------------------------------------------------------------------
# padding


def test_pad_to_multiple_noop_and_edge_replicate():
    ok = np.zeros((48, 64), dtype=np.uint8)
    assert pad_to_multiple(ok) is ok
    img = np.arange(30, dtype=np.uint8).reshape(5, 6)
    padded = pad_to_multiple(img)
    assert padded.shape == (8, 8)
    assert (padded[5:, :6] == img[-1]).all()       # bottom rows replicate
    assert (padded[:5, 6:] == img[:, -1:]).all()   # right cols replicate


# ---------------------------------------------------------------------------
# mock model semantics


def test_mock_generate_zero_strength_returns_init():
    init = np.random.default_rng(0).integers(0, 256, (10, 12, 3)).astype(np.uint8)
    out = mock_generate(init, np.full((10, 12), 255, np.uint8), 0.0, 42)
    assert np.array_equal(out, init)


def test_mock_generate_tint_direction():
    # dark init -> light tint where the outline fires
    dark = np.full((8, 8, 3), 30, dtype=np.uint8)
    outline = np.zeros((8, 8), dtype=np.uint8)
    outline[4, 4] = 255
    out = mock_generate(dark, outline, 1.0, 42)
    assert (out[4, 4] > 200).all()
    assert np.array_equal(out[0, 0], dark[0, 0])
    # light init -> dark tint
    light = np.full((8, 8, 3), 220, dtype=np.uint8)
    out = mock_generate(light, outline, 1.0, 42)
    assert (out[4, 4] < 64).all()


def test_mock_generate_deterministic_in_seed():
    init = np.full((8, 8, 3), 30, dtype=np.uint8)
    outline = np.full((8, 8), 255, dtype=np.uint8)
    a = mock_generate(init, outline, 0.5, 7)
    b = mock_generate(init, outline, 0.5, 7)
    c = mock_generate(init, outline, 0.5, 8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


# ---------------------------------------------------------------------------
# wire protocol against the mock server


def _client(server, **over):
    kw = dict(timeout=10.0, poll_interval=0.02)
    kw.update(over)
    return DiffusionClient(server.url, **kw)


def test_health_reports_model(mock_server):
    reply = _client(mock_server).health()
    assert reply == {"status": "ok", "model": MODEL_NAME}


def test_generate_round_trip(mock_server):
    init = np.full((48, 64, 3), 40, dtype=np.uint8)
    outline = np.zeros((48, 64), dtype=np.uint8)
    outline[10, :] = 255
    req = _req(init_image=init, controls=(ControlUnit("outline", outline),))
    result = _client(mock_server).generate(req)
    assert result.image.shape == (48, 64, 3)
    assert result.seed == 7
    assert result.job_id
    # outline row got tinted, elsewhere untouched
    assert (result.image[10] != init[10]).any()
    assert np.array_equal(result.image[20], init[20])


def test_generate_identical_requests_identical_images(mock_server):
    init = np.full((48, 64, 3), 40, dtype=np.uint8)
    outline = np.full((48, 64), 120, dtype=np.uint8)
    req = _req(init_image=init, controls=(ControlUnit("outline", outline),))
    client = _client(mock_server)
    a = client.generate(req)
    b = client.generate(req)
    assert np.array_equal(a.image, b.image)


def test_auto_pad_crops_result_back(mock_server):
    init = np.full((45, 61, 3), 40, dtype=np.uint8)
    outline = np.zeros((45, 61), dtype=np.uint8)
    req = GenerationRequest(prompt="p", width=61, height=45, seed=1,
                            init_image=init,
                            controls=(ControlUnit("outline", outline),))
    client = _client(mock_server, auto_pad=True)
    result = client.generate(req)
    assert result.image.shape == (45, 61, 3)
    # without auto_pad the same request is rejected locally
    with pytest.raises(RequestError):
        _client(mock_server).generate(req)


def test_latency_polls_then_done():
    with MockBackendServer(latency_polls=3) as server:
        result = _client(server).generate(_req())
        assert result.image.shape == (48, 64, 3)


def test_timeout_names_the_job():
    with MockBackendServer(latency_polls=10_000) as server:
        client = _client(server, timeout=0.15, poll_interval=0.02)
        with pytest.raises(GenerationTimeout) as err:
            client.generate(_req())
        assert err.value.job_id


def test_injected_failure_surfaces_payload(mock_server):
    mock_server.fail_next(500, "gpu fell over")
    with pytest.raises(BackendError, match="HTTP 500") as err:
        _client(mock_server).generate(_req())
    assert "gpu fell over" in err.value.payload


def test_server_side_validation_rejected(mock_server):
    # bypass client validation by posting raw bytes
    client = _client(mock_server)
    body = json.dumps({"prompt": "", "seed": 1, "width": 64, "height": 48,
                       "denoising_strength": 0.5, "controls": []}).encode()
    with pytest.raises(BackendError, match="HTTP 400"):
        client._request("POST", "/generate", data=body)


def test_unknown_job_polls_as_error(mock_server):
    with pytest.raises(BackendError, match="HTTP 404"):
        _client(mock_server).poll("deadbeef")


def test_unreachable_backend_raises_connect_error():
    client = DiffusionClient("http://127.0.0.1:9", timeout=0.2,
                             poll_interval=0.01, connect_retries=2)
    with pytest.raises(BackendConnectError):
        client.health()
