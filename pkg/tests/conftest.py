"""Shared fixtures: tiny chart documents, flat backgrounds, one mock server."""

from __future__ import annotations

import json

import numpy as np
import pytest

from sitblend.chartspec import parse_spec
from sitblend.mockbackend import MockBackendServer


def make_doc(idiom="bar", width=160, height=160, data=None, style=None, options=None):
    if data is None:
        data = {"series": [{"label": "s", "values": [3.0, 7.0, 5.0]}]}
    doc = {
        "idiom": idiom,
        "canvas": {"width": width, "height": height},
        "data": data,
        "style": style or {},
        "options": options or {},
    }
    return doc


def make_spec(**kwargs):
    return parse_spec(json.dumps(make_doc(**kwargs)))


@pytest.fixture
def bar_spec():
    return make_spec()


@pytest.fixture
def flat_bg():
    return np.full((96, 128, 3), 150, dtype=np.uint8)


@pytest.fixture(scope="session")
def mock_server():
    with MockBackendServer() as server:
        yield server
