from __future__ import annotations

import pytest

from villa.pipeline import build_datastores
from villa.responders import OracleResponder

from synthetic import build_fixture, fixture_embedder


@pytest.fixture(scope="session")
def fixture():
    return build_fixture()


@pytest.fixture(scope="session")
def embedder():
    return fixture_embedder()


@pytest.fixture(scope="session")
def stores(fixture, embedder):
    store_a, store_f, warnings = build_datastores(
        fixture.corpus,
        embedder,
        chunk_size=fixture.chunk_size,
        chunk_overlap=fixture.chunk_overlap,
    )
    assert not warnings
    return store_a, store_f


@pytest.fixture()
def oracle(fixture):
    return OracleResponder(fixture.gt)
