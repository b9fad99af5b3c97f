import functools
from pathlib import Path

import pytest

from opcoh.presentation import load

GOLDEN = Path(__file__).parent / "golden"


@functools.lru_cache(maxsize=None)
def builtin(name):
    # shared across tests so the per-presentation caches are reused
    return load(name)


@pytest.fixture
def golden():
    return GOLDEN
