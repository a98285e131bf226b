"""Shared fixtures: small hand-checkable datasets and a cached synthetic KDD-shaped set."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mimicids.data import Dataset, FeatureVector, Label, Schema

settings.register_profile("ci", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")

# Classic 14-day play-tennis table. "yes" is the negative (benign) class.
TENNIS_ROWS = [
    ("sunny", "hot", "high", "weak", "no"),
    ("sunny", "hot", "high", "strong", "no"),
    ("overcast", "hot", "high", "weak", "yes"),
    ("rain", "mild", "high", "weak", "yes"),
    ("rain", "cool", "normal", "weak", "yes"),
    ("rain", "cool", "normal", "strong", "no"),
    ("overcast", "cool", "normal", "strong", "yes"),
    ("sunny", "mild", "high", "weak", "no"),
    ("sunny", "cool", "normal", "weak", "yes"),
    ("rain", "mild", "normal", "weak", "yes"),
    ("sunny", "mild", "normal", "strong", "yes"),
    ("overcast", "mild", "high", "strong", "yes"),
    ("overcast", "hot", "normal", "weak", "yes"),
    ("rain", "mild", "high", "strong", "no"),
]

TENNIS_SCHEMA_TEXT = """
outlook:categorical
temperature:categorical
humidity:categorical
wind:categorical
label:play
negative:yes
positive:no
"""


@pytest.fixture(scope="session")
def tennis_schema() -> Schema:
    return Schema.parse(TENNIS_SCHEMA_TEXT)


@pytest.fixture(scope="session")
def tennis(tennis_schema) -> Dataset:
    rows = [FeatureVector(r[:4], Label.MALICIOUS if r[4] == "no" else Label.BENIGN) for r in TENNIS_ROWS]
    return Dataset.from_rows(tennis_schema, rows)


MIXED_SCHEMA_TEXT = """
proto:categorical
x:continuous
y:continuous
"""


@pytest.fixture(scope="session")
def mixed_schema() -> Schema:
    return Schema.parse(MIXED_SCHEMA_TEXT)


def clusters(schema: Schema, n: int = 60, seed: int = 0, gap: float = 1.0, spread: float = 0.1) -> Dataset:
    """Benign around (-gap, -gap), malicious around (+gap, +gap); tokens uninformative."""
    rng = np.random.default_rng(seed)
    half = n // 2
    y = np.r_[np.zeros(half, np.int8), np.ones(n - half, np.int8)]
    centre = np.where(y[:, None] == 1, gap, -gap)
    xy = centre + rng.normal(0, spread, (n, 2))
    tokens = rng.choice(["tcp", "udp", "icmp"], size=(n, 1)).astype(object)
    return Dataset(schema, xy, tokens, y)


def xor(schema: Schema, per_cell: int = 10, seed: int = 0) -> Dataset:
    rng = np.random.default_rng(seed)
    pts, labels = [], []
    for sx in (-1, 1):
        for sy in (-1, 1):
            pts.append(np.c_[sx + rng.normal(0, 0.1, per_cell), sy + rng.normal(0, 0.1, per_cell)])
            labels += [int(sx * sy > 0)] * per_cell
    tokens = np.full((4 * per_cell, 1), "tcp", dtype=object)
    return Dataset(schema, np.vstack(pts), tokens, np.array(labels, np.int8))


@pytest.fixture(scope="session")
def separable(mixed_schema) -> Dataset:
    return clusters(mixed_schema)


@pytest.fixture(scope="session")
def xor_data(mixed_schema) -> Dataset:
    return xor(mixed_schema)


@pytest.fixture(scope="session")
def small_kdd():
    from mimicids.synthetic import synthetic_kdd

    return synthetic_kdd(1500, seed=7)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
