"""Shared fixtures: prebuilt cut tables and the acceptance reporter.

Full-size tables cost tens of seconds to build, so each geometry is
built at most once per session and shared. The build time is kept with
the table because one acceptance check budgets it.
"""

from __future__ import annotations

import time
from typing import NamedTuple

import pytest

from optwin.detector import CutTable, OptwinConfig, build_cut_table


class BuiltTable(NamedTuple):
    config: OptwinConfig
    table: CutTable
    build_seconds: float


def build_timed(rho: float, w_max: int = 25000) -> BuiltTable:
    config = OptwinConfig(rho=rho, w_max=w_max)
    started = time.perf_counter()
    table = build_cut_table(config)
    return BuiltTable(config, table, time.perf_counter() - started)


@pytest.fixture(scope="session")
def table_rho_01() -> BuiltTable:
    return build_timed(0.1)


@pytest.fixture(scope="session")
def table_rho_05() -> BuiltTable:
    return build_timed(0.5)


@pytest.fixture(scope="session")
def table_rho_10() -> BuiltTable:
    return build_timed(1.0)


@pytest.fixture(scope="session")
def table_mid() -> BuiltTable:
    """rho=0.5 capped at 2,000 rows; builds in about two seconds."""
    return build_timed(0.5, w_max=2000)


@pytest.fixture
def criterion(capsys):
    """One PASS/FAIL line per acceptance criterion, then the assert."""

    def check(number: int, name: str, ok: bool, detail: str = "") -> None:
        verdict = "PASS" if ok else "FAIL"
        suffix = f" ({detail})" if detail else ""
        with capsys.disabled():
            print(f"[criterion {number:02d}] {name}: {verdict}{suffix}")
        assert ok, f"criterion {number} {name} failed{suffix}"

    return check
