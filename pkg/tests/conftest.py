import numpy as np
import pytest

from primo.benchmarks import get_benchmark
from primo.priors import construct_prior_set

# criterion number -> (title, passed, detail)
_ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


class Verdict:
    """Records one acceptance criterion; the terminal summary prints them all."""

    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.checks: list[tuple[str, bool]] = []
        _ACCEPTANCE[number] = (title, False, "did not finish")

    def check(self, label: str, ok: bool) -> bool:
        self.checks.append((label, bool(ok)))
        return bool(ok)

    def finish(self) -> None:
        failed = [label for label, ok in self.checks if not ok]
        detail = "; ".join(failed) if failed else f"{len(self.checks)} checks"
        _ACCEPTANCE[self.number] = (self.title, not failed, detail)
        assert not failed, "\n".join(failed)


@pytest.fixture
def verdict():
    made = []

    def make(number, title):
        v = Verdict(number, title)
        made.append(v)
        return v

    return make


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        title, ok, detail = _ACCEPTANCE[n]
        mark = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{mark}] criterion {n:2d}: {title} ({detail})")


@pytest.fixture(scope="session")
def bisphere2():
    return get_benchmark("bisphere-d2-b0")


@pytest.fixture(scope="session")
def good_priors2(bisphere2):
    return construct_prior_set(bisphere2, ["good", "good"])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
