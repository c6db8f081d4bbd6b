import time
from contextlib import contextmanager

import pytest

_LINES = {}


class AcceptanceReport:
    """Collects one verdict per acceptance criterion (parts are merged)."""

    def __init__(self, store):
        self.store = store

    @contextmanager
    def criterion(self, number, title):
        entry = {"ok": True, "details": []}
        t0 = time.perf_counter()
        try:
            yield entry["details"]
        except BaseException as err:
            entry["ok"] = False
            entry["details"].append(f"{type(err).__name__}: {str(err).splitlines()[0][:160] if str(err) else ''}")
            raise
        finally:
            entry["elapsed"] = time.perf_counter() - t0
            prev = self.store.get(number)
            if prev is None:
                self.store[number] = {"title": title, **entry}
            else:
                prev["ok"] = prev["ok"] and entry["ok"]
                prev["details"] += entry["details"]
                prev["elapsed"] += entry["elapsed"]


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceReport(_LINES)


def format_lines(store):
    out = []
    for number in sorted(store):
        e = store[number]
        verdict = "PASS" if e["ok"] else "FAIL"
        out.append(f"criterion {number}: {verdict}  {e['title']} ({e['elapsed']:.1f} s) "
                   f"{'; '.join(e['details'])}")
    return out


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in format_lines(_LINES):
        terminalreporter.write_line(line)
