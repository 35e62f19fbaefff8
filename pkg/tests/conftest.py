import contextlib
import importlib

import numpy as np
import pytest

_CRITERIA = {}


def _available_backends():
    mods = [importlib.import_module("quenchbat._kernels_py")]
    try:
        mods.append(importlib.import_module("quenchbat._kernels"))
    except ImportError:
        pass
    return mods


@pytest.fixture(params=_available_backends(), ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


class _Record:
    detail = ""


@pytest.fixture
def criterion():
    """Context manager recording one acceptance criterion as PASS or FAIL."""

    @contextlib.contextmanager
    def record(number, title):
        rec = _Record()
        try:
            yield rec
        except BaseException as exc:
            msg = str(exc).strip().splitlines()
            _CRITERIA[number] = (False, title, msg[0] if msg else type(exc).__name__)
            print(f"criterion {number:2d} FAIL  {title}: {_CRITERIA[number][2]}")
            raise
        _CRITERIA[number] = (True, title, rec.detail)
        print(f"criterion {number:2d} PASS  {title}: {rec.detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, title, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
