from pathlib import Path

import numpy as np
import pytest

from ldpc_growth.protograph import registry

GOLDEN = Path(__file__).parent / "golden"

# Delta grid where both T=12 and block contours are certified (shape < 0 at
# the near-zero guard); above roughly 0.35 the guard fails for all targets.
CONTOUR_GRID = [0.0] + [float(x) for x in np.geomspace(1e-3, 0.35, 24)]

_report: dict[int, tuple[bool, str]] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    prev = _report.get(criterion)
    if prev is not None and not prev[0]:
        return
    _report[criterion] = (bool(ok), detail)


@pytest.fixture
def report():
    return record


def pytest_terminal_summary(terminalreporter):
    if not _report:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_report):
        ok, detail = _report[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def ens36():
    return registry("3-6")


@pytest.fixture(scope="session")
def ts_bounds36(ens36):
    from ldpc_growth.trapping import conv_ts_bounds

    return {d: conv_ts_bounds(ens36.conv, d, range(3, 19)) for d in (0.0, 0.01, 0.05)}


@pytest.fixture(scope="session")
def contours36(ens36):
    from ldpc_growth.trapping import zero_contour

    block = zero_contour(ens36.block_proto, CONTOUR_GRID)
    conv = zero_contour((ens36.conv, 12), CONTOUR_GRID)
    return block, conv
