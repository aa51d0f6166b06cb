import pytest

from polydecomp.field import FieldCtx
from polydecomp.poly import PolySystem

XYZ = ["x", "y", "z"]


@pytest.fixture(scope="session")
def Q():
    return FieldCtx.rationals()


@pytest.fixture(scope="session")
def F7():
    return FieldCtx.gf(7)


@pytest.fixture(scope="session")
def F101():
    return FieldCtx.gf(101)


@pytest.fixture(scope="session")
def F65537():
    return FieldCtx.gf(65537)


def example1(ctx):
    """f, g, h with f = g o h, all in x, y, z."""
    f = PolySystem.parse(ctx, ["x*y^2*z", "x^2*y^2 + x*y^2*z", "x*y^2*z + y^2*z^2"], XYZ)
    g = PolySystem.parse(ctx, ["x*z", "x^2 + x*z", "x*z + z^2"], XYZ)
    h = PolySystem.parse(ctx, ["x*y", "y^2", "y*z"], XYZ)
    return f, g, h


def example2(ctx):
    f = PolySystem.parse(ctx, ["x^2*y^2", "x^4 + y^4"], ["x", "y"])
    h = PolySystem.parse(ctx, ["x^2", "y^2"], ["x", "y"])
    return f, h


# -- acceptance reporting ---------------------------------------------------------------

ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def record():
    """``record(num, ok, detail)`` stores and prints one pass/fail line per criterion."""

    def _record(num: int, ok: bool, detail: str) -> bool:
        line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE[num] = line
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for num in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[num])
