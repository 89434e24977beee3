import pytest

from choired.curve import load_curve, prime_setting, read_curve_records, validate_curve

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture(scope="session")
def acceptance():
    def record(name: str, ok: bool, detail: str = "") -> bool:
        _ACCEPTANCE.append((name, bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


@pytest.fixture(scope="session")
def curves():
    return {rec["label"]: validate_curve(rec) for rec in read_curve_records()}


@pytest.fixture(scope="session")
def e497():
    return load_curve("497a1")


@pytest.fixture(scope="session")
def s497(e497):
    return prime_setting(e497, 5)
