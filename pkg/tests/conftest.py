import pytest

_RESULTS = []


class Criterion:
    def __init__(self, name):
        self.name = name

    def report(self, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] {self.name}: {detail}"
        _RESULTS.append(line)
        print(line)
        return passed


@pytest.fixture
def criterion(request):
    return Criterion(request.node.name.removeprefix("test_"))


def pytest_terminal_summary(terminalreporter):
    if _RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in _RESULTS:
            terminalreporter.write_line(line)
