import pytest

TWO_INVESTOR_CSV = """investor_id,timestamp,side,price,volume
1,09:00:30,Buy,3211,2
1,09:03:06,Sell,3216,2
1,09:03:12,Sell,3214,1
1,09:08:02,Sell,3206,2
1,09:08:26,Buy,3204,6
1,09:10:28,Sell,3205,3
2,09:00:40,Buy,3211,3
2,09:03:04,Sell,3216,4
2,09:03:10,Buy,3214,2
2,09:08:05,Sell,3206,3
2,09:08:30,Buy,3204,10
2,09:12:02,Buy,3201,2
"""


@pytest.fixture
def two_investor_csv():
    return TWO_INVESTOR_CSV


@pytest.fixture
def two_investor_file(tmp_path):
    path = tmp_path / "two_investors.csv"
    path.write_text(TWO_INVESTOR_CSV, encoding="utf-8")
    return path


ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance(request):
    """Record one summary line per acceptance criterion."""
    lines = request.config.stash[ACCEPTANCE_KEY]

    def record(name, ok, detail=""):
        lines.append(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
