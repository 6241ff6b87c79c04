import pytest

from cycgrowth.pipeline.world import generate_world

ACCEPTANCE = {}


@pytest.fixture(scope="session")
def world(tmp_path_factory):
    """Synthetic replication inputs; returns the config path."""
    return generate_world(tmp_path_factory.mktemp("world"), seed=0)


@pytest.fixture
def criterion(request):
    """Record ``(ok, detail)`` for an acceptance criterion and assert it."""
    cid = request.node.get_closest_marker("criterion").args[0]

    def check(ok, detail):
        ACCEPTANCE[cid] = ("PASS" if ok else "FAIL", detail)
        assert ok, f"{cid}: {detail}"

    return check


def pytest_runtest_logreport(report):
    # Skips (data-gated criteria) are reported alongside passes and failures.
    if report.skipped and report.when == "setup" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        cid = "C" + name.split("_")[1][1:]
        ACCEPTANCE.setdefault(cid, ("SKIP", str(report.longrepr[-1])))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE, key=lambda c: int(c[1:])):
        status, detail = ACCEPTANCE[cid]
        terminalreporter.write_line(f"{cid:>4} {status}  {detail}")
