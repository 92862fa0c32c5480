import pytest

from campusnet.geodesy import GeoPoint, Site

ERBIL = GeoPoint(36.19, 44.01)
SULAYMANIYAH = GeoPoint(35.56, 45.43)


def make_site(sid, lat, lon, tier="campus"):
    return Site(sid, sid.title(), tier, GeoPoint(lat, lon))


@pytest.fixture
def three_sites():
    return [
        make_site("erbil", 36.19, 44.01),
        make_site("koya", 36.08, 44.63),
        make_site("kirkuk", 35.47, 44.39),
    ]


@pytest.fixture
def write_sites(tmp_path):
    def _write(rows, header="id,name,tier,lat_deg,lon_deg"):
        path = tmp_path / "sites.csv"
        path.write_text("\n".join([header] + rows) + "\n", encoding="utf-8")
        return path

    return _write


_CRITERIA = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _CRITERIA.append((marker.args[0], rep.outcome, rep.duration))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcome, duration in _CRITERIA:
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {label}  ({duration:.2f}s)")
