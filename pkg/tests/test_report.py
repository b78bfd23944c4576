import csv
import json
import re
from pathlib import Path

import numpy as np
import pytest

from bubblelab.core.errors import CODE_INVALID_INPUT, FatalError
from bubblelab.core.report import Convention, Provenance, Report, anchor_table, write_columns


@pytest.fixture
def report() -> Report:
    return Report(experiment_id="unit")


def test_check_close(report):
    ok = report.check_close("q", 1.001, 1.0, 1e-2, provenance=Provenance.LITERATURE, anchor="blow-up rate")
    bad = report.check_close("q'", 1.1, 1.0, 1e-2, anchor="blow-up rate")
    assert ok.passed and not bad.passed
    assert ok.details["rel_error"] == pytest.approx(1e-3)
    assert not report.passed
    assert [c.name for c in report.failed_claims()] == ["q'"]


def test_ungated_claims_do_not_fail_report(report):
    report.check_below("monitor", 2.0, 1.0, anchor="remainder estimates", gated=False)
    report.check_above("coercive", 0.5, 0.1, anchor="coercivity")
    assert report.passed
    assert report.failed_claims() == []


def test_check_envelope(report):
    flat = report.check_envelope("flat", [1.0, 1.1, 1.2], slope=-0.05, c_bound=10.0, slope_tol=0.3,
                                 anchor="interaction estimates")
    growing = report.check_envelope("growing", [1.0, 5.0, 25.0], slope=-1.0, c_bound=100.0, slope_tol=0.3,
                                    anchor="interaction estimates")
    assert flat.passed
    assert not growing.passed
    assert growing.measured == 25.0
    assert growing.details["ratios"] == [1.0, 5.0, 25.0]


def test_save(report, tmp_path):
    report.check_below("drift", 1e-7, 1e-5, anchor="energy conservation", convention=Convention.ENERGY, dt=1e-3)
    report.notes.append("note")
    path = report.save(tmp_path)
    data = json.loads(path.read_text())
    assert data["experiment_id"] == "unit"
    assert data["claims"][0]["convention"] == Convention.ENERGY.value
    assert data["claims"][0]["details"] == {"dt": 1e-3}
    with open(tmp_path / "claims.csv") as f:
        rows = list(csv.DictReader(f))
    assert rows[0]["name"] == "drift"
    assert rows[0]["passed"] == "True"
    assert rows[0]["ref"] == data["claims"][0]["ref"] != ""


def test_write_columns(tmp_path):
    path = write_columns(tmp_path / "sub" / "cols.csv", {"t": np.arange(3.0), "x": [0.5, 1.5, 2.5]})
    with open(path) as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["t", "x"]
    assert [float(v) for v in rows[2]] == [1.0, 1.5]


def test_claims_need_a_known_anchor(report):
    with pytest.raises(FatalError) as e:
        report.check_below("loose", 0.1, 1.0, anchor="somewhere in the literature")
    assert e.value.code == CODE_INVALID_INPUT
    with pytest.raises(FatalError):
        report.check_below("bare", 0.1, 1.0)
    assert report.claims == []


def test_claim_carries_reference_key(report):
    claim = report.check_below("cutoff", 0.0, 1.0, anchor="virial cutoff")
    assert claim.ref == anchor_table()["virial cutoff"]


def test_every_anchor_in_the_package_resolves():
    package = Path(__file__).parent.parent / "bubblelab"
    used = set()
    for path in package.rglob("*.py"):
        source = path.read_text()
        used |= set(re.findall(r'anchor\s*=\s*"([^"]+)"', source))
        for pair in re.findall(r'anchor = "([^"]+)" if .* else "([^"]+)"', source):
            used |= set(pair)
    assert len(used) > 30
    table = anchor_table()
    assert used - set(table) == set()
    assert all(ref for ref in table.values())


def test_pairing_families_resolve():
    from bubblelab.core.profiles.pairings import PAIRING_REGISTRY

    table = anchor_table()
    for spec in PAIRING_REGISTRY.values():
        assert f"pairing-estimates:{spec.family}" in table
