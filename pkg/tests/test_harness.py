import json
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from qhm import core, harness, modules
from qhm.core import QhmParams
from qhm.harness import CheckRecord, SuiteConfig, emit_tables, run_suite, summarize, sweep

finite = st.floats(allow_nan=False, allow_infinity=False, min_value=-1e6, max_value=1e6)


@settings(max_examples=50, deadline=None)
@given(st.text(min_size=1, max_size=30), finite, finite, finite, finite,
       st.sampled_from(harness.PROVENANCES), st.floats(0, 1), st.booleans())
def test_record_json_round_trip(cid, a, b, c, d, prov, tol, quad):
    rec = CheckRecord(cid, complex(a, b), complex(c, d), prov, tol, quadrature=quad, nx=128, ny=64)
    back = CheckRecord.from_dict(json.loads(json.dumps(rec.to_dict())))
    assert back == rec


def test_skipped_record_round_trip():
    rec = harness._skip("even.Eprime", "needs nu", QhmParams())
    back = CheckRecord.from_dict(json.loads(json.dumps(rec.to_dict())))
    assert back.skipped and not back.passed and back.reason == "needs nu"


def test_record_schema_fields():
    d = CheckRecord("x", 1 + 2j, 1, "trivial", 1e-5).to_dict()
    for key in ("id", "computed", "reference", "provenance", "abs_err", "tol", "pass"):
        assert key in d
    assert d["computed"] == [1.0, 2.0] and d["abs_err"] == pytest.approx(2.0) and d["pass"] is False


def test_unknown_provenance_rejected():
    with pytest.raises(ValueError):
        CheckRecord("x", 0, 0, "folklore", 1.0)


def test_unknown_suite_rejected():
    with pytest.raises(ValueError):
        run_suite(SuiteConfig(suites=("nonsense",)))


def test_records_sorted_and_summarized():
    recs = run_suite(SuiteConfig(suites=("toeplitz", "dual")))
    ids = [r.id for r in recs]
    assert ids == sorted(ids)
    s = summarize(recs)
    assert s["passed"] + s["failed"] + s["skipped"] == len(recs)


def test_nu_zero_skips_E_prime_only():
    cfg = SuiteConfig(params=QhmParams(nu=0.0), suites=("even",))
    recs = run_suite(cfg)
    skipped = [r.id for r in recs if r.skipped]
    assert skipped == ["even.Eprime"]
    assert any(r.id.startswith("even.E.") and r.passed for r in recs)


def test_report_is_deterministic():
    cfg = SuiteConfig(suites=("toeplitz", "dual"), seed=3)
    a = json.dumps(harness.report(cfg, run_suite(cfg)), sort_keys=True)
    b = json.dumps(harness.report(cfg, run_suite(cfg)), sort_keys=True)
    assert a == b


def test_emit_tables_empty():
    text = emit_tables([])
    assert "### Even pairings" in text and "### Odd pairings" in text
    assert text.count("| cell | computed | reference | abs err | pass |") == 2


def test_emit_tables_cells():
    prm = QhmParams()
    recs = [
        CheckRecord("even.E.tau", 0.6, 2 * prm.mu, "paper-table", 1e-4),
        CheckRecord("odd.table.U3.phi_123", 0, (2j * 3.141592653589793) ** 1.5 * prm.c / 3, "paper-table", 1e-4),
    ]
    text = emit_tables(recs)
    assert "| even.E.tau | +0.600000+0.000000i" in text
    assert "-7.424437+7.424437i" in text


def test_unknown_evaluation_route_rejected(params):
    x1, x2 = core.build_frame(params)
    with pytest.raises(ValueError):
        harness.dense_product_oracle(x1, x2, n=8, via="spline")


def test_coefficient_view_oracles_resolve(params):
    fine = harness.coefficient_view_params(params)
    y1, y2 = core.build_frame(fine)
    assert harness.dense_product_oracle(y1, y2.star(), n=32, via="coefficients") < params.tol_num
    # the default resolution is too coarse to read the steep module vectors back
    f, g = modules.random_vector(params, 0), modules.random_vector(params, 1)
    assert harness.dense_inner_product_oracle(f, g, n=32, via="coefficients") > params.tol_num


def test_sweep_needs_two_resolutions():
    with pytest.raises(ValueError):
        sweep(SuiteConfig(suites=("toeplitz",)), [128])


def test_sweep_flat_for_exact_checks():
    out = sweep(SuiteConfig(suites=("toeplitz",)), [64, 128])
    assert out["resolutions"] == [64, 128]
    assert out["non_monotone"] == []
    for errs in out["errors"].values():
        assert max(errs) < 1e-12


def test_sweep_gates_quadrature_checks():
    cfg = SuiteConfig(suites=("dual",))
    out = sweep(cfg, [64, 128])
    assert "dual.c_1.phi_1" in out["gated"]
    assert "dual.c_123.phi_123" not in out["gated"]


def test_cli_verify_writes_reports(tmp_path, capsys):
    js, md = tmp_path / "r.json", tmp_path / "t.md"
    code = harness.main(["verify", "--suite", "toeplitz", "--json", str(js), "--markdown", str(md)])
    assert code == 0
    data = json.loads(js.read_text())
    assert set(data) == {"params", "checks", "summary"}
    assert data["summary"]["failed"] == 0
    assert "PASS toeplitz.interior" in capsys.readouterr().out
    assert md.read_text().startswith("### Even pairings")


def test_cli_exit_code_reflects_failures():
    # the dual suite contains published cells that the computation does not reproduce
    assert harness.main(["verify", "--suite", "dual"]) == 1


def test_cli_rejects_bad_configuration(capsys):
    assert harness.main(["verify", "--suite", "bogus"]) == 2
    assert harness.main(["verify", "--c", "0"]) == 2
    assert "invalid configuration" in capsys.readouterr().err


def test_cli_sweep(capsys):
    assert harness.main(["sweep", "--suite", "toeplitz", "--resolutions", "64,128"]) == 0
    assert "toeplitz.interior" in capsys.readouterr().out


def test_config_defaults_raise_window_when_needed():
    args = harness._parser().parse_args(["verify", "--mu", "0.8"])
    cfg = harness.config_from_args(args)
    assert cfg.params.ny_halfwidth >= 80
    assert replace(cfg, seed=1).seed == 1
