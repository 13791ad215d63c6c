import json
import subprocess
import sys
from importlib import resources

import jsonschema
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from qdiv import matrixio
from qdiv.cli import main

SCHEMA = json.loads(resources.files("qdiv").joinpath("report_schema.json").read_text())


@pytest.fixture
def files(tmp_path):
    paths = {}

    def put(name, m):
        p = tmp_path / f"{name}.json"
        matrixio.write_matrix(p, m)
        paths[name] = p
        return p

    put("half", np.eye(2) / 2)
    put("quarter", np.diag([0.25, 0.75]))
    put("plus", np.full((2, 2), 0.5))
    put("pure", np.diag([1.0, 0.0]))
    put("mixed3", np.eye(3) / 3)
    put("bad_trace", np.diag([0.6, 0.6]))
    fam = tmp_path / "z.json"
    matrixio.write_projectors(fam, [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    paths["z"] = fam
    ident = tmp_path / "ident.json"
    matrixio.write_projectors(ident, [np.eye(2)])
    paths["ident"] = ident
    bad = tmp_path / "bad_family.json"
    matrixio.write_projectors(bad, [np.diag([1.0, 0.0]), np.full((2, 2), 0.5)])
    paths["bad_family"] = bad
    return paths


def run_json(argv, capsys):
    code = main([*map(str, argv), "--json"])
    out = capsys.readouterr().out
    report = json.loads(out)
    jsonschema.validate(report, SCHEMA)
    return code, report


def output(report, name):
    return next(o["value"] for o in report["outputs"] if o["name"] == name)


class TestDivergence:
    def test_equal_inputs(self, files, capsys):
        code, rep = run_json(["divergence", files["quarter"], files["quarter"], "--q", "0.3"], capsys)
        assert code == 0
        assert abs(output(rep, "K_q")) <= 1e-9
        assert output(rep, "abs_difference") <= 1e-9

    def test_anchor(self, files, capsys):
        code, rep = run_json(["divergence", files["half"], files["quarter"], "--q", "0.5"], capsys)
        assert code == 0
        assert output(rep, "K_q") == pytest.approx(0.0681483, abs=1e-6)
        assert output(rep, "K_q_form2") == pytest.approx(0.0681483, abs=1e-6)
        assert set(rep["inputs"]) == {str(files["half"]), str(files["quarter"])}

    @pytest.mark.parametrize("q", ["1.0", "0", "abc"])
    def test_bad_q(self, files, capsys, q):
        with pytest.raises(SystemExit) as exc:
            main(["divergence", str(files["half"]), str(files["quarter"]), "--q", q])
        assert exc.value.code == 2
        assert "(0, 1)" in capsys.readouterr().err

    def test_invalid_state_names_invariant(self, files, capsys):
        assert main(["divergence", str(files["bad_trace"]), str(files["half"]), "--q", "0.5"]) == 2
        assert "TraceNotOne" in capsys.readouterr().err

    def test_dimension_mismatch(self, files, capsys):
        assert main(["divergence", str(files["half"]), str(files["mixed3"]), "--q", "0.5"]) == 3
        assert "DimensionMismatch" in capsys.readouterr().err

    def test_malformed_file(self, tmp_path, files, capsys):
        p = tmp_path / "broken.json"
        p.write_text('{"dim": 2, "re": [[1, 0]], "im": [[0, 0], [0, 0]]}')
        assert main(["divergence", str(p), str(files["half"]), "--q", "0.5"]) == 2
        p.write_text("{not json")
        assert main(["divergence", str(p), str(files["half"]), "--q", "0.5"]) == 2
        assert main(["divergence", str(tmp_path / "missing.json"), str(files["half"]), "--q", "0.5"]) == 2

    def test_out_file(self, files, tmp_path, capsys):
        out = tmp_path / "report.json"
        assert main(["divergence", str(files["half"]), str(files["quarter"]), "--q", "0.5",
                     "--out", str(out)]) == 0
        jsonschema.validate(json.loads(out.read_text()), SCHEMA)
        assert "q_divergence" in capsys.readouterr().out


class TestEntropy:
    def test_pure(self, files, capsys):
        _, rep = run_json(["entropy", files["pure"], "--q", "0.5"], capsys)
        assert abs(output(rep, "S_q")) <= 1e-9

    def test_half(self, files, capsys):
        _, rep = run_json(["entropy", files["half"], "--q", "0.5"], capsys)
        assert output(rep, "S_q") == pytest.approx(0.8284271, abs=1e-6)

    def test_three_level(self, files, capsys):
        _, rep = run_json(["entropy", files["mixed3"], "--q", "0.5"], capsys)
        want = (3 * 3**-0.5 - 1) / 0.5
        assert want == pytest.approx(1.4641016, abs=1e-7)
        assert output(rep, "S_q") == pytest.approx(want, abs=1e-9)


class TestMeasure:
    def test_plus(self, files, capsys):
        code, rep = run_json(["measure", files["plus"], files["z"]], capsys)
        assert code == 0
        assert output(rep, "p") == pytest.approx([0.5, 0.5])
        m = output(rep, "pinched")
        np.testing.assert_allclose(np.array(m["re"]) + 1j * np.array(m["im"]), np.eye(2) / 2, atol=1e-15)
        assert output(rep, "trace_residual") <= 1e-10

    def test_identity_family(self, files, capsys):
        _, rep = run_json(["measure", files["plus"], files["ident"]], capsys)
        m = output(rep, "pinched")
        np.testing.assert_allclose(np.array(m["re"]), np.full((2, 2), 0.5), atol=1e-15)

    def test_malformed_family(self, files, capsys):
        assert main(["measure", str(files["plus"]), str(files["bad_family"])]) == 4
        assert "(0, 1)" in capsys.readouterr().err

    def test_family_dimension_mismatch(self, files):
        assert main(["measure", str(files["mixed3"]), str(files["z"])]) == 3

    def test_text_output(self, files, capsys):
        assert main(["measure", str(files["plus"]), str(files["z"])]) == 0
        out = capsys.readouterr().out
        assert "pinch" in out and "tolerances:" in out


class TestCheck:
    def test_monotonicity_desk_scale(self, capsys):
        code, rep = run_json(["check", "monotonicity", "--trials", "1000", "--seed", "42"], capsys)
        (r,) = rep["reports"]
        assert code == 0 and r["violations"] == 0 and r["trials_run"] == 35000

    def test_all_suites(self, capsys):
        code, rep = run_json(["check", "all", "--trials", "100", "--seed", "7"], capsys)
        summary = {r["suite"]: (r["violations"], r["worst_margin"], r["worst_trial"]) for r in rep["reports"]}
        assert len(rep["reports"]) == 8
        assert code == 0, summary

    def test_zero_trials(self):
        with pytest.raises(SystemExit) as exc:
            main(["check", "nonneg", "--trials", "0"])
        assert exc.value.code == 2

    def test_unknown_suite(self):
        with pytest.raises(SystemExit) as exc:
            main(["check", "bogus"])
        assert exc.value.code == 2

    def test_violation_exit_and_reproduction_line(self, capsys):
        # qlimit at q=0.9999 exceeds the 1e-3 gap for a small fraction of random pairs
        code = main(["check", "qlimit", "--trials", "100", "--dims", "8", "--seed", "42"])
        out = capsys.readouterr().out
        if code == 1:
            assert "reproduce with seed=42 trial=" in out
        else:
            assert code == 0

    def test_explore_never_fails(self, capsys):
        assert main(["check", "explore-noncommuting", "--trials", "20", "--dims", "2-4"]) == 0

    def test_deterministic_reports(self, capsys):
        argv = ["check", "convexity", "--trials", "10", "--seed", "3", "--dims", "2,5", "--q", "0.2,0.8"]
        _, a = run_json(argv, capsys)
        _, b = run_json(argv, capsys)
        for rep in (a, b):
            rep.pop("wall_time")
            for r in rep["reports"]:
                r.pop("elapsed")
        assert a == b

    def test_tol_scale_surfaces_in_report(self, files, capsys):
        _, rep = run_json(["entropy", files["half"], "--q", "0.5", "--tol-scale", "10"], capsys)
        assert rep["tolerances"]["div"] == pytest.approx(1e-8)


class TestMatrixFiles:
    @settings(max_examples=60, deadline=None)
    @given(hnp.arrays(np.complex128, hnp.array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=6).map(
        lambda s: (s[0], s[0])), elements=st.complex_numbers(allow_nan=False, allow_infinity=False,
                                                               max_magnitude=1e300)))
    def test_round_trip_bit_exact(self, tmp_path_factory, m):
        p = tmp_path_factory.mktemp("rt") / "m.json"
        matrixio.write_matrix(p, m)
        back = matrixio.read_matrix(p)
        assert back.real.tobytes() == m.real.tobytes()
        assert back.imag.tobytes() == m.imag.tobytes()

    def test_projector_round_trip(self, tmp_path, rng):
        from qdiv.propcheck import random_projector_family

        fam = random_projector_family(4, [1, 3], rng)
        p = tmp_path / "fam.json"
        matrixio.write_projectors(p, fam.projectors)
        for a, b in zip(matrixio.read_projectors(p), fam.projectors):
            assert a.tobytes() == np.asarray(b).tobytes()

    def test_seventeen_digits(self):
        text = matrixio.dumps_matrix(np.array([[0.1]]))
        assert "0.10000000000000001" in text

    def test_rejects_non_finite(self):
        with pytest.raises(matrixio.MatrixFileError):
            matrixio.dumps_matrix(np.array([[np.nan]]))


def test_module_entry_point(tmp_path):
    p = tmp_path / "half.json"
    matrixio.write_matrix(p, np.eye(2) / 2)
    res = subprocess.run([sys.executable, "-m", "qdiv", "entropy", str(p), "--q", "0.5"],
                         capture_output=True, text=True, check=True)
    assert "0.8284271" in res.stdout
