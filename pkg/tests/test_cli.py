import json

import pytest

from weylkit.acceptance import run_cli


def _report(argv, env=None):
    code, out, err = run_cli(argv + ["--quiet"], env)
    return code, json.loads(out) if out else None, err


def test_curvature_report_shape():
    code, rep, _ = _report(["curvature", "--catalog", "schwarzschild", "--points", "2", "--vacuum"])
    assert code == 0 and rep["passed"]
    assert rep["command"] == "curvature" and rep["config"]["points"] == 2
    assert len(rep["points"]) == 2 and all(rep["checks"].values())


def test_explicit_points_and_ranges():
    code, rep, _ = _report(["curvature", "--catalog", "schwarzschild", "--point", "0,4,1.2,0.3",
                            "--point", "0,5,1.2,0.3"])
    assert code == 0 and [p["point"][1] for p in rep["points"]] == [4.0, 5.0]
    code, rep, _ = _report(["curvature", "--catalog", "schwarzschild", "--points", "3", "--range", "r=6,7"])
    assert code == 0 and all(6.0 <= p["point"][1] <= 7.0 for p in rep["points"])


def test_compat_vector_expectations():
    args = ["compat", "--catalog", "schwarzschild", "--points", "2", "--which", "weyl"]
    assert run_cli(args + ["--u", "1,0,0,0", "--expect", "compatible", "--quiet"])[0] == 0
    assert run_cli(args + ["--u", "1,0,1,0", "--expect", "compatible", "--quiet"])[0] == 1
    assert run_cli(args + ["--u", "1,0,1,0", "--expect", "incompatible", "--quiet"])[0] == 0


def test_classify_expectations():
    assert run_cli(["classify", "--catalog", "schwarzschild", "--points", "2", "--expect-type", "D",
                    "--quiet"])[0] == 0
    code, rep, _ = _report(["classify", "--catalog", "pp_wave", "--points", "1", "--observer", "0,1,0,0"])
    assert code == 0 and "N" in json.dumps(rep)


def test_hypersurface_and_geodesic_map():
    assert run_cli(["hypersurface", "--catalog", "sphere_embedding(4)", "--points", "2", "--quiet"])[0] == 0
    assert run_cli(["geodesic-map", "--catalog", "sphere_metric(3)", "--points", "2",
                    "--range", "chi1=0.4,1.2", "--psi=-log(cos(chi1))", "--quiet"])[0] == 0
    assert run_cli(["hypersurface", "--catalog", "schwarzschild", "--points", "1", "--quiet"])[0] == 1


def test_catalog_listing_and_show():
    code, rep, _ = _report(["catalog"])
    assert code == 0 and any(e["name"] == "godel" for e in rep["entries"])
    code, out, _ = run_cli(["catalog", "--show", "godel", "--quiet"])
    assert code == 0 and "[metric]" in out


def test_out_file_matches_stdout(tmp_path):
    argv = ["curvature", "--catalog", "godel", "--points", "2", "--seed", "5", "--quiet"]
    _, out, _ = run_cli(argv)
    path = tmp_path / "r.json"
    run_cli(argv + ["--out", str(path)])
    assert path.read_text() == out


def test_threads_do_not_change_output():
    argv = ["classify", "--catalog", "godel", "--points", "4", "--seed", "3", "--quiet"]
    assert run_cli(argv)[1] == run_cli(argv, {"WEYLKIT_THREADS": "4"})[1]


@pytest.mark.parametrize("argv,code", [
    (["curvature", "--catalog", "no_such_metric"], 2),
    (["compat", "--catalog", "minkowski", "--u", "1,0,0,sin("], 2),
    (["curvature", "--catalog", "schwarzschild", "--point", "0,2,1,1"], 3),
    (["curvature", "--catalog", "godel", "--points", "2", "--vacuum"], 1),
])
def test_exit_codes(argv, code):
    assert run_cli(argv + ["--quiet"])[0] == code


def test_json_has_no_nan_tokens():
    _, out, _ = run_cli(["compat", "--catalog", "schwarzschild", "--points", "1", "--b",
                         "1,0,0,0;0,1,0,0;0,0,1,0;0,0,0,1", "--quiet"])
    assert "NaN" not in out and "Infinity" not in out
