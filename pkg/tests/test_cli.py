import json
import math

import numpy as np
import pytest

from lvswitch import io as lvio
from lvswitch.cli import main
from lvswitch.env_model import SwitchRates
from lvswitch.geometry import contains, gamma_prime
from lvswitch.invasion import lambda_xy
from lvswitch.regimes import regime_map


@pytest.fixture
def pair_file(tmp_path, top):
    path = tmp_path / "top.json"
    lvio.write_json(path, lvio.pair_document(top))
    return path


@pytest.fixture
def swapped_file(tmp_path, top):
    doc = lvio.pair_document(top)
    path = tmp_path / "swapped.json"
    lvio.write_json(path, {"env0": doc["env1"], "env1": doc["env0"]})
    return path


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, (json.loads(out.out) if code == 0 and out.out else None), out.err


def test_parse_pair_names_field(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"env0": {"a": 1, "b": 1, "c": 2, "d": 2, "alpha": 1}, "env1": {}}))
    with pytest.raises(lvio.ConfigError, match="env0.beta"):
        lvio.load_pair(path)
    path.write_text(json.dumps({"env0": {"a": 1, "b": 1, "c": 2, "d": "x", "alpha": 1, "beta": 1}}))
    with pytest.raises(lvio.ConfigError, match="env0.d"):
        lvio.load_pair(path)
    path.write_text("{not json")
    with pytest.raises(lvio.ConfigError, match="invalid JSON"):
        lvio.load_pair(path)


def test_float_format_round_trips():
    for value in (0.1, 1 / 3, 2.0**-1074, 1.7976931348623157e308, -0.0, 123456789.123456789):
        assert float(lvio.fmt(value)) == value
    assert lvio.fmt(math.inf) == "inf"


def test_polyline_round_trip(tmp_path):
    arcs = {"a": np.array([[0.1, 0.2], [1 / 3, 2 / 3]]), "b": np.array([[1.0, 0.0]])}
    path = tmp_path / "p.csv"
    lvio.write_polylines(path, arcs)
    back = lvio.read_polylines(path)
    assert back.keys() == arcs.keys()
    assert all(np.array_equal(back[k], arcs[k]) for k in arcs)


def test_classify(capsys, pair_file):
    code, doc, _ = run_json(capsys, ["classify", "--pair-file", str(pair_file), "--s", "0.5"])
    assert code == 0
    assert doc["I"] == pytest.approx([0.1938, 0.8062], abs=1e-4)
    assert doc["quadratic_I"] == pytest.approx([-5, 32, -32])
    assert doc["environments"]["env0"]["type"] == "Type1_ExtinctY"
    assert doc["averaged"]["type"] == "Type2_ExtinctX"


def test_classify_identical(capsys, tmp_path, identical):
    path = tmp_path / "id.json"
    lvio.write_json(path, lvio.pair_document(identical))
    code, doc, _ = run_json(capsys, ["classify", "--pair-file", str(path)])
    assert code == 0 and doc["I"] is None and doc["J"] is None
    assert "I is empty" in doc["notes"]


def test_classify_rejects_unfavorable(capsys, tmp_path):
    path = tmp_path / "bad.json"
    env = {"a": 1, "b": 1, "c": 2, "d": 2, "alpha": 1, "beta": 1}
    path.write_text(json.dumps({"env0": {**env, "a": 3}, "env1": env}))
    code, _, err = run_json(capsys, ["classify", "--pair-file", str(path)])
    assert code == 2 and "a < c" in err


def test_invasion_matches_library_and_map(capsys, pair_file, top):
    code, doc, _ = run_json(capsys, ["invasion", "--pair-file", str(pair_file), "--s", "0.5", "--t", "10"])
    assert code == 0
    r = lambda_xy(top, SwitchRates.from_st(0.5, 10.0))
    assert (doc["lambda_x"], doc["lambda_y"]) == (r.lambda_x, r.lambda_y)
    assert doc["regime"] == regime_map(top, [0.5], [10.0]).labels[0, 0]
    code, doc_uv, _ = run_json(capsys, ["invasion", "--pair-file", str(pair_file), "--u", str(doc["u"]), "--v", str(doc["v"])])
    assert doc_uv["lambda_x"] == pytest.approx(doc["lambda_x"], rel=1e-13)
    assert doc_uv["lambda_y"] == pytest.approx(doc["lambda_y"], rel=1e-13)


def test_invasion_relabeled_file(capsys, pair_file, swapped_file):
    _, ref, _ = run_json(capsys, ["invasion", "--pair-file", str(pair_file), "--s", "0.7", "--t", "10"])
    code, doc, err = run_json(capsys, ["invasion", "--pair-file", str(swapped_file), "--s", "0.3", "--t", "10"])
    assert code == 0 and doc["relabeled"] and "relabeled" in err
    assert doc["s"] == pytest.approx(0.3)
    assert doc["lambda_x"] == pytest.approx(ref["lambda_x"], rel=1e-12)
    assert doc["lambda_y"] == pytest.approx(ref["lambda_y"], rel=1e-12)


def test_invasion_degenerate_pair(capsys, tmp_path, identical):
    path = tmp_path / "id.json"
    lvio.write_json(path, lvio.pair_document(identical))
    _, doc, _ = run_json(capsys, ["invasion", "--pair-file", str(path), "--s", "0.5", "--t", "3"])
    assert (doc["lambda_x"], doc["lambda_y"], doc["regime"]) == (0.5, -1.0, "ExtinctionY")


@pytest.mark.parametrize(
    "extra",
    [["--s", "0.5"], ["--s", "0.5", "--t", "1", "--u", "0.5", "--v", "1"], ["--s", "1.5", "--t", "1"], ["--s", "abc"]],
)
def test_invasion_bad_flags(capsys, pair_file, extra):
    code = main(["invasion", "--pair-file", str(pair_file), *extra])
    capsys.readouterr()
    assert code == 2


def test_argparse_errors_exit_2(capsys, pair_file):
    assert main(["curve", "--pair-file", str(pair_file), "--species", "z"]) == 2
    assert "invalid choice" in capsys.readouterr().err


def test_missing_file_exit_2(capsys, tmp_path):
    code, _, err = run_json(capsys, ["classify", "--pair-file", str(tmp_path / "nope.json")])
    assert code == 2 and "cannot read" in err


def test_curve_csv(tmp_path, pair_file, identical):
    out = tmp_path / "cy.csv"
    assert main(["curve", "--pair-file", str(pair_file), "--species", "y", "--grid", "16", "--out", str(out)]) == 0
    header, rows = lvio.read_csv(out)
    assert header == ["s", "t_critical"]
    t = np.array([r[1] for r in rows])
    assert len(rows) == 16 and np.all(np.isfinite(t))
    manifest = json.loads(lvio.manifest_path(out).read_text())
    assert manifest["tolerances"]["t_relative"] == 1e-9 and manifest["failed_samples"] == 0
    # nested layout: J-domain curve inside the I-domain curve
    outx = tmp_path / "cx.csv"
    main(["curve", "--pair-file", str(pair_file), "--species", "x", "--grid", "16", "--out", str(outx)])
    sx = [r[0] for r in lvio.read_csv(outx)[1]]
    assert rows[0][0] < min(sx) and max(sx) < rows[-1][0]
    empty = tmp_path / "id.json"
    lvio.write_json(empty, lvio.pair_document(identical))
    out_e = tmp_path / "empty.csv"
    assert main(["curve", "--pair-file", str(empty), "--species", "y", "--out", str(out_e)]) == 0
    text = out_e.read_text()
    assert "inf" in text.splitlines()[0] and text.splitlines()[1] == "s,t_critical" and len(text.splitlines()) == 2


def test_simulate_persistence_and_extinction(tmp_path, pair_file, top, bottom):
    out = tmp_path / "traj.csv"
    argv = ["simulate", "--pair-file", str(pair_file), "--s", "0.4", "--t", "10", "--x0", "0.3", "--y0", "0.3"]
    assert main([*argv, "--horizon", "200", "--seed", "4", "--out", str(out)]) == 0
    header, rows = lvio.read_csv(out)
    assert header == ["time", "x", "y", "env"]
    pts = np.array([[r[1], r[2]] for r in rows])
    assert contains(gamma_prime(top), pts[len(pts) // 10 :], tol=1e-6).mean() > 0.99
    bfile = tmp_path / "bottom.json"
    lvio.write_json(bfile, lvio.pair_document(bottom))
    out_b = tmp_path / "ext.csv"
    main(["simulate", "--pair-file", str(bfile), "--s", "0.3", "--t", "10", "--x0", "0.2", "--y0", "0.2", "--horizon", "2000", "--out", str(out_b)])
    occ = json.loads(lvio.manifest_path(out_b).read_text())["occupation"]
    assert occ["extinct_y"] and not occ["extinct_x"]


def test_support_outputs(tmp_path, pair_file, bottom):
    prefix = tmp_path / "top"
    assert main(["support", "--pair-file", str(pair_file), "--out", str(prefix)]) == 0
    arcs = lvio.read_polylines(f"{prefix}.gamma_prime.csv")
    assert list(arcs) == ["Sigma1", "x_axis", "Sigma0_reversed", "y_axis"]
    assert json.loads((tmp_path / "top.tangency.json").read_text()) == []
    bfile = tmp_path / "bottom.json"
    lvio.write_json(bfile, lvio.pair_document(bottom))
    bprefix = tmp_path / "bottom"
    assert main(["support", "--pair-file", str(bfile), "--out", str(bprefix)]) == 0
    tangency = json.loads((tmp_path / "bottom.tangency.json").read_text())
    assert 1 <= len(tangency) <= 6
    assert all(set(p) == {"x", "y", "residual_G", "residual_tangency"} for p in tangency)
    assert not (tmp_path / "bottom.gamma_prime.csv").exists()
    manifest = json.loads((tmp_path / "bottom.manifest.json").read_text())
    assert any("PreconditionViolated" in n for n in manifest["notes"])
