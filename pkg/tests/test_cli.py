import io
import json
import pathlib

import pytest

import stabwalls.cli as cli
from stabwalls.cli import run

DATA = pathlib.Path(__file__).parent / "data"
GIESEKER = str(DATA / "gieseker.json")
BLOWUP = str(DATA / "blowup_k0.json")


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def call_json(*argv):
    code, out, err = call(*argv)
    return code, json.loads(out) if out else None, err


def write_problem(tmp_path, **changes):
    d = json.loads(pathlib.Path(GIESEKER).read_text())
    for k, val in changes.items():
        if val is None:
            d.pop(k, None)
        else:
            d[k] = val
    p = tmp_path / "p.json"
    p.write_text(json.dumps(d))
    return str(p)


@pytest.mark.parametrize(
    "sub", ["pair", "decompose", "charge", "xi", "fiber", "walls", "chamber", "theta", "check"]
)
def test_every_subcommand_runs(sub):
    code, body, err = call_json(sub, "--problem", GIESEKER, "--canonical")
    assert code == 0, err
    assert body["schema"] == 1 and body["subcommand"] == sub
    assert "timestamp" not in body


def test_timestamp_without_canonical():
    code, body, _ = call_json("pair", "--problem", GIESEKER)
    assert code == 0 and "timestamp" in body


def test_pair_values():
    _, body, _ = call_json("pair", "--problem", GIESEKER, "--canonical")
    assert body["v_sq"] == "13"
    assert body["mukai_pair"] == "3"


def test_decompose_identity():
    _, body, _ = call_json("decompose", "--problem", GIESEKER, "--canonical")
    assert body["identity_holds"] is True
    assert (body["r"], body["d_beta"], body["a_beta"]) == ("2", "3", "-1")


def test_xi_degenerate_ray(tmp_path):
    # (1, 0, 0) at beta = delta = 0 sends everything to the ray of (0, H, 0)
    p = write_problem(tmp_path, v={"r": 1, "c1": [0], "s": 0}, point={"beta": [0], "omega": [1], "scale_sq": 4})
    code, body, _ = call_json("xi", "--problem", p, "--canonical")
    assert code == 0
    assert body["degenerate_ray"] is True
    assert body["xi"] == {"r": "0", "c1": ["1"], "s": "0"}


def test_walls_report():
    code, body, _ = call_json("walls", "--problem", GIESEKER, "--canonical")
    assert code == 0
    assert len(body["walls"]) == 7
    assert body["truncated"] is False
    v1s = {(w["v1"]["r"], tuple(w["v1"]["c1"]), w["v1"]["s"]) for w in body["walls"]}
    assert ("1", ("0",), "0") in v1s
    assert any(c["is_gieseker"] for c in body["chambers"])


def test_chamber_at_point():
    _, body, _ = call_json("chamber", "--problem", GIESEKER, "--canonical")
    assert body["chamber"]["is_gieseker"] is True


def test_chain_on_blowup():
    code, body, _ = call_json("chain", "--problem", BLOWUP, "--canonical")
    assert code == 0
    chain = body["chain"]
    assert chain["N"] == 3
    ids = [c["id"] for c in chain["chambers"]]
    assert len(ids) == len(set(ids)) == 4


def test_theta_reports_bound():
    _, body, _ = call_json("theta", "--problem", GIESEKER, "--canonical")
    assert body["chi_alpha_v"] == "0"
    assert body["wall_clearing_bound"] == "7/2"


def test_check_all_ok():
    _, body, _ = call_json("check", "--problem", GIESEKER, "--canonical")
    assert body["all_ok"] is True
    assert all(c["ok"] for c in body["checks"])


def test_plot_svg():
    code, out, _ = call("plot", "--problem", GIESEKER, "--canonical")
    assert code == 0
    assert out.startswith("<?xml") and "<svg" in out and out.rstrip().endswith("</svg>")
    assert out.count('class="wall"') == 7


def test_plot_no_walls_is_axes_only(tmp_path):
    p = write_problem(tmp_path, v={"r": 1, "c1": [0], "s": -2})
    code, out, _ = call("plot", "--problem", p, "--canonical")
    assert code == 0
    assert 'id="axis-s"' in out and 'id="axis-t"' in out
    assert 'class="wall"' not in out


def test_svg_and_out_files(tmp_path):
    svg, outp = tmp_path / "w.svg", tmp_path / "w.json"
    code, out, _ = call("walls", "--problem", GIESEKER, "--canonical", "--svg", str(svg), "--out", str(outp))
    assert code == 0 and out == ""
    assert "<svg" in svg.read_text()
    assert json.loads(outp.read_text())["subcommand"] == "walls"


def test_truncated_exit_code():
    code, body, _ = call_json("walls", "--problem", GIESEKER, "--canonical", "--caps", "max=2")
    assert code == 3
    assert body["truncated"] is True


def test_bad_input_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"x": 1}')
    assert call("pair", "--problem", str(bad))[0] == 2
    bad.write_text("{not json")
    assert call("pair", "--problem", str(bad))[0] == 2
    code, _, err = call("pair", "--problem", str(tmp_path / "missing.json"))
    assert code == 2 and "input error" in err
    # floats are refused
    p = write_problem(tmp_path, v={"r": 2, "c1": [1.0], "s": -3})
    assert call("pair", "--problem", p)[0] == 2
    # section needed by the subcommand is missing
    p = write_problem(tmp_path, point=None)
    assert call("xi", "--problem", p)[0] == 2


def test_bad_caps_flag():
    assert call("walls", "--problem", GIESEKER, "--caps", "bogus=1")[0] == 2


def test_internal_error_exit_code(monkeypatch):
    def boom(self):
        raise RuntimeError("kaput")

    monkeypatch.setattr(cli.Runner, "pair", boom)
    code, _, err = call("pair", "--problem", GIESEKER)
    assert code == 1 and "internal error" in err


def test_cache_matches_uncached(tmp_path):
    cache = str(tmp_path / "cache.json")
    _, plain, _ = call("walls", "--problem", GIESEKER, "--canonical")
    _, first, _ = call("walls", "--problem", GIESEKER, "--canonical", "--cache", cache)
    stored = json.loads(pathlib.Path(cache).read_text())
    assert stored["schema"] == 1 and len(stored["entries"]) == 1
    _, second, _ = call("walls", "--problem", GIESEKER, "--canonical", "--cache", cache)
    assert plain == first == second


def test_corrupt_cache_is_ignored(tmp_path):
    cache = tmp_path / "cache.json"
    cache.write_text("garbage")
    _, plain, _ = call("walls", "--problem", GIESEKER, "--canonical")
    code, cached, _ = call("walls", "--problem", GIESEKER, "--canonical", "--cache", str(cache))
    assert code == 0 and cached == plain


@pytest.mark.parametrize("sub", ["walls", "plot", "chain"])
def test_canonical_is_byte_stable(sub):
    prob = BLOWUP if sub == "chain" else GIESEKER
    a = call(sub, "--problem", prob, "--canonical")[1]
    b = call(sub, "--problem", prob, "--canonical")[1]
    assert a == b and a
