import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oddborel.cache import (ChecksumError, HeaderMismatchError, cache_roundtrip,
                            deserialize, read_cache, serialize, write_cache)
from oddborel.cli import fmt, hexsig, main, run_pipeline
from oddborel.config import ConfigError, parse_beta_grid, parse_config, parse_real
from oddborel.series import OscillatorSpec, RSExpansion, rs_expand


# --- cache -----------------------------------------------------------------


def test_roundtrip(tmp_path):
    e = rs_expand(OscillatorSpec(2, 1), 12)
    back = cache_roundtrip(e, tmp_path / "c.txt")
    assert back.a == e.a and back.spec == e.spec and back.order == 12


@settings(max_examples=30)
@given(st.lists(st.fractions(max_denominator=10 ** 30), min_size=1, max_size=12),
       st.integers(1, 4), st.integers(0, 4))
def test_roundtrip_arbitrary(a, k, j):
    e = RSExpansion(OscillatorSpec(k, j), len(a) - 1, a)
    assert deserialize(serialize(e)).a == a


def test_truncated_file(tmp_path):
    path = write_cache(rs_expand(OscillatorSpec(1), 10), tmp_path / "c.txt")
    text = path.read_text()
    path.write_text(text[: len(text) // 2])
    with pytest.raises(ChecksumError):
        read_cache(path)


def test_edited_body():
    text = serialize(rs_expand(OscillatorSpec(1), 4)).replace("-11/16", "-11/17")
    with pytest.raises(ChecksumError):
        deserialize(text)


def test_header_mismatch(tmp_path):
    path = write_cache(rs_expand(OscillatorSpec(2), 4), tmp_path / "c.txt")
    with pytest.raises(HeaderMismatchError):
        read_cache(path, OscillatorSpec(1))


def test_format_is_decimal():
    lines = serialize(rs_expand(OscillatorSpec(1), 2)).splitlines()
    assert lines[0] == "# oddborel-coeffs v1 k=1 j=0 S=2"
    assert lines[1:4] == ["0 1/1", "1 0/1", "2 -11/16"]
    assert lines[-1].startswith("checksum sha256 ")


# --- config ----------------------------------------------------------------


def test_parse_examples():
    cfg = parse_config("command=coeffs k=1 j=0 S=40")
    assert (cfg.command, cfg.k, cfg.j, cfg.S) == ("coeffs", 1, 0, 40)
    with pytest.raises(ConfigError, match="S >= 2M"):
        parse_config("command=sum k=1 j=0 S=10 M=8 beta=0.1")
    with pytest.raises(ConfigError, match="comand"):
        parse_config("comand=sum")


def test_overrides_win():
    cfg = parse_config("command=sum\nS=40 # comment\nbeta=0.02", ["S=44", "beta=0.04@pi/3"])
    assert cfg.S == 44
    assert cfg.beta[0].abs == 0.04 and cfg.beta[0].arg == pytest.approx(math.pi / 3)


def test_literals():
    assert parse_real("1/4") == 0.25
    assert parse_real("-2pi/3") == pytest.approx(-2 * math.pi / 3)
    assert parse_real("1e-8") == 1e-8
    for bad in ("1//3", "abc", "pi/x"):
        with pytest.raises(ConfigError):
            parse_real(bad)
    with pytest.raises(ConfigError):
        parse_beta_grid("0.1,,0.2")
    with pytest.raises(ConfigError):
        parse_config("command=coeffs k=1.5")


def test_invariants():
    with pytest.raises(ConfigError, match="beta grid"):
        parse_config("command=oracle")
    with pytest.raises(ConfigError):
        parse_config("command=coeffs k=0")
    with pytest.raises(ConfigError):
        parse_config("command=coeffs N=200,100")
    with pytest.raises(ConfigError):
        parse_config("command=nope")


# --- cli -------------------------------------------------------------------


def test_fmt():
    assert fmt(True) == "1" and fmt(7) == "7"
    assert len(fmt(1 / 3).replace("0.", "", 1)) == 30
    assert hexsig(0.5, 64) == "p64:0x1p-1"


def _csv_rows(text):
    return [l for l in text.splitlines() if not l.startswith("#")]


def test_coeffs_to_cache(tmp_path):
    path = tmp_path / "k1.txt"
    assert main(["coeffs", "S=8", f"cache={path}"]) == 0
    assert read_cache(path, OscillatorSpec(1)).a[2] == Fraction(-11, 16)


def test_sum_uses_cache_and_reports_errors(tmp_path, capsys):
    cache = tmp_path / "k1.txt"
    main(["coeffs", "S=40", f"cache={cache}"])
    status = main(["sum", "beta=0.04,0", f"cache={cache}"])
    out = capsys.readouterr().out
    assert status == 1
    rows = _csv_rows(out)
    assert rows[0].startswith("beta_abs,f,g,pade_order,quad_error,poles")
    assert rows[1].split(",")[1].startswith("0.99889530980223136277")
    assert "error" in rows[2]


def test_oracle_zero_coupling(capsys):
    assert main(["oracle", "beta=0", "j=1"]) == 0
    row = _csv_rows(capsys.readouterr().out)[1].split(",")
    assert float(row[2]) == 3 and float(row[3]) == 0


def test_tolerance_exit_code(capsys):
    # an absurd f tolerance cannot be met: exit 2, results still written
    assert main(["compare", "beta=0.04", "f_tol=1e-40", "N=60,120"]) == 2
    assert "tolerance" in capsys.readouterr().out


def test_regions_csv(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["regions", "args=0:pi:5", "thetas=-0.5:0.5:5", "--output", str(out)]) == 0
    rows = _csv_rows(out.read_text())
    assert len(rows) == 1 + 25
    header = rows[0].split(",")
    row = dict(zip(header, rows[1 + 2 * 5 + 2].split(",")))  # arg pi/2, theta 0
    assert row["in_P"] == "1"


def test_deterministic_output(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sum", "beta=0.02,0.06", "S=30", "M=12", "--dump-hex"]
    main(args + ["--output", str(a)])
    main(args + ["--output", str(b), "--jobs", "2"])
    assert a.read_bytes() == b.read_bytes()
    assert "p256:" in a.read_text()


def test_jobs_preserve_order(capsys):
    main(["compare", "beta=0.06,0.02,0.04@pi/3", "--jobs", "3", "N=100,200"])
    rows = _csv_rows(capsys.readouterr().out)[1:]
    assert [round(float(r.split(",")[0]), 6) for r in rows] == [0.06, 0.02, 0.04]


def test_bad_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("command=sum\nbogus=1\n")
    assert main(["--config", str(cfg)]) == 1
    assert "bogus" in capsys.readouterr().err


def test_run_pipeline_to_stream():
    import io

    buf = io.StringIO()
    status = run_pipeline(parse_config("command=oracle beta=0.05@pi/2 N=60,120"), buf)
    assert status == 0
    assert buf.getvalue().startswith("# oddborel")
