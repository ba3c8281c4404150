import csv
import io
import math
import os

import numpy as np
import pytest

from pwciga.harness import bench, verify
from pwciga.harness.cli import main
from pwciga.harness.ppm import (PpmError, PpmImage, bundled_image_path, decode_ppm, encode_ppm,
                                read_ppm, synthetic_image, write_ppm)


# ---- PPM ------------------------------------------------------------------

def test_white_pixel_p6():
    img = decode_ppm(b"P6\n1 1\n255\n\xff\xff\xff")
    assert (img.width, img.height) == (1, 1)
    assert tuple(img.pixels[0, 0]) == (255, 255, 255)


def test_p3_and_p6_agree():
    px = np.random.default_rng(5).integers(0, 256, size=(3, 4, 3)).astype(np.uint8)
    a = decode_ppm(encode_ppm(PpmImage(px), binary=True))
    b = decode_ppm(encode_ppm(PpmImage(px), binary=False))
    assert np.array_equal(a.pixels, b.pixels) and np.array_equal(a.pixels, px)


def test_header_comments_and_whitespace():
    data = b"P3 # comment\n# another\n2 1\n255\n1 2 3   4 5\n6\n"
    np.testing.assert_array_equal(decode_ppm(data).pixels, [[[1, 2, 3], [4, 5, 6]]])


def test_random_round_trip(tmp_path):
    px = np.random.default_rng(6).integers(0, 256, size=(16, 16, 3)).astype(np.uint8)
    path = tmp_path / "r.ppm"
    write_ppm(PpmImage(px), path)
    assert np.array_equal(read_ppm(path).pixels, px)
    raw = path.read_bytes()
    write_ppm(read_ppm(path), tmp_path / "s.ppm")
    assert (tmp_path / "s.ppm").read_bytes() == raw


@pytest.mark.parametrize("data", [
    b"P5\n1 1\n255\n\x00",
    b"P6\n1\n",
    b"P6\nx 1\n255\n\x00\x00\x00",
    b"P6\n0 1\n255\n",
    b"P6\n2 2\n255\n\x00\x00\x00",
    b"P6\n1 1\n65535\n\x00\x00\x00\x00\x00\x00",
    b"P6\n1 1\n15\n\x00\x00\x00",
    b"P3\n1 1\n255\n1 2\n",
    b"P3\n1 1\n255\n1 2 300\n",
    b"P3\n1 1\n255\n1 a 3\n",
])
def test_decode_errors(data):
    with pytest.raises(PpmError):
        decode_ppm(data)


def test_image_validation_and_gray():
    with pytest.raises(PpmError):
        PpmImage(np.zeros((2, 2)))
    with pytest.raises(PpmError):
        PpmImage(np.full((1, 1, 3), 300))
    g = PpmImage.gray([[0.0, 254.6], [-3, 999]])
    np.testing.assert_array_equal(g.pixels[..., 0], [[0, 255], [0, 255]])
    assert np.array_equal(g.pixels[..., 0], g.pixels[..., 2])


def test_bundled_image_is_the_synthetic_picture():
    img = read_ppm(bundled_image_path())
    assert (img.width, img.height) == (256, 256)
    assert np.array_equal(img.pixels, synthetic_image().pixels)


# ---- bench ----------------------------------------------------------------

@pytest.mark.parametrize("elems,expected", [
    ((2, 2, 2), 64), ((8, 8, 8), 1000), ((64, 64, 64), 287496), ((256, 256, 256), 17173512)])
def test_nrdof_table_rows(elems, expected):
    assert bench.nrdof(elems, 2) == expected


def test_bench_records_and_counters():
    recs = bench.bench_projection([(4, 4, 4)], [2], repeats=1)
    assert [r.method for r in recs] == ["galerkin", "pwc"]
    again = bench.bench_projection([(4, 4, 4)], [2], repeats=1)
    for a, b in zip(recs, again):
        assert (a.quad_points, a.basis_evals) == (b.quad_points, b.basis_evals)
    for r in recs:
        pred = bench.predicted_rhs_work((4, 4, 4), 2, r.method)
        assert (r.quad_points, r.basis_evals) == (pred["quad_points"], pred["basis_evals"])
        assert r.nrdof == 216 and r.gen_seconds > 0 and r.factor_seconds > 0


def test_bench_laplace_and_failure_records():
    recs = bench.bench_laplace([(4, 4)], [2], repeats=1)
    assert len(recs) == 2 and all(r.case == "laplace" and r.nz == 0 for r in recs)
    seen = []
    bad = bench.bench_laplace([(4, 4, 4)], [2], repeats=1, on_error=lambda *a: seen.append(a))
    assert len(seen) == 2 and all(math.isnan(r.gen_seconds) and r.nrdof == 216 for r in bad)


def test_csv_schema():
    text = bench.to_csv([bench.placeholder_record("projection", (256, 256, 256), 2, "pwc")])
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["case", "nx", "ny", "nz", "p", "method", "nrdof",
                       "gen_seconds", "factor_seconds", "quad_points", "basis_evals"]
    assert rows[1][:7] == ["projection", "256", "256", "256", "2", "pwc", "17173512"]


# ---- verify ---------------------------------------------------------------

def test_verify_suites_pass():
    reports = verify.verify_equivalence("all")
    assert [r.suite for r in reports] == list(verify.SUITES)
    assert all(r.passed for r in reports)
    text = "\n".join(line for r in reports for line in r.lines())
    assert "max_rel_discrepancy" in text and "ratios" in text


def test_verify_failure_is_report_content():
    r = verify.row_summation(lo=0.9, hi=1.0)
    assert not r.passed and len(r.measurements["ratios"]) == 2
    with pytest.raises(ValueError):
        verify.verify_equivalence("nope")


# ---- CLI ------------------------------------------------------------------

def test_cli_verify_exit_codes(capsys):
    assert main(["verify", "--suite", "matrix_equality"]) == 0
    assert "PASS" in capsys.readouterr().out
    assert main(["verify", "--suite", "bogus"]) == 2


@pytest.mark.parametrize("argv", [
    ["project", "--dim", "4"],
    ["project", "--elems", "3,x"],
    ["project", "--dim", "2", "--elems", "2,2,2"],
    ["project", "--rhs", "file"],
    ["laplace", "--bc", "front=D"],
    ["dynamics", "--dt", "-1"],
    ["bitmap", "--in", "/nonexistent.ppm"],
    ["bench", "--sizes", "0"],
    [],
])
def test_cli_usage_errors(argv, capsys):
    assert main(argv) == 2


def test_cli_project_and_laplace(tmp_path, capsys):
    out = tmp_path / "p.csv"
    assert main(["project", "--dim", "3", "--elems", "3", "--samples", "3", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "x,y,z,value" and len(lines) == 28

    out, mat = tmp_path / "l.csv", tmp_path / "k.coo"
    assert main(["laplace", "--elems", "6,6", "--bc", "DDNN", "--out", str(out),
                 "--matrix-out", str(mat)]) == 0
    assert "l2_error" in capsys.readouterr().err
    first = mat.read_text().splitlines()[0].split()
    assert len(first) == 3


def test_cli_project_from_image(tmp_path):
    img = tmp_path / "i.ppm"
    write_ppm(synthetic_image(16), img)
    assert main(["project", "--rhs", "file", "--rhs-file", str(img), "--elems", "4",
                 "--out", str(tmp_path / "o.csv")]) == 0


def test_cli_dynamics_frames(tmp_path, capsys):
    d = tmp_path / "frames"
    assert main(["dynamics", "--elems", "8,8", "--dt", "2e-3", "--steps", "4",
                 "--snapshot-every", "2", "--frame-size", "8", "--out-dir", str(d)]) == 0
    assert sorted(os.listdir(d)) == ["frame_000002.ppm", "frame_000004.ppm"]
    assert read_ppm(d / "frame_000004.ppm").width == 8
    err = capsys.readouterr().err
    assert "max_error" in err and "warning" in err


def test_cli_bitmap(tmp_path):
    src, out, errs = tmp_path / "in.ppm", tmp_path / "out.ppm", tmp_path / "e.csv"
    write_ppm(synthetic_image(32), src)
    assert main(["bitmap", "--in", str(src), "--elems", "8", "--out", str(out),
                 "--err-csv", str(errs)]) == 0
    assert read_ppm(out).width == 32
    rows = errs.read_text().splitlines()
    assert rows[0] == "channel,error" and [r[0] for r in rows[1:]] == ["R", "G", "B"]


def test_cli_bench_cap_gives_placeholders(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["bench", "--sizes", "2,128", "--repeats", "1", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [r["nrdof"] for r in rows] == ["64", "64", "2197000", "2197000"]
    assert rows[2]["gen_seconds"] == "nan" and float(rows[0]["gen_seconds"]) > 0
