import json

import numpy as np
import pytest

from robust_factorize.bench import RunReport
from robust_factorize.dataio import load_image_dir, load_report, read_pgm, save_report, write_pgm
from robust_factorize.exceptions import DataError


def pgm_p5(path, img, maxval=255, comment=False):
    h, w = img.shape
    head = "P5\n" + ("# made by a test\n" if comment else "") + f"{w} {h}\n{maxval}\n"
    dtype = ">u2" if maxval > 255 else "u1"
    path.write_bytes(head.encode() + np.asarray(img, dtype=dtype).tobytes())


def test_orl_layout(tmp_path):
    img = np.array([[0, 51], [102, 255]])
    for s in ("s1", "s2"):
        (tmp_path / s).mkdir()
        for i in (1, 2):
            pgm_p5(tmp_path / s / f"{i}.pgm", img)
    ds = load_image_dir(tmp_path, "orl")
    assert ds.x.shape == (4, 4)
    assert ds.labels.tolist() == [0, 0, 1, 1]
    assert ds.image_shape == (2, 2)
    np.testing.assert_array_equal(ds.x[:, 0], np.array([0, 51, 102, 255]) / 255)


def test_lexicographic_order(tmp_path):
    for s, v in (("s10", 10), ("s2", 2)):
        (tmp_path / s).mkdir()
        pgm_p5(tmp_path / s / "1.pgm", np.full((1, 1), v))
    ds = load_image_dir(tmp_path, "orl")
    assert ds.label_names == ("s10", "s2")
    assert ds.x[0, 0] == 10 / 255


def test_single_white_pixel(tmp_path):
    (tmp_path / "s1").mkdir()
    pgm_p5(tmp_path / "s1" / "1.pgm", np.array([[255]]))
    assert load_image_dir(tmp_path, "orl").x.tolist() == [[1.0]]


def test_p2_comments_and_16bit(tmp_path):
    (tmp_path / "a.pgm").write_text("P2\n# c\n3 1\n# another\n4\n0 2 4\n")
    img, maxval = read_pgm(tmp_path / "a.pgm")
    assert maxval == 4 and img.tolist() == [[0.0, 0.5, 1.0]]
    pgm_p5(tmp_path / "b.pgm", np.array([[1000, 65535]]), maxval=65535, comment=True)
    img, _ = read_pgm(tmp_path / "b.pgm")
    np.testing.assert_allclose(img, [[1000 / 65535, 1.0]])


def test_yaleb_and_flat_layouts(tmp_path):
    yale = tmp_path / "yale"
    for s in ("yaleB01", "yaleB02"):
        (yale / s).mkdir(parents=True)
        for i in range(3):
            pgm_p5(yale / s / f"{s}_P00A+0{i}.pgm", np.full((3, 2), 10 * i))
        (yale / s / "notes.info").write_text("skip me")
    ds = load_image_dir(yale, "yaleb")
    assert ds.x.shape == (6, 6) and ds.labels.tolist() == [0, 0, 0, 1, 1, 1]

    flat = tmp_path / "flat"
    flat.mkdir()
    for lab in ("bob", "amy"):
        for i in range(2):
            write_pgm(flat / f"{lab}_{i}.pgm", np.full((2, 2), 0.5))
    ds = load_image_dir(flat, "flat")
    assert ds.label_names == ("amy", "bob") and ds.labels.tolist() == [0, 0, 1, 1]


def test_png_in_flat_layout(tmp_path):
    Image = pytest.importorskip("PIL.Image")
    Image.fromarray(np.array([[0, 255]], dtype=np.uint8)).save(tmp_path / "a_1.png")
    ds = load_image_dir(tmp_path, "flat")
    assert ds.x[:, 0].tolist() == [0.0, 1.0]


def test_errors(tmp_path):
    with pytest.raises(DataError):
        load_image_dir(tmp_path, "orl")  # empty
    with pytest.raises(DataError):
        load_image_dir(tmp_path / "missing", "orl")
    (tmp_path / "s1").mkdir()
    pgm_p5(tmp_path / "s1" / "1.pgm", np.zeros((2, 2)))
    pgm_p5(tmp_path / "s1" / "2.pgm", np.zeros((3, 2)))
    with pytest.raises(DataError):
        load_image_dir(tmp_path, "orl")
    (tmp_path / "s1" / "2.pgm").write_bytes(b"P5\n2 2\n255\n\x00")
    with pytest.raises(DataError):
        load_image_dir(tmp_path, "orl")
    (tmp_path / "s1" / "2.pgm").write_bytes(b"JUNK")
    with pytest.raises(DataError):
        load_image_dir(tmp_path, "orl")


def make_report(repeats=3, n_iter=5):
    rep = RunReport("target-polish", "cim", noise={"kind": "block"})
    for i in range(repeats):
        rep.add(i, 0.1 * i, 0.5, 0.6, 1.25, f"trajectories/t{i}.csv")
    return rep


def test_report_round_trip(tmp_path):
    reps = [make_report(), RunReport("weighted-nmf", "cim", noise={"kind": "block"})]
    reps[1].add(0, 0.3, 0.4, 0.5, 9.0)
    save_report(reps, tmp_path / "r.json", config={"repeats": 3})
    back, doc = load_report(tmp_path / "r.json")
    assert back == reps
    assert doc["config"] == {"repeats": 3}
    assert list(doc) == ["config", "dataset", "repeats", "aggregate", "cells"]
    assert doc["aggregate"]["target-polish/cim"]["rre"]["mean"] == pytest.approx(0.1)


def test_report_zero_repeats(tmp_path):
    save_report(RunReport("plain-nmf", "none"), tmp_path / "r.json")
    doc = json.loads((tmp_path / "r.json").read_text())
    assert doc["repeats"] == []


def test_report_keeps_trajectory_length(tmp_path):
    from robust_factorize.bench import write_trajectory
    from robust_factorize.engine import SolveConfig, solve_nmf

    x = np.random.default_rng(0).random((6, 5))
    fit = solve_nmf(x, SolveConfig(rank=2, n_iter_max=17, tol=0))
    write_trajectory(fit, tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "iter,objective_polished,refresh"
    assert len(lines) == 1 + 17
