import numpy as np
import pytest

from hypernb.cli import main, parse_axes, parse_sized
from hypernb.hypergraph import load_hypergraph, load_labels


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def sampled(tmp_path, capsys):
    prefix = tmp_path / "s"
    code, out, _ = run(
        capsys, "sample", "--n", 200, "--groups", 2, "--c", "2=5,3=5", "--p", "2=0.95,3=0.95",
        "--seed", 7, "--out", prefix, "--reproducible",
    )
    assert code == 0
    return prefix, out


def test_parsers():
    assert parse_sized("2=5,3=0.5") == {2: 5.0, 3: 0.5}
    assert parse_axes("2=0:1:11") == {2: (0.0, 1.0, 11)}


def test_sample_writes_files_and_report(sampled):
    prefix, out = sampled
    H = load_hypergraph(f"{prefix}.edges", n=200)
    z = load_labels(f"{prefix}.labels", 200)
    assert H.K == [2, 3] and z.shape == (200,)
    last = out.strip().splitlines()[-1].split(",")
    assert float(last[1]) == 15.0


def test_sample_three_groups(tmp_path, capsys):
    code, out, _ = run(
        capsys, "sample", "--n", 150, "--groups", 3, "--c", "2=5,3=5", "--p", "2=0.9,3=0.1",
        "--exact-sizes", "--out", tmp_path / "f",
    )
    assert code == 0
    assert np.array_equal(np.bincount(load_labels(tmp_path / "f.labels")), [50, 50, 50])


def test_usage_errors(capsys, tmp_path):
    assert run(capsys, "sample", "--n", 20, "--out", tmp_path / "x")[0] == 1
    assert run(capsys, "spectrum")[0] == 1
    assert run(capsys, "bogus")[0] == 1
    assert run(capsys, "sample", "--n", 20, "--c", "2")[0] == 1


def test_data_errors(tmp_path, capsys, sampled):
    prefix, _ = sampled
    bad = tmp_path / "bad.txt"
    bad.write_text("1 1 2\n")
    assert run(capsys, "spectrum", bad)[0] == 2
    short = tmp_path / "short.labels"
    short.write_text("0\n1\n")
    assert run(capsys, "cluster", f"{prefix}.edges", "--truth", short, "--out", tmp_path / "c")[0] == 2
    labels = tmp_path / "wide.labels"
    labels.write_text("".join(f"{i % 4}\n" for i in range(200)))
    code = run(capsys, "estimate", f"{prefix}.edges", labels, "--groups", 2)[0]
    assert code == 2


def test_numerical_failure_exit(capsys, sampled):
    prefix, _ = sampled
    code, _, err = run(capsys, "spectrum", f"{prefix}.edges", "--operator", "B", "--h", 5, "--tol", 1e-300)
    assert code == 3 and "numerical" in err


def test_spectrum_outputs(capsys, sampled, tmp_path):
    prefix, _ = sampled
    code, out, _ = run(capsys, "spectrum", f"{prefix}.edges", "--h", 4, "--reproducible")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "index,re,im,residual" and lines[-1].startswith("# bulk_radius,")
    assert abs(float(lines[1].split(",")[1]) - 15) < 2
    one = tmp_path / "one.txt"
    one.write_text("1 2\n")
    code, out, _ = run(capsys, "spectrum", one, "--operator", "B", "--reproducible")
    assert code == 0 and float(out.splitlines()[1].split(",")[1]) == 0.0
    code, out, _ = run(
        capsys, "spectrum", f"{prefix}.edges", "--operator", "Jprime", "--labels", f"{prefix}.labels", "--h", 6,
    )
    assert code == 0 and out.startswith("# generated ")
    assert run(capsys, "spectrum", f"{prefix}.edges", "--operator", "Jprime")[0] == 1


def test_cluster_and_reproducible(capsys, sampled, tmp_path):
    prefix, _ = sampled
    args = ["cluster", f"{prefix}.edges", "--algo", "nbhsc", "--h", 2, "--truth", f"{prefix}.labels",
            "--out", tmp_path / "c", "--reproducible"]
    code, out, _ = run(capsys, *args)
    assert code == 0
    head, row = out.strip().splitlines()
    assert head == "seed,ell,h,objective,variance_explained,ari"
    assert float(row.split(",")[-1]) > 0.1
    assert run(capsys, *args)[1] == out
    assert load_labels(tmp_path / "c.labels").shape == (200,)
    code, out, _ = run(capsys, "cluster", f"{prefix}.edges", "--project", "--dedup", "--rounds", 2, "--h", 6,
                       "--truth", f"{prefix}.labels", "--out", tmp_path / "p")
    assert code == 0


def test_estimate(capsys, sampled):
    prefix, _ = sampled
    code, out, _ = run(capsys, "estimate", f"{prefix}.edges", f"{prefix}.labels", "--reproducible")
    assert code == 0
    rows = [l.split(",") for l in out.splitlines()]
    assert rows[0] == ["quantity", "k", "s", "t", "value"]
    cin2 = [float(r[4]) for r in rows if r[:2] == ["c", "2"] and r[2] == r[3]]
    assert all(abs(v - 9.5) < 2.5 for v in cin2)
    assert rows[-1][0] == "diagonal_c" and rows[-1][1] == "3"


def test_sweep(capsys, tmp_path):
    out = tmp_path / "sw"
    code = run(
        capsys, "sweep", "--n", 60, "--c", "2=5,3=5", "--axis", "2=0.9:0.9:1,3=0.9:0.9:1",
        "--trials", 1, "--out", out, "--reproducible",
    )[0]
    assert code == 0
    heat = (tmp_path / "sw_heatmap.csv").read_text().splitlines()
    assert heat[0] == "p_2,p_3,mean_ari,std_ari,trials" and len(heat) == 2
    assert (tmp_path / "sw_boundary.csv").read_text().startswith("curve,index,p_2,p_3")
    first = (tmp_path / "sw_heatmap.csv").read_text()
    run(capsys, "sweep", "--n", 60, "--c", "2=5,3=5", "--axis", "2=0.9:0.9:1,3=0.9:0.9:1",
        "--trials", 1, "--out", out, "--reproducible")
    assert (tmp_path / "sw_heatmap.csv").read_text() == first
    assert run(capsys, "sweep", "--c", "2=5", "--out", out)[0] == 1


def test_group_count_scan(capsys, sampled, tmp_path):
    prefix, _ = sampled
    code, out, _ = run(capsys, "cluster", f"{prefix}.edges", "--algo", "nbhsc", "--h", 4, "--groups", "2:4",
                       "--out", tmp_path / "g", "--reproducible")
    assert code == 0
    rows = [r.split(",") for r in out.strip().splitlines()[1:]]
    assert [r[1] for r in rows] == ["2", "3", "4"]
    assert all((tmp_path / f"g_{ell}.labels").exists() for ell in (2, 3, 4))
    assert run(capsys, "cluster", f"{prefix}.edges", "--groups", "0:3")[0] == 1


def test_report_lists_both_bulk_radii(sampled):
    _, out = sampled
    head, row = out.strip().splitlines()[-2:]
    fields = dict(zip(head.split(","), row.split(",")))
    assert float(fields["sqrt_alpha"]) ** 2 == pytest.approx(15.0)
    assert float(fields["sqrt_beta"]) ** 2 == pytest.approx(float(fields["beta"]))
