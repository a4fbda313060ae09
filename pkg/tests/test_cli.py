import numpy as np
import pytest

from fsot import read_features
from fsot.cli import main


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def synth_file(tmp_path, capsys):
    path = tmp_path / "data.fsf"
    code = main([
        "synth", "--out", str(path), "--classes", "8", "--per-class", "20",
        "--dim", "16", "--center-scale", "100", "--sigma", "1", "--seed", "5",
    ])
    capsys.readouterr()
    assert code == 0
    return path


def test_usage_error_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["transform", "--out", "x.fsf"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_method_exits_2(synth_file, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--features", str(synth_file), "--method", "svm"])
    assert exc.value.code == 2


def test_missing_file_exits_1(tmp_path, capsys):
    code, _, err = run_cli(["run", "--features", str(tmp_path / "nope.fsf"),
                            "--episodes", "1"], capsys)
    assert code == 1
    assert "error:" in err


def test_synth_round_trips(synth_file):
    fs = read_features(synth_file)
    assert fs.n == 160 and fs.d == 16 and fs.class_count == 8


def test_synth_zero_sigma_collapses_classes(tmp_path, capsys):
    path = tmp_path / "flat.fsf"
    code, _, _ = run_cli([
        "synth", "--out", str(path), "--classes", "3", "--per-class", "4",
        "--dim", "6", "--sigma", "0", "--seed", "1",
    ], capsys)
    assert code == 0
    fs = read_features(path)
    for j in range(3):
        rows = fs.data[fs.labels == j]
        assert np.ptp(rows, axis=0).max() == 0.0


def test_transform_full_normalization_gives_unit_rows(synth_file, tmp_path, capsys):
    out = tmp_path / "unit.fsf"
    code, _, _ = run_cli([
        "transform", "--in", str(synth_file), "--out", str(out),
        "--beta", "0.5", "--delta", "1",
    ], capsys)
    assert code == 0
    fs = read_features(out)
    np.testing.assert_allclose(np.linalg.norm(fs.data, axis=1), 1.0, atol=1e-6)
    # same row layout as the input: header + n * (label + d floats)
    assert out.stat().st_size == 17 + fs.n * (4 + 4 * fs.d)
    assert (fs.n, fs.d) == (160, 16)


def test_transform_per_episode_dumps(synth_file, tmp_path, capsys):
    out = tmp_path / "ep.fsf"
    code, _, _ = run_cli([
        "transform", "--in", str(synth_file), "--out", str(out),
        "--per-episode-spec", "5,1,15,3", "--episodes", "2",
    ], capsys)
    assert code == 0
    for k in range(2):
        dump = read_features(tmp_path / f"ep.ep{k:04d}.fsf")
        assert dump.n == 80
        assert dump.d == min(16, 80)


def test_run_separable_dataset_is_perfect(synth_file, capsys):
    code, out, err = run_cli([
        "run", "--features", str(synth_file), "--method", "map",
        "--episodes", "25", "--seed", "1",
    ], capsys)
    assert code == 0
    assert "mean_acc=1.0\n" in out
    assert "timing:" in err
    for key in ("method=map", "w=5", "s=1", "q=15", "n_episodes=25",
                "ci95=", "skipped=0", "beta=0.5", "lambda=10.0"):
        assert key in out


def test_run_stdout_is_reproducible(synth_file, capsys):
    argv = ["run", "--features", str(synth_file), "--method", "kmeans",
            "--episodes", "12", "--seed", "9"]
    _, out_a, _ = run_cli(argv, capsys)
    _, out_b, _ = run_cli(argv, capsys)
    assert out_a == out_b


def test_run_dump_norms(synth_file, tmp_path, capsys):
    norms_path = tmp_path / "norms.csv"
    code, _, _ = run_cli([
        "run", "--features", str(synth_file), "--method", "nn",
        "--episodes", "2", "--dump-norms", str(norms_path),
    ], capsys)
    assert code == 0
    lines = norms_path.read_text().splitlines()
    assert lines[0] == "norm"
    assert len(lines) == 1 + 80


def test_compare_report_contract(synth_file, capsys):
    code, out, _ = run_cli([
        "compare", "--features", str(synth_file),
        "--method-a", "nn", "--method-b", "map",
        "--episodes", "10", "--seed", "2",
    ], capsys)
    assert code == 0
    for key in ("method=nn", "method=map", "t_stat=", "p_value=",
                "mean_acc=", "ci95=", "n_episodes=10", "skipped="):
        assert key in out


def test_compare_same_method_is_degenerate(synth_file, capsys):
    code, out, _ = run_cli([
        "compare", "--features", str(synth_file),
        "--method-a", "nn", "--method-b", "nn", "--episodes", "8",
    ], capsys)
    assert code == 0
    assert "degenerate=True" in out


def test_compare_map_beats_nn_on_overlapping_clusters(tmp_path, capsys):
    data = tmp_path / "overlap.fsf"
    run_cli([
        "synth", "--out", str(data), "--classes", "12", "--per-class", "30",
        "--dim", "16", "--center-scale", "2", "--sigma", "1", "--seed", "3",
    ], capsys)
    code, out, _ = run_cli([
        "compare", "--features", str(data),
        "--method-a", "nn", "--method-b", "map", "--seed", "4",
    ], capsys)
    assert code == 0
    p_value = float(next(l for l in out.splitlines() if l.startswith("p_value=")).split("=")[1])
    assert p_value < 0.05


def test_transform_center_before_norm_flag(synth_file, tmp_path, capsys):
    base, variant = tmp_path / "a.fsf", tmp_path / "b.fsf"
    for out, extra in ((base, []), (variant, ["--center-before-norm"])):
        code, _, _ = run_cli([
            "transform", "--in", str(synth_file), "--out", str(out),
            "--per-episode-spec", "5,1,15,0",
        ] + extra, capsys)
        assert code == 0
    a = read_features(tmp_path / "a.ep0000.fsf")
    b = read_features(tmp_path / "b.ep0000.fsf")
    assert a.data.shape == b.data.shape
    assert not np.array_equal(a.data, b.data)
