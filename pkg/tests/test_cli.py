import subprocess
import sys

import pytest

from noisebeam.cli import _parse_seeds, _parse_sweeps, main
from noisebeam.tensorio import load_tensor

SMALL_FLAGS = [
    "--height", "8", "--width", "8", "--window", "2", "--partitions", "2",
    "--corpus-size", "4", "--branch-size", "0", "--subject-size", "3",
    "--steps", "3", "--beam-k", "2", "--cands-n", "3",
]


def run_cli(*argv):
    return main(list(argv))


class TestParsers:
    def test_seed_range(self):
        assert _parse_seeds("0:4") == [0, 1, 2, 3]

    def test_seed_list(self):
        assert _parse_seeds("3,5,9") == [3, 5, 9]
        assert _parse_seeds("7") == [7]

    def test_seed_empty(self):
        with pytest.raises(ValueError):
            _parse_seeds("")

    def test_sweep_pairs(self):
        assert _parse_sweeps(["beam-k=1,2"]) == [("beam_k", [1, 2])]
        assert _parse_sweeps(["reward=full,local"]) == [("reward", ["full", "local"])]
        assert _parse_sweeps(["mix=1,0,0,0"]) == [("mix", [(1.0, 0.0, 0.0, 0.0)])]

    def test_sweep_errors(self):
        with pytest.raises(ValueError):
            _parse_sweeps(["nonsense=1"])
        with pytest.raises(ValueError):
            _parse_sweeps(["beam_k:1,2"])
        with pytest.raises(ValueError):
            _parse_sweeps(["mix=1,0,0"])


class TestGenerate:
    def test_writes_artifacts(self, tmp_path, capsys):
        out = tmp_path / "run"
        assert run_cli("generate", *SMALL_FLAGS, "--out", str(out)) == 0
        assert (out / "video.nbt").exists()
        assert (out / "metrics.csv").exists()
        assert (out / "config.txt").exists()
        assert (out / "trace.jsonl").exists()  # beam is the default algo
        assert load_tensor(out / "video.nbt").shape == (3, 8, 8)
        printed = capsys.readouterr().out
        assert "subject_consistency_analog" in printed
        assert "wall_time" in printed
        assert "wall" not in (out / "metrics.csv").read_text()

    def test_greedy_run_has_no_trace(self, tmp_path):
        out = tmp_path / "run"
        run_cli("generate", *SMALL_FLAGS, "--algo", "greedy", "--out", str(out))
        assert not (out / "trace.jsonl").exists()

    def test_byte_identical_reruns(self, tmp_path):
        # the fingerprint hashes the whole config, out_dir included, so a
        # true repeat must reuse the same output directory
        out = tmp_path / "run"
        run_cli("generate", *SMALL_FLAGS, "--seed", "5", "--out", str(out))
        first = {
            name: (out / name).read_bytes()
            for name in ("video.nbt", "metrics.csv", "trace.jsonl", "config.txt")
        }
        run_cli("generate", *SMALL_FLAGS, "--seed", "5", "--out", str(out))
        for name, blob in first.items():
            assert (out / name).read_bytes() == blob, name

    def test_workers_do_not_change_artifacts(self, tmp_path):
        out = tmp_path / "run"
        run_cli("generate", *SMALL_FLAGS, "--seed", "5", "--out", str(out))
        video = (out / "video.nbt").read_bytes()
        trace = (out / "trace.jsonl").read_bytes()
        run_cli("generate", *SMALL_FLAGS, "--seed", "5", "--workers", "3", "--out", str(out))
        assert (out / "video.nbt").read_bytes() == video
        assert (out / "trace.jsonl").read_bytes() == trace

    def test_export_frames(self, tmp_path):
        out = tmp_path / "run"
        run_cli("generate", *SMALL_FLAGS, "--algo", "greedy", "--export-frames",
                "--out", str(out))
        pgms = sorted((out / "frames").glob("frame_*.pgm"))
        assert len(pgms) == 3

    def test_config_file_then_flag_override(self, tmp_path):
        cfg_file = tmp_path / "conf.txt"
        cfg_file.write_text("[search]\nsteps = 4\nseed = 9\n")
        out = tmp_path / "run"
        run_cli("generate", *SMALL_FLAGS[:-2], "--config", str(cfg_file),
                "--algo", "greedy", "--out", str(out))
        text = (out / "config.txt").read_text()
        assert "steps = 4" in text and "seed = 9" in text
        out2 = tmp_path / "run2"
        run_cli("generate", *SMALL_FLAGS[:-2], "--config", str(cfg_file),
                "--steps", "2", "--algo", "greedy", "--out", str(out2))
        assert "steps = 2" in (out2 / "config.txt").read_text()

    def test_missing_config_file_exits_2(self, tmp_path, capsys):
        assert run_cli("generate", "--config", str(tmp_path / "nope.txt")) == 2
        assert "error:" in capsys.readouterr().err

    def test_bad_choice_is_an_argparse_error(self):
        with pytest.raises(SystemExit):
            run_cli("generate", "--algo", "magic")


class TestSearchCommand:
    def test_forces_beam(self, tmp_path):
        out = tmp_path / "run"
        run_cli("search", *SMALL_FLAGS, "--algo", "greedy", "--out", str(out))
        assert (out / "trace.jsonl").exists()
        assert "algo = beam" in (out / "config.txt").read_text()


class TestBenchmarkCommand:
    def test_sweep_matrix(self, tmp_path, capsys):
        out = tmp_path / "bench"
        assert run_cli(
            "benchmark", *SMALL_FLAGS, "--algo", "greedy", "--out", str(out),
            "--sweep", "steps=2,3", "--seeds", "0:2",
        ) == 0
        runs = (out / "runs.csv").read_text().splitlines()
        assert len(runs) == 1 + 4  # header + 2 configs x 2 seeds
        summary = (out / "summary.csv").read_text().splitlines()
        assert len(summary) == 1 + 2
        assert "4 runs (0 failed), 2 configs" in capsys.readouterr().out

    def test_bad_sweep_exits_2(self, tmp_path, capsys):
        assert run_cli("benchmark", "--out", str(tmp_path), "--sweep", "bogus=1") == 2
        assert "error:" in capsys.readouterr().err


class TestCorpusCommand:
    def test_saves_corpus(self, tmp_path):
        out = tmp_path / "c"
        run_cli("corpus", *SMALL_FLAGS, "--out", str(out))
        assert load_tensor(out / "corpus.nbt").shape == (4, 4, 8, 8)


class TestInspectCommand:
    def test_inspects_run_directory(self, tmp_path, capsys):
        out = tmp_path / "run"
        run_cli("generate", *SMALL_FLAGS, "--out", str(out))
        capsys.readouterr()
        assert run_cli("inspect", str(out)) == 0
        printed = capsys.readouterr().out
        assert "video.nbt" in printed and "shape=(3, 8, 8)" in printed
        assert "candidate records" in printed

    def test_inspect_single_tensor(self, tmp_path, capsys):
        out = tmp_path / "run"
        run_cli("generate", *SMALL_FLAGS, "--algo", "greedy", "--out", str(out))
        capsys.readouterr()
        run_cli("inspect", str(out / "video.nbt"))
        assert "tensor shape=" in capsys.readouterr().out

    def test_unknown_artifact_exits_2(self, tmp_path, capsys):
        p = tmp_path / "mystery.bin"
        p.write_bytes(b"xx")
        assert run_cli("inspect", str(p)) == 2
        assert "error:" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    out = tmp_path / "run"
    proc = subprocess.run(
        [sys.executable, "-m", "noisebeam.cli", "generate", *SMALL_FLAGS,
         "--algo", "greedy", "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (out / "video.nbt").exists()
    assert "denoiser_calls" in proc.stdout
