import json
import re
from pathlib import Path

import numpy as np
import pytest

from mixed_ego.cli import main


FAST_SPEC = {
    "problems": ["toy"],
    "algorithms": ["ego"],
    "repetitions": 2,
    "doe_size": 5,
    "budget": 9,
    "multistart": 2,
    "fit_maxiter": 40,
    "n_random": 64,
    "n_local": 1,
    "local_maxiter": 10,
}


def write_spec(tmp_path, spec, name="campaign.json"):
    path = tmp_path / name
    path.write_text(json.dumps(spec))
    return str(path)


def strip_volatile(text: str) -> str:
    """Drop wall-clock content: the wall_ms CSV column and manifest timestamps."""
    lines = []
    for line in text.splitlines():
        line = re.sub(r'"timestamp": "[^"]*"', '"timestamp": "-"', line)
        lines.append(line)
    return "\n".join(lines)


def csv_without_wall(path: Path) -> str:
    rows = path.read_text().splitlines()
    header = rows[0].split(",")
    keep = [i for i, c in enumerate(header) if c != "wall_ms"]
    return "\n".join(",".join(r.split(",")[i] for i in keep) for r in rows)


class TestListProblems:
    def test_exit_zero_and_lists(self, capsys):
        assert main(["list-problems"]) == 0
        out = capsys.readouterr().out
        assert "cosine" in out and "dragon" in out


class TestRun:
    def test_unknown_problem_is_config_error(self, tmp_path, capsys):
        cfg = write_spec(tmp_path, {**FAST_SPEC, "problems": ["nope"]})
        assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 2

    def test_schema_problem_is_config_error(self, tmp_path):
        cfg = write_spec(tmp_path, {**FAST_SPEC, "problems": ["dragon"]})
        assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 2

    def test_unknown_algorithm_is_config_error(self, tmp_path):
        cfg = write_spec(tmp_path, {**FAST_SPEC, "algorithms": ["annealing"]})
        assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 2

    def test_bad_json_is_config_error(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{nope")
        assert main(["run", "--config", str(path), "--out", str(tmp_path / "o")]) == 2

    def test_empty_campaign_ok(self, tmp_path):
        cfg = write_spec(tmp_path, {**FAST_SPEC, "problems": [], "algorithms": []})
        out = tmp_path / "o"
        assert main(["run", "--config", cfg, "--out", str(out)]) == 0
        summary = (out / "summary.csv").read_text().splitlines()
        assert len(summary) == 1  # header only

    def test_file_contract(self, tmp_path):
        cfg = write_spec(tmp_path, FAST_SPEC)
        out = tmp_path / "o"
        assert main(["run", "--config", cfg, "--out", str(out)]) == 0
        csvs = sorted(p.name for p in out.glob("toy__ego__s*.csv"))
        assert csvs == ["toy__ego__s0.csv", "toy__ego__s1.csv"]
        assert (out / "toy__ego__s0.manifest.json").exists()
        assert (out / "summary.csv").exists()
        assert (out / "campaign.json").exists()
        summary = (out / "summary.csv").read_text().splitlines()
        assert len(summary) == 1 + FAST_SPEC["budget"]

    def test_summary_matches_independent_recomputation(self, tmp_path):
        cfg = write_spec(tmp_path, FAST_SPEC)
        out = tmp_path / "o"
        main(["run", "--config", cfg, "--out", str(out)])
        traces = []
        for seed in (0, 1):
            rows = (out / f"toy__ego__s{seed}.csv").read_text().splitlines()[1:]
            header = (out / f"toy__ego__s{seed}.csv").read_text().splitlines()[0].split(",")
            col = header.index("best_feasible")
            traces.append([float(r.split(",")[col]) for r in rows])
        traces = np.array(traces)
        summary = (out / "summary.csv").read_text().splitlines()[1:]
        for t, line in enumerate(summary):
            parts = line.split(",")
            assert float(parts[3]) == pytest.approx(np.median(traces[:, t]))
            assert float(parts[4]) == pytest.approx(np.percentile(traces[:, t], 25))

    def test_rerun_byte_identical_excluding_timestamps(self, tmp_path):
        cfg = write_spec(tmp_path, FAST_SPEC)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["run", "--config", cfg, "--out", str(out1)]) == 0
        assert main(["run", "--config", cfg, "--out", str(out2)]) == 0
        for p1 in sorted(out1.iterdir()):
            p2 = out2 / p1.name
            if p1.suffix == ".csv":
                assert csv_without_wall(p1) == csv_without_wall(p2), p1.name
            else:
                assert strip_volatile(p1.read_text()) == strip_volatile(p2.read_text())

    def test_mo_campaign_emits_igd_column(self, tmp_path):
        spec = {**FAST_SPEC, "problems": ["zdt1-2d"], "algorithms": ["segomoe"],
                "repetitions": 1, "budget": 8, "doe_size": 5}
        cfg = write_spec(tmp_path, spec)
        out = tmp_path / "o"
        assert main(["run", "--config", cfg, "--out", str(out)]) == 0
        lines = (out / "summary.csv").read_text().splitlines()
        assert lines[0].split(",")[-1] == "igd_plus_median"
        assert lines[-1].split(",")[-1] != ""
        assert (out / "zdt1-2d__segomoe__s0.archive.csv").exists()

    def test_parallel_jobs_match_sequential(self, tmp_path):
        cfg = write_spec(tmp_path, FAST_SPEC)
        seq, par = tmp_path / "seq", tmp_path / "par"
        assert main(["run", "--config", cfg, "--out", str(seq)]) == 0
        assert main(["run", "--config", cfg, "--out", str(par), "--jobs", "2"]) == 0
        for p1 in sorted(seq.glob("*.csv")):
            assert csv_without_wall(p1) == csv_without_wall(par / p1.name)


class TestSummarize:
    def test_recomputes_and_writes_profiles(self, tmp_path):
        cfg = write_spec(tmp_path, FAST_SPEC)
        out = tmp_path / "o"
        main(["run", "--config", cfg, "--out", str(out)])
        assert main(["summarize", "--out", str(out)]) == 0
        assert (out / "data_profile_tau0.02.csv").exists()
        assert (out / "data_profile_tau0.005.csv").exists()
        meta = json.loads((out / "summarize_meta.json").read_text())
        assert meta["cells"] == 2 and meta["warnings"] == 0
        profile = (out / "data_profile_tau0.02.csv").read_text().splitlines()
        fracs = [float(r.split(",")[1]) for r in profile[1:]]
        assert all(b >= a for a, b in zip(fracs, fracs[1:]))

    def test_idempotent(self, tmp_path):
        cfg = write_spec(tmp_path, FAST_SPEC)
        out = tmp_path / "o"
        main(["run", "--config", cfg, "--out", str(out)])
        main(["summarize", "--out", str(out)])
        first = (out / "summary.csv").read_text()
        main(["summarize", "--out", str(out)])
        assert (out / "summary.csv").read_text() == first

    def test_corrupt_file_skipped_with_warning(self, tmp_path):
        cfg = write_spec(tmp_path, FAST_SPEC)
        out = tmp_path / "o"
        main(["run", "--config", cfg, "--out", str(out)])
        (out / "toy__ego__s1.csv").unlink()  # manifest now dangles
        assert main(["summarize", "--out", str(out)]) == 0
        meta = json.loads((out / "summarize_meta.json").read_text())
        assert meta["warnings"] == 1
        assert meta["cells"] == 1
