import pandas as pd
import pytest
from numpy.testing import assert_allclose

from cluster_conquer.cli.commands import bench_rows
from cluster_conquer.cli.main import SEED_VARIABLE, main, resolve_seed
from cluster_conquer.cli.provenance import config_hash, provenance_header, read_csv, write_csv
from cluster_conquer.clustering.Clustering_Config import Clustering_Config, Clustering_Method
from cluster_conquer.exceptions import Configuration_Error
from cluster_conquer.procedures.Conquer_Config import Conquer_Config, Experiment_Config, Problem_Config, Problem_Model
from tests.conftest import EASY_BLOCK


@pytest.fixture(autouse=True)
def no_seed_override(monkeypatch):
    monkeypatch.delenv(SEED_VARIABLE, raising=False)


def experiment(procedures, reps=2, seed=11) -> Experiment_Config:
    conquer = Conquer_Config(clustering=Clustering_Config(method=Clustering_Method.Linkage, k=3, oracle=True), cap_per_alternative=200)
    return Experiment_Config(problem=Problem_Config(model=Problem_Model.Block, block=EASY_BLOCK), procedures=procedures,
                             conquer=conquer, reps=reps, seed=seed)


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "experiment.json"
    path.write_text(experiment(["p3c-gba", "dc-gba"]).model_dump_json())
    return path


class TestSeed:

    def test_flag_wins(self, monkeypatch):
        monkeypatch.setenv(SEED_VARIABLE, "7")
        assert resolve_seed(3, 11) == 3

    def test_environment_over_config(self, monkeypatch):
        monkeypatch.setenv(SEED_VARIABLE, "7")
        assert resolve_seed(None, 11) == 7

    def test_config_default(self):
        assert resolve_seed(None, 11) == 11

    def test_bad_environment(self, monkeypatch):
        monkeypatch.setenv(SEED_VARIABLE, "seven")
        with pytest.raises(Configuration_Error):
            resolve_seed(None, 11)


class TestProvenance:

    def test_hash_ignores_key_order(self):
        assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
        assert config_hash({"a": 1}) != config_hash({"a": 2})

    def test_header(self):
        header = provenance_header("run", {"a": 1}, 4)
        assert header.startswith("# cluster-conquer run\n")
        assert f"# config_sha256={config_hash({'a': 1})}\n" in header
        assert header.endswith("# seed=4\n")

    def test_timing_columns_are_dropped(self, tmp_path):
        frame = pd.DataFrame({"procedure": ["p3c-gba"], "total_samples": [180], "wall_time": [0.25]})
        path = write_csv(frame, tmp_path / "runs.csv", "run", {}, 0)
        loaded = read_csv(path)
        assert list(loaded.columns) == ["procedure", "total_samples"]
        assert loaded["total_samples"].tolist() == [180]


class TestCommands:

    def test_invalid_config(self, tmp_path):
        path = tmp_path / "experiment.json"
        path.write_text('{"problem": {"model": "block"}}')
        assert main(["run", "--config", str(path), "--out", str(tmp_path / "out")]) == 2

    def test_missing_config(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "absent.json"), "--out", str(tmp_path / "out")]) == 2

    def test_bad_seed_variable(self, config_path, tmp_path, monkeypatch):
        monkeypatch.setenv(SEED_VARIABLE, "not-a-seed")
        assert main(["gen", "--config", str(config_path), "--out", str(tmp_path / "out")]) == 2

    def test_gen(self, config_path, tmp_path):
        out = tmp_path / "problems"
        assert main(["gen", "--config", str(config_path), "--out", str(out)]) == 0
        assert (out / "problem_p9.json").exists()
        assert not (out / "observations_p9.csv").exists()

    def test_gen_observations(self, config_path, tmp_path):
        out = tmp_path / "problems"
        assert main(["gen", "--config", str(config_path), "--out", str(out), "--observations", "12"]) == 0
        path = out / "observations_p9.csv"
        assert path.read_text().splitlines()[0] == ",".join(str(i) for i in range(9))
        loaded = pd.read_csv(path)
        assert loaded.shape == (12, 9)
        first = loaded.to_numpy()
        assert main(["gen", "--config", str(config_path), "--out", str(out), "--observations", "12"]) == 0
        assert_allclose(pd.read_csv(path).to_numpy(), first)

    def test_run_is_reproducible(self, config_path, tmp_path):
        first, second = tmp_path / "first", tmp_path / "second"
        assert main(["run", "--config", str(config_path), "--out", str(first)]) == 0
        assert main(["run", "--config", str(config_path), "--out", str(second)]) == 0
        for name in ("runs.csv", "summary.csv"):
            assert (first / name).read_bytes() == (second / name).read_bytes()
        runs = read_csv(first / "runs.csv")
        assert len(runs) == 4
        assert set(runs["procedure"]) == {"p3c-gba", "dc-gba"}
        assert (first / "runs_timing.csv").exists()

    def test_seed_flag_changes_header(self, config_path, tmp_path):
        assert main(["run", "--config", str(config_path), "--out", str(tmp_path), "--seed", "12"]) == 0
        assert "# seed=12" in (tmp_path / "summary.csv").read_text()

    def test_pcs_table(self, tmp_path):
        assert main(["pcs-table", "--fixture", "table2", "--draws", "10000", "--out", str(tmp_path)]) == 0
        table = read_csv(tmp_path / "pcs_table2.csv")
        assert len(table) == 7
        assert table["pos"].iloc[0] == 0

    def test_pcs_table_alias(self, tmp_path):
        assert main(["pcs-table", "--fixture", "sample-size", "--draws", "10000", "--out", str(tmp_path)]) == 0
        assert (tmp_path / "pcs_table2.csv").exists()

    def test_unknown_fixture(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["pcs-table", "--fixture", "table3", "--out", str(tmp_path)])

    def test_verify_preference(self, tmp_path):
        assert main(["verify", "--suite", "pos-preference", "--draws", "10000"]) == 0

    def test_bench_unknown_procedure(self, tmp_path):
        path = tmp_path / "experiment.json"
        path.write_text(experiment(["p3c-unknown"]).model_dump_json())
        assert main(["bench", "--config", str(path), "--out", str(tmp_path / "out")]) == 1

    def test_bench_records_failing_rows(self):
        frame = bench_rows(experiment(["p3c-gba", "p3c-unknown"], reps=1), reps=1)
        assert frame["procedure"].tolist() == ["p3c-gba", "p3c-unknown"]
        assert frame["error"].iloc[0] == ""
        assert frame["error"].iloc[1].startswith("KeyError")
        assert pd.isna(frame["total_samples"].iloc[1])
