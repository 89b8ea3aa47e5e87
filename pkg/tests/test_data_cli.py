import json

import numpy as np
import pytest

from llmroute import (
    Dataset,
    InvalidSplitError,
    LabelMatrix,
    LLMCandidate,
    Query,
    SplitSpec,
    ValidationError,
    export_archive,
    load_archive,
    load_dataset,
    load_dataset_dir,
    optimize,
    pareto_filter,
    save_dataset_dir,
    split_dataset,
    synth_instance,
)
from llmroute.cli import main
from llmroute.data import load_predictions, save_predictions
from llmroute.prediction import PredictionMatrix


class TestSplit:
    def test_ceiling_arithmetic(self):
        ds = synth_instance(100, 2, seed=0)
        train, val, test = split_dataset(ds, SplitSpec(0.01, 0.01, seed=1))
        assert (len(train), len(val), len(test)) == (1, 1, 98)

    def test_disjoint_and_exhaustive(self):
        ds = synth_instance(53, 3, seed=2)
        train, val, test = split_dataset(ds, SplitSpec(0.2, 0.1, seed=3))
        merged = np.sort(np.concatenate([train, val, test]))
        assert merged.tolist() == list(range(53))

    def test_same_seed_same_split(self):
        ds = synth_instance(200, 2, seed=4)
        spec = SplitSpec(0.05, 0.05, seed=9)
        a = split_dataset(ds, spec)
        b = split_dataset(ds, spec)
        for x, y in zip(a, b):
            assert np.array_equal(x, y)

    def test_different_seeds_differ(self):
        ds = synth_instance(1000, 2, seed=5)
        a = split_dataset(ds, SplitSpec(0.1, 0.1, seed=1))
        b = split_dataset(ds, SplitSpec(0.1, 0.1, seed=2))
        assert not np.array_equal(a[0], b[0])

    def test_infeasible_split_rejected(self):
        ds = synth_instance(3, 2, seed=6)
        with pytest.raises(InvalidSplitError):
            split_dataset(ds, SplitSpec(0.5, 0.5, seed=0))
        with pytest.raises(InvalidSplitError):
            SplitSpec(0.0, 0.1, seed=0)
        with pytest.raises(InvalidSplitError):
            SplitSpec(0.6, 0.6, seed=0)


class TestSynth:
    def test_degenerate_instance(self):
        ds = synth_instance(1, 1, seed=7)
        assert ds.n == 1 and ds.m == 1

    def test_reproducible(self):
        a = synth_instance(40, 3, seed=8)
        b = synth_instance(40, 3, seed=8)
        assert np.array_equal(a.labels.values, b.labels.values)
        assert [q.token_count for q in a.queries] == [q.token_count for q in b.queries]
        assert [l.price_per_token for l in a.llms] == [l.price_per_token for l in b.llms]

    def test_price_correlation_with_skill(self):
        # with full correlation, the priciest LLM should have the best column
        # mean most of the time; check in aggregate over seeds
        wins = 0
        for seed in range(30):
            ds = synth_instance(300, 4, seed=seed, difficulty_correlation=1.0)
            prices = np.array([l.price_per_token for l in ds.llms])
            means = ds.labels.values.mean(axis=0)
            if means[int(np.argmax(prices))] == means.max():
                wins += 1
        assert wins >= 24

    def test_parameter_validation(self):
        with pytest.raises(ValidationError):
            synth_instance(0, 1, seed=0)
        with pytest.raises(ValidationError):
            synth_instance(1, 1, seed=0, price_spread=0.0)
        with pytest.raises(ValidationError):
            synth_instance(1, 1, seed=0, difficulty_correlation=2.0)


class TestDatasetRoundTrip:
    def test_save_load_equal(self, tmp_path):
        ds = synth_instance(25, 3, seed=10)
        save_dataset_dir(ds, tmp_path)
        back = load_dataset_dir(tmp_path)
        assert back.n == ds.n and back.m == ds.m
        assert np.array_equal(back.labels.values, ds.labels.values)
        assert [q.token_count for q in back.queries] == [q.token_count for q in ds.queries]
        assert [l.price_per_token for l in back.llms] == [l.price_per_token for l in ds.llms]
        assert np.array_equal(back.feature_array(), ds.feature_array())
        assert np.array_equal(back.cost_matrix().values, ds.cost_matrix().values)

    def test_minimal_one_by_one(self, tmp_path):
        (tmp_path / "queries.csv").write_text("query_id,token_count,text\n0,5,hello\n")
        (tmp_path / "labels.csv").write_text("query_id,llm_id,correct\n0,0,1\n")
        (tmp_path / "prices.csv").write_text("llm_id,name,price_per_token\n0,tiny,0.01\n")
        ds = load_dataset(
            tmp_path / "queries.csv", tmp_path / "labels.csv", tmp_path / "prices.csv"
        )
        assert ds.n == 1 and ds.m == 1
        assert ds.cost_matrix().values.tolist() == [[0.05]]

    def test_missing_label_cell_named(self, tmp_path):
        (tmp_path / "queries.csv").write_text("query_id,token_count,text\n0,5,a\n1,6,b\n")
        (tmp_path / "labels.csv").write_text(
            "query_id,llm_id,correct\n0,0,1\n"  # (1, 0) missing
        )
        (tmp_path / "prices.csv").write_text("llm_id,name,price_per_token\n0,tiny,0.01\n")
        with pytest.raises(ValidationError, match=r"query 1, llm 0"):
            load_dataset(tmp_path / "queries.csv", tmp_path / "labels.csv", tmp_path / "prices.csv")

    def test_duplicate_label_rejected(self, tmp_path):
        (tmp_path / "queries.csv").write_text("query_id,token_count,text\n0,5,a\n")
        (tmp_path / "labels.csv").write_text("query_id,llm_id,correct\n0,0,1\n0,0,0\n")
        (tmp_path / "prices.csv").write_text("llm_id,name,price_per_token\n0,tiny,0.01\n")
        with pytest.raises(ValidationError, match="duplicate"):
            load_dataset(tmp_path / "queries.csv", tmp_path / "labels.csv", tmp_path / "prices.csv")

    def test_non_binary_label_rejected(self, tmp_path):
        (tmp_path / "queries.csv").write_text("query_id,token_count,text\n0,5,a\n")
        (tmp_path / "labels.csv").write_text("query_id,llm_id,correct\n0,0,0.5\n")
        (tmp_path / "prices.csv").write_text("llm_id,name,price_per_token\n0,tiny,0.01\n")
        with pytest.raises(ValidationError, match="0 or 1"):
            load_dataset(tmp_path / "queries.csv", tmp_path / "labels.csv", tmp_path / "prices.csv")

    def test_negative_price_rejected(self, tmp_path):
        (tmp_path / "queries.csv").write_text("query_id,token_count,text\n0,5,a\n")
        (tmp_path / "labels.csv").write_text("query_id,llm_id,correct\n0,0,1\n")
        (tmp_path / "prices.csv").write_text("llm_id,name,price_per_token\n0,tiny,-0.01\n")
        with pytest.raises(ValidationError, match="negative price"):
            load_dataset(tmp_path / "queries.csv", tmp_path / "labels.csv", tmp_path / "prices.csv")

    def test_nan_feature_rejected(self, tmp_path):
        (tmp_path / "queries.csv").write_text("query_id,token_count,text\n0,5,a\n")
        (tmp_path / "labels.csv").write_text("query_id,llm_id,correct\n0,0,1\n")
        (tmp_path / "prices.csv").write_text("llm_id,name,price_per_token\n0,tiny,0.01\n")
        (tmp_path / "features.csv").write_text("query_id,f0\n0,nan\n")
        with pytest.raises(ValidationError, match="finite"):
            load_dataset(
                tmp_path / "queries.csv",
                tmp_path / "labels.csv",
                tmp_path / "prices.csv",
                features_path=tmp_path / "features.csv",
            )

    def test_cost_overrides_applied(self):
        ds = Dataset(
            queries=[Query(id=0, token_count=10)],
            llms=[LLMCandidate(id=0, name="a", price_per_token=0.1)],
            labels=LabelMatrix([[1.0]]),
            cost_overrides={(0, 0): 0.42},
        )
        assert ds.cost_matrix().values.tolist() == [[0.42]]


class TestPredictionsFile:
    def test_round_trip(self, tmp_path):
        values = np.random.default_rng(3).uniform(0, 1, (6, 3))
        path = tmp_path / "preds.csv"
        save_predictions(values, path)
        back = load_predictions(path, 6, 3)
        assert np.array_equal(back, values)

    def test_missing_cell_rejected(self, tmp_path):
        path = tmp_path / "preds.csv"
        path.write_text("query_id,llm_id,p\n0,0,0.5\n")
        with pytest.raises(ValidationError, match="missing prediction"):
            load_predictions(path, 2, 1)


class TestArchiveDocument:
    def _archive(self, seed=0):
        ds = synth_instance(12, 3, seed=seed)
        P = PredictionMatrix(ds.labels.values)
        archive = optimize(P, ds.cost_matrix())
        return ds, archive

    def test_round_trip_objectives(self, tmp_path):
        ds, archive = self._archive()
        path = tmp_path / "archive.json"
        export_archive(archive, ds, path, metadata={"seed": 0})
        solutions, doc = load_archive(path)
        assert len(solutions) == len(archive)
        for loaded, original in zip(solutions, archive):
            assert loaded.objectives == original.objectives
            assert np.array_equal(loaded.assignment, original.assignment)

    def test_plot_table_row_count(self, tmp_path):
        ds, archive = self._archive(seed=1)
        path = tmp_path / "archive.json"
        export_archive(archive, ds, path)
        doc = json.loads(path.read_text())
        assert len(doc["plot_table"]["rows"]) == len(archive)

    def test_single_solution_document(self, tmp_path):
        ds = synth_instance(4, 1, seed=2)
        archive = optimize(PredictionMatrix(ds.labels.values), ds.cost_matrix())
        path = tmp_path / "one.json"
        export_archive(archive, ds, path)
        doc = json.loads(path.read_text())
        assert len(doc["solutions"]) == 1

    def test_loaded_archive_refilters_to_itself(self, tmp_path):
        ds, archive = self._archive(seed=3)
        path = tmp_path / "archive.json"
        export_archive(archive, ds, path)
        solutions, _ = load_archive(path)
        assert pareto_filter(solutions) == pareto_filter(archive.members)


class TestCLI:
    def test_missing_data_dir_is_io_error(self, tmp_path):
        rc = main(["predict", "--data", str(tmp_path / "nope"), "--model", "x", "--out", "y"])
        assert rc == 4

    def test_validation_error_exit_code(self, tmp_path):
        rc = main(["synth", "--n", "0", "--m", "2", "--seed", "1", "--out", str(tmp_path / "d")])
        assert rc == 2

    def test_brute_oracle_too_large_exit_code(self, tmp_path):
        data = tmp_path / "data"
        assert main(["synth", "--n", "40", "--m", "3", "--seed", "1", "--out", str(data)]) == 0
        rc = main(["oracle", "--data", str(data), "--mode", "brute", "--out", str(tmp_path / "f.json")])
        assert rc == 3

    def test_pipeline_runs_and_is_deterministic(self, tmp_path, capsys):
        data = tmp_path / "data"
        model = tmp_path / "model.npz"
        preds = tmp_path / "preds.csv"
        front = tmp_path / "front.json"

        assert main(["synth", "--n", "60", "--m", "3", "--seed", "3", "--out", str(data)]) == 0
        assert main([
            "train", "--data", str(data), "--train-frac", "0.2", "--val-frac", "0.2",
            "--u", "4", "--alpha", "0.5", "--seed", "5", "--model-out", str(model),
        ]) == 0
        assert main(["predict", "--data", str(data), "--model", str(model), "--out", str(preds)]) == 0

        archives = []
        for name in ("a1.json", "a2.json"):
            out = tmp_path / name
            assert main([
                "optimize", "--data", str(data), "--predictions", str(preds),
                "--gn", "10", "--max-iters", "40", "--out", str(out),
            ]) == 0
            archives.append(out.read_bytes())
        assert archives[0] == archives[1]

        assert main(["oracle", "--data", str(data), "--mode", "incremental", "--out", str(front)]) == 0
        assert main(["evaluate", "--archive", str(tmp_path / "a1.json"), "--reference", str(front)]) == 0
        out = capsys.readouterr().out
        assert "igd:" in out and "delta:" in out and "wall time" in out

    def test_evaluate_single_solution_prints_na_delta(self, tmp_path, capsys):
        data = tmp_path / "data"
        assert main(["synth", "--n", "10", "--m", "1", "--seed", "4", "--out", str(data)]) == 0
        ds = load_dataset_dir(data)
        preds = tmp_path / "preds.csv"
        save_predictions(ds.labels.values, preds)
        archive = tmp_path / "a.json"
        front = tmp_path / "f.json"
        assert main([
            "optimize", "--data", str(data), "--predictions", str(preds), "--out", str(archive),
        ]) == 0
        assert main(["oracle", "--data", str(data), "--mode", "incremental", "--out", str(front)]) == 0
        assert main(["evaluate", "--archive", str(archive), "--reference", str(front)]) == 0
        out = capsys.readouterr().out
        assert "delta: NA" in out

    def test_front_document_round_trip(self, tmp_path):
        from llmroute import export_front, load_front, incremental_front

        ds = synth_instance(15, 3, seed=12)
        front = incremental_front(ds.cost_matrix(), ds.labels)
        path = tmp_path / "front.json"
        export_front(front, path)
        back = load_front(path)
        assert back.provenance == front.provenance
        assert back.points == front.points

    def test_nsga2_command(self, tmp_path):
        data = tmp_path / "data"
        assert main(["synth", "--n", "20", "--m", "2", "--seed", "9", "--out", str(data)]) == 0
        # hand-build a predictions file from the labels for a quick run
        ds = load_dataset_dir(data)
        preds = tmp_path / "preds.csv"
        save_predictions(ds.labels.values, preds)
        out = tmp_path / "ga.json"
        rc = main([
            "nsga2", "--data", str(data), "--predictions", str(preds),
            "--pop", "8", "--gens", "5", "--seed", "2", "--out", str(out),
        ])
        assert rc == 0
        _, doc = load_archive(out)
        assert doc["metadata"]["algorithm"] == "nsga2"
