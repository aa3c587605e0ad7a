import json
from pathlib import Path

import pytest

from aidisrupt import cli

MINICORPUS = Path(__file__).resolve().parent.parent / "data" / "minicorpus"
CONFIG = MINICORPUS / "config.ini"

EXPECTED_FILES = {
    "scores.csv",
    "ai_patents.csv",
    "matches.csv",
    "classify.json",
    "network.csv",
    "partition.csv",
    "network_meta.json",
    "sample.csv",
    "annotations.csv",
    "annotate_report.json",
    "consensus.csv",
    "agreement.json",
    "zscores.csv",
    "industry.csv",
    "states.csv",
    "exposure.csv",
    "plot_industry.json",
    "plot_states.json",
    "states_by_sector.json",
    "twoprop.csv",
    "correlations.json",
}


def run(args):
    return cli.main([str(a) for a in args])


def snapshot(out: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(out.iterdir())}


@pytest.fixture(scope="module")
def full_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("full")
    code = run(["--config", CONFIG, "--out", out, "run-all"])
    assert code == 0
    return out


def test_run_all_emits_every_declared_file(full_run):
    names = {p.name for p in full_run.iterdir()}
    assert EXPECTED_FILES <= names
    manifests = {n for n in names if n.endswith(".manifest.json")}
    assert len(manifests) == len(cli.STAGE_ORDER)


def test_run_all_byte_reproducible(full_run, tmp_path):
    out2 = tmp_path / "again"
    assert run(["--config", CONFIG, "--out", out2, "run-all"]) == 0
    assert snapshot(full_run) == snapshot(out2)


def test_run_all_equals_stage_composition(full_run, tmp_path):
    out2 = tmp_path / "staged"
    for stage in cli.STAGE_ORDER:
        assert run(["--config", CONFIG, "--out", out2, stage]) == 0
    assert snapshot(full_run) == snapshot(out2)


def test_rerunning_one_stage_is_byte_stable(full_run):
    before = snapshot(full_run)
    assert run(["--config", CONFIG, "--out", full_run, "classify"]) == 0
    assert run(["--config", CONFIG, "--out", full_run, "zscores"]) == 0
    assert snapshot(full_run) == before


def test_manifest_records_hashes_and_seed(full_run):
    doc = json.loads((full_run / "zscores.manifest.json").read_text())
    assert doc["stage"] == "zscores"
    assert doc["seed"] == 1729
    assert set(doc["inputs"]) == {"consensus.csv", "matches.csv"}
    assert all(len(h) == 64 for h in doc["inputs"].values())
    assert all(len(h) == 64 for h in doc["outputs"].values())


def test_missing_upstream_artifact_names_producer(tmp_path, capsys):
    out = tmp_path / "empty"
    code = run(["--config", CONFIG, "--out", out, "match"])
    assert code == 2
    err = capsys.readouterr().err
    assert "filter" in err


def test_zscores_n_iter_zero_is_config_error(full_run, capsys):
    code = run(["--config", CONFIG, "--out", full_run, "zscores", "--n-iter", "0"])
    assert code == 1
    assert "n_iter" in capsys.readouterr().err


def test_missing_config_is_config_error(tmp_path, capsys):
    code = run(["--config", tmp_path / "nope.ini", "--out", tmp_path, "score"])
    assert code == 1


def test_config_with_missing_path_fails_at_startup(tmp_path, capsys):
    cfg = tmp_path / "broken.ini"
    cfg.write_text("[paths]\npatents = nowhere.csv\n")
    code = run(["--config", cfg, "--out", tmp_path, "score"])
    assert code == 1
    assert "paths.patents" in capsys.readouterr().err


def test_usage_error_exits_one(capsys):
    assert cli.main(["--config"]) == 1


def test_seed_override_changes_null_draws(full_run, tmp_path):
    out2 = tmp_path / "seeded"
    out2.mkdir()
    for name in ("matches.csv", "consensus.csv"):
        (out2 / name).write_bytes((full_run / name).read_bytes())
    assert run(["--config", CONFIG, "--seed", "999", "--out", out2, "zscores"]) == 0
    assert (out2 / "zscores.csv").read_bytes() != (full_run / "zscores.csv").read_bytes()


def test_threads_do_not_change_outputs(full_run, tmp_path):
    out2 = tmp_path / "threaded"
    out2.mkdir()
    for name in ("matches.csv", "consensus.csv"):
        (out2 / name).write_bytes((full_run / name).read_bytes())
    assert run(["--config", CONFIG, "--threads", "4", "--out", out2, "zscores"]) == 0
    assert (out2 / "zscores.csv").read_bytes() == (full_run / "zscores.csv").read_bytes()


def test_scores_csv_schema(full_run):
    header = (full_run / "scores.csv").read_text().splitlines()[0]
    assert header == "patent_id,n_i,n_j,n_k,d,class"
    header = (full_run / "matches.csv").read_text().splitlines()[0]
    assert header == "task_id,best_patent_id,best_similarity,label"
    header = (full_run / "zscores.csv").read_text().splitlines()[0]
    assert header == "group,characteristic,value,observed,null_mean,null_std,z"
