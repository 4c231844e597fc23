import numpy as np
import pytest

from milchar.data import Bag, MilDataset
from milchar.synth import default_spec, generate


def make_dataset(name, groups, feature_dim=2):
    """groups: list of (bag_id, label, rows)."""
    bags = [Bag(b, np.asarray(rows, dtype=float).reshape(-1, feature_dim), y)
            for b, y, rows in groups]
    return MilDataset(name, tuple(bags), feature_dim)


@pytest.fixture(scope="session")
def gaussian1():
    return generate(default_spec("gaussian", 1))


@pytest.fixture(scope="session")
def concept1():
    return generate(default_spec("concept", 1))


@pytest.fixture
def tiny():
    rng = np.random.default_rng(0)
    groups = []
    for i in range(6):
        label = int(i < 3)
        rows = rng.normal(size=(3 + i % 2, 2)) + (3.0 if label else 0.0)
        groups.append((f"b{i}", label, rows))
    return make_dataset("tiny", groups)


def run_pipeline(root, jobs=1, seed=1, classifiers=None):
    """gen -> eval -> dist -> embed through the CLI entry point; returns file paths."""
    from milchar.cli import main

    root.mkdir(parents=True, exist_ok=True)
    data = root / "data"
    assert main(["gen", "--all", "--seed", str(seed), "--out", str(data)]) == 0
    csvs = sorted(str(p) for p in data.glob("*.csv"))
    cmd = ["eval", *csvs, "--seed", str(seed), "--jobs", str(jobs), "--out", str(root / "eval.tsv")]
    if classifiers:
        cmd += ["--classifiers", classifiers]
    assert main(cmd) == 0
    assert main(["dist", str(root / "eval.tsv"), *csvs, "--out", str(root / "dist")]) == 0
    assert main(["embed", str(root / "dist" / "d_roc.csv"), "--out", str(root / "emb.csv")]) == 0
    return {"root": root, "data": data, "csvs": csvs, "eval": root / "eval.tsv",
            "dist": root / "dist", "emb": root / "emb.csv"}


@pytest.fixture(scope="session")
def pipeline_full(tmp_path_factory):
    return run_pipeline(tmp_path_factory.mktemp("full-jobs1"), jobs=1)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
