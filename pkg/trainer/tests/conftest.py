from __future__ import annotations

import subprocess
import sys
from pathlib import Path

import pytest

AVBLEND = [sys.executable, "-m", "avblend.cli"]


def run_avblend(*argv: str) -> None:
    """Drive the data toolkit through its CLI (the component boundary)."""
    proc = subprocess.run([*AVBLEND, *map(str, argv)], capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"avblend {' '.join(map(str, argv))} failed:\n{proc.stderr}")


@pytest.fixture(scope="session")
def linear_corpus(tmp_path_factory) -> Path:
    """Small oracle-labeled corpus with train/val/test, via the pipeline CLI."""
    root = tmp_path_factory.mktemp("linear_corpus")
    run_avblend(
        "gen", "--subjects", 16, "--videos-per-subject", 2, "--len-min", 150, "--len-max", 250,
        "--seed", 3, "--out", root / "corpus",
    )
    run_avblend(
        "split", "--data", root / "corpus" / "manifest.json", "--ratios", "0.7,0.15,0.15",
        "--seed", 3, "--out", root / "split",
    )
    return root / "split" / "manifest.json"
