import os
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

from oc_coverage import synthetic  # noqa: E402
from oc_coverage.cli import main  # noqa: E402


def run_args(fx, out, *extra):
    return [
        "--iris-dir", str(fx.iris_dir), "--mapping", str(fx.mapping), "--meta-dump", str(fx.meta_dump),
        "--index-dump", str(fx.index_dump), "--out", str(out), *extra,
    ]


@pytest.fixture(autouse=True)
def pinned_clock(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")


@pytest.fixture(scope="session")
def fixture_run(tmp_path_factory):
    """The default synthetic fixture plus one complete run-all over it."""
    os.environ["SOURCE_DATE_EPOCH"] = "1700000000"
    root = tmp_path_factory.mktemp("fixture")
    fx = synthetic.generate(root)
    out = root / "out"
    assert main(["run-all", *run_args(fx, out)]) == 0
    return fx, out
