import os
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from excseq import gallery
from excseq.core import ExcSeq

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

GOLDEN = ("four_step", "five_step", "six_step", "seven_step")


@pytest.fixture(params=GOLDEN)
def golden(request) -> tuple[str, ExcSeq]:
    return request.param, gallery.get(request.param)


@pytest.fixture
def seq_file(tmp_path):
    """Write a sequence document and return its path."""
    import json

    def write(doc, name="seq.json"):
        path = tmp_path / name
        path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
        return path

    return write


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        status, title = RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {title}")
