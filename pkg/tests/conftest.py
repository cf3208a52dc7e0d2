"""Shared fixtures."""

from itertools import combinations

import pytest

from app.config import get_settings
from app.models.schemas import DefectConfig
from app.services.export_service import ExportService


@pytest.fixture
def settings():
    return get_settings()


@pytest.fixture
def small_cap(monkeypatch, settings):
    """Shrink the oracle vertex cap so that AD_4 no longer fits."""
    monkeypatch.setattr(settings, "oracle_vertex_cap", 20)
    return settings


@pytest.fixture
def exporter(tmp_path):
    return ExportService(export_dir=str(tmp_path / "exports"))


@pytest.fixture
def dipole_pair_config():
    # [ox]_2 at the left end of AD_4
    return DefectConfig(n=2, holes=[1, 3], seps=[2, 4])


@pytest.fixture
def axis_configs():
    """Every configuration of AR_{2n,W} with at most max_defects defects on the axis."""
    def generate(n: int, max_defects: int):
        for k in range(max_defects + 1):
            for l in range(max_defects + 1 - k):  # noqa: E741
                width = 2 * n + k - l
                if width < 1 or k + l > width:
                    continue
                for labels in combinations(range(1, width + 1), k + l):
                    for holes in combinations(labels, k):
                        seps = [x for x in labels if x not in holes]
                        yield DefectConfig(n=n, holes=list(holes), seps=seps)
    return generate
