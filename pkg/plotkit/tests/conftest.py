import os
import sys

import pytest

_HERE = os.path.dirname(__file__)
sys.path.insert(0, os.path.join(_HERE, "..", "src"))
sys.path.insert(0, _HERE)

from synthdata import (  # noqa: E402
    write_pareto_csv,
    write_synthetic_trajectory,
    write_tunings_csv,
)


@pytest.fixture()
def synthetic_dir(tmp_path):
    write_synthetic_trajectory(tmp_path / "od-clf-cbf-qp.csv", seed=1)
    write_synthetic_trajectory(tmp_path / "pd-sat.csv", seed=2, with_decay=False)
    write_pareto_csv(tmp_path / "pareto.csv")
    write_tunings_csv(tmp_path / "tunings.csv")
    (tmp_path / "pareto_meta.json").write_text('{"u_max": 0.123}\n', encoding="utf-8")
    for i in range(3):
        write_synthetic_trajectory(tmp_path / f"mc_seed{i:03d}.csv", seed=10 + i)
    return tmp_path
