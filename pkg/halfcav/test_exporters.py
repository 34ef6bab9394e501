import os
from types import SimpleNamespace

import numpy as np
import pandas as pd

from halfcav import exporters
from halfcav.memory_models import ComplexEnvelope, MirrorTrajectory, TimeGrid

COLUMNS = ["t", "xi_in_re", "xi_in_im", "xi_out_re", "xi_out_im", "gamma_z_w", "gamma_z_r", "l_over_lambda", "P"]


def _outcome(trajectory=None):
    grid = TimeGrid.from_step(-1.0, 0.5, 5)
    envelope = ComplexEnvelope(grid=grid, samples=np.linspace(0.0, 1.0, 5) + 0.5j)
    profile = SimpleNamespace(gamma_z=np.full(grid.n, 0.25))
    return SimpleNamespace(
        scenario=SimpleNamespace(grid=grid, midpoint=0.0, xi_in=envelope),
        write=SimpleNamespace(profile=profile),
        read=SimpleNamespace(xi_out=envelope, profile=profile),
        trajectory=trajectory,
        P=np.linspace(0.0, 0.5, 5),
    )


def test_timeseries_columns_are_fixed_without_a_mirror(tmp_path):
    frame = exporters.timeseries_frame(_outcome())
    assert list(frame.columns) == COLUMNS
    assert frame["l_over_lambda"].isna().all()

    path = exporters.write_frame(frame, os.path.join(tmp_path, "timeseries.csv"))
    loaded = pd.read_csv(path, float_precision="round_trip")
    assert list(loaded.columns) == COLUMNS
    assert loaded["l_over_lambda"].isna().all()
    assert np.array_equal(loaded["P"].to_numpy(), np.linspace(0.0, 0.5, 5))


def test_timeseries_carries_the_mirror_position():
    grid = TimeGrid.from_step(-1.0, 0.5, 5)
    trajectory = MirrorTrajectory(grid=grid, l=np.full(grid.n, 0.125), velocity=np.zeros(grid.n))
    frame = exporters.timeseries_frame(_outcome(trajectory))
    assert list(frame.columns) == COLUMNS
    assert np.all(frame["l_over_lambda"] == 0.125)
