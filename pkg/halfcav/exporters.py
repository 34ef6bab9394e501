"""CSV and JSON artifacts. Output is byte-identical for identical inputs: no timestamps."""
import json
import os

import numpy as np
import pandas as pd

from halfcav.memory_models import DecayProfile, MirrorTrajectory, TimeGrid

FLOAT_FORMAT = "%.17g"


def ensure_dir(out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)


def write_frame(frame: pd.DataFrame, path: str) -> str:
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def write_json(payload: dict, path: str) -> str:
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def timeseries_frame(outcome) -> pd.DataFrame:
    """Per-sample record of a store run, time measured from the storage midpoint."""
    scenario = outcome.scenario
    data = {
        "t": scenario.grid.times - scenario.midpoint,
        "xi_in_re": scenario.xi_in.samples.real,
        "xi_in_im": scenario.xi_in.samples.imag,
        "xi_out_re": outcome.read.xi_out.samples.real,
        "xi_out_im": outcome.read.xi_out.samples.imag,
        "gamma_z_w": outcome.write.profile.gamma_z,
        "gamma_z_r": outcome.read.profile.gamma_z,
    }
    # no node exists when gamma_prime > 0, so no mirror displacement either
    if outcome.trajectory is not None:
        data["l_over_lambda"] = outcome.trajectory.l
    else:
        data["l_over_lambda"] = np.full(scenario.grid.n, np.nan)
    data["P"] = outcome.P
    return pd.DataFrame(data)


def mirror_frame(profile: DecayProfile, trajectory: MirrorTrajectory, offset: float = 0.0) -> pd.DataFrame:
    return pd.DataFrame({
        "t": profile.grid.times - offset,
        "gamma_z": profile.gamma_z,
        "l_over_lambda": trajectory.l,
        "velocity": trajectory.velocity,
    })


def read_mirror_csv(path: str):
    """(trajectory, gamma_z column) from a mirror.csv written by mirror_frame."""
    frame = pd.read_csv(path, float_precision="round_trip")
    t = frame["t"].to_numpy()
    grid = TimeGrid(t_start=float(t[0]), t_end=float(t[-1]), n=len(t))
    trajectory = MirrorTrajectory(
        grid=grid,
        l=frame["l_over_lambda"].to_numpy(dtype=float),
        velocity=frame["velocity"].to_numpy(dtype=float),
    )
    return trajectory, np.asarray(frame["gamma_z"].to_numpy(dtype=float))
