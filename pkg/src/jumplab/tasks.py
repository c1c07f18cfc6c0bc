"""Jump task descriptions, learner configuration, and the task-file format.

Task files are YAML with explicit keys and SI units so experiment provenance
stays human-diffable.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .params import (GROUND_PRESETS, ForceBounds, GroundModel, Payload,
                     PhaseSchedule)


class TaskFileError(ValueError):
    """Task file cannot be parsed or validated; message names the field."""


@dataclass(frozen=True)
class BoxSpec:
    """Elevated landing platform: top height and the x of its vertical face."""

    height: float
    face_x: float


@dataclass(frozen=True)
class Tolerances:
    """Convergence tolerances on the terminal error (m, m, rad)."""

    x: float = 0.02
    z: float = 0.03
    theta: float = float(np.deg2rad(2.0))

    def satisfied(self, e_x: float, e_z: float, e_theta: float) -> bool:
        return abs(e_x) <= self.x and abs(e_z) <= self.z and abs(e_theta) <= self.theta


@dataclass(frozen=True)
class StageSchedule:
    """Trial budget of the first two learning stages; stage 3 is open-ended."""

    stage1_trials: int = 5
    stage2_trials: int = 5

    def stage_of(self, trial: int) -> int:
        """Stage id for a 0-based trial index."""
        if trial < self.stage1_trials:
            return 1
        if trial < self.stage1_trials + self.stage2_trials:
            return 2
        return 3


@dataclass(frozen=True)
class IlcWeights:
    """Diagonal error weight per sample (6) and input-offset weight per foot force (4)."""

    q_e: tuple[float, ...] = (1.0, 3.0, 3.0, 0.01, 0.01, 0.01)
    q_u: tuple[float, ...] = (1e-5, 1e-5, 1e-5, 1e-5)

    def q_e_diag(self) -> np.ndarray:
        return np.asarray(self.q_e, dtype=float)

    def q_u_diag(self) -> np.ndarray:
        return np.asarray(self.q_u, dtype=float)


@dataclass(frozen=True)
class JumpTask:
    """One jumping experiment: plant setup, target, and learner configuration."""

    task_id: str
    target: tuple[float, float, float]          # (x, z, theta) at sample N
    ground: GroundModel = field(default_factory=GroundModel)
    payload: Payload = field(default_factory=Payload)
    box: BoxSpec | None = None
    schedule: PhaseSchedule = field(default_factory=PhaseSchedule)
    learner: str = "proposed"                   # proposed | pd-ilc | ilc-mpc
    stages: StageSchedule = field(default_factory=StageSchedule)
    weights: IlcWeights = field(default_factory=IlcWeights)
    tolerances: Tolerances = field(default_factory=Tolerances)
    force_bounds: ForceBounds = field(default_factory=ForceBounds)
    max_trials: int = 25
    flight_error_model: str = "propagated"      # propagated | frozen
    transfer_source: str | None = None

    def with_payload(self, payload: Payload) -> "JumpTask":
        return dataclasses.replace(self, payload=payload)


LEARNERS = ("proposed", "pd-ilc", "ilc-mpc")


def _require(cond: bool, field_name: str, msg: str):
    if not cond:
        raise TaskFileError(f"field '{field_name}': {msg}")


def _get_number(d: dict, key: str, default=None, required=False):
    if key not in d:
        _require(not required, key, "missing required field")
        return default
    v = d[key]
    _require(isinstance(v, (int, float)) and np.isfinite(v), key,
             f"expected a finite number, got {v!r}")
    return float(v)


def task_from_dict(raw: dict, task_id: str = "task") -> JumpTask:
    _require(isinstance(raw, dict), "<root>", "task file must be a mapping")
    known = {"task", "target", "ground", "payload", "box", "schedule", "learner",
             "stages", "weights", "tolerances", "force_bounds", "max_trials",
             "flight_error_model", "transfer_source"}
    for key in raw:
        _require(key in known, key, "unknown field")

    tid = raw.get("task", task_id)
    _require(isinstance(tid, str) and tid, "task", "must be a non-empty string")

    tgt = raw.get("target")
    _require(isinstance(tgt, dict), "target", "must be a mapping with x, z, theta_deg")
    target = (_get_number(tgt, "x", required=True),
              _get_number(tgt, "z", required=True),
              float(np.deg2rad(_get_number(tgt, "theta_deg", 0.0))))

    g = raw.get("ground", "hard")
    if isinstance(g, str):
        _require(g in GROUND_PRESETS, "ground",
                 f"unknown preset {g!r}, expected one of {sorted(GROUND_PRESETS)}")
        ground = GROUND_PRESETS[g]
    else:
        _require(isinstance(g, dict), "ground", "must be a preset name or a mapping")
        ground = GroundModel(k_p=_get_number(g, "k_p", required=True),
                             k_d=_get_number(g, "k_d", required=True),
                             mu=_get_number(g, "mu", 0.6))

    p = raw.get("payload")
    if p is None:
        payload = Payload()
    else:
        _require(isinstance(p, dict), "payload", "must be a mapping")
        off = p.get("offset", [0.0, 0.0])
        _require(isinstance(off, (list, tuple)) and len(off) == 2, "payload.offset",
                 "must be a pair [x, z]")
        payload = Payload(mass=_get_number(p, "mass", 0.0),
                          offset=(float(off[0]), float(off[1])))

    b = raw.get("box")
    box = None
    if b is not None:
        _require(isinstance(b, dict), "box", "must be a mapping")
        box = BoxSpec(height=_get_number(b, "height", required=True),
                      face_x=_get_number(b, "face_x", required=True))

    s = raw.get("schedule", {})
    _require(isinstance(s, dict), "schedule", "must be a mapping")
    schedule = PhaseSchedule(n_dc=int(s.get("n_dc", 30)), n_sc=int(s.get("n_sc", 20)),
                             n_fl=int(s.get("n_fl", 40)),
                             dt=_get_number(s, "dt", 0.01))

    learner = raw.get("learner", "proposed")
    _require(learner in LEARNERS, "learner", f"expected one of {LEARNERS}")

    st = raw.get("stages", {})
    _require(isinstance(st, dict), "stages", "must be a mapping")
    stages = StageSchedule(stage1_trials=int(st.get("stage1", 5)),
                           stage2_trials=int(st.get("stage2", 5)))

    w = raw.get("weights", {})
    _require(isinstance(w, dict), "weights", "must be a mapping")
    q_e = w.get("q_e", [1.0, 3.0, 3.0, 0.01, 0.01, 0.01])
    _require(isinstance(q_e, (list, tuple)) and len(q_e) == 6, "weights.q_e",
             "must be a list of 6 numbers")
    q_u = w.get("q_u", 1e-5)
    if isinstance(q_u, (int, float)):
        q_u = [float(q_u)] * 4
    _require(isinstance(q_u, (list, tuple)) and len(q_u) == 4, "weights.q_u",
             "must be a number or a list of 4 numbers")
    weights = IlcWeights(q_e=tuple(float(v) for v in q_e),
                         q_u=tuple(float(v) for v in q_u))

    tol = raw.get("tolerances", {})
    _require(isinstance(tol, dict), "tolerances", "must be a mapping")
    tolerances = Tolerances(x=_get_number(tol, "x", 0.02),
                            z=_get_number(tol, "z", 0.03),
                            theta=float(np.deg2rad(_get_number(tol, "theta_deg", 2.0))))

    fb = raw.get("force_bounds", {})
    _require(isinstance(fb, dict), "force_bounds", "must be a mapping")
    force_bounds = ForceBounds(f_min=_get_number(fb, "f_min", 5.0),
                               f_max=_get_number(fb, "f_max", 250.0))

    max_trials = raw.get("max_trials", 25)
    _require(isinstance(max_trials, int) and max_trials >= 0, "max_trials",
             "must be a non-negative integer")

    fem = raw.get("flight_error_model", "propagated")
    _require(fem in ("propagated", "frozen"), "flight_error_model",
             "expected 'propagated' or 'frozen'")

    src = raw.get("transfer_source")
    _require(src is None or isinstance(src, str), "transfer_source",
             "must be a path string")

    return JumpTask(task_id=tid, target=target, ground=ground, payload=payload,
                    box=box, schedule=schedule, learner=learner, stages=stages,
                    weights=weights, tolerances=tolerances, force_bounds=force_bounds,
                    max_trials=max_trials, flight_error_model=fem,
                    transfer_source=src)


def load_task(path: str | Path) -> JumpTask:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise TaskFileError(f"field '<syntax>': {exc}") from exc
    return task_from_dict(raw, task_id=path.stem)


def task_to_dict(task: JumpTask) -> dict:
    return {
        "task": task.task_id,
        "target": {"x": task.target[0], "z": task.target[1],
                   "theta_deg": float(np.rad2deg(task.target[2]))},
        "ground": {"k_p": task.ground.k_p, "k_d": task.ground.k_d,
                   "mu": task.ground.mu},
        "payload": {"mass": task.payload.mass, "offset": list(task.payload.offset)},
        "box": None if task.box is None else {"height": task.box.height,
                                              "face_x": task.box.face_x},
        "schedule": {"n_dc": task.schedule.n_dc, "n_sc": task.schedule.n_sc,
                     "n_fl": task.schedule.n_fl, "dt": task.schedule.dt},
        "learner": task.learner,
        "stages": {"stage1": task.stages.stage1_trials,
                   "stage2": task.stages.stage2_trials},
        "weights": {"q_e": list(task.weights.q_e), "q_u": list(task.weights.q_u)},
        "tolerances": {"x": task.tolerances.x, "z": task.tolerances.z,
                       "theta_deg": float(np.rad2deg(task.tolerances.theta))},
        "force_bounds": {"f_min": task.force_bounds.f_min,
                         "f_max": task.force_bounds.f_max},
        "max_trials": task.max_trials,
        "flight_error_model": task.flight_error_model,
        "transfer_source": task.transfer_source,
    }


def save_task(task: JumpTask, path: str | Path):
    Path(path).write_text(yaml.safe_dump(task_to_dict(task), sort_keys=False))
