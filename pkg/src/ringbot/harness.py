"""Batch plumbing behind the command line: configs, episode batches, output files."""

from __future__ import annotations

import csv
import json
import logging
import threading
from contextlib import ExitStack
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from ringbot.errors import ConfigError, RingbotError
from ringbot.geometry import CameraIntrinsics, CameraMount, invert_intrinsics, load_calibration
from ringbot.link import JetsonEndpoint, file_pair, memory_pair, pipe_pair
from ringbot.policy import Gains, ObservationFeed, RemotePolicy, make_jetson_handler, make_policy
from ringbot.sim import Layout, SimConfig, run_episode
from ringbot.sim.runner import EpisodeLog
from ringbot.vision import PipelineConfig, localize_detections, run_pipeline
from ringbot.vision.imageio import read_color_image, read_depth, write_color_image, write_gray_image

log = logging.getLogger(__name__)

AGENTS = ("red", "blue")
COMPONENTS = ("ring", "pin", "goal", "position", "total")
METRICS_COLUMNS = (
    ["episode", "seed", "steps", "clock", "ended_by"]
    + [f"{a}_{c}" for a in AGENTS for c in COMPONENTS]
    + [f"{a}_rings_collected" for a in AGENTS]
)
STEP_COLUMNS = (
    ["step", "clock"]
    + [f"{a}_cumulative" for a in AGENTS]
    + [f"{a}_rings_held" for a in AGENTS]
)
TRANSPORTS = ("memory", "stdio", "file")
IMAGE_SUFFIXES = {".png", ".ppm", ".jpg", ".jpeg", ".bmp"}


@dataclass
class HarnessConfig:
    """Top-level run description; relative paths resolve against the config file."""

    sim_config: Optional[Path] = None
    pipeline_config: Optional[Path] = None
    calibration: Optional[Path] = None
    policy: str = "greedy"
    opponent: str = "zero"
    gains: Gains = field(default_factory=Gains)
    out: Path = Path("runs")
    seed: int = 0
    episodes: int = 1
    layout: Layout = Layout.SEEDED_RANDOM
    transport: str = "memory"

    def __post_init__(self):
        if self.episodes < 1:
            raise ConfigError(f"episodes must be >= 1, got {self.episodes}")
        if self.transport not in TRANSPORTS:
            raise ConfigError(f"transport must be one of {TRANSPORTS}, got {self.transport!r}")
        try:
            self.layout = Layout(self.layout)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        for name in ("sim_config", "pipeline_config", "calibration"):
            path = getattr(self, name)
            if path is not None and not Path(path).is_file():
                raise ConfigError(f"{name} file not found: {path}")

    @classmethod
    def from_dict(cls, data: dict, base: Path = Path(".")) -> "HarnessConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown harness keys: {sorted(unknown)}")
        data = dict(data)
        for name in ("sim_config", "pipeline_config", "calibration", "out"):
            if data.get(name) is not None:
                data[name] = base / data[name]
        if "gains" in data:
            try:
                data["gains"] = Gains(**data["gains"])
            except TypeError as exc:
                raise ConfigError(f"bad gains: {exc}") from exc
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "HarnessConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read harness config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"harness config {path} must be a JSON object")
        return cls.from_dict(data, path.parent)

    def sim(self) -> SimConfig:
        return SimConfig.load(self.sim_config) if self.sim_config else SimConfig()

    def pipeline(self) -> PipelineConfig:
        return PipelineConfig.load(self.pipeline_config) if self.pipeline_config else PipelineConfig()

    def camera(self) -> tuple[CameraIntrinsics, CameraMount]:
        if self.calibration is None:
            raise ConfigError("a calibration file is required to localize detections")
        return load_calibration(self.calibration)


# episodes


def episode_seed(cfg: HarnessConfig, episode: int) -> int:
    return cfg.seed + episode


def _policies(cfg: HarnessConfig, sim: SimConfig, episode: int):
    seed = episode_seed(cfg, episode)
    return [
        make_policy(name, seed=[seed, k], gains=cfg.gains, cfg=sim)
        for k, name in enumerate((cfg.policy, cfg.opponent))
    ]


def metrics_row(episode: int, log_: EpisodeLog) -> list:
    s = log_.summary
    row = [episode, s.seed, s.steps, repr(s.clock), s.ended_by]
    for t in s.totals:
        row += [repr(float(getattr(t, c))) for c in COMPONENTS]
    row += s.rings_collected
    return row


class EpisodeWriter:
    """Writes metrics.csv plus one JSON-lines log and one step CSV per episode."""

    def __init__(self, out: Path):
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.metrics_path = self.out / "metrics.csv"
        self._lock = threading.Lock()
        with open(self.metrics_path, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerow(METRICS_COLUMNS)

    def write(self, episode: int, log_: EpisodeLog) -> None:
        stem = self.out / f"episode_{episode:04d}"
        with open(stem.with_suffix(".jsonl"), "w") as fh:
            for line in log_.jsonl_lines():
                fh.write(line + "\n")
        with open(f"{stem}_steps.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(STEP_COLUMNS)
            for row in log_.metrics_rows():
                w.writerow([row[0], repr(row[1]), *map(repr, row[2:4]), *row[4:]])
        with self._lock, open(self.metrics_path, "a", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerow(metrics_row(episode, log_))


@dataclass
class BatchSummary:
    episodes: int
    mean_reward: list[float]
    mean_ring_reward: list[float]
    link_checks: list[str] = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [f"episodes: {self.episodes}"]
        for a, r, g in zip(AGENTS, self.mean_reward, self.mean_ring_reward):
            out.append(f"{a}: mean episode reward {r:.3f}, mean ring reward {g:.3f}")
        return out + self.link_checks


def _summarize(logs: list[EpisodeLog]) -> BatchSummary:
    n = len(logs)
    totals = [[lg.summary.totals[i] for lg in logs] for i in range(2)]
    return BatchSummary(
        episodes=n,
        mean_reward=[sum(t.total for t in ts) / n for ts in totals],
        mean_ring_reward=[sum(t.ring for t in ts) / n for ts in totals],
    )


def run_batch(cfg: HarnessConfig) -> BatchSummary:
    sim = cfg.sim()
    writer = EpisodeWriter(cfg.out)
    logs = []
    for ep in range(cfg.episodes):
        ep_sim = replace(sim, seed=episode_seed(cfg, ep))
        red, blue = _policies(cfg, ep_sim, ep)
        log_ = run_episode(ep_sim, red, blue, cfg.layout)
        writer.write(ep, log_)
        logs.append(log_)
    return _summarize(logs)


def _link_pair(kind: str, workdir: Path):
    if kind == "memory":
        return memory_pair()
    if kind == "stdio":
        return pipe_pair()
    workdir.mkdir(parents=True, exist_ok=True)
    return file_pair(workdir)


def run_loopback(cfg: HarnessConfig, timeout: float = 2.0) -> BatchSummary:
    """Like ``run_batch`` but every robot's policy answers over its own link.

    Each robot gets a brain/jetson pair on the configured transport with
    the jetson serving from a thread. After every episode the iterator
    counters on both ends must agree with the number of steps taken.
    """
    sim = cfg.sim()
    writer = EpisodeWriter(cfg.out)
    logs, checks = [], []
    for ep in range(cfg.episodes):
        ep_sim = replace(sim, seed=episode_seed(cfg, ep))
        with ExitStack() as stack:
            stop = threading.Event()
            remotes, jetsons, threads = [], [], []
            for k, inner in enumerate(_policies(cfg, ep_sim, ep)):
                brain_tx, jetson_tx = _link_pair(cfg.transport, cfg.out / "link" / f"episode_{ep:04d}_{AGENTS[k]}")
                stack.callback(brain_tx.close)
                stack.callback(jetson_tx.close)
                feed = ObservationFeed()
                jetson = JetsonEndpoint(jetson_tx, make_jetson_handler(inner, feed), timeout=0.05)
                thread = threading.Thread(target=jetson.serve, args=(stop,), daemon=True)
                remotes.append(RemotePolicy(brain_tx, feed, inner.needs_observation, timeout=timeout))
                jetsons.append(jetson)
                threads.append(thread)
            stack.callback(lambda: [t.join(5) for t in threads])
            stack.callback(stop.set)
            for t in threads:
                t.start()
            log_ = run_episode(ep_sim, remotes[0], remotes[1], cfg.layout)
        for k, (remote, jetson) in enumerate(zip(remotes, jetsons)):
            checks.append(_check_accounting(ep, AGENTS[k], log_.summary.steps, remote.state, jetson.state))
        writer.write(ep, log_)
        logs.append(log_)
    summary = _summarize(logs)
    summary.link_checks = checks
    return summary


def _check_accounting(ep, agent, steps, brain, jetson) -> str:
    expect = {
        "brain sent": (brain.sent, steps),
        "brain fresh": (brain.fresh, steps),
        "jetson fresh": (jetson.fresh, steps),
        "jetson sent": (jetson.sent, steps),
        "brain last iter": (brain.last_sent_iter, steps - 1),
        "jetson last seen": (jetson.last_seen_iter, steps - 1),
        "jetson failures": (jetson.failures, 0),
    }
    bad = [f"{k}={got} (expected {want})" for k, (got, want) in expect.items() if got != want]
    if bad:
        raise RingbotError(f"episode {ep} {agent} link accounting failed: {', '.join(bad)}")
    return f"episode {ep} {agent} link: {steps} request/response cycles, iters 0..{steps - 1} both ways"


# vision


def find_images(path: Path) -> list[Path]:
    path = Path(path)
    if path.is_dir():
        return sorted(p for p in path.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES and not _is_depth(p))
    if not path.exists():
        raise ConfigError(f"no such image or directory: {path}")
    return [path]


def _is_depth(p: Path) -> bool:
    return p.stem.endswith("_depth")


def depth_for(image: Path, depth_dir: Optional[Path] = None) -> Optional[Path]:
    """``<stem>.depth`` or ``<stem>_depth.png`` next to the image (or in ``depth_dir``)."""
    folder = depth_dir or image.parent
    for name in (f"{image.stem}.depth", f"{image.stem}_depth.png"):
        if (folder / name).is_file():
            return folder / name
    return None


def process_image(image: Path, pipeline: PipelineConfig, camera, depth_dir=None, debug_dir=None) -> dict:
    k, mount = camera
    inv = invert_intrinsics(k)
    img = read_color_image(image)
    depth_path = depth_for(image, depth_dir)
    depth = read_depth(depth_path) if depth_path else None
    result = run_pipeline(img, depth, pipeline)
    if debug_dir is not None:
        debug_dir.mkdir(parents=True, exist_ok=True)
        write_gray_image(debug_dir / f"{image.stem}_threshold.png", result.threshold)
        write_gray_image(debug_dir / f"{image.stem}_blur.png", result.blurred)
        write_color_image(debug_dir / f"{image.stem}_masked.png", result.masked)

    accepted_ids = {id(c) for c in result.accepted}
    candidates = [
        {"left": c.left, "top": c.top, "width": c.width, "height": c.height,
         "u": c.u, "v": c.v, "pixel_count": c.pixel_count,
         "accepted": id(c) in accepted_ids, "score": verdict.score}
        for c, verdict in zip(result.candidates, result.verdicts)
    ]
    detections = []
    if depth is None:
        detections = [{"u": c.u, "v": c.v, "depth": None, "position": None} for c in result.accepted]
    else:
        for point, i in localize_detections(result.detections, inv, mount):
            det = result.detections[i]
            detections.append({
                "u": det.u, "v": det.v, "depth": det.depth,
                "position": {"x": point.x, "z": point.z}, "distance": float(_norm(point)),
            })
    return {
        "image": str(image),
        "depth": str(depth_path) if depth_path else None,
        "depth_missing": depth is None,
        "width": int(img.shape[1]),
        "height": int(img.shape[0]),
        "candidates": candidates,
        "detections": detections,
        "dropped_no_depth": result.dropped_no_depth,
    }


def _norm(p) -> float:
    return (p.x * p.x + p.z * p.z) ** 0.5


def process_images(path: Path, cfg: HarnessConfig, depth_dir=None, debug_images=False) -> tuple[int, int]:
    """Write one JSON per image; returns (processed, failed)."""
    pipeline, camera = cfg.pipeline(), cfg.camera()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    debug_dir = out / "debug" if debug_images else None
    done = failed = 0
    for image in find_images(path):
        try:
            record = process_image(image, pipeline, camera, depth_dir, debug_dir)
            done += 1
        except (OSError, ValueError) as exc:
            log.error("%s: %s", image, exc)
            record = {"image": str(image), "error": str(exc)}
            failed += 1
        (out / f"{image.stem}.json").write_text(json.dumps(record, indent=2) + "\n")
    return done, failed
