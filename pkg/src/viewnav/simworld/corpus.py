"""Versioned structured-text serialization for worlds and episodes.

Line-oriented records; floats are written with repr (shortest round-trip)
so files are byte-identical across platforms for identical inputs.
"""

from dataclasses import dataclass, field

import numpy as np

from .types import Episode, Pose, WorldMap

FORMAT_NAME = "viewnav-corpus"
FORMAT_VERSION = 1


class CorpusFormatError(ValueError):
    pass


@dataclass
class Corpus:
    worlds: dict = field(default_factory=dict)  # seed -> WorldMap
    episodes: dict = field(default_factory=dict)  # split -> [Episode]

    def world_for(self, episode):
        return self.worlds[episode.world_id]


def _f(x):
    return repr(float(x))


def dump_corpus(corpus, path):
    lines = [f"{FORMAT_NAME} {FORMAT_VERSION}"]
    for seed in sorted(corpus.worlds):
        w = corpus.worlds[seed]
        lines.append(
            f"world {w.seed} {_f(w.extent)} {_f(w.resolution)} {len(w.obstacles)}"
        )
        for ox, oy, ow, oh in w.obstacles:
            lines.append(f"obstacle {_f(ox)} {_f(oy)} {_f(ow)} {_f(oh)}")
    for split in sorted(corpus.episodes):
        for ep in corpus.episodes[split]:
            lines.append(
                "episode "
                + " ".join(
                    [
                        split,
                        ep.episode_id,
                        str(ep.world_id),
                        _f(ep.start.x),
                        _f(ep.start.y),
                        _f(ep.start.heading),
                        _f(ep.goal[0]),
                        _f(ep.goal[1]),
                        _f(ep.gt_length),
                    ]
                )
            )
            lines.append(
                "path " + " ".join(_f(v) for v in np.asarray(ep.gt_path).reshape(-1))
            )
            lines.append(
                "instr "
                + str(ep.instruction.shape[0])
                + " "
                + " ".join(_f(v) for v in ep.instruction.reshape(-1))
            )
    text = "\n".join(lines) + "\n"
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def load_corpus(path):
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise CorpusFormatError("empty corpus file")
    head = lines[0].split()
    if head[0] != FORMAT_NAME or int(head[1]) != FORMAT_VERSION:
        raise CorpusFormatError(f"unrecognized corpus header: {lines[0]!r}")
    corpus = Corpus()
    i = 1
    pending_world = None
    pending_obstacles = []
    remaining = 0

    def flush_world():
        nonlocal pending_world
        if pending_world is not None:
            seed, extent, resolution = pending_world
            corpus.worlds[seed] = WorldMap(
                seed=seed,
                extent=extent,
                obstacles=tuple(pending_obstacles),
                resolution=resolution,
            )
            pending_world = None
            pending_obstacles.clear()

    while i < len(lines):
        parts = lines[i].split()
        tag = parts[0]
        if tag == "world":
            flush_world()
            pending_world = (int(parts[1]), float(parts[2]), float(parts[3]))
            remaining = int(parts[4])
        elif tag == "obstacle":
            if pending_world is None or remaining <= 0:
                raise CorpusFormatError(f"stray obstacle at line {i + 1}")
            pending_obstacles.append(tuple(float(v) for v in parts[1:5]))
            remaining -= 1
        elif tag == "episode":
            flush_world()
            split = parts[1]
            path_parts = lines[i + 1].split()
            instr_parts = lines[i + 2].split()
            if path_parts[0] != "path" or instr_parts[0] != "instr":
                raise CorpusFormatError(f"malformed episode at line {i + 1}")
            pts = np.array([float(v) for v in path_parts[1:]]).reshape(-1, 2)
            n_tokens = int(instr_parts[1])
            instr = np.array([float(v) for v in instr_parts[2:]]).reshape(n_tokens, -1)
            corpus.episodes.setdefault(split, []).append(
                Episode(
                    episode_id=parts[2],
                    world_id=int(parts[3]),
                    start=Pose(float(parts[4]), float(parts[5]), float(parts[6])),
                    goal=(float(parts[7]), float(parts[8])),
                    instruction=instr,
                    gt_path=pts,
                    gt_length=float(parts[9]),
                )
            )
            i += 2
        else:
            raise CorpusFormatError(f"unknown record {tag!r} at line {i + 1}")
        i += 1
    flush_world()
    return corpus
