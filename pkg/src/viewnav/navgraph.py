"""Topological map, cross-modal goal scoring, and episode rollouts.

Nodes are visited positions or predicted ghost waypoints; each step the
agent renders a panorama, decodes waypoints into the graph, scores every
node against the instruction via cross-modal attention, and moves straight
toward the selected node (motion truncates at obstacle boundaries). The
stop action is selecting the current node.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .autodiff import (
    Tensor,
    attention_block,
    cross_entropy,
    linear,
    reshape,
    stack,
    tanh,
    tmean,
)
from .policy import (
    contrast_features,
    encode_observation,
    encode_instruction_tokens,
    task_features,
)
from .simworld.geodesic import distance_field_from
from .simworld.render import render_panorama
from .simworld.types import Pose
from .simworld.worldgen import obstacle_rects
from .waypointnet import WaypointSource, nms_waypoints, predict_heatmap, select_waypoint_source

GHOST_MERGE_RADIUS = 0.5  # m; waypoint localization threshold
VISITED_MERGE_RADIUS = 0.25
MAX_STEPS = 15
_MOVE_BACKOFF = 1e-3  # m pulled back from an obstacle on truncation
HEADS = 4


@dataclass
class Node:
    node_id: int
    kind: str  # "visited" | "ghost"
    position: np.ndarray
    feature: object  # Tensor [model_dim]
    visit_step: int
    merge_count: int = 1


class TopoGraph:
    def __init__(self):
        self.nodes = {}
        self.edges = set()
        self.current_node = None
        self._next_id = 0

    def alive(self):
        return [self.nodes[i] for i in sorted(self.nodes)]

    def add_node(self, kind, position, feature, step):
        nid = self._next_id
        self._next_id += 1
        self.nodes[nid] = Node(nid, kind, np.asarray(position, dtype=float), feature, step)
        return nid

    def add_edge(self, a, b):
        if a != b:
            self.edges.add((min(a, b), max(a, b)))

    def remove_node(self, nid):
        del self.nodes[nid]
        self.edges = {e for e in self.edges if nid not in e}

    def nearest(self, position, kind, exclude=()):
        """(node, distance) of the closest alive node of ``kind``; ties by
        lowest id."""
        best = None
        best_d = math.inf
        for node in self.alive():
            if node.kind != kind or node.node_id in exclude:
                continue
            d = math.hypot(node.position[0] - position[0], node.position[1] - position[1])
            if d < best_d:
                best, best_d = node, d
        return best, best_d


def update_graph(g, agent, waypoints, wp_features, step, current_feature):
    """Fold the agent position and decoded waypoints into the graph.

    The current position becomes (or refreshes) a visited node. Each
    waypoint within GHOST_MERGE_RADIUS of an existing ghost is averaged into
    it (running mean of position and feature); otherwise it becomes a new
    ghost edged to the current node.
    """
    ensure_visited(g, (agent.x, agent.y), step, current_feature, refresh=True)
    for wp, feat in zip(waypoints, wp_features):
        bearing = math.radians(agent.heading + wp.angle_deg)
        pos = (
            agent.x + wp.distance_m * math.cos(bearing),
            agent.y + wp.distance_m * math.sin(bearing),
        )
        ghost, d = g.nearest(pos, "ghost")
        if ghost is not None and d < GHOST_MERGE_RADIUS:
            c = ghost.merge_count
            ghost.position = (ghost.position * c + np.asarray(pos)) / (c + 1)
            ghost.feature = (ghost.feature * float(c) + feat) * (1.0 / (c + 1))
            ghost.merge_count = c + 1
            g.add_edge(g.current_node, ghost.node_id)
        else:
            nid = g.add_node("ghost", pos, feat, step)
            g.add_edge(g.current_node, nid)
    return g


def ensure_visited(g, position, step, feature, refresh=False):
    """Merge-or-create a visited node at ``position`` and make it current."""
    node, d = g.nearest(position, "visited")
    if node is not None and d < VISITED_MERGE_RADIUS:
        node.visit_step = step
        if refresh and feature is not None:
            node.feature = feature
        if g.current_node is not None:
            g.add_edge(g.current_node, node.node_id)
        g.current_node = node.node_id
        return node.node_id
    prev = g.current_node
    nid = g.add_node("visited", position, feature, step)
    if prev is not None:
        g.add_edge(prev, nid)
    g.current_node = nid
    return nid


# fixed sinusoidal encodings: distances over geometric wavelengths, bearings
# over integer harmonics
_DIST_FREQS = 2.0 * math.pi / (0.5 * 2.0 ** np.arange(8))
_BEARING_HARMONICS = np.arange(1, 9)


def pose_encoding(distance, bearing_deg):
    """[32] sinusoidal encoding of a relative polar coordinate."""
    b = math.radians(bearing_deg)
    return np.concatenate(
        [
            np.sin(distance * _DIST_FREQS),
            np.cos(distance * _DIST_FREQS),
            np.sin(b * _BEARING_HARMONICS),
            np.cos(b * _BEARING_HARMONICS),
        ]
    )


_ENC_RNG = np.random.default_rng(0xFEC)
_RECENCY_TABLE = _ENC_RNG.normal(size=(MAX_STEPS + 1, 64)) * 0.3
_KIND_TABLE = {"visited": _ENC_RNG.normal(size=64) * 0.3,
               "ghost": _ENC_RNG.normal(size=64) * 0.3}


def node_context_encoding(node, agent, start_pos, step):
    """Fixed (non-trainable) additive context for one node."""
    dxa = node.position[0] - agent.x
    dya = node.position[1] - agent.y
    enc_agent = pose_encoding(
        math.hypot(dxa, dya), math.degrees(math.atan2(dya, dxa)) - agent.heading
    )
    dxs = node.position[0] - start_pos[0]
    dys = node.position[1] - start_pos[1]
    enc_start = pose_encoding(
        math.hypot(dxs, dys), math.degrees(math.atan2(dys, dxs)) - agent.heading
    )
    recency = _RECENCY_TABLE[min(step - node.visit_step, MAX_STEPS)]
    return np.concatenate([enc_agent, enc_start]) + recency + _KIND_TABLE[node.kind]


def encode_nodes(g, agent, step):
    """[n_nodes, 64] node embeddings: stored features plus pose/recency/kind
    context. Node order is ascending id."""
    nodes = g.alive()
    if not nodes:
        raise ValueError("cannot encode an empty graph")
    start_pos = nodes[0].position
    rows = [
        node.feature + Tensor(node_context_encoding(node, agent, start_pos, step))
        for node in nodes
    ]
    return stack(rows)


def cmga(x, wc, params, heads=HEADS):
    """Cross-modal graph attention: nodes query instruction tokens."""
    for i in range(2):
        x = attention_block(x, wc, params, f"cmga.{i}", heads)
    return x


def goal_scores(node_embeddings, params):
    h = tanh(linear(node_embeddings, params["ffn.w1"], params["ffn.b1"]))
    return reshape(linear(h, params["ffn.w2"], params["ffn.b2"]), (-1,))


def select_goal(scores):
    """Argmax index; ties break to the lowest index."""
    data = scores.data if isinstance(scores, Tensor) else np.asarray(scores)
    return int(np.argmax(data))


def nav_loss(scores, gt_index):
    return cross_entropy(reshape(scores, (1, -1)), [gt_index])


def gt_node_index(g, goal_field):
    """Teacher-forcing oracle: index (in id order) of the node geodesically
    nearest the goal; ties break to the lowest id."""
    nodes = g.alive()
    dists = [goal_field.meters_at(n.position[0], n.position[1]) for n in nodes]
    return int(np.argmin(dists))


def move_toward(world, agent, target):
    """Straight-line move truncated at the first obstacle/boundary contact.

    Returns (new_pose, reached_target).
    """
    dx = target[0] - agent.x
    dy = target[1] - agent.y
    length = math.hypot(dx, dy)
    if length < 1e-9:
        return agent, True
    t_wall = float(
        kernels.ray_wall_distance(
            agent.x,
            agent.y,
            np.array([dx]),
            np.array([dy]),
            obstacle_rects(world),
            world.half,
        )[0]
    )
    backoff = _MOVE_BACKOFF / length
    if t_wall <= 1.0:
        t = max(t_wall - backoff, 0.0)
        pose = Pose(agent.x + t * dx, agent.y + t * dy, agent.heading)
        return pose, False
    return Pose(target[0], target[1], agent.heading), True


@dataclass
class Trajectory:
    episode_id: str
    points: np.ndarray  # [P, 2], includes start and final position
    path_length: float
    stopped: bool


@dataclass
class RolloutResult:
    trajectory: Trajectory
    nav_losses: list = field(default_factory=list)
    distill_losses: list = field(default_factory=list)
    contrast_std: list = field(default_factory=list)
    contrast_var: list = field(default_factory=list)
    n_steps: int = 0


def _waypoint_slot(angle_deg):
    return int(round(angle_deg / 30.0)) % 12


def _finish(episode, points, stopped):
    pts = np.asarray(points)
    seg = np.diff(pts, axis=0)
    return Trajectory(
        episode_id=episode.episode_id,
        points=pts,
        path_length=float(np.hypot(seg[:, 0], seg[:, 1]).sum()) if len(pts) > 1 else 0.0,
        stopped=stopped,
    )


def _arrive(g, node_id, world, agent, target_node, reached, step):
    """Post-move bookkeeping: ghost conversion or removal."""
    if reached:
        node = g.nodes[node_id]
        node.kind = "visited"
        node.visit_step = step
        if g.current_node is not None:
            g.add_edge(g.current_node, node_id)
        g.current_node = node_id
    else:
        if target_node.kind == "ghost":
            g.remove_node(node_id)
        ensure_visited(g, (agent.x, agent.y), step, None)


def rollout(bundle, world, episode, offset, mode="eval", rng=None, max_steps=MAX_STEPS,
            vil_cfg=None, var_offset=None):
    """Run one episode.

    eval mode: deterministic greedy selection at the given fixed offset;
    returns a RolloutResult whose loss lists are empty.

    train mode: teacher forcing toward the oracle node, collecting per-step
    navigation losses. When ``var_offset`` is given (post-training), both a
    standard and a varied view are rendered each step: distillation losses
    and per-heading contrast feature pairs are collected, and the graph is
    built from feature/waypoint sources sampled with p1/p2.
    """
    train = mode == "train"
    p1 = vil_cfg.p1 if vil_cfg is not None else 0.0
    p2 = vil_cfg.p2 if vil_cfg is not None else 0.0
    agent = episode.start
    g = TopoGraph()
    wc = encode_instruction_tokens(bundle, episode.instruction)
    goal_field = distance_field_from(world, episode.goal) if train else None
    result = RolloutResult(trajectory=None)
    points = [(agent.x, agent.y)]
    stopped = False

    for step in range(max_steps):
        obs_std = render_panorama(world, agent, offset, dim=bundle.obs_dim)
        f_std = encode_observation(bundle, obs_std)
        dual = train and var_offset is not None
        if dual:
            obs_var = render_panorama(world, agent, var_offset, dim=bundle.obs_dim)
            f_var = encode_observation(bundle, obs_var)
            result.contrast_std.append(contrast_features(bundle, f_std))
            result.contrast_var.append(contrast_features(bundle, f_var))
            result.distill_losses.append(
                _distill_step(bundle, obs_std, obs_var)
            )
            use_std = rng.random() < p1
            f_task = task_features(bundle, f_std if use_std else f_var)
            src = select_waypoint_source(p2, rng)
            if src is WaypointSource.TEACHER:
                heatmap = predict_heatmap(bundle.params, obs_std, prefix="teacher.")
            else:
                heatmap = predict_heatmap(bundle.params, obs_var, prefix="student.")
        else:
            f_task = task_features(bundle, f_std)
            heatmap = predict_heatmap(
                bundle.params, obs_std, prefix=bundle.eval_predictor_prefix
            )
        waypoints = nms_waypoints(heatmap)
        wp_feats = [f_task[_waypoint_slot(wp.angle_deg)] for wp in waypoints]
        update_graph(g, agent, waypoints, wp_feats, step, tmean(f_task, axis=0))

        x = encode_nodes(g, agent, step)
        scores = goal_scores(cmga(x, wc, bundle.params), bundle.params)
        nodes = g.alive()
        if train:
            target_idx = gt_node_index(g, goal_field)
            result.nav_losses.append(nav_loss(scores, target_idx))
        else:
            target_idx = select_goal(scores)
        target = nodes[target_idx]
        result.n_steps = step + 1
        if target.node_id == g.current_node:
            stopped = True
            break
        agent, reached = move_toward(world, agent, target.position)
        points.append((agent.x, agent.y))
        _arrive(g, target.node_id, world, agent, target, reached, step + 1)

    result.trajectory = _finish(episode, points, stopped)
    return result


def _distill_step(bundle, obs_std, obs_var):
    from .autodiff import kl_divergence

    t_logits = reshape(predict_heatmap(bundle.params, obs_std, prefix="teacher."), (-1,))
    s_logits = reshape(predict_heatmap(bundle.params, obs_var, prefix="student."), (-1,))
    return kl_divergence(t_logits, s_logits)


def rollout_eval(bundle, world, episode, offset, max_steps=MAX_STEPS):
    """Deterministic greedy rollout; returns the Trajectory only."""
    return rollout(bundle, world, episode, offset, mode="eval", max_steps=max_steps).trajectory
